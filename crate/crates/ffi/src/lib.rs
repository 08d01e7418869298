//! C ABI over the `mobsim` simulator.
//!
//! Configurations and results are opaque handles created and freed by this
//! library. Every fallible call returns a [`MobsimStatus`]; on failure the
//! message is kept per thread and read with [`mobsim_last_error`]. Panics
//! never cross the boundary.
//!
//! The C header is generated into `include/mobsim.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mobsim::config::{echo, parse_config, parse_config_str};
use mobsim::engine::{run_all, CampaignResult, SimConfig};
use mobsim::kpi::KpiRecord;
use mobsim::measure::alpha_from_k;
use mobsim::output::{write_outputs, RunManifest};
use mobsim::{ProcedureKind, SimError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MobsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    InvariantViolation = 4,
    Io = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MobsimProcedure {
    Bho = 0,
    Cho = 1,
    ChoL1 = 2,
    Llm = 3,
    LlmF = 4,
    LlmFDs = 5,
}

impl From<ProcedureKind> for MobsimProcedure {
    fn from(k: ProcedureKind) -> Self {
        match k {
            ProcedureKind::Bho => MobsimProcedure::Bho,
            ProcedureKind::Cho => MobsimProcedure::Cho,
            ProcedureKind::ChoL1 => MobsimProcedure::ChoL1,
            ProcedureKind::Llm => MobsimProcedure::Llm,
            ProcedureKind::LlmF => MobsimProcedure::LlmF,
            ProcedureKind::LlmFDs => MobsimProcedure::LlmFDs,
        }
    }
}

/// KPIs of one drop or, with `has_seed == false`, pooled over all drops.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobsimKpis {
    pub procedure: MobsimProcedure,
    pub has_seed: bool,
    pub seed: u64,
    pub n_drops: u32,
    pub rlp_per_ue_min: f64,
    pub hof_per_ue_min: f64,
    pub pp_per_ue_min: f64,
    pub reliability_pct: f64,
    pub prep_per_ue_min: f64,
    pub resource_reservation_pct: f64,
}

impl From<&KpiRecord> for MobsimKpis {
    fn from(k: &KpiRecord) -> Self {
        MobsimKpis {
            procedure: k.procedure.into(),
            has_seed: k.drop_seed.is_some(),
            seed: k.drop_seed.unwrap_or(0),
            n_drops: k.n_drops,
            rlp_per_ue_min: k.rlp_per_ue_min,
            hof_per_ue_min: k.hof_per_ue_min,
            pp_per_ue_min: k.pp_per_ue_min,
            reliability_pct: k.reliability_pct,
            prep_per_ue_min: k.prep_per_ue_min,
            resource_reservation_pct: k.resource_reservation_pct,
        }
    }
}

/// Opaque simulation configuration.
pub struct MobsimConfig {
    inner: SimConfig,
}

/// Opaque results of one run: a campaign per configured procedure.
pub struct MobsimResults {
    config: SimConfig,
    campaigns: Vec<CampaignResult>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(MobsimStatus, String);

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let status = match e {
            SimError::Config(_) => MobsimStatus::ConfigError,
            SimError::Measure(_) | SimError::Invariant(_) => MobsimStatus::InvariantViolation,
            SimError::Io(_) | SimError::Csv(_) | SimError::Json(_) => MobsimStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

impl From<mobsim::ConfigError> for Failure {
    fn from(e: mobsim::ConfigError) -> Self {
        Failure(MobsimStatus::ConfigError, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MobsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MobsimStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside mobsim");
            MobsimStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MobsimStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(MobsimStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mobsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mobsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Smoothing weight of a layer-3 filter with coefficient `k`.
#[no_mangle]
pub extern "C" fn mobsim_l3_alpha(k: f64) -> f64 {
    alpha_from_k(k)
}

/// Creates the default configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mobsim_config_new(out: *mut *mut MobsimConfig) -> MobsimStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(MobsimConfig {
            inner: SimConfig::default(),
        }));
        Ok(())
    })
}

/// Parses a `key = value` configuration text.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mobsim_config_parse(text: *const c_char, out: *mut *mut MobsimConfig) -> MobsimStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let out = out_arg(out, "out")?;
        let inner = parse_config_str(text)?;
        inner.validate()?;
        *out = Box::into_raw(Box::new(MobsimConfig { inner }));
        Ok(())
    })
}

/// Loads a configuration file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mobsim_config_load(path: *const c_char, out: *mut *mut MobsimConfig) -> MobsimStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let inner = parse_config(Path::new(path))?;
        inner.validate()?;
        *out = Box::into_raw(Box::new(MobsimConfig { inner }));
        Ok(())
    })
}

/// Overrides the campaign size.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mobsim_config_set_campaign(
    config: *mut MobsimConfig,
    n_ues: u32,
    n_drops: u32,
    duration_s: f64,
    base_seed: u64,
) -> MobsimStatus {
    guard(|| {
        let c = out_arg(config, "config")?;
        let mut next = c.inner.clone();
        next.n_ues = n_ues;
        next.n_drops = n_drops;
        next.duration_s = duration_s;
        next.base_seed = base_seed;
        next.validate()?;
        c.inner = next;
        Ok(())
    })
}

/// Renders the resolved configuration in config-file syntax. Free the
/// string with [`mobsim_string_free`].
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mobsim_config_echo(config: *const MobsimConfig, out: *mut *mut c_char) -> MobsimStatus {
    guard(|| {
        let c = ref_arg(config, "config")?;
        let out = out_arg(out, "out")?;
        *out = CString::new(echo(&c.inner)).unwrap_or_default().into_raw();
        Ok(())
    })
}

/// # Safety
/// `config` must be NULL or a handle from this library, freed only once.
#[no_mangle]
pub unsafe extern "C" fn mobsim_config_free(config: *mut MobsimConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed only once.
#[no_mangle]
pub unsafe extern "C" fn mobsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs every configured procedure over the configured seeds.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mobsim_run(config: *const MobsimConfig, out: *mut *mut MobsimResults) -> MobsimStatus {
    guard(|| {
        let c = ref_arg(config, "config")?;
        let out = out_arg(out, "out")?;
        let campaigns = run_all(&c.inner)?;
        *out = Box::into_raw(Box::new(MobsimResults {
            config: c.inner.clone(),
            campaigns,
        }));
        Ok(())
    })
}

/// Number of simulated procedures.
///
/// # Safety
/// `results` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mobsim_results_procedure_count(results: *const MobsimResults) -> usize {
    results.as_ref().map_or(0, |r| r.campaigns.len())
}

/// Number of drops per procedure.
///
/// # Safety
/// `results` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mobsim_results_drop_count(results: *const MobsimResults) -> usize {
    results.as_ref().map_or(0, |r| r.config.n_drops as usize)
}

unsafe fn campaign<'a>(results: *const MobsimResults, index: usize) -> Result<&'a CampaignResult, Failure> {
    let r = ref_arg(results, "results")?;
    r.campaigns.get(index).ok_or_else(|| {
        Failure(
            MobsimStatus::OutOfRange,
            format!("procedure index {index} out of range ({})", r.campaigns.len()),
        )
    })
}

/// Pooled KPIs of the `procedure_index`-th procedure.
///
/// # Safety
/// `results` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mobsim_results_pooled(
    results: *const MobsimResults,
    procedure_index: usize,
    out: *mut MobsimKpis,
) -> MobsimStatus {
    guard(|| {
        let c = campaign(results, procedure_index)?;
        *out_arg(out, "out")? = (&c.pooled).into();
        Ok(())
    })
}

/// KPIs of one drop.
///
/// # Safety
/// `results` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mobsim_results_drop(
    results: *const MobsimResults,
    procedure_index: usize,
    drop_index: usize,
    out: *mut MobsimKpis,
) -> MobsimStatus {
    guard(|| {
        let c = campaign(results, procedure_index)?;
        let d = c.drops.get(drop_index).ok_or_else(|| {
            Failure(MobsimStatus::OutOfRange, format!("drop index {drop_index} out of range"))
        })?;
        *out_arg(out, "out")? = (&d.kpi).into();
        Ok(())
    })
}

/// Writes the same output files as the command-line tool into `out_dir`.
///
/// # Safety
/// `results` must be a live handle; `out_dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mobsim_results_write(
    results: *const MobsimResults,
    out_dir: *const c_char,
    emit_events: bool,
) -> MobsimStatus {
    guard(|| {
        let r = ref_arg(results, "results")?;
        let dir = Path::new(str_arg(out_dir, "out_dir")?);
        let manifest = RunManifest::new(None, dir.to_path_buf(), r.config.clone());
        write_outputs(dir, &manifest, &r.campaigns, emit_events)?;
        Ok(())
    })
}

/// # Safety
/// `results` must be NULL or a handle from this library, freed only once.
#[no_mangle]
pub unsafe extern "C" fn mobsim_results_free(results: *mut MobsimResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}
