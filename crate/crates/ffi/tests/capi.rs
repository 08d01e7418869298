//! Exercises the C ABI through its exported functions.

use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use mobsim_ffi::*;

fn last_error() -> String {
    let p = mobsim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> (MobsimStatus, *mut MobsimConfig) {
    let text = CString::new(text).unwrap();
    let mut cfg = ptr::null_mut();
    let status = unsafe { mobsim_config_parse(text.as_ptr(), &mut cfg) };
    (status, cfg)
}

#[test]
fn alpha_and_version() {
    assert_eq!(mobsim_l3_alpha(0.0), 1.0);
    assert!((mobsim_l3_alpha(4.0) - 0.5).abs() < 1e-15);
    let v = unsafe { CStr::from_ptr(mobsim_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn run_and_read_kpis() {
    let (status, cfg) = parse("procedure = CHO, LLM_F_DS\nchannel.los_mode = stochastic\n");
    assert_eq!(status, MobsimStatus::Ok);
    unsafe {
        assert_eq!(mobsim_config_set_campaign(cfg, 5, 2, 2.0, 40), MobsimStatus::Ok);
        let mut res = ptr::null_mut();
        assert_eq!(mobsim_run(cfg, &mut res), MobsimStatus::Ok);
        assert_eq!(mobsim_results_procedure_count(res), 2);
        assert_eq!(mobsim_results_drop_count(res), 2);

        let mut k = std::mem::MaybeUninit::<MobsimKpis>::uninit();
        assert_eq!(mobsim_results_pooled(res, 1, k.as_mut_ptr()), MobsimStatus::Ok);
        let pooled = k.assume_init();
        assert_eq!(pooled.procedure, MobsimProcedure::LlmFDs);
        assert!(!pooled.has_seed);
        assert_eq!(pooled.n_drops, 2);
        assert!((0.0..=100.0).contains(&pooled.reliability_pct));

        assert_eq!(mobsim_results_drop(res, 0, 1, k.as_mut_ptr()), MobsimStatus::Ok);
        let d = k.assume_init();
        assert_eq!((d.procedure, d.has_seed, d.seed), (MobsimProcedure::Cho, true, 41));

        assert_eq!(mobsim_results_pooled(res, 2, k.as_mut_ptr()), MobsimStatus::OutOfRange);
        assert!(last_error().contains("out of range"));
        assert_eq!(mobsim_results_drop(res, 0, 2, k.as_mut_ptr()), MobsimStatus::OutOfRange);

        let dir = tempfile::tempdir().unwrap();
        let out = CString::new(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(mobsim_results_write(res, out.as_ptr(), false), MobsimStatus::Ok);
        let kpis = mobsim::output::read_kpis_csv(&dir.path().join("kpis.csv")).unwrap();
        assert_eq!(kpis.len(), 4);
        assert_eq!(kpis[1].seed, Some(41));

        mobsim_results_free(res);
        mobsim_config_free(cfg);
    }
}

#[test]
fn echo_round_trips_through_parse() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(mobsim_config_new(&mut cfg), MobsimStatus::Ok);
        let mut text: *mut c_char = ptr::null_mut();
        assert_eq!(mobsim_config_echo(cfg, &mut text), MobsimStatus::Ok);
        let s = CStr::from_ptr(text).to_str().unwrap().to_owned();
        mobsim_string_free(text);
        assert!(s.contains("n_ues = "));
        let (status, again) = parse(&s);
        assert_eq!(status, MobsimStatus::Ok);
        mobsim_config_free(again);
        mobsim_config_free(cfg);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let (status, cfg) = parse("channel.bogus = 1\n");
    assert_eq!(status, MobsimStatus::ConfigError);
    assert!(cfg.is_null());
    assert!(last_error().contains("channel.bogus"));

    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(mobsim_config_parse(ptr::null(), &mut out), MobsimStatus::NullPointer);
        let bad = [0xffu8 as c_char, 0];
        assert_eq!(mobsim_config_parse(bad.as_ptr(), &mut out), MobsimStatus::InvalidUtf8);
        let missing = CString::new("/nonexistent/x.conf").unwrap();
        assert_eq!(mobsim_config_load(missing.as_ptr(), &mut out), MobsimStatus::ConfigError);
        assert_eq!(mobsim_run(ptr::null(), &mut ptr::null_mut()), MobsimStatus::NullPointer);

        assert_eq!(mobsim_config_new(&mut out), MobsimStatus::Ok);
        let echo = |cfg| {
            let mut text = ptr::null_mut();
            assert_eq!(mobsim_config_echo(cfg, &mut text), MobsimStatus::Ok);
            let s = CStr::from_ptr(text).to_str().unwrap().to_owned();
            mobsim_string_free(text);
            s
        };
        let before = echo(out);
        assert_eq!(mobsim_config_set_campaign(out, 0, 1, 1.0, 0), MobsimStatus::ConfigError);
        assert!(last_error().contains("n_ues"), "{}", last_error());
        // A rejected update leaves the handle unchanged.
        assert_eq!(echo(out), before);
        mobsim_config_free(out);

        assert_eq!(mobsim_results_procedure_count(ptr::null()), 0);
        mobsim_config_free(ptr::null_mut());
        mobsim_results_free(ptr::null_mut());
        mobsim_string_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_per_thread() {
    let (status, _) = parse("nope\n");
    assert_eq!(status, MobsimStatus::ConfigError);
    let here = last_error();
    let there = std::thread::spawn(|| mobsim_last_error().is_null()).join().unwrap();
    assert!(there);
    assert_eq!(last_error(), here);
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/mobsim.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["mobsim_run", "mobsim_results_pooled", "mobsim_last_error", "mobsim_l3_alpha", "typedef struct MobsimConfig MobsimConfig"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping compile check");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "mobsim.h"
int main(void) {
    MobsimConfig *cfg = NULL;
    MobsimResults *res = NULL;
    MobsimKpis k;
    if (mobsim_config_new(&cfg) != MOBSIM_STATUS_OK) return 1;
    if (mobsim_run(cfg, &res) != MOBSIM_STATUS_OK) return 2;
    mobsim_results_pooled(res, 0, &k);
    mobsim_results_free(res);
    mobsim_config_free(cfg);
    return k.procedure == MOBSIM_PROCEDURE_LLM_F_DS && mobsim_l3_alpha(4.0) > 0.0;
}
"#,
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
