//! Flat `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, keys of the sub-models are
//! namespaced (`channel.sigma_los_db`, `mobility.ttt_ms`, ...). Keys that are
//! not recognised are rejected. [`echo`] renders a fully resolved config in
//! the same format, so any run can be reproduced from its manifest.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::channel::LosMode;
use crate::engine::SimConfig;
use crate::error::ConfigError;
use crate::mobility::ProcedureKind;
use crate::scenario::Point;

pub fn parse_config(path: &Path) -> Result<SimConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<SimConfig, ConfigError> {
    let mut cfg = SimConfig::default();
    let mut seen = HashSet::new();
    let mut start = (None, None);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            reason: format!("expected `key = value`, got `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Syntax {
                line: i + 1,
                reason: format!("duplicate key `{key}`"),
            });
        }
        match key {
            "scenario.ue_start_x_m" => start.0 = Some(num::<f64>(key, value)?),
            "scenario.ue_start_y_m" => start.1 = Some(num::<f64>(key, value)?),
            _ => apply(&mut cfg, key, value)?,
        }
    }
    cfg.scenario.ue_start = match start {
        (Some(x), Some(y)) => Some(Point::new(x, y)),
        (None, None) => None,
        _ => {
            return Err(ConfigError::invalid(
                "scenario.ue_start_x_m",
                "ue_start_x_m and ue_start_y_m must be given together",
            ))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| ConfigError::invalid(key, format!("`{value}`: {e}")))
}

fn flag(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::invalid(key, format!("`{value}` is not a boolean"))),
    }
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|v| num::<f64>(key, v.trim()))
        .collect()
}

fn apply(cfg: &mut SimConfig, key: &str, v: &str) -> Result<(), ConfigError> {
    let s = &mut cfg.scenario;
    let c = &mut cfg.channel;
    let m = &mut cfg.measure;
    let mo = &mut cfg.mobility;
    let r = &mut cfg.rlm;
    match key {
        "procedure" => {
            cfg.procedures = v
                .split(',')
                .map(|p| p.parse::<ProcedureKind>().map_err(|e| ConfigError::invalid(key, e)))
                .collect::<Result<_, _>>()?;
        }
        "duration_s" => cfg.duration_s = num(key, v)?,
        "n_ues" => cfg.n_ues = num(key, v)?,
        "n_drops" => cfg.n_drops = num(key, v)?,
        "base_seed" => cfg.base_seed = num(key, v)?,
        "ue_speed_kmh" => cfg.ue_speed_kmh = num(key, v)?,
        "ssb_period_ms" => cfg.ssb_period_ms = num(key, v)?,

        "scenario.n_sites" => s.n_sites = num(key, v)?,
        "scenario.inter_site_distance_m" => s.inter_site_distance_m = num(key, v)?,
        "scenario.sector_azimuths_deg" => s.sector_azimuths_deg = list(key, v)?,
        "scenario.tx_power_dbm" => s.tx_power_dbm = num(key, v)?,
        "scenario.bs_height_m" => s.bs_height_m = num(key, v)?,
        "scenario.ue_height_m" => s.ue_height_m = num(key, v)?,
        "scenario.ue_heading_deg" => s.ue_heading_deg = Some(num(key, v)?),
        "scenario.beam_azimuth_deg" => s.beams.azimuth_deg = list(key, v)?,
        "scenario.beam_elevation_deg" => s.beams.elevation_deg = list(key, v)?,
        "scenario.beamwidth_az_deg" => s.beams.beamwidth_az_deg = num(key, v)?,
        "scenario.beamwidth_el_deg" => s.beams.beamwidth_el_deg = num(key, v)?,
        "scenario.max_gain_dbi" => s.beams.max_gain_dbi = num(key, v)?,
        "scenario.front_to_back_db" => s.beams.front_to_back_db = num(key, v)?,

        "channel.carrier_ghz" => c.carrier_ghz = num(key, v)?,
        "channel.bandwidth_mhz" => c.bandwidth_mhz = num(key, v)?,
        "channel.noise_figure_db" => c.noise_figure_db = num(key, v)?,
        "channel.los_mode" => {
            c.los_mode = match v.to_ascii_lowercase().as_str() {
                "stochastic" => LosMode::Stochastic,
                "los" => LosMode::AlwaysLos,
                "nlos" => LosMode::AlwaysNlos,
                _ => return Err(ConfigError::invalid(key, "expected stochastic, los or nlos")),
            }
        }
        "channel.los_decorrelation_m" => c.los_decorrelation_m = num(key, v)?,
        "channel.shadowing" => c.shadowing_enabled = flag(key, v)?,
        "channel.sigma_los_db" => c.sigma_los_db = num(key, v)?,
        "channel.sigma_nlos_db" => c.sigma_nlos_db = num(key, v)?,
        "channel.shadow_decorrelation_m" => c.shadow_decorrelation_m = num(key, v)?,
        "channel.fading" => c.fading_enabled = flag(key, v)?,
        "channel.fading_std_db" => c.fading_std_db = num(key, v)?,
        "channel.fading_corr_ms" => c.fading_corr_ms = Some(num(key, v)?),
        "channel.fading_clip_db" => c.fading_clip_db = num(key, v)?,
        "channel.meas_error_std_db" => c.meas_error_std_db = num(key, v)?,
        "channel.interferer_load" => c.interferer_load = num(key, v)?,

        "measure.n_l1" => m.n_l1 = num(key, v)?,
        "measure.k_l3" => m.k_l3 = num(key, v)?,
        "measure.report_k" => m.report_k = num(key, v)?,
        "measure.report_period_ms" => m.report_period_ms = num(key, v)?,

        "mobility.prep_delay_ms" => mo.prep_delay_ms = Some(num(key, v)?),
        "mobility.interruption_ms" => mo.interruption_ms = Some(num(key, v)?),
        "mobility.ttt_ms" => mo.ttt_ms = Some(num(key, v)?),
        "mobility.o_prep_db" => mo.o_prep_db = Some(num(key, v)?),
        "mobility.o_exec_db" => mo.o_exec_db = Some(num(key, v)?),
        "mobility.max_prepared" => mo.max_prepared = Some(num(key, v)?),
        "mobility.k_l2" => mo.k_l2 = Some(num(key, v)?),
        "mobility.t_prep_ms" => mo.t_prep_ms = Some(num(key, v)?),
        "mobility.dynamic_switching" => mo.dynamic_switching = Some(flag(key, v)?),
        "mobility.ra_threshold_db" => mo.ra_threshold_db = Some(num(key, v)?),
        "mobility.ra_max_attempts" => mo.ra_max_attempts = Some(num(key, v)?),
        "mobility.ra_interval_ms" => mo.ra_interval_ms = Some(num(key, v)?),
        "mobility.reestablish_ms" => mo.reestablish_ms = Some(num(key, v)?),

        "rlm.n310" => r.n310 = num(key, v)?,
        "rlm.qout_db" => r.qout_db = num(key, v)?,
        "rlm.period_ms" => r.period_ms = num(key, v)?,

        _ => return Err(ConfigError::UnknownKey(key.to_string())),
    }
    Ok(())
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

/// Renders `cfg` as a config file that parses back to an equal value.
/// Per-procedure mobility defaults are only written when overridden.
pub fn echo(cfg: &SimConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    let procs: Vec<&str> = cfg.procedures.iter().map(|p| p.as_str()).collect();
    kv("procedure", procs.join(", "));
    kv("duration_s", cfg.duration_s.to_string());
    kv("n_ues", cfg.n_ues.to_string());
    kv("n_drops", cfg.n_drops.to_string());
    kv("base_seed", cfg.base_seed.to_string());
    kv("ue_speed_kmh", cfg.ue_speed_kmh.to_string());
    kv("ssb_period_ms", cfg.ssb_period_ms.to_string());

    let s = &cfg.scenario;
    kv("scenario.n_sites", s.n_sites.to_string());
    kv("scenario.inter_site_distance_m", s.inter_site_distance_m.to_string());
    kv("scenario.sector_azimuths_deg", join(&s.sector_azimuths_deg));
    kv("scenario.tx_power_dbm", s.tx_power_dbm.to_string());
    kv("scenario.bs_height_m", s.bs_height_m.to_string());
    kv("scenario.ue_height_m", s.ue_height_m.to_string());
    if let Some(p) = s.ue_start {
        kv("scenario.ue_start_x_m", p.x.to_string());
        kv("scenario.ue_start_y_m", p.y.to_string());
    }
    if let Some(h) = s.ue_heading_deg {
        kv("scenario.ue_heading_deg", h.to_string());
    }
    kv("scenario.beam_azimuth_deg", join(&s.beams.azimuth_deg));
    kv("scenario.beam_elevation_deg", join(&s.beams.elevation_deg));
    kv("scenario.beamwidth_az_deg", s.beams.beamwidth_az_deg.to_string());
    kv("scenario.beamwidth_el_deg", s.beams.beamwidth_el_deg.to_string());
    kv("scenario.max_gain_dbi", s.beams.max_gain_dbi.to_string());
    kv("scenario.front_to_back_db", s.beams.front_to_back_db.to_string());

    let c = &cfg.channel;
    kv("channel.carrier_ghz", c.carrier_ghz.to_string());
    kv("channel.bandwidth_mhz", c.bandwidth_mhz.to_string());
    kv("channel.noise_figure_db", c.noise_figure_db.to_string());
    let los = match c.los_mode {
        LosMode::Stochastic => "stochastic",
        LosMode::AlwaysLos => "los",
        LosMode::AlwaysNlos => "nlos",
    };
    kv("channel.los_mode", los.to_string());
    kv("channel.los_decorrelation_m", c.los_decorrelation_m.to_string());
    kv("channel.shadowing", c.shadowing_enabled.to_string());
    kv("channel.sigma_los_db", c.sigma_los_db.to_string());
    kv("channel.sigma_nlos_db", c.sigma_nlos_db.to_string());
    kv("channel.shadow_decorrelation_m", c.shadow_decorrelation_m.to_string());
    kv("channel.fading", c.fading_enabled.to_string());
    kv("channel.fading_std_db", c.fading_std_db.to_string());
    if let Some(t) = c.fading_corr_ms {
        kv("channel.fading_corr_ms", t.to_string());
    }
    kv("channel.fading_clip_db", c.fading_clip_db.to_string());
    kv("channel.meas_error_std_db", c.meas_error_std_db.to_string());
    kv("channel.interferer_load", c.interferer_load.to_string());

    let m = &cfg.measure;
    kv("measure.n_l1", m.n_l1.to_string());
    kv("measure.k_l3", m.k_l3.to_string());
    kv("measure.report_k", m.report_k.to_string());
    kv("measure.report_period_ms", m.report_period_ms.to_string());

    let mo = &cfg.mobility;
    let mut opt = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            kv(k, v);
        }
    };
    opt("mobility.prep_delay_ms", mo.prep_delay_ms.map(|v| v.to_string()));
    opt("mobility.interruption_ms", mo.interruption_ms.map(|v| v.to_string()));
    opt("mobility.ttt_ms", mo.ttt_ms.map(|v| v.to_string()));
    opt("mobility.o_prep_db", mo.o_prep_db.map(|v| v.to_string()));
    opt("mobility.o_exec_db", mo.o_exec_db.map(|v| v.to_string()));
    opt("mobility.max_prepared", mo.max_prepared.map(|v| v.to_string()));
    opt("mobility.k_l2", mo.k_l2.map(|v| v.to_string()));
    opt("mobility.t_prep_ms", mo.t_prep_ms.map(|v| v.to_string()));
    opt("mobility.dynamic_switching", mo.dynamic_switching.map(|v| v.to_string()));
    opt("mobility.ra_threshold_db", mo.ra_threshold_db.map(|v| v.to_string()));
    opt("mobility.ra_max_attempts", mo.ra_max_attempts.map(|v| v.to_string()));
    opt("mobility.ra_interval_ms", mo.ra_interval_ms.map(|v| v.to_string()));
    opt("mobility.reestablish_ms", mo.reestablish_ms.map(|v| v.to_string()));

    let r = &cfg.rlm;
    kv("rlm.n310", r.n310.to_string());
    kv("rlm.qout_db", r.qout_db.to_string());
    kv("rlm.period_ms", r.period_ms.to_string());
    out
}
