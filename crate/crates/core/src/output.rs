//! Output files of a run.
//!
//! | file                          | content                                        |
//! |-------------------------------|------------------------------------------------|
//! | `kpis.csv`                    | one KPI row per (procedure, drop)              |
//! | `kpis_pooled.csv`             | one pooled KPI row per procedure (empty seed)  |
//! | `reservations.csv`            | every reservation interval                     |
//! | `rr_cdf-<PROC>.csv`           | reservation-duration CDF of the LLM variants   |
//! | `events-<PROC>-<seed>.jsonl`  | event log of one drop (optional)               |
//! | `manifest.txt`                | resolved config; re-runs the same campaign     |
//! | `summary.txt`                 | pooled KPI table                               |

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::echo;
use crate::engine::{run_all, CampaignResult, SimConfig};
use crate::error::SimError;
use crate::kpi::{reservation_cdf, KpiRow};
use crate::mobility::ProcedureKind;
use crate::rlm::MobilityEvent;
use crate::scenario::{CellId, UeId};

/// One line of `reservations.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReservationRow {
    pub procedure: ProcedureKind,
    pub seed: u64,
    pub ue_id: UeId,
    pub cell_id: CellId,
    pub start_ms: u64,
    pub end_ms: u64,
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), SimError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, SimError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(SimError::from)).collect()
}

pub fn write_kpis_csv(path: &Path, rows: &[KpiRow]) -> Result<(), SimError> {
    write_csv(path, rows)
}

pub fn read_kpis_csv(path: &Path) -> Result<Vec<KpiRow>, SimError> {
    read_csv(path)
}

pub fn write_reservations_csv(path: &Path, rows: &[ReservationRow]) -> Result<(), SimError> {
    write_csv(path, rows)
}

pub fn read_reservations_csv(path: &Path) -> Result<Vec<ReservationRow>, SimError> {
    read_csv(path)
}

pub fn write_events_jsonl(path: &Path, events: &[MobilityEvent]) -> Result<(), SimError> {
    let mut w = BufWriter::new(File::create(path)?);
    for e in events {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_events_jsonl(path: &Path) -> Result<Vec<MobilityEvent>, SimError> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

pub fn events_file_name(procedure: ProcedureKind, seed: u64) -> String {
    format!("events-{procedure}-{seed}.jsonl")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub config: SimConfig,
}

impl RunManifest {
    pub fn new(config_path: Option<PathBuf>, out_dir: PathBuf, config: SimConfig) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            config_path,
            out_dir,
            timestamp,
            config,
        }
    }

    /// The manifest is itself a config file: metadata lives in comments.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# mobsim run manifest");
        let _ = writeln!(out, "# timestamp_unix = {}", self.timestamp);
        if let Some(p) = &self.config_path {
            let _ = writeln!(out, "# config = {}", p.display());
        }
        let _ = writeln!(out, "# out = {}", self.out_dir.display());
        out.push_str(&echo(&self.config));
        out
    }
}

/// Pooled KPI table, one row per procedure.
pub fn summary_table(results: &[CampaignResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>8} {:>12}",
        "procedure", "drops", "RLP/UE/min", "HOF/UE/min", "PP/UE/min", "reliab_%", "prep/UE/min", "rr_%", "rr_p95_ms"
    );
    for r in results {
        let k = &r.pooled;
        let p95 = r
            .drops
            .iter()
            .flat_map(|d| d.intervals.iter().copied())
            .collect::<Vec<_>>();
        let p95 = reservation_cdf(&p95)
            .map(|c| format!("{:.0}", c.percentile(0.95)))
            .unwrap_or_else(|_| "-".into());
        let _ = writeln!(
            out,
            "{:<10} {:>6} {:>10.4} {:>10.4} {:>10.4} {:>10.3} {:>10.3} {:>8.3} {:>12}",
            r.procedure.as_str(),
            k.n_drops,
            k.rlp_per_ue_min,
            k.hof_per_ue_min,
            k.pp_per_ue_min,
            k.reliability_pct,
            k.prep_per_ue_min,
            k.resource_reservation_pct,
            p95
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct CdfPoint {
    duration_ms: f64,
    cdf: f64,
}

/// Writes every output file for already computed campaigns.
pub fn write_outputs(
    out_dir: &Path,
    manifest: &RunManifest,
    results: &[CampaignResult],
    emit_events: bool,
) -> Result<(), SimError> {
    std::fs::create_dir_all(out_dir)?;
    let rows: Vec<KpiRow> = results
        .iter()
        .flat_map(|r| r.drops.iter().map(|d| d.kpi.row()))
        .collect();
    write_kpis_csv(&out_dir.join("kpis.csv"), &rows)?;
    let pooled: Vec<KpiRow> = results.iter().map(|r| r.pooled.row()).collect();
    write_kpis_csv(&out_dir.join("kpis_pooled.csv"), &pooled)?;

    let reservations: Vec<ReservationRow> = results
        .iter()
        .flat_map(|r| r.drops.iter())
        .flat_map(|d| {
            d.intervals.iter().map(move |i| ReservationRow {
                procedure: d.procedure,
                seed: d.seed,
                ue_id: i.ue_id,
                cell_id: i.cell_id,
                start_ms: i.start_ms,
                end_ms: i.end_ms,
            })
        })
        .collect();
    write_reservations_csv(&out_dir.join("reservations.csv"), &reservations)?;

    for r in results.iter().filter(|r| r.procedure.is_llm()) {
        let intervals: Vec<_> = r.drops.iter().flat_map(|d| d.intervals.iter().copied()).collect();
        if let Ok(cdf) = reservation_cdf(&intervals) {
            let n = cdf.len() as f64;
            let points: Vec<CdfPoint> = cdf
                .values()
                .iter()
                .enumerate()
                .map(|(i, &d)| CdfPoint {
                    duration_ms: d,
                    cdf: (i + 1) as f64 / n,
                })
                .collect();
            write_csv(&out_dir.join(format!("rr_cdf-{}.csv", r.procedure)), &points)?;
        }
    }

    if emit_events {
        for d in results.iter().flat_map(|r| r.drops.iter()) {
            write_events_jsonl(&out_dir.join(events_file_name(d.procedure, d.seed)), &d.events)?;
        }
    }
    std::fs::write(out_dir.join("manifest.txt"), manifest.render())?;
    std::fs::write(out_dir.join("summary.txt"), summary_table(results))?;
    Ok(())
}

/// Runs every configured procedure over shared seeds and writes the outputs.
pub fn run_compare(
    config: &SimConfig,
    config_path: Option<&Path>,
    out_dir: &Path,
    emit_events: bool,
) -> Result<Vec<CampaignResult>, SimError> {
    let results = run_all(config)?;
    let manifest = RunManifest::new(config_path.map(Path::to_path_buf), out_dir.to_path_buf(), config.clone());
    write_outputs(out_dir, &manifest, &results, emit_events)?;
    Ok(results)
}
