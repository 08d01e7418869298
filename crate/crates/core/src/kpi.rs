//! Mobility KPIs from the event log: RLP, HOF and ping-pong rates per UE per
//! minute, reliability (share of time with service), cell preparations per
//! UE per minute, and resource reservation (share of time a target cell holds
//! resources for a UE) with its duration CDF.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{ConfigError, SimError};
use crate::mobility::ProcedureKind;
use crate::rlm::{EventKind, MobilityEvent};
use crate::scenario::{CellId, UeId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KpiError {
    #[error("{0} must be positive")]
    ZeroDenominator(&'static str),

    #[error("outage of {outage_ms} ms exceeds the total service time of {service_ms} ms")]
    OutageExceedsService { outage_ms: u64, service_ms: u64 },

    #[error("empirical CDF of an empty sample")]
    Empty,
}

impl From<KpiError> for SimError {
    fn from(e: KpiError) -> Self {
        match e {
            KpiError::ZeroDenominator(what) => {
                SimError::Config(ConfigError::invalid(what, "must be positive"))
            }
            other => SimError::Invariant(other.to_string()),
        }
    }
}

/// Events per UE per minute.
pub fn normalize_rate(count: u64, n_ues: u32, sim_time_s: f64, n_drops: u32) -> Result<f64, KpiError> {
    if n_ues == 0 {
        return Err(KpiError::ZeroDenominator("n_ues"));
    }
    if n_drops == 0 {
        return Err(KpiError::ZeroDenominator("n_drops"));
    }
    if !(sim_time_s > 0.0) {
        return Err(KpiError::ZeroDenominator("duration_s"));
    }
    Ok(count as f64 / (n_ues as f64 * n_drops as f64 * sim_time_s / 60.0))
}

/// Percentage of UE time with service.
pub fn compute_reliability(
    total_outage_ms: u64,
    n_ues: u32,
    sim_time_ms: u64,
    n_drops: u32,
) -> Result<f64, KpiError> {
    let service_ms = n_ues as u64 * sim_time_ms * n_drops as u64;
    if service_ms == 0 {
        return Err(KpiError::ZeroDenominator("service time"));
    }
    if total_outage_ms > service_ms {
        return Err(KpiError::OutageExceedsService {
            outage_ms: total_outage_ms,
            service_ms,
        });
    }
    Ok(100.0 - 100.0 * total_outage_ms as f64 / service_ms as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReservationInterval {
    pub ue_id: UeId,
    pub cell_id: CellId,
    pub start_ms: u64,
    pub end_ms: u64,
}

impl ReservationInterval {
    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }
}

fn sort_intervals(intervals: &mut [ReservationInterval]) {
    intervals.sort_by_key(|i| (i.start_ms, i.ue_id, i.cell_id, i.end_ms));
}

/// Reserved time as a percentage of the total UE time.
pub fn compute_resource_reservation(
    intervals: &[ReservationInterval],
    n_ues: u32,
    n_drops: u32,
    sim_time_ms: u64,
) -> Result<f64, KpiError> {
    let denom = n_ues as u64 * n_drops as u64 * sim_time_ms;
    if denom == 0 {
        return Err(KpiError::ZeroDenominator("service time"));
    }
    let reserved: u64 = intervals.iter().map(ReservationInterval::duration_ms).sum();
    Ok(100.0 * reserved as f64 / denom as f64)
}

/// Streaming reservation bookkeeping, fed alongside the event log.
#[derive(Debug, Clone, Default)]
pub struct ReservationTracker {
    open: BTreeMap<(UeId, CellId), u64>,
    closed: Vec<ReservationInterval>,
}

impl ReservationTracker {
    pub fn open(&mut self, ue: UeId, cell: CellId, t_ms: u64) {
        let prev = self.open.insert((ue, cell), t_ms);
        debug_assert!(prev.is_none(), "overlapping reservation for {ue}/{cell}");
    }

    pub fn close(&mut self, ue: UeId, cell: CellId, t_ms: u64) {
        if let Some(start_ms) = self.open.remove(&(ue, cell)) {
            if t_ms > start_ms {
                self.closed.push(ReservationInterval {
                    ue_id: ue,
                    cell_id: cell,
                    start_ms,
                    end_ms: t_ms,
                });
            }
        }
    }

    pub fn is_open(&self, ue: UeId, cell: CellId) -> bool {
        self.open.contains_key(&(ue, cell))
    }

    /// Closes every open interval at `end_ms` and returns all intervals in
    /// canonical order.
    pub fn finish(mut self, end_ms: u64) -> Vec<ReservationInterval> {
        for ((ue_id, cell_id), start_ms) in std::mem::take(&mut self.open) {
            if end_ms > start_ms {
                self.closed.push(ReservationInterval { ue_id, cell_id, start_ms, end_ms });
            }
        }
        sort_intervals(&mut self.closed);
        self.closed
    }
}

/// Rebuilds reservation intervals from PREP_SENT / PREP_RELEASED events.
/// A reservation starts once the preparation is confirmed, `prep_delay_ms`
/// after the request; a release before that leaves no interval.
pub fn reconstruct_intervals(events: &[MobilityEvent], prep_delay_ms: u64, end_ms: u64) -> Vec<ReservationInterval> {
    let mut tracker = ReservationTracker::default();
    for e in events {
        let Some(cell) = e.to else { continue };
        match e.kind {
            EventKind::PrepSent => tracker.open(e.ue, cell, e.t_ms + prep_delay_ms),
            EventKind::PrepReleased => tracker.close(e.ue, cell, e.t_ms),
            _ => {}
        }
    }
    tracker.finish(end_ms)
}

/// Total outage implied by the event log: execution start to completion or
/// failure, and link loss (RLP/HOF) to re-establishment. Intervals still
/// open at `end_ms` are closed there.
pub fn event_outage_ms(events: &[MobilityEvent], end_ms: u64) -> u64 {
    let mut open: BTreeMap<UeId, u64> = BTreeMap::new();
    let mut total = 0;
    for e in events {
        match e.kind {
            EventKind::HoExec | EventKind::Rlp => {
                open.insert(e.ue, e.t_ms);
            }
            EventKind::HoSuccess | EventKind::Reestablish => {
                if let Some(s) = open.remove(&e.ue) {
                    total += e.t_ms - s;
                }
            }
            // Execution ends and re-establishment begins at the same instant.
            EventKind::Hof => {}
            _ => {}
        }
    }
    total + open.values().map(|s| end_ms - s).sum::<u64>()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub rlp: u64,
    pub hof: u64,
    pub pp: u64,
    pub ho_exec: u64,
    pub ho_success: u64,
    pub prep_sent: u64,
    pub prep_released: u64,
    pub reestablish: u64,
}

impl EventCounts {
    pub fn record(&mut self, kind: EventKind) {
        match kind {
            EventKind::Rlp => self.rlp += 1,
            EventKind::Hof => self.hof += 1,
            EventKind::Pp => self.pp += 1,
            EventKind::HoExec => self.ho_exec += 1,
            EventKind::HoSuccess => self.ho_success += 1,
            EventKind::PrepSent => self.prep_sent += 1,
            EventKind::PrepReleased => self.prep_released += 1,
            EventKind::Reestablish => self.reestablish += 1,
        }
    }

    pub fn from_events(events: &[MobilityEvent]) -> Self {
        let mut c = EventCounts::default();
        for e in events {
            c.record(e.kind);
        }
        c
    }

    pub fn add(&mut self, o: &EventCounts) {
        self.rlp += o.rlp;
        self.hof += o.hof;
        self.pp += o.pp;
        self.ho_exec += o.ho_exec;
        self.ho_success += o.ho_success;
        self.prep_sent += o.prep_sent;
        self.prep_released += o.prep_released;
        self.reestablish += o.reestablish;
    }
}

/// Raw totals of one drop (or a pool of drops) from which KPIs are derived.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KpiTotals {
    pub counts: EventCounts,
    pub outage_ms: u64,
    pub intervals: Vec<ReservationInterval>,
    pub n_ues: u32,
    pub sim_time_ms: u64,
    pub n_drops: u32,
}

impl KpiTotals {
    /// Pools drops that share the UE count and duration.
    pub fn pool<'a>(parts: impl IntoIterator<Item = &'a KpiTotals>) -> KpiTotals {
        let mut out = KpiTotals::default();
        for p in parts {
            debug_assert!(out.n_drops == 0 || (out.n_ues, out.sim_time_ms) == (p.n_ues, p.sim_time_ms));
            out.counts.add(&p.counts);
            out.outage_ms += p.outage_ms;
            out.intervals.extend_from_slice(&p.intervals);
            out.n_ues = p.n_ues;
            out.sim_time_ms = p.sim_time_ms;
            out.n_drops += p.n_drops;
        }
        out
    }
}

/// KPIs of one drop, or pooled over drops when `drop_seed` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiRecord {
    pub procedure: ProcedureKind,
    pub drop_seed: Option<u64>,
    pub n_drops: u32,
    pub rlp_per_ue_min: f64,
    pub hof_per_ue_min: f64,
    pub pp_per_ue_min: f64,
    pub reliability_pct: f64,
    pub prep_per_ue_min: f64,
    pub resource_reservation_pct: f64,
    pub reservation_durations_ms: Vec<u64>,
}

impl KpiRecord {
    pub fn from_totals(
        procedure: ProcedureKind,
        drop_seed: Option<u64>,
        t: &KpiTotals,
    ) -> Result<Self, KpiError> {
        let secs = t.sim_time_ms as f64 / 1000.0;
        let rate = |n| normalize_rate(n, t.n_ues, secs, t.n_drops);
        let mut durations: Vec<u64> = t.intervals.iter().map(ReservationInterval::duration_ms).collect();
        durations.sort_unstable();
        Ok(KpiRecord {
            procedure,
            drop_seed,
            n_drops: t.n_drops,
            rlp_per_ue_min: rate(t.counts.rlp)?,
            hof_per_ue_min: rate(t.counts.hof)?,
            pp_per_ue_min: rate(t.counts.pp)?,
            reliability_pct: compute_reliability(t.outage_ms, t.n_ues, t.sim_time_ms, t.n_drops)?,
            prep_per_ue_min: rate(t.counts.prep_sent)?,
            resource_reservation_pct: compute_resource_reservation(
                &t.intervals,
                t.n_ues,
                t.n_drops,
                t.sim_time_ms,
            )?,
            reservation_durations_ms: durations,
        })
    }

    /// Row of `kpis.csv`.
    pub fn row(&self) -> KpiRow {
        KpiRow {
            procedure: self.procedure,
            seed: self.drop_seed,
            rlp_rate: self.rlp_per_ue_min,
            hof_rate: self.hof_per_ue_min,
            pp_rate: self.pp_per_ue_min,
            reliability_pct: self.reliability_pct,
            prep_rate: self.prep_per_ue_min,
            rr_pct: self.resource_reservation_pct,
        }
    }
}

/// One line of `kpis.csv`. Pooled rows leave `seed` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiRow {
    pub procedure: ProcedureKind,
    pub seed: Option<u64>,
    pub rlp_rate: f64,
    pub hof_rate: f64,
    pub pp_rate: f64,
    pub reliability_pct: f64,
    pub prep_rate: f64,
    pub rr_pct: f64,
}

/// Empirical distribution with linearly interpolated percentiles.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self, KpiError> {
        if values.is_empty() {
            return Err(KpiError::Empty);
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.sorted.len() as f64
    }

    /// `p` in [0, 1]; interpolates between order statistics at `p (n - 1)`.
    pub fn percentile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let pos = p * (self.sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        self.sorted[lo] + (self.sorted[hi] - self.sorted[lo]) * frac
    }
}

pub fn reservation_cdf(intervals: &[ReservationInterval]) -> Result<EmpiricalCdf, KpiError> {
    EmpiricalCdf::new(intervals.iter().map(|i| i.duration_ms() as f64).collect())
}
