//! Cell preparation, release and replacement, and the execution logic of the
//! six handover procedures.
//!
//! Preparation (all procedures except BHO) is driven by L3 cell quality:
//! a cell is prepared when it is within `o_prep` of the serving cell and
//! released when it falls more than `o_prep` behind, at most `L` cells at a
//! time. Execution differs per procedure:
//!
//! | procedure | quantity            | TTT    | target must be prepared |
//! |-----------|---------------------|--------|-------------------------|
//! | BHO       | L3 cell             | 160 ms | no (report + command)   |
//! | CHO       | L3 cell             | 160 ms | yes                     |
//! | CHO-L1    | L1 cell             | 0      | yes                     |
//! | LLM*      | L1 beam (L2-filtered for -F) | 0 | yes             |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::measure::L1Report;
use crate::scenario::{BeamId, CellId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProcedureKind {
    Bho,
    Cho,
    ChoL1,
    Llm,
    LlmF,
    LlmFDs,
}

impl ProcedureKind {
    pub const ALL: [ProcedureKind; 6] = [
        ProcedureKind::Bho,
        ProcedureKind::Cho,
        ProcedureKind::ChoL1,
        ProcedureKind::Llm,
        ProcedureKind::LlmF,
        ProcedureKind::LlmFDs,
    ];

    pub const LLM_VARIANTS: [ProcedureKind; 3] =
        [ProcedureKind::Llm, ProcedureKind::LlmF, ProcedureKind::LlmFDs];

    pub fn as_str(self) -> &'static str {
        match self {
            ProcedureKind::Bho => "BHO",
            ProcedureKind::Cho => "CHO",
            ProcedureKind::ChoL1 => "CHO_L1",
            ProcedureKind::Llm => "LLM",
            ProcedureKind::LlmF => "LLM_F",
            ProcedureKind::LlmFDs => "LLM_F_DS",
        }
    }

    pub fn is_llm(self) -> bool {
        matches!(self, ProcedureKind::Llm | ProcedureKind::LlmF | ProcedureKind::LlmFDs)
    }

    /// Whether target cells are prepared ahead of execution.
    pub fn uses_preparation(self) -> bool {
        self != ProcedureKind::Bho
    }
}

impl fmt::Display for ProcedureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProcedureKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        ProcedureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| {
                format!("unknown procedure `{s}` (expected one of BHO, CHO, CHO_L1, LLM, LLM_F, LLM_F_DS)")
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityParams {
    pub prep_delay_ms: u64,
    pub interruption_ms: u64,
    pub ttt_ms: u64,
    pub o_prep_db: f64,
    pub o_exec_db: f64,
    pub max_prepared: usize,
    pub k_l2: f64,
    pub t_prep_ms: u64,
    pub dynamic_switching: bool,
    pub ra_threshold_db: f64,
    pub ra_max_attempts: u32,
    pub ra_interval_ms: u64,
    pub reestablish_ms: u64,
}

impl MobilityParams {
    /// Per-procedure defaults.
    pub fn for_procedure(kind: ProcedureKind) -> Self {
        use ProcedureKind::*;
        MobilityParams {
            prep_delay_ms: 40,
            interruption_ms: if kind.is_llm() { 1 } else { 80 },
            ttt_ms: if matches!(kind, Bho | Cho) { 160 } else { 0 },
            o_prep_db: 3.0,
            o_exec_db: 3.0,
            max_prepared: 4,
            k_l2: if matches!(kind, LlmF | LlmFDs) { 3.0 } else { 0.0 },
            t_prep_ms: 0,
            dynamic_switching: kind == LlmFDs,
            ra_threshold_db: -8.0,
            ra_max_attempts: 4,
            ra_interval_ms: 10,
            reestablish_ms: 160,
        }
    }
}

/// Optional overrides of the per-procedure defaults, as read from config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MobilityOverrides {
    pub prep_delay_ms: Option<u64>,
    pub interruption_ms: Option<u64>,
    pub ttt_ms: Option<u64>,
    pub o_prep_db: Option<f64>,
    pub o_exec_db: Option<f64>,
    pub max_prepared: Option<usize>,
    pub k_l2: Option<f64>,
    pub t_prep_ms: Option<u64>,
    pub dynamic_switching: Option<bool>,
    pub ra_threshold_db: Option<f64>,
    pub ra_max_attempts: Option<u32>,
    pub ra_interval_ms: Option<u64>,
    pub reestablish_ms: Option<u64>,
}

impl MobilityOverrides {
    pub fn resolve(&self, kind: ProcedureKind) -> MobilityParams {
        let d = MobilityParams::for_procedure(kind);
        MobilityParams {
            prep_delay_ms: self.prep_delay_ms.unwrap_or(d.prep_delay_ms),
            interruption_ms: self.interruption_ms.unwrap_or(d.interruption_ms),
            ttt_ms: self.ttt_ms.unwrap_or(d.ttt_ms),
            o_prep_db: self.o_prep_db.unwrap_or(d.o_prep_db),
            o_exec_db: self.o_exec_db.unwrap_or(d.o_exec_db),
            max_prepared: self.max_prepared.unwrap_or(d.max_prepared),
            k_l2: self.k_l2.unwrap_or(d.k_l2),
            t_prep_ms: self.t_prep_ms.unwrap_or(d.t_prep_ms),
            dynamic_switching: self.dynamic_switching.unwrap_or(d.dynamic_switching),
            ra_threshold_db: self.ra_threshold_db.unwrap_or(d.ra_threshold_db),
            ra_max_attempts: self.ra_max_attempts.unwrap_or(d.ra_max_attempts),
            ra_interval_ms: self.ra_interval_ms.unwrap_or(d.ra_interval_ms),
            reestablish_ms: self.reestablish_ms.unwrap_or(d.reestablish_ms),
        }
    }
}

/// L3 values of the serving and a candidate cell at one sample instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L3Sample {
    pub t_ms: u64,
    pub serving_dbm: f64,
    pub target_dbm: f64,
}

fn window_holds(
    history: &[L3Sample],
    t_prep_ms: u64,
    pred: impl Fn(&L3Sample) -> bool,
) -> bool {
    let Some(now) = history.last() else {
        return false;
    };
    history
        .iter()
        .filter(|s| s.t_ms <= now.t_ms && s.t_ms + t_prep_ms > now.t_ms || s.t_ms == now.t_ms)
        .all(pred)
}

/// Preparation entering condition over the monitoring window ending at the
/// last sample of `history`: `o_prep > serving - target` at every sample.
pub fn prep_enter_check(history: &[L3Sample], o_prep_db: f64, t_prep_ms: u64) -> bool {
    window_holds(history, t_prep_ms, |s| o_prep_db > s.serving_dbm - s.target_dbm)
}

/// Preparation leaving condition: `o_prep < serving - target` at every sample.
pub fn prep_leave_check(history: &[L3Sample], o_prep_db: f64, t_prep_ms: u64) -> bool {
    window_holds(history, t_prep_ms, |s| o_prep_db < s.serving_dbm - s.target_dbm)
}

/// Tracks since when a condition has held at consecutive sample instants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConditionTimer {
    since: Option<u64>,
}

impl ConditionTimer {
    pub fn update(&mut self, t_ms: u64, holds: bool) {
        if !holds {
            self.since = None;
        } else if self.since.is_none() {
            self.since = Some(t_ms);
        }
    }

    pub fn since(&self) -> Option<u64> {
        self.since
    }

    /// Held at every sample in `(t - window, t]`, samples spaced `period`.
    pub fn holds_over_window(&self, t_ms: u64, window_ms: u64, period_ms: u64) -> bool {
        match self.since {
            None => false,
            Some(since) => {
                let earlier = if window_ms == 0 { 0 } else { (window_ms - 1) / period_ms };
                since + earlier * period_ms <= t_ms
            }
        }
    }

    /// Held continuously for at least `duration` (time-to-trigger semantics).
    pub fn held_for(&self, t_ms: u64, duration_ms: u64) -> bool {
        self.since.is_some_and(|since| t_ms - since >= duration_ms)
    }

    pub fn reset(&mut self) {
        self.since = None;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreparedCell {
    pub cell: CellId,
    /// Time the network confirmed the preparation.
    pub prepared_at_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingPreparation {
    pub cell: CellId,
    pub requested_at_ms: u64,
    pub due_ms: u64,
}

/// Target cells prepared (or being prepared) for one UE, at most `capacity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedCellSet {
    capacity: usize,
    prepared: Vec<PreparedCell>,
    pending: Vec<PendingPreparation>,
}

impl PreparedCellSet {
    pub fn new(capacity: usize) -> Self {
        PreparedCellSet {
            capacity,
            prepared: Vec::new(),
            pending: Vec::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Prepared plus pending.
    pub fn occupancy(&self) -> usize {
        self.prepared.len() + self.pending.len()
    }

    pub fn is_full(&self) -> bool {
        self.occupancy() >= self.capacity
    }

    pub fn prepared(&self) -> &[PreparedCell] {
        &self.prepared
    }

    pub fn pending(&self) -> &[PendingPreparation] {
        &self.pending
    }

    pub fn prepared_cells(&self) -> Vec<CellId> {
        self.prepared.iter().map(|p| p.cell).collect()
    }

    pub fn is_prepared(&self, cell: CellId) -> bool {
        self.prepared.iter().any(|p| p.cell == cell)
    }

    pub fn contains(&self, cell: CellId) -> bool {
        self.is_prepared(cell) || self.pending.iter().any(|p| p.cell == cell)
    }

    pub fn prepared_at(&self, cell: CellId) -> Option<u64> {
        self.prepared.iter().find(|p| p.cell == cell).map(|p| p.prepared_at_ms)
    }

    pub fn request(&mut self, cell: CellId, t_ms: u64, delay_ms: u64) {
        debug_assert!(!self.contains(cell) && !self.is_full());
        self.pending.push(PendingPreparation {
            cell,
            requested_at_ms: t_ms,
            due_ms: t_ms + delay_ms,
        });
    }

    /// Confirms every pending preparation due by `t_ms`, in request order.
    pub fn confirm_due(&mut self, t_ms: u64) -> Vec<CellId> {
        let mut done = Vec::new();
        self.pending.retain(|p| {
            if p.due_ms <= t_ms {
                done.push(p.cell);
                false
            } else {
                true
            }
        });
        for &cell in &done {
            self.prepared.push(PreparedCell { cell, prepared_at_ms: t_ms });
        }
        done
    }

    /// Re-admits an already configured cell without a new preparation.
    /// Returns false, leaving the set unchanged, when it is full or already
    /// holds the cell.
    pub fn retain(&mut self, cell: CellId, t_ms: u64) -> bool {
        if self.contains(cell) || self.is_full() {
            return false;
        }
        self.prepared.push(PreparedCell { cell, prepared_at_ms: t_ms });
        true
    }

    pub fn release(&mut self, cell: CellId) -> Option<PreparedCell> {
        let i = self.prepared.iter().position(|p| p.cell == cell)?;
        Some(self.prepared.remove(i))
    }

    /// Drops preparations not yet confirmed; returns their cells.
    pub fn cancel_pending(&mut self) -> Vec<CellId> {
        self.pending.drain(..).map(|p| p.cell).collect()
    }

    /// Releases everything; returns prepared then pending cells.
    pub fn clear(&mut self) -> Vec<CellId> {
        let mut cells: Vec<CellId> = self.prepared.drain(..).map(|p| p.cell).collect();
        cells.extend(self.pending.drain(..).map(|p| p.cell));
        cells
    }

    /// Weakest prepared cell by the given quality.
    pub fn weakest(&self, quality: impl Fn(CellId) -> f64) -> Option<(CellId, f64)> {
        self.prepared
            .iter()
            .map(|p| (p.cell, quality(p.cell)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplaceDecision {
    /// Room left: prepare normally.
    NotFull,
    /// Release `victim` and prepare the candidate.
    Replace { victim: CellId },
    NoChange,
}

/// Weakest-cell replacement for a candidate that satisfies the entering
/// condition while the set is full.
pub fn try_replace(
    set: &PreparedCellSet,
    candidate: CellId,
    quality: impl Fn(CellId) -> f64,
) -> ReplaceDecision {
    if !set.is_full() {
        return ReplaceDecision::NotFull;
    }
    match set.weakest(&quality) {
        Some((victim, weakest)) if quality(candidate) > weakest => ReplaceDecision::Replace { victim },
        _ => ReplaceDecision::NoChange,
    }
}

/// Network-side LLM execution decision on a (possibly L2-filtered) report:
/// the prepared cell whose best reported beam beats the serving cell's best
/// reported beam by more than `o_exec`.
pub fn exec_check_llm(
    report: &L1Report,
    serving: CellId,
    prepared: &[CellId],
    o_exec_db: f64,
) -> Option<CellId> {
    let serving_best = report.best_of(serving)?.rsrp_dbm;
    prepared
        .iter()
        .filter(|c| **c != serving)
        .filter_map(|c| report.best_of(*c).map(|e| (*c, e.rsrp_dbm)))
        .filter(|(_, p)| *p > serving_best + o_exec_db)
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c)
}

/// Per-neighbour A3 (`target > serving + offset`) time-to-trigger state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct A3Tracker {
    timers: BTreeMap<CellId, ConditionTimer>,
}

impl A3Tracker {
    pub fn reset(&mut self) {
        self.timers.clear();
    }

    /// Updates all neighbours and returns those whose condition has held for
    /// at least `ttt_ms`, as `(cell, quality)`.
    pub fn update(
        &mut self,
        t_ms: u64,
        serving: CellId,
        quality: &[f64],
        o_exec_db: f64,
        ttt_ms: u64,
    ) -> Vec<(CellId, f64)> {
        let s = quality[serving.0 as usize];
        let mut out = Vec::new();
        for (c, &q) in quality.iter().enumerate() {
            let cell = CellId(c as u32);
            if cell == serving {
                continue;
            }
            let timer = self.timers.entry(cell).or_default();
            timer.update(t_ms, q > s + o_exec_db);
            if timer.held_for(t_ms, ttt_ms) {
                out.push((cell, q));
            }
        }
        out
    }
}

/// RRC-style (BHO/CHO/CHO-L1) execution decision. `quality` holds L3 cell
/// values for BHO/CHO and consolidated L1 values for CHO-L1. BHO may pick any
/// neighbour; the conditional variants only prepared ones.
pub fn exec_check_rrc(
    kind: ProcedureKind,
    tracker: &mut A3Tracker,
    t_ms: u64,
    serving: CellId,
    quality: &[f64],
    prepared: &[CellId],
    params: &MobilityParams,
) -> Option<CellId> {
    debug_assert!(!kind.is_llm());
    let qualifying = tracker.update(t_ms, serving, quality, params.o_exec_db, params.ttt_ms);
    qualifying
        .into_iter()
        .filter(|(c, _)| kind == ProcedureKind::Bho || prepared.contains(c))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UeState {
    Connected,
    /// BHO: measurement report sent, waiting for the handover command.
    ReportSent { target: CellId, command_at_ms: u64 },
    /// Detached from the source; interruption running until `ra_at_ms`.
    Executing {
        source: CellId,
        target: CellId,
        started_ms: u64,
        ra_at_ms: u64,
        attempts: u32,
    },
    /// Lost the link (RLP or HOF); reconnects at `until_ms`.
    Reestablishing { lost: CellId, started_ms: u64, until_ms: u64 },
}

/// Outcome of one random-access attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaStep {
    Success { attempt: u32 },
    Retry { next_at_ms: u64 },
    Failed { attempts: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct UeMobilityContext {
    pub serving_cell: CellId,
    pub serving_beam: BeamId,
    pub state: UeState,
    pub prepared: PreparedCellSet,
    /// Dynamic switching: the serving cell's candidate configuration is
    /// still held, so its reservation stays open while it serves.
    pub serving_retained: bool,
    pub last_handover: Option<(CellId, CellId, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MobilityError {
    #[error("handover to unprepared cell {target} at t={t_ms} ms")]
    TargetNotPrepared { target: CellId, t_ms: u64 },
    #[error("handover requested while not connected at t={t_ms} ms")]
    NotConnected { t_ms: u64 },
}

impl UeMobilityContext {
    pub fn new(serving_cell: CellId, serving_beam: BeamId, max_prepared: usize) -> Self {
        UeMobilityContext {
            serving_cell,
            serving_beam,
            state: UeState::Connected,
            prepared: PreparedCellSet::new(max_prepared),
            serving_retained: false,
            last_handover: None,
        }
    }

    pub fn is_connected(&self) -> bool {
        matches!(self.state, UeState::Connected | UeState::ReportSent { .. })
    }

    /// No serving link: interruption, random access or re-establishment.
    pub fn in_outage(&self) -> bool {
        matches!(self.state, UeState::Executing { .. } | UeState::Reestablishing { .. })
    }

    /// Detached and not measuring (interruption and random access).
    pub fn is_executing(&self) -> bool {
        matches!(self.state, UeState::Executing { .. })
    }

    /// Starts execution toward `target`: the interruption runs first, then
    /// random access. Conditional procedures require a prepared target.
    pub fn execute_handover(
        &mut self,
        kind: ProcedureKind,
        target: CellId,
        t_ms: u64,
        params: &MobilityParams,
    ) -> Result<(), MobilityError> {
        if !self.is_connected() {
            return Err(MobilityError::NotConnected { t_ms });
        }
        if kind.uses_preparation() && !self.prepared.is_prepared(target) {
            return Err(MobilityError::TargetNotPrepared { target, t_ms });
        }
        self.state = UeState::Executing {
            source: self.serving_cell,
            target,
            started_ms: t_ms,
            ra_at_ms: t_ms + params.interruption_ms,
            attempts: 0,
        };
        Ok(())
    }

    /// One random-access attempt at `t_ms` with the target's best-beam SINR.
    pub fn ra_attempt(&mut self, t_ms: u64, target_sinr_db: f64, params: &MobilityParams) -> RaStep {
        let UeState::Executing { ra_at_ms, attempts, .. } = &mut self.state else {
            panic!("random access outside execution");
        };
        debug_assert!(t_ms >= *ra_at_ms);
        *attempts += 1;
        if target_sinr_db >= params.ra_threshold_db {
            RaStep::Success { attempt: *attempts }
        } else if *attempts >= params.ra_max_attempts {
            RaStep::Failed { attempts: *attempts }
        } else {
            *ra_at_ms = t_ms + params.ra_interval_ms;
            RaStep::Retry { next_at_ms: *ra_at_ms }
        }
    }

    /// Completes a successful execution: the target becomes the serving cell.
    pub fn complete_handover(&mut self, t_ms: u64, target_beam: BeamId) -> (CellId, CellId) {
        let UeState::Executing { source, target, .. } = self.state else {
            panic!("completion outside execution");
        };
        self.serving_cell = target;
        self.serving_beam = target_beam;
        self.state = UeState::Connected;
        self.last_handover = Some((source, target, t_ms));
        (source, target)
    }
}
