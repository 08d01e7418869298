//! Radio link monitoring, handover-failure declaration and ping-pong
//! detection, plus the event record shared by the event log.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scenario::{CellId, UeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    Rlp,
    Hof,
    /// Handover execution started; the UE detached from the source.
    HoExec,
    HoSuccess,
    Pp,
    PrepSent,
    PrepReleased,
    Reestablish,
}

impl EventKind {
    pub const ALL: [EventKind; 8] = [
        EventKind::Rlp,
        EventKind::Hof,
        EventKind::HoExec,
        EventKind::HoSuccess,
        EventKind::Pp,
        EventKind::PrepSent,
        EventKind::PrepReleased,
        EventKind::Reestablish,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Rlp => "RLP",
            EventKind::Hof => "HOF",
            EventKind::HoExec => "HO_EXEC",
            EventKind::HoSuccess => "HO_SUCCESS",
            EventKind::Pp => "PP",
            EventKind::PrepSent => "PREP_SENT",
            EventKind::PrepReleased => "PREP_RELEASED",
            EventKind::Reestablish => "REESTABLISH",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown event kind `{s}`"))
    }
}

/// One line of the event log.
///
/// `from`/`to` meaning by kind: handover events carry source and target;
/// PREP_* carry the serving cell and the prepared cell; RLP/HOF carry the
/// cell the UE lost (and the attempted target for HOF); REESTABLISH carries
/// the lost cell and the cell the UE re-attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MobilityEvent {
    pub t_ms: u64,
    pub ue: UeId,
    pub kind: EventKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub from: Option<CellId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub to: Option<CellId>,
}

impl MobilityEvent {
    pub fn new(t_ms: u64, ue: UeId, kind: EventKind, from: Option<CellId>, to: Option<CellId>) -> Self {
        MobilityEvent { t_ms, ue, kind, from, to }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RlmConfig {
    pub n310: u32,
    pub qout_db: f64,
    pub period_ms: u64,
}

impl Default for RlmConfig {
    fn default() -> Self {
        RlmConfig {
            n310: 10,
            qout_db: -8.0,
            period_ms: 10,
        }
    }
}

/// Consecutive out-of-sync counter.
#[derive(Debug, Clone, PartialEq)]
pub struct RlmState {
    pub oos_counter: u32,
    pub n310: u32,
    pub qout_db: f64,
}

impl RlmState {
    pub fn new(config: &RlmConfig) -> Self {
        RlmState {
            oos_counter: 0,
            n310: config.n310,
            qout_db: config.qout_db,
        }
    }

    pub fn reset(&mut self) {
        self.oos_counter = 0;
    }
}

/// One RLM evaluation. Returns true when a radio link problem is declared;
/// the counter is reset in that case.
pub fn rlm_step(state: &mut RlmState, serving_sinr_db: f64) -> bool {
    if serving_sinr_db < state.qout_db {
        state.oos_counter += 1;
    } else {
        state.oos_counter = 0;
    }
    if state.oos_counter >= state.n310 {
        state.oos_counter = 0;
        true
    } else {
        false
    }
}

/// Result of a random-access procedure toward a handover target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaOutcome {
    /// Succeeded on the given (1-based) attempt.
    Success { attempt: u32 },
    Exhausted { attempts: u32 },
}

/// A failed random access becomes a handover failure.
pub fn declare_hof(
    outcome: RaOutcome,
    t_ms: u64,
    ue: UeId,
    source: CellId,
    target: CellId,
) -> Option<MobilityEvent> {
    match outcome {
        RaOutcome::Success { .. } => None,
        RaOutcome::Exhausted { .. } => Some(MobilityEvent::new(
            t_ms,
            ue,
            EventKind::Hof,
            Some(source),
            Some(target),
        )),
    }
}

pub const PING_PONG_WINDOW_MS: u64 = 1000;

/// Streaming ping-pong detector: a successful handover back to the previous
/// serving cell within the window (inclusive) of the preceding successful
/// handover.
#[derive(Debug, Clone, Default)]
pub struct PingPongDetector {
    window_ms: u64,
    last: HashMap<UeId, (CellId, CellId, u64)>,
}

impl PingPongDetector {
    pub fn new(window_ms: u64) -> Self {
        PingPongDetector {
            window_ms,
            last: HashMap::new(),
        }
    }

    /// Feeds a HO_SUCCESS event; returns the PP event it causes, if any.
    pub fn observe(&mut self, ho: &MobilityEvent) -> Option<MobilityEvent> {
        debug_assert_eq!(ho.kind, EventKind::HoSuccess);
        let (from, to) = (ho.from?, ho.to?);
        let prev = self.last.insert(ho.ue, (from, to, ho.t_ms));
        match prev {
            Some((prev_from, _, prev_t))
                if to == prev_from && ho.t_ms - prev_t <= self.window_ms =>
            {
                Some(MobilityEvent::new(ho.t_ms, ho.ue, EventKind::Pp, Some(from), Some(to)))
            }
            _ => None,
        }
    }
}

pub fn detect_pingpong(
    detector: &mut PingPongDetector,
    new_ho: &MobilityEvent,
) -> Option<MobilityEvent> {
    detector.observe(new_ho)
}
