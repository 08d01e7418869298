//! Time-stepped simulation of one drop, and campaigns of seeded drops.
//!
//! Within a tick the order is fixed: UE movement and channel sampling (SSB
//! instants only), measurement filtering, preparation decisions, execution
//! decisions, then timers (preparation confirmations, handover commands,
//! random access, re-establishment) and radio link monitoring. Outage is
//! accumulated per tick after all processing and reconciled against the
//! event log when the drop ends.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{serving_sinr, ChannelConfig, ChannelSnapshot, UeChannel};
use crate::error::{ConfigError, SimError};
use crate::kpi::{
    event_outage_ms, reconstruct_intervals, EventCounts, KpiRecord, KpiTotals, ReservationInterval,
    ReservationTracker,
};
use crate::measure::{build_l1_report, L2Filters, MeasureConfig, UeMeasurements};
use crate::mobility::{
    exec_check_llm, exec_check_rrc, try_replace, A3Tracker, ConditionTimer, MobilityOverrides,
    MobilityParams, ProcedureKind, RaStep, ReplaceDecision, UeMobilityContext, UeState,
};
use crate::rlm::{
    rlm_step, EventKind, MobilityEvent, PingPongDetector, RlmConfig, RlmState, PING_PONG_WINDOW_MS,
};
use crate::rng::{self, Subsystem};
use crate::scenario::{
    build_layout, kmh_to_ms, step_ue, CellId, CellLayout, Point, ScenarioConfig, UeId, UeKinematics,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub duration_s: f64,
    pub n_ues: u32,
    pub ue_speed_kmh: f64,
    pub ssb_period_ms: u64,
    pub n_drops: u32,
    pub base_seed: u64,
    pub procedures: Vec<ProcedureKind>,
    pub scenario: ScenarioConfig,
    pub channel: ChannelConfig,
    pub measure: MeasureConfig,
    pub mobility: MobilityOverrides,
    pub rlm: RlmConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            duration_s: 10.0,
            n_ues: 420,
            ue_speed_kmh: 60.0,
            ssb_period_ms: 20,
            n_drops: 10,
            base_seed: 1,
            procedures: ProcedureKind::ALL.to_vec(),
            scenario: ScenarioConfig::default(),
            channel: ChannelConfig::default(),
            measure: MeasureConfig::default(),
            mobility: MobilityOverrides::default(),
            rlm: RlmConfig::default(),
        }
    }
}

impl SimConfig {
    /// The reduced campaign used for trend checks: 42 UEs, 10 s, 5 drops.
    pub fn desk_scale() -> Self {
        SimConfig {
            n_ues: 42,
            n_drops: 5,
            ..SimConfig::default()
        }
    }

    pub fn duration_ms(&self) -> u64 {
        (self.duration_s * 1000.0).round() as u64
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.n_drops as u64).map(|i| self.base_seed.wrapping_add(i))
    }

    pub fn params(&self, kind: ProcedureKind) -> MobilityParams {
        self.mobility.resolve(kind)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let ms = self.duration_s * 1000.0;
        if !(self.duration_s > 0.0 && (ms - ms.round()).abs() < 1e-6) {
            return Err(ConfigError::invalid(
                "duration_s",
                "must be positive and a whole number of milliseconds",
            ));
        }
        if self.n_ues == 0 || self.n_ues == rng::DROP_WIDE {
            return Err(ConfigError::invalid("n_ues", "must be positive and below 2^32 - 1"));
        }
        if self.n_drops == 0 {
            return Err(ConfigError::invalid("n_drops", "must be positive"));
        }
        if self.ssb_period_ms == 0 {
            return Err(ConfigError::invalid("ssb_period_ms", "must be positive"));
        }
        if !(self.ue_speed_kmh >= 0.0 && self.ue_speed_kmh.is_finite()) {
            return Err(ConfigError::invalid("ue_speed_kmh", "must be non-negative"));
        }
        if self.procedures.is_empty() {
            return Err(ConfigError::invalid("procedure", "at least one procedure is required"));
        }
        let m = &self.measure;
        if m.n_l1 == 0 {
            return Err(ConfigError::invalid("measure.n_l1", "must be at least 1"));
        }
        if !(m.k_l3 >= 0.0) {
            return Err(ConfigError::invalid("measure.k_l3", "must be non-negative"));
        }
        if m.report_k == 0 {
            return Err(ConfigError::invalid("measure.report_k", "must be at least 1"));
        }
        if m.report_period_ms == 0 || !m.report_period_ms.is_multiple_of(self.ssb_period_ms) {
            return Err(ConfigError::invalid(
                "measure.report_period_ms",
                "must be a positive multiple of ssb_period_ms",
            ));
        }
        if self.rlm.period_ms == 0 {
            return Err(ConfigError::invalid("rlm.period_ms", "must be positive"));
        }
        if self.rlm.n310 == 0 {
            return Err(ConfigError::invalid("rlm.n310", "must be at least 1"));
        }
        for &kind in &self.procedures {
            let p = self.params(kind);
            if p.max_prepared == 0 {
                return Err(ConfigError::invalid("mobility.max_prepared", "must be at least 1"));
            }
            if p.ra_max_attempts == 0 {
                return Err(ConfigError::invalid("mobility.ra_max_attempts", "must be at least 1"));
            }
            if p.ra_interval_ms == 0 {
                return Err(ConfigError::invalid("mobility.ra_interval_ms", "must be positive"));
            }
            if !(p.o_prep_db.is_finite() && p.o_exec_db.is_finite() && p.k_l2 >= 0.0) {
                return Err(ConfigError::invalid("mobility", "offsets must be finite and k_l2 >= 0"));
            }
        }
        if !(self.channel.interferer_load >= 0.0) {
            return Err(ConfigError::invalid("channel.interferer_load", "must be non-negative"));
        }
        build_layout(&self.scenario)?;
        Ok(())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Base tick: the gcd of every period and delay that schedules something.
pub fn base_tick_ms(config: &SimConfig, params: &MobilityParams) -> u64 {
    [
        config.ssb_period_ms,
        config.measure.report_period_ms,
        config.rlm.period_ms,
        config.duration_ms(),
        params.prep_delay_ms,
        params.interruption_ms,
        params.ttt_ms,
        params.t_prep_ms,
        params.ra_interval_ms,
        params.reestablish_ms,
    ]
    .into_iter()
    .fold(0, gcd)
    .max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropResult {
    pub procedure: ProcedureKind,
    pub seed: u64,
    pub events: Vec<MobilityEvent>,
    pub intervals: Vec<ReservationInterval>,
    pub totals: KpiTotals,
    pub kpi: KpiRecord,
    /// Outage accumulated tick by tick (equal to the event-derived outage).
    pub tick_outage_ms: u64,
}

struct Ue {
    id: UeId,
    kin: UeKinematics,
    channel: UeChannel,
    meas: UeMeasurements,
    snapshot: ChannelSnapshot,
    ctx: UeMobilityContext,
    rlm: RlmState,
    l2: L2Filters,
    a3: A3Tracker,
    enter: Vec<ConditionTimer>,
    leave: Vec<ConditionTimer>,
    missed_ssb: bool,
    outage_ms: u64,
}

impl Ue {
    fn on_serving_change(&mut self) {
        self.rlm.reset();
        self.l2.reset();
        self.a3.reset();
        self.enter.iter_mut().for_each(ConditionTimer::reset);
        self.leave.iter_mut().for_each(ConditionTimer::reset);
    }
}

/// Uniform point in the wrap-around region.
fn random_position(layout: &CellLayout, rng: &mut impl Rng) -> Point {
    let r = layout.region_circumradius();
    loop {
        let p = Point::new(rng.random_range(-r..r), rng.random_range(-r..r));
        if layout.contains(p) {
            return p;
        }
    }
}

struct Drop<'a> {
    config: &'a SimConfig,
    kind: ProcedureKind,
    params: MobilityParams,
    layout: CellLayout,
    noise_dbm: f64,
    events: Vec<MobilityEvent>,
    counts: EventCounts,
    reservations: ReservationTracker,
    pingpong: PingPongDetector,
}

impl Drop<'_> {
    fn emit(&mut self, t_ms: u64, ue: UeId, kind: EventKind, from: CellId, to: CellId) {
        let e = MobilityEvent::new(t_ms, ue, kind, Some(from), Some(to));
        match kind {
            EventKind::PrepSent => self.reservations.open(ue, to, t_ms + self.params.prep_delay_ms),
            EventKind::PrepReleased => self.reservations.close(ue, to, t_ms),
            _ => {}
        }
        self.counts.record(kind);
        self.events.push(e);
        if kind == EventKind::HoSuccess {
            if let Some(pp) = self.pingpong.observe(&e) {
                self.counts.record(EventKind::Pp);
                self.events.push(pp);
            }
        }
    }

    fn sinr(&self, ue: &Ue, cell: CellId, beam: crate::scenario::BeamId) -> f64 {
        serving_sinr(&ue.snapshot, cell, beam, self.noise_dbm, self.config.channel.interferer_load)
    }

    fn release_all(&mut self, ue: &mut Ue, t_ms: u64) {
        let serving = ue.ctx.serving_cell;
        for cell in ue.ctx.prepared.clear() {
            self.emit(t_ms, ue.id, EventKind::PrepReleased, serving, cell);
        }
        if std::mem::take(&mut ue.ctx.serving_retained) {
            self.emit(t_ms, ue.id, EventKind::PrepReleased, serving, serving);
        }
    }

    fn lose_link(&mut self, ue: &mut Ue, t_ms: u64, lost: CellId) {
        self.release_all(ue, t_ms);
        ue.ctx.state = UeState::Reestablishing {
            lost,
            started_ms: t_ms,
            until_ms: t_ms + self.params.reestablish_ms,
        };
        ue.rlm.reset();
    }

    fn start_execution(&mut self, ue: &mut Ue, target: CellId, t_ms: u64) -> Result<(), SimError> {
        ue.ctx
            .execute_handover(self.kind, target, t_ms, &self.params)
            .map_err(|e| SimError::Invariant(e.to_string()))?;
        if !self.params.dynamic_switching {
            for cell in ue.ctx.prepared.cancel_pending() {
                self.emit(t_ms, ue.id, EventKind::PrepReleased, ue.ctx.serving_cell, cell);
            }
        }
        self.emit(t_ms, ue.id, EventKind::HoExec, ue.ctx.serving_cell, target);
        Ok(())
    }

    fn measure(&mut self, ue: &mut Ue, t_ms: u64) -> Result<(), SimError> {
        // The t = 0 sample is taken at attach time.
        if t_ms == 0 {
            return Ok(());
        }
        let w = self.config.ssb_period_ms as f64;
        ue.kin = step_ue(&ue.kin, w / 1000.0, &self.layout);
        ue.snapshot = ue.channel.advance(
            &self.layout,
            &self.config.channel,
            ue.kin.position,
            ue.kin.height,
            ue.kin.speed,
            ue.kin.speed * w / 1000.0,
            w,
            t_ms,
        );
        if ue.ctx.is_executing() {
            ue.missed_ssb = true;
            return Ok(());
        }
        if ue.missed_ssb {
            ue.meas.reset_l1();
            ue.missed_ssb = false;
        }
        ue.meas.update(&ue.snapshot)?;
        if ue.ctx.is_connected() {
            ue.ctx.serving_beam = ue.meas.best_beam(ue.ctx.serving_cell);
        }
        Ok(())
    }

    /// Preparation entering, leaving and replacement at an SSB instant.
    fn prepare(&mut self, ue: &mut Ue, t_ms: u64) {
        let serving = ue.ctx.serving_cell;
        let s = ue.meas.l3(serving);
        let n_cells = self.layout.n_cells();
        for c in 0..n_cells {
            let d = s - ue.meas.l3(CellId(c as u32));
            ue.enter[c].update(t_ms, self.params.o_prep_db > d);
            ue.leave[c].update(t_ms, self.params.o_prep_db < d);
        }
        let (window, period) = (self.params.t_prep_ms, self.config.ssb_period_ms);

        let leaving: Vec<CellId> = ue
            .ctx
            .prepared
            .prepared()
            .iter()
            .filter(|p| p.prepared_at_ms < t_ms)
            .map(|p| p.cell)
            .filter(|c| ue.leave[c.0 as usize].holds_over_window(t_ms, window, period))
            .collect();
        for cell in leaving {
            ue.ctx.prepared.release(cell);
            self.emit(t_ms, ue.id, EventKind::PrepReleased, serving, cell);
        }

        let mut candidates: Vec<(CellId, f64)> = (0..n_cells as u32)
            .map(CellId)
            .filter(|c| *c != serving && !ue.ctx.prepared.contains(*c))
            .filter(|c| ue.enter[c.0 as usize].holds_over_window(t_ms, window, period))
            .map(|c| (c, ue.meas.l3(c)))
            .collect();
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (cell, _) in candidates {
            match try_replace(&ue.ctx.prepared, cell, |c| ue.meas.l3(c)) {
                ReplaceDecision::NotFull => {}
                ReplaceDecision::Replace { victim } => {
                    ue.ctx.prepared.release(victim);
                    self.emit(t_ms, ue.id, EventKind::PrepReleased, serving, victim);
                }
                ReplaceDecision::NoChange => continue,
            }
            ue.ctx.prepared.request(cell, t_ms, self.params.prep_delay_ms);
            self.emit(t_ms, ue.id, EventKind::PrepSent, serving, cell);
        }
    }

    fn decide(&mut self, ue: &mut Ue, t_ms: u64, ssb: bool) -> Result<(), SimError> {
        if !matches!(ue.ctx.state, UeState::Connected) || !ue.meas.has_measurements() {
            return Ok(());
        }
        if ssb && self.kind.uses_preparation() {
            self.prepare(ue, t_ms);
        }
        let serving = ue.ctx.serving_cell;
        let target = if self.kind.is_llm() {
            if !t_ms.is_multiple_of(self.config.measure.report_period_ms) {
                return Ok(());
            }
            let prepared = ue.ctx.prepared.prepared_cells();
            let meas = &ue.meas;
            let report = build_l1_report(
                ue.id,
                t_ms,
                serving,
                &prepared,
                self.config.measure.report_k,
                self.layout.n_beams(),
                |c, b| meas.l1(c, b),
            );
            let report = if self.params.k_l2 > 0.0 {
                ue.l2.filter_report(&report)
            } else {
                report
            };
            exec_check_llm(&report, serving, &prepared, self.params.o_exec_db)
        } else {
            if !ssb {
                return Ok(());
            }
            let quality: Vec<f64> = (0..self.layout.n_cells() as u32)
                .map(|c| match self.kind {
                    ProcedureKind::ChoL1 => ue.meas.l1_cell(CellId(c)),
                    _ => ue.meas.l3(CellId(c)),
                })
                .collect();
            let prepared = ue.ctx.prepared.prepared_cells();
            exec_check_rrc(self.kind, &mut ue.a3, t_ms, serving, &quality, &prepared, &self.params)
        };
        let Some(target) = target else {
            return Ok(());
        };
        if self.kind == ProcedureKind::Bho {
            ue.ctx.state = UeState::ReportSent {
                target,
                command_at_ms: t_ms + self.params.prep_delay_ms,
            };
            Ok(())
        } else {
            self.start_execution(ue, target, t_ms)
        }
    }

    fn timers(&mut self, ue: &mut Ue, t_ms: u64) -> Result<(), SimError> {
        ue.ctx.prepared.confirm_due(t_ms);
        match ue.ctx.state {
            UeState::ReportSent { target, command_at_ms } if command_at_ms <= t_ms => {
                ue.ctx.state = UeState::Connected;
                self.start_execution(ue, target, t_ms)?;
                self.random_access(ue, t_ms);
            }
            UeState::Executing { .. } => self.random_access(ue, t_ms),
            UeState::Reestablishing { lost, until_ms, .. } if until_ms <= t_ms => {
                let cell = ue.meas.strongest_l1_cell();
                ue.ctx.serving_cell = cell;
                ue.ctx.serving_beam = ue.meas.best_beam(cell);
                ue.ctx.state = UeState::Connected;
                ue.on_serving_change();
                self.emit(t_ms, ue.id, EventKind::Reestablish, lost, cell);
            }
            _ => {}
        }
        Ok(())
    }

    fn random_access(&mut self, ue: &mut Ue, t_ms: u64) {
        let UeState::Executing { source, target, ra_at_ms, .. } = ue.ctx.state else {
            return;
        };
        if ra_at_ms > t_ms {
            return;
        }
        let (beam, _) = ue.snapshot.best_beam(target);
        let sinr = self.sinr(ue, target, beam);
        match ue.ctx.ra_attempt(t_ms, sinr, &self.params) {
            RaStep::Retry { .. } => {}
            RaStep::Success { .. } => {
                ue.ctx.complete_handover(t_ms, beam);
                ue.on_serving_change();
                if self.params.dynamic_switching {
                    self.switch_configurations(ue, source, target, t_ms);
                } else {
                    for cell in ue.ctx.prepared.clear() {
                        self.emit(t_ms, ue.id, EventKind::PrepReleased, source, cell);
                    }
                }
                self.emit(t_ms, ue.id, EventKind::HoSuccess, source, target);
            }
            RaStep::Failed { .. } => {
                self.emit(t_ms, ue.id, EventKind::Hof, source, target);
                self.lose_link(ue, t_ms, source);
            }
        }
    }

    /// Dynamic switching after a completed cell change: every configuration
    /// is kept. The target's stays reserved while it serves; the source's,
    /// if it was held, becomes a candidate again or is released when the
    /// set has no room.
    fn switch_configurations(&mut self, ue: &mut Ue, source: CellId, target: CellId, t_ms: u64) {
        ue.ctx.prepared.release(target);
        if ue.ctx.serving_retained && !ue.ctx.prepared.retain(source, t_ms) {
            self.emit(t_ms, ue.id, EventKind::PrepReleased, target, source);
        }
        ue.ctx.serving_retained = true;
    }

    fn monitor(&mut self, ue: &mut Ue, t_ms: u64) {
        if !ue.ctx.is_connected() {
            return;
        }
        let serving = ue.ctx.serving_cell;
        let sinr = self.sinr(ue, serving, ue.ctx.serving_beam);
        if rlm_step(&mut ue.rlm, sinr) {
            self.emit(t_ms, ue.id, EventKind::Rlp, serving, serving);
            self.lose_link(ue, t_ms, serving);
        }
    }
}

/// Runs one drop of `kind` with `seed`. Deterministic in its arguments.
pub fn run_drop(config: &SimConfig, kind: ProcedureKind, seed: u64) -> Result<DropResult, SimError> {
    config.validate()?;
    let params = config.params(kind);
    let layout = build_layout(&config.scenario)?;
    let duration_ms = config.duration_ms();
    let tick = base_tick_ms(config, &params);
    let speed = kmh_to_ms(config.ue_speed_kmh);

    let mut ues: Vec<Ue> = (0..config.n_ues)
        .map(|i| {
            let id = UeId(i);
            let mut rng = rng::stream(seed, Subsystem::Placement, i);
            let position = config
                .scenario
                .ue_start
                .unwrap_or_else(|| random_position(&layout, &mut rng));
            let heading = match config.scenario.ue_heading_deg {
                Some(h) => h.to_radians(),
                None => rng.random_range(0.0..TAU),
            };
            let kin = UeKinematics {
                position: layout.wrap_into_region(position),
                heading,
                speed,
                height: config.scenario.ue_height_m,
            };
            let mut channel = UeChannel::new(&layout, &config.channel, id, seed);
            let snapshot =
                channel.advance(&layout, &config.channel, kin.position, kin.height, speed, 0.0, 0.0, 0);
            let meas = UeMeasurements::new(layout.n_cells(), layout.n_beams(), &config.measure, config.ssb_period_ms);
            Ue {
                id,
                kin,
                channel,
                meas,
                snapshot,
                ctx: UeMobilityContext::new(CellId(0), crate::scenario::BeamId(0), params.max_prepared),
                rlm: RlmState::new(&config.rlm),
                l2: L2Filters::new(params.k_l2),
                a3: A3Tracker::default(),
                enter: vec![ConditionTimer::default(); layout.n_cells()],
                leave: vec![ConditionTimer::default(); layout.n_cells()],
                missed_ssb: false,
                outage_ms: 0,
            }
        })
        .collect();

    let mut drop = Drop {
        config,
        kind,
        noise_dbm: config.channel.noise_floor_dbm(),
        params,
        layout,
        events: Vec::new(),
        counts: EventCounts::default(),
        reservations: ReservationTracker::default(),
        pingpong: PingPongDetector::new(PING_PONG_WINDOW_MS),
    };

    for ue in &mut ues {
        ue.meas.update(&ue.snapshot)?;
        let cell = ue.meas.strongest_l1_cell();
        ue.ctx.serving_cell = cell;
        ue.ctx.serving_beam = ue.meas.best_beam(cell);
    }

    let mut t = 0;
    while t < duration_ms {
        let ssb = t % config.ssb_period_ms == 0;
        for ue in &mut ues {
            if ssb {
                drop.measure(ue, t)?;
            }
            drop.decide(ue, t, ssb)?;
            drop.timers(ue, t)?;
            if t % config.rlm.period_ms == 0 {
                drop.monitor(ue, t);
            }
            if ue.ctx.in_outage() {
                ue.outage_ms += tick;
            }
        }
        t += tick;
    }

    let tick_outage_ms: u64 = ues.iter().map(|u| u.outage_ms).sum();
    let prep_delay_ms = drop.params.prep_delay_ms;
    let events = drop.events;
    let intervals = drop.reservations.finish(duration_ms);

    let logged_outage = event_outage_ms(&events, duration_ms);
    if logged_outage != tick_outage_ms {
        return Err(SimError::Invariant(format!(
            "{kind} seed {seed}: event-derived outage {logged_outage} ms != per-tick outage {tick_outage_ms} ms"
        )));
    }
    if reconstruct_intervals(&events, prep_delay_ms, duration_ms) != intervals {
        return Err(SimError::Invariant(format!(
            "{kind} seed {seed}: reservation intervals from the event log differ from the tracker"
        )));
    }
    if EventCounts::from_events(&events) != drop.counts {
        return Err(SimError::Invariant(format!("{kind} seed {seed}: event counters diverged")));
    }

    let totals = KpiTotals {
        counts: drop.counts,
        outage_ms: tick_outage_ms,
        intervals: intervals.clone(),
        n_ues: config.n_ues,
        sim_time_ms: duration_ms,
        n_drops: 1,
    };
    let kpi = KpiRecord::from_totals(kind, Some(seed), &totals)?;
    Ok(DropResult {
        procedure: kind,
        seed,
        events,
        intervals,
        totals,
        kpi,
        tick_outage_ms,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub procedure: ProcedureKind,
    /// Ordered by seed.
    pub drops: Vec<DropResult>,
    pub pooled: KpiRecord,
}

fn pool(kind: ProcedureKind, drops: Vec<DropResult>) -> Result<CampaignResult, SimError> {
    let totals = KpiTotals::pool(drops.iter().map(|d| &d.totals));
    let pooled = KpiRecord::from_totals(kind, None, &totals)?;
    Ok(CampaignResult {
        procedure: kind,
        drops,
        pooled,
    })
}

/// All drops of one procedure, run in parallel.
pub fn run_campaign(config: &SimConfig, kind: ProcedureKind) -> Result<CampaignResult, SimError> {
    config.validate()?;
    let seeds: Vec<u64> = config.seeds().collect();
    let drops = seeds
        .par_iter()
        .map(|&s| run_drop(config, kind, s))
        .collect::<Result<Vec<_>, _>>()?;
    pool(kind, drops)
}

/// Same as [`run_campaign`] on the calling thread only.
pub fn run_campaign_serial(config: &SimConfig, kind: ProcedureKind) -> Result<CampaignResult, SimError> {
    config.validate()?;
    let drops = config
        .seeds()
        .map(|s| run_drop(config, kind, s))
        .collect::<Result<Vec<_>, _>>()?;
    pool(kind, drops)
}

/// Every configured procedure over the same seeds. Runs are independent,
/// so all (procedure, seed) pairs are scheduled in parallel.
pub fn run_all(config: &SimConfig) -> Result<Vec<CampaignResult>, SimError> {
    config.validate()?;
    let jobs: Vec<(ProcedureKind, u64)> = config
        .procedures
        .iter()
        .flat_map(|&k| config.seeds().map(move |s| (k, s)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(k, s)| run_drop(config, k, s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut it = results.into_iter();
    config
        .procedures
        .iter()
        .map(|&k| pool(k, it.by_ref().take(config.n_drops as usize).collect()))
        .collect()
}
