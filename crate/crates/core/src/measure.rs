//! The three-stage measurement chain.
//!
//! UE side: a moving-average FIR over the last `N_L1` SSB samples of every
//! beam, consolidation of each cell to its strongest beam, and an IIR (L3)
//! filter per cell. Network side: an IIR (L2) filter applied to the beam
//! entries of the periodic L1 report. All filtering happens in dB.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSnapshot, RawRsrpSample};
use crate::error::MeasureError;
use crate::scenario::{BeamId, CellId, UeId};

/// Forgetting factor of an IIR measurement filter with coefficient `k`.
pub fn alpha_from_k(k: f64) -> f64 {
    0.5f64.powf(k / 4.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureConfig {
    pub n_l1: usize,
    pub k_l3: f64,
    /// Number of beam entries in an L1 report.
    pub report_k: usize,
    pub report_period_ms: u64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            n_l1: 4,
            k_l3: 4.0,
            report_k: 4,
            report_period_ms: 20,
        }
    }
}

/// Moving average over the most recent `window` samples of one beam.
///
/// Samples must arrive exactly one period apart; until the window fills the
/// output is the mean of what is available.
#[derive(Debug, Clone, PartialEq)]
pub struct L1FilterState {
    window: usize,
    period_ms: u64,
    buf: VecDeque<f64>,
    last_t: Option<u64>,
}

impl L1FilterState {
    pub fn new(window: usize, period_ms: u64) -> Self {
        assert!(window >= 1, "L1 window must hold at least one sample");
        L1FilterState {
            window,
            period_ms,
            buf: VecDeque::with_capacity(window),
            last_t: None,
        }
    }

    pub fn update(&mut self, sample: &RawRsrpSample) -> Result<f64, MeasureError> {
        self.push(sample.t_ms, sample.rsrp_dbm)
    }

    pub fn push(&mut self, t_ms: u64, rsrp_dbm: f64) -> Result<f64, MeasureError> {
        if let Some(last) = self.last_t {
            let expected = last + self.period_ms;
            if t_ms != expected {
                return Err(MeasureError::OutOfOrder { got: t_ms, expected });
            }
        }
        if self.buf.len() == self.window {
            self.buf.pop_front();
        }
        self.buf.push_back(rsrp_dbm);
        self.last_t = Some(t_ms);
        Ok(self.value().expect("just pushed"))
    }

    pub fn value(&self) -> Option<f64> {
        if self.buf.is_empty() {
            None
        } else {
            Some(self.buf.iter().sum::<f64>() / self.buf.len() as f64)
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        self.buf.iter().copied()
    }

    /// Forgets the window, e.g. after a gap in measurements.
    pub fn reset(&mut self) {
        self.buf.clear();
        self.last_t = None;
    }
}

/// Strongest beam of a cell.
pub fn consolidate_cell(beams: &[f64]) -> Result<f64, MeasureError> {
    beams
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or(MeasureError::EmptyBeamSet)
}

/// First-order IIR `out = a*in + (1-a)*prev`, bootstrapped with the first input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IirFilterState {
    alpha: f64,
    state: Option<f64>,
}

pub type L3FilterState = IirFilterState;
pub type L2FilterState = IirFilterState;

impl IirFilterState {
    pub fn new(k: f64) -> Self {
        IirFilterState::with_alpha(alpha_from_k(k))
    }

    pub fn with_alpha(alpha: f64) -> Self {
        IirFilterState { alpha, state: None }
    }

    /// Starts from an existing filtered value instead of the first input.
    pub fn with_previous(k: f64, previous: f64) -> Self {
        IirFilterState {
            alpha: alpha_from_k(k),
            state: Some(previous),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn value(&self) -> Option<f64> {
        self.state
    }

    pub fn update(&mut self, input: f64) -> f64 {
        let out = match self.state {
            None => input,
            Some(prev) => self.alpha * input + (1.0 - self.alpha) * prev,
        };
        self.state = Some(out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub cell: CellId,
    pub beam: BeamId,
    pub rsrp_dbm: f64,
}

/// Periodic L1 beam report: strongest entries first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Report {
    pub ue: UeId,
    pub t_ms: u64,
    pub entries: Vec<ReportEntry>,
}

impl L1Report {
    /// Best reported beam of `cell`, if any.
    pub fn best_of(&self, cell: CellId) -> Option<ReportEntry> {
        self.entries
            .iter()
            .filter(|e| e.cell == cell)
            .copied()
            .reduce(|a, b| if b.rsrp_dbm > a.rsrp_dbm { b } else { a })
    }
}

fn sort_entries(entries: &mut [ReportEntry]) {
    entries.sort_by(|a, b| {
        b.rsrp_dbm
            .total_cmp(&a.rsrp_dbm)
            .then(a.cell.cmp(&b.cell))
            .then(a.beam.cmp(&b.beam))
    });
}

/// Builds the report of the `k` strongest beams over the serving and
/// prepared cells. For `k >= 2` the serving cell's strongest beam is always
/// included, displacing the weakest selected entry if needed.
pub fn build_l1_report<F>(
    ue: UeId,
    t_ms: u64,
    serving: CellId,
    prepared: &[CellId],
    k: usize,
    n_beams: usize,
    l1: F,
) -> L1Report
where
    F: Fn(CellId, BeamId) -> Option<f64>,
{
    let mut candidates = Vec::new();
    let mut cells = vec![serving];
    cells.extend(prepared.iter().copied().filter(|c| *c != serving));
    for cell in cells {
        for b in 0..n_beams {
            let beam = BeamId(b as u32);
            if let Some(rsrp_dbm) = l1(cell, beam) {
                candidates.push(ReportEntry { cell, beam, rsrp_dbm });
            }
        }
    }
    sort_entries(&mut candidates);
    let serving_best = candidates.iter().find(|e| e.cell == serving).copied();
    let mut entries: Vec<ReportEntry> = candidates.into_iter().take(k).collect();
    if let Some(best) = serving_best {
        if k >= 2 && !entries.iter().any(|e| e.cell == serving) {
            entries.pop();
            entries.push(best);
            sort_entries(&mut entries);
        }
    }
    L1Report { ue, t_ms, entries }
}

/// Network-side IIR filtering of reported beams, one state per (cell, beam).
#[derive(Debug, Clone, PartialEq)]
pub struct L2Filters {
    k: f64,
    states: BTreeMap<(CellId, BeamId), L2FilterState>,
}

impl L2Filters {
    pub fn new(k: f64) -> Self {
        L2Filters {
            k,
            states: BTreeMap::new(),
        }
    }

    pub fn filter_report(&mut self, report: &L1Report) -> L1Report {
        let mut entries: Vec<ReportEntry> = report
            .entries
            .iter()
            .map(|e| {
                let st = self
                    .states
                    .entry((e.cell, e.beam))
                    .or_insert_with(|| IirFilterState::new(self.k));
                ReportEntry {
                    rsrp_dbm: st.update(e.rsrp_dbm),
                    ..*e
                }
            })
            .collect();
        sort_entries(&mut entries);
        L1Report {
            ue: report.ue,
            t_ms: report.t_ms,
            entries,
        }
    }

    pub fn state(&self, cell: CellId, beam: BeamId) -> Option<f64> {
        self.states.get(&(cell, beam)).and_then(|s| s.value())
    }

    pub fn reset(&mut self) {
        self.states.clear();
    }
}

/// All UE-side filter state of one UE.
#[derive(Debug, Clone)]
pub struct UeMeasurements {
    n_beams: usize,
    l1: Vec<L1FilterState>,
    l1_value: Vec<f64>,
    l1_cell: Vec<f64>,
    l1_best_beam: Vec<BeamId>,
    l3: Vec<L3FilterState>,
    measured: bool,
}

impl UeMeasurements {
    pub fn new(n_cells: usize, n_beams: usize, config: &MeasureConfig, ssb_period_ms: u64) -> Self {
        UeMeasurements {
            n_beams,
            l1: vec![L1FilterState::new(config.n_l1, ssb_period_ms); n_cells * n_beams],
            l1_value: vec![f64::NAN; n_cells * n_beams],
            l1_cell: vec![f64::NAN; n_cells],
            l1_best_beam: vec![BeamId(0); n_cells],
            l3: vec![IirFilterState::new(config.k_l3); n_cells],
            measured: false,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.l3.len()
    }

    /// Runs one SSB instant of raw measurements through L1, consolidation and L3.
    pub fn update(&mut self, snapshot: &ChannelSnapshot) -> Result<(), MeasureError> {
        for (i, f) in self.l1.iter_mut().enumerate() {
            self.l1_value[i] = f.push(snapshot.t_ms, snapshot.measured_dbm[i])?;
        }
        for c in 0..self.l3.len() {
            let beams = &self.l1_value[c * self.n_beams..(c + 1) * self.n_beams];
            let mut best = 0;
            for (b, v) in beams.iter().enumerate() {
                if *v > beams[best] {
                    best = b;
                }
            }
            let cell_value = consolidate_cell(beams)?;
            self.l1_cell[c] = cell_value;
            self.l1_best_beam[c] = BeamId(best as u32);
            self.l3[c].update(cell_value);
        }
        self.measured = true;
        Ok(())
    }

    /// Clears the L1 windows; L3 state is kept.
    pub fn reset_l1(&mut self) {
        for f in &mut self.l1 {
            f.reset();
        }
    }

    pub fn has_measurements(&self) -> bool {
        self.measured
    }

    pub fn l1(&self, cell: CellId, beam: BeamId) -> Option<f64> {
        let v = self.l1_value[cell.0 as usize * self.n_beams + beam.0 as usize];
        (!v.is_nan()).then_some(v)
    }

    pub fn l1_cell(&self, cell: CellId) -> f64 {
        self.l1_cell[cell.0 as usize]
    }

    pub fn best_beam(&self, cell: CellId) -> BeamId {
        self.l1_best_beam[cell.0 as usize]
    }

    pub fn l3(&self, cell: CellId) -> f64 {
        self.l3[cell.0 as usize].value().unwrap_or(f64::NAN)
    }

    /// Cell with the strongest consolidated L1 value.
    pub fn strongest_l1_cell(&self) -> CellId {
        let mut best = 0;
        for (c, v) in self.l1_cell.iter().enumerate() {
            if *v > self.l1_cell[best] {
                best = c;
            }
        }
        CellId(best as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feed(f: &mut L1FilterState, values: &[f64]) -> f64 {
        let mut out = f64::NAN;
        for (i, v) in values.iter().enumerate() {
            out = f.push(20 * i as u64, *v).unwrap();
        }
        out
    }

    #[test]
    fn l1_window_one_is_identity() {
        let mut f = L1FilterState::new(1, 20);
        for (i, v) in [-80.0, -95.5, -71.25].iter().enumerate() {
            assert_eq!(f.push(20 * i as u64, *v).unwrap(), *v);
        }
    }

    #[test]
    fn l1_window_two_averages_in_db() {
        let mut f = L1FilterState::new(2, 20);
        assert!((feed(&mut f, &[-84.0, -80.0]) + 82.0).abs() <= 1e-9);
    }

    #[test]
    fn l1_constant_input() {
        for n in 1..8 {
            let mut f = L1FilterState::new(n, 20);
            assert!((feed(&mut f, &[-90.0; 11]) + 90.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn l1_warm_up_uses_available_samples() {
        let mut f = L1FilterState::new(4, 20);
        assert_eq!(feed(&mut f, &[-80.0, -90.0]), -85.0);
    }

    #[test]
    fn l1_rejects_out_of_order_samples() {
        let mut f = L1FilterState::new(4, 20);
        f.push(40, -80.0).unwrap();
        assert_eq!(
            f.push(40, -81.0),
            Err(MeasureError::OutOfOrder { got: 40, expected: 60 })
        );
        assert!(f.push(100, -81.0).is_err());
        f.reset();
        assert!(f.push(100, -81.0).is_ok());
    }

    #[test]
    fn consolidation_takes_the_max() {
        assert_eq!(consolidate_cell(&[-80.0, -85.0, -92.0]).unwrap(), -80.0);
        assert_eq!(consolidate_cell(&[-77.0]).unwrap(), -77.0);
        assert_eq!(consolidate_cell(&[-70.0, -70.0]).unwrap(), -70.0);
        assert_eq!(consolidate_cell(&[]), Err(MeasureError::EmptyBeamSet));
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha_from_k(0.0), 1.0);
        assert!((alpha_from_k(3.0) - 0.594_603_557_501_360_5).abs() < 1e-12);
        assert_eq!(alpha_from_k(4.0), 0.5);
        assert_eq!(alpha_from_k(8.0), 0.25);
    }

    #[test]
    fn iir_substitutions() {
        let mut f = IirFilterState::with_previous(0.0, -80.0);
        assert_eq!(f.update(-70.0), -70.0);
        let mut f = IirFilterState::with_previous(4.0, -80.0);
        assert!((f.update(-70.0) + 75.0).abs() <= 1e-9);
        let mut f = IirFilterState::with_previous(3.0, -80.0);
        let expected = -80.0 + alpha_from_k(3.0) * 10.0;
        assert!((f.update(-70.0) - expected).abs() <= 1e-9);
        assert!((expected + 74.0540).abs() < 1e-4);
    }

    #[test]
    fn iir_bootstraps_from_first_input() {
        let mut f = IirFilterState::new(8.0);
        assert_eq!(f.value(), None);
        assert_eq!(f.update(-93.0), -93.0);
    }

    fn l1_table(values: &[(u32, u32, f64)]) -> impl Fn(CellId, BeamId) -> Option<f64> + '_ {
        move |c, b| {
            values
                .iter()
                .find(|(vc, vb, _)| *vc == c.0 && *vb == b.0)
                .map(|(_, _, v)| *v)
        }
    }

    #[test]
    fn report_k_one_is_the_strongest_beam() {
        let t = [(0, 0, -90.0), (0, 1, -85.0), (1, 0, -84.0), (1, 1, -88.0)];
        for serving in [CellId(0), CellId(1)] {
            let other = CellId(1 - serving.0);
            let r = build_l1_report(UeId(0), 0, serving, &[other], 1, 2, l1_table(&t));
            assert_eq!(r.entries, vec![ReportEntry { cell: CellId(1), beam: BeamId(0), rsrp_dbm: -84.0 }]);
        }
    }

    #[test]
    fn report_forces_serving_best_beam_in() {
        // Serving best beam is weaker than k prepared beams.
        let t = [
            (0, 0, -95.0),
            (0, 1, -99.0),
            (1, 0, -80.0),
            (1, 1, -81.0),
            (2, 0, -82.0),
            (2, 1, -83.0),
        ];
        let r = build_l1_report(UeId(0), 0, CellId(0), &[CellId(1), CellId(2)], 3, 2, l1_table(&t));
        let got: Vec<(u32, u32)> = r.entries.iter().map(|e| (e.cell.0, e.beam.0)).collect();
        assert_eq!(got, vec![(1, 0), (1, 1), (0, 0)]);
    }

    #[test]
    fn report_with_fewer_beams_than_k_lists_all_sorted() {
        let t = [(0, 0, -90.0), (1, 0, -84.0)];
        let r = build_l1_report(UeId(0), 0, CellId(0), &[CellId(1)], 8, 1, l1_table(&t));
        assert_eq!(r.entries.len(), 2);
        assert_eq!(r.entries[0].rsrp_dbm, -84.0);
        assert_eq!(r.entries[1].rsrp_dbm, -90.0);
    }

    #[test]
    fn report_excludes_unprepared_cells() {
        let t = [(0, 0, -90.0), (1, 0, -84.0), (2, 0, -70.0)];
        let r = build_l1_report(UeId(0), 0, CellId(0), &[CellId(1)], 4, 1, l1_table(&t));
        assert!(r.entries.iter().all(|e| e.cell != CellId(2)));
    }

    #[test]
    fn l2_passthrough_and_bootstrap() {
        let report = L1Report {
            ue: UeId(0),
            t_ms: 0,
            entries: vec![ReportEntry { cell: CellId(1), beam: BeamId(2), rsrp_dbm: -80.0 }],
        };
        let mut k0 = L2Filters::new(0.0);
        assert_eq!(k0.filter_report(&report), report);
        let mut k3 = L2Filters::new(3.0);
        assert_eq!(k3.filter_report(&report), report);
        let next = L1Report {
            t_ms: 20,
            entries: vec![ReportEntry { rsrp_dbm: -70.0, ..report.entries[0] }],
            ..report.clone()
        };
        let out = k3.filter_report(&next);
        assert!((out.entries[0].rsrp_dbm - (-80.0 + alpha_from_k(3.0) * 10.0)).abs() <= 1e-9);
    }

    #[test]
    fn l2_leaves_absent_beams_untouched() {
        let mut f = L2Filters::new(3.0);
        let a = ReportEntry { cell: CellId(1), beam: BeamId(0), rsrp_dbm: -80.0 };
        let b = ReportEntry { cell: CellId(2), beam: BeamId(0), rsrp_dbm: -90.0 };
        f.filter_report(&L1Report { ue: UeId(0), t_ms: 0, entries: vec![a, b] });
        f.filter_report(&L1Report {
            ue: UeId(0),
            t_ms: 20,
            entries: vec![ReportEntry { rsrp_dbm: -60.0, ..a }],
        });
        assert_eq!(f.state(CellId(2), BeamId(0)), Some(-90.0));
    }
}
