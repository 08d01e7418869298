//! Per-UE radio channel: pathloss with a spatially consistent LOS state,
//! correlated log-normal shadowing, AR(1) fast fading per beam, the grid-of-
//! beams antenna pattern, and downlink SINR against the strongest beam of
//! every other cell.
//!
//! The pathloss follows the UMa LOS/NLOS formulas at a single carrier; the
//! stochastic large-scale parameters of the full 3D model are replaced by
//! the simpler processes below.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::rng::{self, Subsystem};
use crate::scenario::{angle_diff_deg, BeamId, CellId, CellLayout, Point, UeId};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LosMode {
    /// Distance-based LOS probability with a spatially correlated state.
    Stochastic,
    AlwaysLos,
    AlwaysNlos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub carrier_ghz: f64,
    pub bandwidth_mhz: f64,
    pub noise_figure_db: f64,
    pub los_mode: LosMode,
    pub los_decorrelation_m: f64,
    pub shadowing_enabled: bool,
    pub sigma_los_db: f64,
    pub sigma_nlos_db: f64,
    pub shadow_decorrelation_m: f64,
    pub fading_enabled: bool,
    pub fading_std_db: f64,
    /// Overrides the Doppler-derived fading correlation time.
    pub fading_corr_ms: Option<f64>,
    pub fading_clip_db: f64,
    pub meas_error_std_db: f64,
    /// Linear scaling of interferer power (1.0 = every interferer always on).
    pub interferer_load: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            carrier_ghz: 28.0,
            bandwidth_mhz: 20.16,
            noise_figure_db: 9.0,
            los_mode: LosMode::Stochastic,
            los_decorrelation_m: 50.0,
            shadowing_enabled: true,
            sigma_los_db: 4.0,
            sigma_nlos_db: 6.0,
            shadow_decorrelation_m: 37.0,
            fading_enabled: true,
            fading_std_db: 3.0,
            fading_corr_ms: None,
            fading_clip_db: 10.0,
            meas_error_std_db: 0.5,
            interferer_load: 1.0,
        }
    }
}

impl ChannelConfig {
    /// Thermal noise power over the configured bandwidth (dBm).
    pub fn noise_floor_dbm(&self) -> f64 {
        -174.0 + 10.0 * (self.bandwidth_mhz * 1e6).log10() + self.noise_figure_db
    }

    /// Fast-fading correlation time in ms. Defaults to the Clarke coherence
    /// time `9 / (16 pi f_d)` for the given UE speed.
    pub fn fading_correlation_ms(&self, speed_ms: f64) -> f64 {
        if let Some(t) = self.fading_corr_ms {
            return t;
        }
        let doppler_hz = speed_ms * self.carrier_ghz * 1e9 / SPEED_OF_LIGHT;
        if doppler_hz <= 0.0 {
            return f64::INFINITY;
        }
        1e3 * 9.0 / (16.0 * std::f64::consts::PI * doppler_hz)
    }
}

/// Parametric beam: quadratic roll-off off boresight, floored at the
/// front-to-back ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPattern {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub beamwidth_az_deg: f64,
    pub beamwidth_el_deg: f64,
    pub max_gain_dbi: f64,
    pub front_to_back_db: f64,
}

impl BeamPattern {
    pub fn of(layout: &CellLayout, cell: CellId, beam: BeamId) -> Self {
        let g = &layout.beams;
        BeamPattern {
            azimuth_deg: g.global_azimuth_deg(layout.cell(cell).boresight_deg, beam),
            elevation_deg: g.elevation(beam),
            beamwidth_az_deg: g.beamwidth_az_deg,
            beamwidth_el_deg: g.beamwidth_el_deg,
            max_gain_dbi: g.max_gain_dbi,
            front_to_back_db: g.front_to_back_db,
        }
    }
}

/// Antenna gain (dBi) toward a UE seen at `bearing` / `elevation` (radians).
pub fn beam_gain(beam: &BeamPattern, bearing_rad: f64, elevation_rad: f64) -> f64 {
    let d_az = angle_diff_deg(bearing_rad.to_degrees(), beam.azimuth_deg);
    let d_el = elevation_rad.to_degrees() - beam.elevation_deg;
    let roll_off = 12.0
        * ((d_az / beam.beamwidth_az_deg).powi(2) + (d_el / beam.beamwidth_el_deg).powi(2));
    beam.max_gain_dbi - roll_off.min(beam.front_to_back_db)
}

/// UMa-style pathloss (dB) at 3-D distance `d3d`.
pub fn pathloss_db(carrier_ghz: f64, d3d: f64, los: bool, ue_height_m: f64) -> f64 {
    let f = 20.0 * carrier_ghz.log10();
    if los {
        28.0 + 22.0 * d3d.log10() + f
    } else {
        13.54 + 39.08 * d3d.log10() + f - 0.6 * (ue_height_m - 1.5)
    }
}

/// UMa LOS probability for a UE below 13 m.
pub fn los_probability(d2d: f64) -> f64 {
    if d2d <= 18.0 {
        1.0
    } else {
        18.0 / d2d + (-d2d / 63.0).exp() * (1.0 - 18.0 / d2d)
    }
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// A raw SSB RSRP measurement, including measurement error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawRsrpSample {
    pub ue: UeId,
    pub cell: CellId,
    pub beam: BeamId,
    pub rsrp_dbm: f64,
    pub t_ms: u64,
}

/// Channel state of one UE at one SSB instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSnapshot {
    pub t_ms: u64,
    pub n_beams: usize,
    /// True received power per (cell, beam), row-major by cell.
    pub power_dbm: Vec<f64>,
    /// What the UE measures: `power_dbm` plus measurement error.
    pub measured_dbm: Vec<f64>,
    pub los: Vec<bool>,
}

impl ChannelSnapshot {
    pub fn n_cells(&self) -> usize {
        self.power_dbm.len() / self.n_beams
    }

    pub fn power(&self, cell: CellId, beam: BeamId) -> f64 {
        self.power_dbm[cell.0 as usize * self.n_beams + beam.0 as usize]
    }

    pub fn cell_powers(&self, cell: CellId) -> &[f64] {
        let s = cell.0 as usize * self.n_beams;
        &self.power_dbm[s..s + self.n_beams]
    }

    /// Strongest beam of `cell` by true received power.
    pub fn best_beam(&self, cell: CellId) -> (BeamId, f64) {
        let (i, p) = self
            .cell_powers(cell)
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc });
        (BeamId(i as u32), p)
    }

    /// Strongest cell by true received power on its best beam.
    pub fn strongest_cell(&self) -> CellId {
        let mut best = (CellId(0), f64::NEG_INFINITY);
        for c in 0..self.n_cells() {
            let (_, p) = self.best_beam(CellId(c as u32));
            if p > best.1 {
                best = (CellId(c as u32), p);
            }
        }
        best.0
    }

    pub fn raw_sample(&self, ue: UeId, cell: CellId, beam: BeamId) -> RawRsrpSample {
        RawRsrpSample {
            ue,
            cell,
            beam,
            rsrp_dbm: self.measured_dbm[cell.0 as usize * self.n_beams + beam.0 as usize],
            t_ms: self.t_ms,
        }
    }
}

fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// SINR (dB) of `serving`/`beam` against the strongest beam of every other
/// cell plus thermal noise.
pub fn serving_sinr(
    snapshot: &ChannelSnapshot,
    serving: CellId,
    beam: BeamId,
    noise_dbm: f64,
    interferer_load: f64,
) -> f64 {
    let signal = dbm_to_mw(snapshot.power(serving, beam));
    let mut interference = 0.0;
    for c in 0..snapshot.n_cells() as u32 {
        if c == serving.0 {
            continue;
        }
        interference += dbm_to_mw(snapshot.best_beam(CellId(c)).1);
    }
    let denom = interference * interferer_load + dbm_to_mw(noise_dbm);
    10.0 * (signal / denom).log10()
}

const LOS_FIELD_TERMS: usize = 64;

/// Smooth zero-mean, unit-variance Gaussian field over the plane (random
/// Fourier features) with correlation `exp(-d^2 / decorrelation^2)`. One
/// field per site, shared by all UEs, decides the LOS state: a location is
/// in LOS of the site when `Phi(field) < p_LOS(d)`.
#[derive(Debug, Clone)]
struct LosField {
    terms: Vec<(f64, f64, f64)>,
}

impl LosField {
    fn new(rng: &mut ChaCha8Rng, decorrelation_m: f64) -> Self {
        // exp(-d^2 / (2 l^2)) reaches 1/e at d = sqrt(2) l.
        let scale = std::f64::consts::SQRT_2 / decorrelation_m;
        let terms = (0..LOS_FIELD_TERMS)
            .map(|_| {
                let wx: f64 = rng.sample(StandardNormal);
                let wy: f64 = rng.sample(StandardNormal);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                (wx * scale, wy * scale, phase)
            })
            .collect();
        LosField { terms }
    }

    fn value(&self, p: Point) -> f64 {
        let sum: f64 = self.terms.iter().map(|(wx, wy, ph)| (wx * p.x + wy * p.y + ph).cos()).sum();
        sum * (2.0 / LOS_FIELD_TERMS as f64).sqrt()
    }
}

/// Evolving channel of one UE toward every (cell, beam).
#[derive(Debug, Clone)]
pub struct UeChannel {
    ue: UeId,
    n_beams: usize,
    shadow_z: Vec<f64>,
    los_fields: Vec<LosField>,
    fading_db: Vec<f64>,
    shadow_rng: ChaCha8Rng,
    fading_rng: ChaCha8Rng,
    meas_rng: ChaCha8Rng,
}

impl UeChannel {
    pub fn new(layout: &CellLayout, config: &ChannelConfig, ue: UeId, drop_seed: u64) -> Self {
        let n_sites = layout.sites.len();
        let n_links = layout.n_cells() * layout.n_beams();
        let mut shadow_rng = rng::stream(drop_seed, Subsystem::Shadowing, ue.0);
        let mut los_rng = rng::stream(drop_seed, Subsystem::LineOfSight, rng::DROP_WIDE);
        let mut fading_rng = rng::stream(drop_seed, Subsystem::Fading, ue.0);
        let meas_rng = rng::stream(drop_seed, Subsystem::MeasurementError, ue.0);
        let shadow_z = (0..n_sites).map(|_| shadow_rng.sample(StandardNormal)).collect();
        let los_fields = (0..n_sites)
            .map(|_| LosField::new(&mut los_rng, config.los_decorrelation_m))
            .collect();
        let fading_db = (0..n_links)
            .map(|_| {
                let z: f64 = fading_rng.sample(StandardNormal);
                clip(z * config.fading_std_db, config.fading_clip_db)
            })
            .collect();
        UeChannel {
            ue,
            n_beams: layout.n_beams(),
            shadow_z,
            los_fields,
            fading_db,
            shadow_rng,
            fading_rng,
            meas_rng,
        }
    }

    pub fn ue(&self) -> UeId {
        self.ue
    }

    /// Advances the stochastic processes by `moved_m` metres / `dt_ms` and
    /// returns the channel at `t_ms` for a UE at `position`.
    #[allow(clippy::too_many_arguments)]
    pub fn advance(
        &mut self,
        layout: &CellLayout,
        config: &ChannelConfig,
        position: Point,
        ue_height_m: f64,
        speed_ms: f64,
        moved_m: f64,
        dt_ms: f64,
        t_ms: u64,
    ) -> ChannelSnapshot {
        if moved_m > 0.0 {
            let rho_s = (-moved_m / config.shadow_decorrelation_m).exp();
            let ks = (1.0 - rho_s * rho_s).sqrt();
            for z in &mut self.shadow_z {
                let n: f64 = self.shadow_rng.sample(StandardNormal);
                *z = rho_s * *z + ks * n;
            }
        }
        if dt_ms > 0.0 {
            let tau = config.fading_correlation_ms(speed_ms);
            let rho = if tau.is_finite() { (-dt_ms / tau).exp() } else { 1.0 };
            let k = (1.0 - rho * rho).sqrt();
            for f in &mut self.fading_db {
                let n: f64 = self.fading_rng.sample(StandardNormal);
                *f = clip(rho * *f + k * config.fading_std_db * n, config.fading_clip_db);
            }
        }

        let height_diff = layout.bs_height_m - ue_height_m;
        let n_cells = layout.n_cells();
        let mut power = Vec::with_capacity(n_cells * self.n_beams);
        let mut los_flags = Vec::with_capacity(layout.sites.len());
        let mut site_geom = Vec::with_capacity(layout.sites.len());
        for (s, site) in layout.sites.iter().enumerate() {
            let (d2d, bearing) = layout.wrap_distance(*site, position);
            let d2d = d2d.max(1.0);
            let d3d = d2d.hypot(height_diff);
            let los = match config.los_mode {
                LosMode::AlwaysLos => true,
                LosMode::AlwaysNlos => false,
                LosMode::Stochastic => {
                    std_normal_cdf(self.los_fields[s].value(position)) < los_probability(d2d)
                }
            };
            let mut loss = pathloss_db(config.carrier_ghz, d3d, los, ue_height_m);
            if config.shadowing_enabled {
                let sigma = if los { config.sigma_los_db } else { config.sigma_nlos_db };
                loss += sigma * self.shadow_z[s];
            }
            let elevation = -(height_diff.atan2(d2d));
            los_flags.push(los);
            site_geom.push((loss, bearing, elevation));
        }
        for cell in &layout.cells {
            let (loss, bearing, elevation) = site_geom[cell.site];
            for b in 0..self.n_beams {
                let pattern = BeamPattern::of(layout, cell.id, BeamId(b as u32));
                let mut p = layout.tx_power_dbm + beam_gain(&pattern, bearing, elevation) - loss;
                if config.fading_enabled {
                    p += self.fading_db[cell.id.0 as usize * self.n_beams + b];
                }
                power.push(p);
            }
        }
        let measured = if config.meas_error_std_db > 0.0 {
            power
                .iter()
                .map(|p| {
                    let n: f64 = self.meas_rng.sample(StandardNormal);
                    p + config.meas_error_std_db * n
                })
                .collect()
        } else {
            power.clone()
        };
        ChannelSnapshot {
            t_ms,
            n_beams: self.n_beams,
            power_dbm: power,
            measured_dbm: measured,
            los: los_flags,
        }
    }
}

fn clip(v: f64, limit: f64) -> f64 {
    if limit > 0.0 {
        v.clamp(-limit, limit)
    } else {
        v
    }
}
