//! Deployment geometry: a hexagonal 7-site, 3-sector layout with a grid of
//! beams per cell, straight-line UE motion, and a 7-image wrap-around.
//!
//! Angles follow the mathematical convention: azimuth 0° points along +x and
//! grows counter-clockwise. Elevation is negative below the horizon.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BeamId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UeId(pub u32);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for BeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for UeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn distance(self, o: Point) -> f64 {
        (self - o).norm()
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// Grid-of-beams azimuths, relative to the sector with 90° on boresight.
pub const DEFAULT_BEAM_AZIMUTH_DEG: [f64; 14] = [
    36.6, 50.0, 63.3, 76.6, 90.0, 103.3, 116.6, 130.0, 143.3, 42.0, 60.0, 90.0, 120.0, 138.0,
];

/// Grid-of-beams elevations (negative = downtilt).
pub const DEFAULT_BEAM_ELEVATION_DEG: [f64; 14] = [
    -13.0, -10.0, -10.0, -10.0, -11.0, -10.0, -10.0, -10.0, -13.0, -30.0, -33.0, -36.0, -33.0, -30.0,
];

#[derive(Debug, Clone, PartialEq)]
pub struct BeamGrid {
    pub azimuth_deg: Vec<f64>,
    pub elevation_deg: Vec<f64>,
    pub beamwidth_az_deg: f64,
    pub beamwidth_el_deg: f64,
    pub max_gain_dbi: f64,
    pub front_to_back_db: f64,
}

impl Default for BeamGrid {
    fn default() -> Self {
        BeamGrid {
            azimuth_deg: DEFAULT_BEAM_AZIMUTH_DEG.to_vec(),
            elevation_deg: DEFAULT_BEAM_ELEVATION_DEG.to_vec(),
            beamwidth_az_deg: 13.3,
            beamwidth_el_deg: 15.0,
            max_gain_dbi: 29.0,
            front_to_back_db: 30.0,
        }
    }
}

impl BeamGrid {
    pub fn len(&self) -> usize {
        self.azimuth_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.azimuth_deg.is_empty()
    }

    /// Global pointing azimuth of beam `k` for a sector with the given boresight.
    pub fn global_azimuth_deg(&self, sector_boresight_deg: f64, beam: BeamId) -> f64 {
        normalize_deg(sector_boresight_deg + self.azimuth_deg[beam.0 as usize] - 90.0)
    }

    pub fn elevation(&self, beam: BeamId) -> f64 {
        self.elevation_deg[beam.0 as usize]
    }
}

/// Wraps an angle into [0, 360).
pub fn normalize_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Wraps an angle difference into (-180, 180].
pub fn angle_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_sites: usize,
    pub inter_site_distance_m: f64,
    pub sector_azimuths_deg: Vec<f64>,
    pub tx_power_dbm: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub beams: BeamGrid,
    /// Fixed start position for every UE instead of a random drop.
    pub ue_start: Option<Point>,
    /// Fixed heading for every UE (degrees) instead of a random one.
    pub ue_heading_deg: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_sites: 7,
            inter_site_distance_m: 200.0,
            sector_azimuths_deg: vec![0.0, 120.0, 240.0],
            tx_power_dbm: 44.0,
            bs_height_m: 25.0,
            ue_height_m: 1.5,
            beams: BeamGrid::default(),
            ue_start: None,
            ue_heading_deg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: CellId,
    pub site: usize,
    pub boresight_deg: f64,
}

/// Sites, cells and the wrap-around lattice. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLayout {
    pub sites: Vec<Point>,
    pub cells: Vec<Cell>,
    pub cells_per_site: usize,
    pub inter_site_distance_m: f64,
    pub tx_power_dbm: f64,
    pub bs_height_m: f64,
    pub beams: BeamGrid,
    /// Translation vectors of the six wrap images of the cluster.
    wrap_shifts: [Point; 6],
}

pub fn build_layout(config: &ScenarioConfig) -> Result<CellLayout, ConfigError> {
    let isd = config.inter_site_distance_m;
    if !(isd.is_finite() && isd > 0.0) {
        return Err(ConfigError::invalid(
            "scenario.inter_site_distance_m",
            format!("must be positive, got {isd}"),
        ));
    }
    if config.n_sites != 7 {
        return Err(ConfigError::invalid(
            "scenario.n_sites",
            format!("only the 7-site hexagonal cluster is supported, got {}", config.n_sites),
        ));
    }
    if config.sector_azimuths_deg.is_empty() {
        return Err(ConfigError::invalid("scenario.sector_azimuths_deg", "no sectors"));
    }
    let beams = &config.beams;
    if beams.azimuth_deg.is_empty() || beams.azimuth_deg.len() != beams.elevation_deg.len() {
        return Err(ConfigError::invalid(
            "scenario.beams",
            "azimuth and elevation lists must be non-empty and of equal length",
        ));
    }
    if !(beams.beamwidth_az_deg > 0.0 && beams.beamwidth_el_deg > 0.0) {
        return Err(ConfigError::invalid("scenario.beamwidth", "beamwidths must be positive"));
    }

    let mut sites = vec![Point::ORIGIN];
    for k in 0..6 {
        let a = f64::from(k) * PI / 3.0;
        sites.push(Point::new(isd * a.cos(), isd * a.sin()));
    }

    let mut cells = Vec::with_capacity(sites.len() * config.sector_azimuths_deg.len());
    for site in 0..sites.len() {
        for &az in &config.sector_azimuths_deg {
            cells.push(Cell {
                id: CellId(cells.len() as u32),
                site,
                boresight_deg: normalize_deg(az),
            });
        }
    }

    // 7-site cluster lattice: 2*a1 + a2 with a1 = (D, 0), a2 = D(1/2, sqrt3/2),
    // and its rotations by multiples of 60 degrees.
    let base = Point::new(2.5 * isd, 3f64.sqrt() / 2.0 * isd);
    let mut wrap_shifts = [Point::ORIGIN; 6];
    for (k, shift) in wrap_shifts.iter_mut().enumerate() {
        let a = k as f64 * PI / 3.0;
        let (s, c) = a.sin_cos();
        *shift = Point::new(base.x * c - base.y * s, base.x * s + base.y * c);
    }

    Ok(CellLayout {
        sites,
        cells,
        cells_per_site: config.sector_azimuths_deg.len(),
        inter_site_distance_m: isd,
        tx_power_dbm: config.tx_power_dbm,
        bs_height_m: config.bs_height_m,
        beams: config.beams.clone(),
        wrap_shifts,
    })
}

impl CellLayout {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_beams(&self) -> usize {
        self.beams.len()
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.0 as usize]
    }

    pub fn cell_position(&self, id: CellId) -> Point {
        self.sites[self.cell(id).site]
    }

    pub fn wrap_shifts(&self) -> &[Point; 6] {
        &self.wrap_shifts
    }

    /// Whether `p` lies in the fundamental domain (Voronoi cell of the
    /// cluster lattice around the origin).
    pub fn contains(&self, p: Point) -> bool {
        self.wrap_shifts
            .iter()
            .all(|s| p.dot(*s) <= 0.5 * s.dot(*s) + 1e-9)
    }

    /// Maps any point into the wrap-around region by lattice translation.
    pub fn wrap_into_region(&self, mut p: Point) -> Point {
        for _ in 0..64 {
            let worst = self
                .wrap_shifts
                .iter()
                .map(|s| (p.dot(*s) / s.dot(*s), *s))
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .expect("six shifts");
            if worst.0 <= 0.5 {
                break;
            }
            p = p - worst.1;
        }
        p
    }

    /// Minimum distance from `a` to any of the 7 wrap images of `b`, with the
    /// bearing (radians) from `a` toward the chosen image.
    pub fn wrap_distance(&self, a: Point, b: Point) -> (f64, f64) {
        let mut best = b;
        let mut best_d = a.distance(b);
        for s in &self.wrap_shifts {
            let img = b + *s;
            let d = a.distance(img);
            if d < best_d {
                best_d = d;
                best = img;
            }
        }
        let v = best - a;
        (best_d, v.y.atan2(v.x))
    }

    /// Area of the wrap-around region (m^2).
    pub fn region_area(&self) -> f64 {
        7.0 * 3f64.sqrt() / 2.0 * self.inter_site_distance_m.powi(2)
    }

    /// Radius of a disc that encloses the wrap-around region.
    pub fn region_circumradius(&self) -> f64 {
        // Hexagon with inradius |shift|/2.
        self.wrap_shifts[0].norm() / 3f64.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeKinematics {
    pub position: Point,
    /// Radians.
    pub heading: f64,
    /// m/s.
    pub speed: f64,
    pub height: f64,
}

pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}

/// Constant-velocity step with wrap-around re-entry.
pub fn step_ue(ue: &UeKinematics, dt_s: f64, layout: &CellLayout) -> UeKinematics {
    if dt_s <= 0.0 {
        return *ue;
    }
    let d = ue.speed * dt_s;
    let moved = ue.position + Point::new(ue.heading.cos(), ue.heading.sin()) * d;
    UeKinematics {
        position: layout.wrap_into_region(moved),
        ..*ue
    }
}
