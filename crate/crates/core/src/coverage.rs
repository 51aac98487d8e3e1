//! Geometry and fitness engine.
//!
//! A monitoring area is discretised into a grid of cells whose centers act
//! as target points. A deployment is a fixed list of sensor coordinates
//! sharing one sensing radius; a control vector switches individual sensors
//! on or off. This module turns (deployment, control vector, grid) into
//! covered area, coverage rate, node-use rate, a combined scalar objective
//! and coverage-hole maps.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::rng::RngStream;

/// Discretised 2-D monitoring area. Target points are cell centers.
#[derive(Clone, Debug, PartialEq)]
pub struct MonitoringGrid {
    width: f64,
    height: f64,
    cells_x: usize,
    cells_y: usize,
    cell_dx: f64,
    cell_dy: f64,
}

impl MonitoringGrid {
    /// Build a grid of `cells_x` x `cells_y` equal cells spanning
    /// `width` x `height` meters.
    pub fn new(width: f64, height: f64, cells_x: usize, cells_y: usize) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) || !(height > 0.0 && height.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "grid dimensions must be positive and finite, got {width} x {height}"
            )));
        }
        if cells_x == 0 || cells_y == 0 {
            return Err(CoreError::InvalidArgument(
                "grid must have at least one cell per axis".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            cells_x,
            cells_y,
            cell_dx: width / cells_x as f64,
            cell_dy: height / cells_y as f64,
        })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn cells_x(&self) -> usize {
        self.cells_x
    }

    pub fn cells_y(&self) -> usize {
        self.cells_y
    }

    pub fn cell_dx(&self) -> f64 {
        self.cell_dx
    }

    pub fn cell_dy(&self) -> f64 {
        self.cell_dy
    }

    pub fn cell_count(&self) -> usize {
        self.cells_x * self.cells_y
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_dx * self.cell_dy
    }

    pub fn total_area(&self) -> f64 {
        self.width * self.height
    }

    /// Center of cell `(i, j)`, `i` along x and `j` along y.
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            (i as f64 + 0.5) * self.cell_dx,
            (j as f64 + 0.5) * self.cell_dy,
        )
    }
}

/// One sensor position inside the monitoring area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sensor {
    pub x: f64,
    pub y: f64,
}

/// Fixed sensor layout: positions plus the shared sensing radius.
///
/// Sensor order is significant; bit `i` of every [`ControlVector`] refers
/// to `sensors()[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Deployment {
    sensors: Vec<Sensor>,
    radius: f64,
}

#[derive(Serialize, Deserialize)]
struct DeploymentWire {
    radius: f64,
    sensors: Vec<[f64; 2]>,
}

impl Deployment {
    pub fn new(sensors: Vec<Sensor>, radius: f64) -> Result<Self> {
        if sensors.is_empty() {
            return Err(CoreError::InvalidArgument(
                "deployment needs at least one sensor".into(),
            ));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "sensing radius must be positive and finite, got {radius}"
            )));
        }
        if let Some(s) = sensors.iter().find(|s| !s.x.is_finite() || !s.y.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "sensor coordinates must be finite, got ({}, {})",
                s.x, s.y
            )));
        }
        Ok(Self { sensors, radius })
    }

    pub fn sensors(&self) -> &[Sensor] {
        &self.sensors
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    /// Serialize as `{"radius": r, "sensors": [[x,y],...]}`.
    pub fn to_json_string(&self) -> String {
        let wire = DeploymentWire {
            radius: self.radius,
            sensors: self.sensors.iter().map(|s| [s.x, s.y]).collect(),
        };
        serde_json::to_string_pretty(&wire).expect("deployment serialization cannot fail")
    }

    /// Parse the `{"radius": r, "sensors": [[x,y],...]}` format.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let wire: DeploymentWire = serde_json::from_str(json)
            .map_err(|e| CoreError::InvalidArgument(format!("bad deployment JSON: {e}")))?;
        Deployment::new(
            wire.sensors
                .into_iter()
                .map(|[x, y]| Sensor { x, y })
                .collect(),
            wire.radius,
        )
    }
}

/// N-bit activation string; bit `i` turns sensor `i` on.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ControlVector {
    bits: Vec<bool>,
}

impl ControlVector {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(CoreError::InvalidArgument(
                "control vector must not be empty".into(),
            ));
        }
        Ok(Self { bits })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_bits(vec![false; n.max(0)])
    }

    pub fn ones(n: usize) -> Result<Self> {
        Self::from_bits(vec![true; n])
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    /// Number of active sensors, `|S'|`.
    pub fn active_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for ControlVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for ControlVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ControlVector({self})")
    }
}

impl FromStr for ControlVector {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(CoreError::InvalidArgument(format!(
                    "control vector may only contain '0' and '1', got {other:?}"
                ))),
            })
            .collect::<Result<Vec<bool>>>()?;
        ControlVector::from_bits(bits)
    }
}

/// How the two objectives are collapsed into one scalar.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// `f1^2 / f2`: rewards coverage quadratically per unit of node use.
    #[default]
    SquaredPerUse,
    /// `max(f1, 1 - f2)`: the better of coverage rate and idle-node rate.
    /// Kept for comparison; degenerate near empty activations, so not the
    /// default.
    BestOfPair,
}

impl Objective {
    /// Scalarise `(f1, f2)`. An empty active set is always worth 0 so that
    /// a network covering nothing can never win.
    pub fn combined(&self, f1: f64, f2: f64, active_count: usize) -> f64 {
        if active_count == 0 {
            return 0.0;
        }
        match self {
            Objective::SquaredPerUse => f1 * f1 / f2,
            Objective::BestOfPair => f1.max(1.0 - f2),
        }
    }
}

/// Denominator used for the coverage rate `f1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverageBasis {
    /// `f1 = covered_area / (width * height)`.
    #[default]
    TotalArea,
    /// `f1 = covered_area / area reachable with every sensor active`.
    /// Reported coverage then measures how much of the deployment's
    /// attainable footprint the activation recovers, which is the scale
    /// on which activation subsets can actually approach 100%.
    ReachableArea,
}

/// Fitness of one activation: covered area, both objective rates, the
/// combined scalar and the active-sensor count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub covered_area: f64,
    pub f1: f64,
    pub f2: f64,
    pub combined: f64,
    pub active_count: usize,
}

/// Uncovered cells and their 4-neighbourhood connected components.
#[derive(Clone, Debug, PartialEq)]
pub struct HoleReport {
    /// Uncovered `(i, j)` cell indices, sorted lexicographically.
    pub uncovered_cells: Vec<(usize, usize)>,
    /// Disjoint connected components partitioning `uncovered_cells`,
    /// ordered by their lexicographically smallest cell; cells within a
    /// component are sorted.
    pub components: Vec<Vec<(usize, usize)>>,
}

impl HoleReport {
    pub fn uncovered_count(&self) -> usize {
        self.uncovered_cells.len()
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }
}

/// True iff point `(px, py)` lies inside the closed sensing disk of `s`.
pub fn is_covered(px: f64, py: f64, s: &Sensor, r: f64) -> bool {
    let dx = px - s.x;
    let dy = py - s.y;
    dx * dx + dy * dy <= r * r
}

fn check_dimension(d: &Deployment, cv: &ControlVector) -> Result<()> {
    if cv.len() != d.len() {
        return Err(CoreError::DimensionMismatch {
            expected: d.len(),
            actual: cv.len(),
        });
    }
    Ok(())
}

/// Row-major map of which cell centers are covered by at least one active
/// sensor. Index `j * cells_x + i` holds cell `(i, j)`.
pub fn coverage_bitmap(d: &Deployment, cv: &ControlVector, g: &MonitoringGrid) -> Result<Vec<bool>> {
    check_dimension(d, cv)?;
    let active: Vec<&Sensor> = d
        .sensors()
        .iter()
        .zip(cv.iter())
        .filter_map(|(s, on)| on.then_some(s))
        .collect();
    let mut map = vec![false; g.cell_count()];
    for j in 0..g.cells_y() {
        for i in 0..g.cells_x() {
            let (cx, cy) = g.cell_center(i, j);
            if active.iter().any(|s| is_covered(cx, cy, s, d.radius())) {
                map[j * g.cells_x() + i] = true;
            }
        }
    }
    Ok(map)
}

/// Union area covered by the active sensors, in square meters.
///
/// Counts each cell whose center is covered exactly once, so overlapping
/// disks are never double-counted and the result is capped at the total
/// area.
pub fn covered_area(d: &Deployment, cv: &ControlVector, g: &MonitoringGrid) -> Result<f64> {
    let map = coverage_bitmap(d, cv, g)?;
    let covered = map.iter().filter(|&&c| c).count();
    Ok(covered as f64 * g.cell_area())
}

/// Evaluate an activation against the default objective (`f1^2 / f2`) with
/// `f1` measured against the total area. Pure function of its inputs.
pub fn evaluate(d: &Deployment, cv: &ControlVector, g: &MonitoringGrid) -> Result<FitnessReport> {
    let area = covered_area(d, cv, g)?;
    let active = cv.active_count();
    let f1 = area / g.total_area();
    let f2 = active as f64 / d.len() as f64;
    Ok(FitnessReport {
        covered_area: area,
        f1,
        f2,
        combined: Objective::SquaredPerUse.combined(f1, f2, active),
        active_count: active,
    })
}

/// Identify coverage holes: uncovered cells grouped into 4-neighbourhood
/// connected components. Deterministic for fixed inputs.
pub fn find_coverage_holes(
    d: &Deployment,
    cv: &ControlVector,
    g: &MonitoringGrid,
) -> Result<HoleReport> {
    let map = coverage_bitmap(d, cv, g)?;
    holes_from_bitmap(&map, g)
}

/// Component labelling over the uncovered cells of a coverage bitmap.
pub fn holes_from_bitmap(map: &[bool], g: &MonitoringGrid) -> Result<HoleReport> {
    if map.len() != g.cell_count() {
        return Err(CoreError::DimensionMismatch {
            expected: g.cell_count(),
            actual: map.len(),
        });
    }
    let (nx, ny) = (g.cells_x(), g.cells_y());
    let idx = |i: usize, j: usize| j * nx + i;
    let mut uncovered = Vec::new();
    let mut seen = vec![false; map.len()];
    let mut components = Vec::new();

    for j in 0..ny {
        for i in 0..nx {
            if map[idx(i, j)] {
                continue;
            }
            uncovered.push((i, j));
            if seen[idx(i, j)] {
                continue;
            }
            // BFS flood fill of one hole component.
            let mut component = Vec::new();
            let mut queue = VecDeque::new();
            seen[idx(i, j)] = true;
            queue.push_back((i, j));
            while let Some((ci, cj)) = queue.pop_front() {
                component.push((ci, cj));
                let mut visit = |ni: usize, nj: usize| {
                    if !map[idx(ni, nj)] && !seen[idx(ni, nj)] {
                        seen[idx(ni, nj)] = true;
                        queue.push_back((ni, nj));
                    }
                };
                if ci > 0 {
                    visit(ci - 1, cj);
                }
                if ci + 1 < nx {
                    visit(ci + 1, cj);
                }
                if cj > 0 {
                    visit(ci, cj - 1);
                }
                if cj + 1 < ny {
                    visit(ci, cj + 1);
                }
            }
            component.sort_unstable();
            components.push(component);
        }
    }
    uncovered.sort_unstable();
    components.sort_unstable_by_key(|c| c[0]);
    Ok(HoleReport {
        uncovered_cells: uncovered,
        components,
    })
}

/// Draw `n` sensors independently and uniformly over the grid area.
/// Deterministic given the seed.
pub fn random_deployment(n: usize, g: &MonitoringGrid, seed: u64) -> Result<Deployment> {
    if n == 0 {
        return Err(CoreError::InvalidArgument(
            "deployment needs at least one sensor".into(),
        ));
    }
    let mut rng = RngStream::new(seed);
    let sensors = (0..n)
        .map(|_| Sensor {
            x: rng.gen::<f64>() * g.width(),
            y: rng.gen::<f64>() * g.height(),
        })
        .collect();
    // Radius is not part of placement; callers set it on the returned value.
    Deployment::new(sensors, 1.0)
}

/// As [`random_deployment`] but with the sensing radius attached.
pub fn random_deployment_with_radius(
    n: usize,
    g: &MonitoringGrid,
    radius: f64,
    seed: u64,
) -> Result<Deployment> {
    let d = random_deployment(n, g, seed)?;
    Deployment::new(d.sensors().to_vec(), radius)
}

/// Per-sensor bitsets of covered cells for fast repeated evaluation.
///
/// Construction enumerates every (cell, sensor) pair once through
/// [`is_covered`]; evaluation of an activation is then a union of
/// precomputed masks plus a popcount, which keeps whole optimizer runs in
/// the millisecond range.
#[derive(Clone, Debug)]
pub struct CoverageModel {
    deployment: Deployment,
    grid: MonitoringGrid,
    objective: Objective,
    basis: CoverageBasis,
    words_per_mask: usize,
    masks: Vec<Vec<u64>>,
    reachable_cells: usize,
}

impl CoverageModel {
    pub fn new(
        deployment: Deployment,
        grid: MonitoringGrid,
        objective: Objective,
        basis: CoverageBasis,
    ) -> Result<Self> {
        for s in deployment.sensors() {
            if !(0.0..=grid.width()).contains(&s.x) || !(0.0..=grid.height()).contains(&s.y) {
                return Err(CoreError::InvalidArgument(format!(
                    "sensor ({}, {}) lies outside the {} x {} area",
                    s.x,
                    s.y,
                    grid.width(),
                    grid.height()
                )));
            }
        }
        let cells = grid.cell_count();
        let words = cells.div_ceil(64);
        let mut masks = Vec::with_capacity(deployment.len());
        let mut union = vec![0u64; words];
        for s in deployment.sensors() {
            let mut mask = vec![0u64; words];
            // Only cells inside the disk's bounding box can be covered.
            let r = deployment.radius();
            let i_lo = (((s.x - r) / grid.cell_dx() - 0.5).floor().max(0.0)) as usize;
            let j_lo = (((s.y - r) / grid.cell_dy() - 0.5).floor().max(0.0)) as usize;
            let i_hi = ((s.x + r) / grid.cell_dx()).ceil() as usize;
            let j_hi = ((s.y + r) / grid.cell_dy()).ceil() as usize;
            for j in j_lo..=j_hi.min(grid.cells_y().saturating_sub(1)) {
                for i in i_lo..=i_hi.min(grid.cells_x().saturating_sub(1)) {
                    let (cx, cy) = grid.cell_center(i, j);
                    if is_covered(cx, cy, s, r) {
                        let cell = j * grid.cells_x() + i;
                        mask[cell / 64] |= 1 << (cell % 64);
                    }
                }
            }
            for (u, m) in union.iter_mut().zip(&mask) {
                *u |= m;
            }
            masks.push(mask);
        }
        let reachable_cells = union.iter().map(|w| w.count_ones() as usize).sum();
        Ok(Self {
            deployment,
            grid,
            objective,
            basis,
            words_per_mask: words,
            masks,
            reachable_cells,
        })
    }

    pub fn deployment(&self) -> &Deployment {
        &self.deployment
    }

    pub fn grid(&self) -> &MonitoringGrid {
        &self.grid
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn basis(&self) -> CoverageBasis {
        self.basis
    }

    pub fn n_sensors(&self) -> usize {
        self.deployment.len()
    }

    /// Cells covered when every sensor is active.
    pub fn reachable_cells(&self) -> usize {
        self.reachable_cells
    }

    /// Number of cell centers covered by the active union.
    pub fn covered_cells(&self, cv: &ControlVector) -> Result<usize> {
        check_dimension(&self.deployment, cv)?;
        let mut union = vec![0u64; self.words_per_mask];
        for (mask, on) in self.masks.iter().zip(cv.iter()) {
            if on {
                for (u, m) in union.iter_mut().zip(mask) {
                    *u |= m;
                }
            }
        }
        Ok(union.iter().map(|w| w.count_ones() as usize).sum())
    }

    /// Evaluate an activation under this model's objective and coverage
    /// basis. Agrees exactly with the naive cell loop on covered cells.
    pub fn evaluate(&self, cv: &ControlVector) -> Result<FitnessReport> {
        let covered = self.covered_cells(cv)?;
        let area = covered as f64 * self.grid.cell_area();
        let f1 = match self.basis {
            CoverageBasis::TotalArea => area / self.grid.total_area(),
            CoverageBasis::ReachableArea => {
                if self.reachable_cells == 0 {
                    0.0
                } else {
                    covered as f64 / self.reachable_cells as f64
                }
            }
        };
        let active = cv.active_count();
        let f2 = active as f64 / self.deployment.len() as f64;
        Ok(FitnessReport {
            covered_area: area,
            f1,
            f2,
            combined: self.objective.combined(f1, f2, active),
            active_count: active,
        })
    }
}

/// Render a coverage bitmap as plain-text PGM (P2): one pixel per cell,
/// 255 covered, 0 uncovered. Rows run top-down from the highest y cell.
pub fn pgm_from_bitmap(map: &[bool], g: &MonitoringGrid) -> Result<String> {
    if map.len() != g.cell_count() {
        return Err(CoreError::DimensionMismatch {
            expected: g.cell_count(),
            actual: map.len(),
        });
    }
    let mut out = format!("P2\n{} {}\n255\n", g.cells_x(), g.cells_y());
    for j in (0..g.cells_y()).rev() {
        let row: Vec<&str> = (0..g.cells_x())
            .map(|i| if map[j * g.cells_x() + i] { "255" } else { "0" })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// Render a coverage bitmap as an ASCII grid: '#' covered, '.' hole.
/// Same orientation as [`pgm_from_bitmap`].
pub fn ascii_from_bitmap(map: &[bool], g: &MonitoringGrid) -> Result<String> {
    if map.len() != g.cell_count() {
        return Err(CoreError::DimensionMismatch {
            expected: g.cell_count(),
            actual: map.len(),
        });
    }
    let mut out = String::with_capacity((g.cells_x() + 1) * g.cells_y());
    for j in (0..g.cells_y()).rev() {
        for i in 0..g.cells_x() {
            out.push(if map[j * g.cells_x() + i] { '#' } else { '.' });
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid_100() -> MonitoringGrid {
        MonitoringGrid::new(100.0, 100.0, 100, 100).unwrap()
    }

    /// Independent oracle: direct per-cell, per-sensor membership loop.
    fn brute_force_covered_cells(
        d: &Deployment,
        cv: &ControlVector,
        g: &MonitoringGrid,
    ) -> usize {
        let mut count = 0;
        for j in 0..g.cells_y() {
            for i in 0..g.cells_x() {
                let (cx, cy) = g.cell_center(i, j);
                let hit = d
                    .sensors()
                    .iter()
                    .zip(cv.iter())
                    .any(|(s, on)| on && is_covered(cx, cy, s, d.radius()));
                if hit {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn grid_invariants_hold() {
        let g = MonitoringGrid::new(100.0, 50.0, 200, 25).unwrap();
        assert_relative_eq!(g.cells_x() as f64 * g.cell_dx(), g.width());
        assert_relative_eq!(g.cells_y() as f64 * g.cell_dy(), g.height());
        assert!(MonitoringGrid::new(0.0, 1.0, 1, 1).is_err());
        assert!(MonitoringGrid::new(1.0, 1.0, 0, 1).is_err());
        assert!(MonitoringGrid::new(-3.0, 1.0, 4, 4).is_err());
    }

    #[test]
    fn point_in_disk_membership() {
        let s = Sensor { x: 50.0, y: 50.0 };
        assert!(is_covered(50.0, 55.0, &s, 10.0)); // distance 5
        assert!(!is_covered(50.0, 61.0, &s, 10.0)); // distance 11
        assert!(is_covered(50.0, 60.0, &s, 10.0)); // boundary, closed disk
    }

    #[test]
    fn covered_area_all_off_is_zero() {
        let g = grid_100();
        let d = Deployment::new(vec![Sensor { x: 50.0, y: 50.0 }], 10.0).unwrap();
        let cv = ControlVector::zeros(1).unwrap();
        assert_eq!(covered_area(&d, &cv, &g).unwrap(), 0.0);
    }

    #[test]
    fn covered_area_single_disk_matches_frozen_oracle_count() {
        // Brute-force enumeration of all 10_000 cell centers within
        // distance 10 of (50, 50) yields 316 cells (near pi * r^2 = 314.16).
        let g = grid_100();
        let d = Deployment::new(vec![Sensor { x: 50.0, y: 50.0 }], 10.0).unwrap();
        let cv = ControlVector::ones(1).unwrap();
        assert_eq!(brute_force_covered_cells(&d, &cv, &g), 316);
        assert_eq!(covered_area(&d, &cv, &g).unwrap(), 316.0 * g.cell_area());
    }

    #[test]
    fn covered_area_dense_tiling_caps_at_total_area() {
        let g = MonitoringGrid::new(20.0, 20.0, 20, 20).unwrap();
        let mut sensors = Vec::new();
        for x in 0..4 {
            for y in 0..4 {
                sensors.push(Sensor {
                    x: 2.5 + 5.0 * x as f64,
                    y: 2.5 + 5.0 * y as f64,
                });
            }
        }
        let d = Deployment::new(sensors, 6.0).unwrap();
        let cv = ControlVector::ones(16).unwrap();
        assert_eq!(covered_area(&d, &cv, &g).unwrap(), g.total_area());
    }

    #[test]
    fn covered_area_rejects_dimension_mismatch() {
        let g = grid_100();
        let d = Deployment::new(vec![Sensor { x: 1.0, y: 1.0 }], 5.0).unwrap();
        let cv = ControlVector::zeros(3).unwrap();
        assert!(matches!(
            covered_area(&d, &cv, &g),
            Err(CoreError::DimensionMismatch {
                expected: 1,
                actual: 3
            })
        ));
    }

    #[test]
    fn combined_objective_matches_hand_arithmetic() {
        // f1 = 0.991, 42 of 100 active: f2 = 0.42, f = 0.991^2 / 0.42.
        let combined = Objective::SquaredPerUse.combined(0.991, 0.42, 42);
        assert_relative_eq!(combined, 0.991 * 0.991 / 0.42);
        assert_relative_eq!(combined, 2.3383, epsilon = 1e-4);
    }

    #[test]
    fn evaluate_empty_activation_is_all_zero() {
        let g = grid_100();
        let d = random_deployment_with_radius(10, &g, 10.0, 3).unwrap();
        let cv = ControlVector::zeros(10).unwrap();
        let rep = evaluate(&d, &cv, &g).unwrap();
        assert_eq!(rep.f1, 0.0);
        assert_eq!(rep.f2, 0.0);
        assert_eq!(rep.combined, 0.0);
        assert_eq!(rep.active_count, 0);
    }

    #[test]
    fn evaluate_full_activation_has_unit_node_use() {
        let g = grid_100();
        let d = random_deployment_with_radius(100, &g, 10.0, 5).unwrap();
        let cv = ControlVector::ones(100).unwrap();
        let rep = evaluate(&d, &cv, &g).unwrap();
        assert_eq!(rep.f2, 1.0);
        assert_relative_eq!(rep.f1, rep.covered_area / g.total_area());
    }

    #[test]
    fn evaluate_is_pure() {
        let g = grid_100();
        let d = random_deployment_with_radius(20, &g, 10.0, 11).unwrap();
        let cv: ControlVector = "10110011001100110011".parse().unwrap();
        let a = evaluate(&d, &cv, &g).unwrap();
        let b = evaluate(&d, &cv, &g).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn best_of_pair_objective_and_empty_rule() {
        assert_relative_eq!(Objective::BestOfPair.combined(0.6, 0.9, 9), 0.6);
        assert_relative_eq!(Objective::BestOfPair.combined(0.1, 0.2, 2), 0.8);
        assert_eq!(Objective::BestOfPair.combined(0.0, 0.0, 0), 0.0);
    }

    #[test]
    fn holes_all_off_is_one_component() {
        let g = MonitoringGrid::new(10.0, 10.0, 10, 10).unwrap();
        let d = Deployment::new(vec![Sensor { x: 5.0, y: 5.0 }], 2.0).unwrap();
        let cv = ControlVector::zeros(1).unwrap();
        let holes = find_coverage_holes(&d, &cv, &g).unwrap();
        assert_eq!(holes.uncovered_count(), 100);
        assert_eq!(holes.component_count(), 1);
    }

    #[test]
    fn holes_full_coverage_is_empty() {
        let g = MonitoringGrid::new(10.0, 10.0, 10, 10).unwrap();
        let d = Deployment::new(vec![Sensor { x: 5.0, y: 5.0 }], 20.0).unwrap();
        let cv = ControlVector::ones(1).unwrap();
        let holes = find_coverage_holes(&d, &cv, &g).unwrap();
        assert_eq!(holes.uncovered_count(), 0);
        assert_eq!(holes.component_count(), 0);
    }

    #[test]
    fn holes_complement_the_covered_set() {
        let g = grid_100();
        let d = Deployment::new(vec![Sensor { x: 50.0, y: 50.0 }], 10.0).unwrap();
        let cv = ControlVector::ones(1).unwrap();
        let holes = find_coverage_holes(&d, &cv, &g).unwrap();
        assert_eq!(holes.uncovered_count(), 10_000 - 316);
        // Partition: uncovered plus covered equals all cells, no overlap.
        let map = coverage_bitmap(&d, &cv, &g).unwrap();
        for &(i, j) in &holes.uncovered_cells {
            assert!(!map[j * g.cells_x() + i]);
        }
        let covered = map.iter().filter(|&&c| c).count();
        assert_eq!(covered + holes.uncovered_count(), g.cell_count());
    }

    #[test]
    fn random_deployment_is_replayable_and_in_bounds() {
        let g = grid_100();
        let a = random_deployment(100, &g, 77).unwrap();
        let b = random_deployment(100, &g, 77).unwrap();
        assert_eq!(a, b);
        for s in a.sensors() {
            assert!((0.0..=g.width()).contains(&s.x));
            assert!((0.0..=g.height()).contains(&s.y));
        }
        let single = random_deployment(1, &g, 5).unwrap();
        assert_eq!(single.len(), 1);
        assert!(random_deployment(0, &g, 5).is_err());
    }

    #[test]
    fn model_matches_naive_path_and_brute_force() {
        let g = MonitoringGrid::new(50.0, 40.0, 50, 40).unwrap();
        for seed in 0..5u64 {
            let d = random_deployment_with_radius(12, &g, 7.5, seed).unwrap();
            let model = CoverageModel::new(
                d.clone(),
                g.clone(),
                Objective::SquaredPerUse,
                CoverageBasis::TotalArea,
            )
            .unwrap();
            let mut rng = RngStream::new(seed + 100);
            for _ in 0..8 {
                let bits: Vec<bool> = (0..12).map(|_| rng.gen_bool(0.5)).collect();
                let cv = ControlVector::from_bits(bits).unwrap();
                let brute = brute_force_covered_cells(&d, &cv, &g);
                assert_eq!(model.covered_cells(&cv).unwrap(), brute);
                assert_eq!(
                    covered_area(&d, &cv, &g).unwrap(),
                    brute as f64 * g.cell_area()
                );
                assert_eq!(model.evaluate(&cv).unwrap(), evaluate(&d, &cv, &g).unwrap());
            }
        }
    }

    #[test]
    fn reachable_basis_rescales_f1_only() {
        let g = grid_100();
        let d = random_deployment_with_radius(30, &g, 10.0, 9).unwrap();
        let total = CoverageModel::new(
            d.clone(),
            g.clone(),
            Objective::SquaredPerUse,
            CoverageBasis::TotalArea,
        )
        .unwrap();
        let reach = CoverageModel::new(
            d,
            g,
            Objective::SquaredPerUse,
            CoverageBasis::ReachableArea,
        )
        .unwrap();
        let cv: ControlVector = "101010101010101010101010101010".parse().unwrap();
        let rt = total.evaluate(&cv).unwrap();
        let rr = reach.evaluate(&cv).unwrap();
        assert_eq!(rt.covered_area, rr.covered_area);
        assert_eq!(rt.f2, rr.f2);
        assert!(rr.f1 >= rt.f1);
        let all = ControlVector::ones(30).unwrap();
        assert_relative_eq!(reach.evaluate(&all).unwrap().f1, 1.0);
    }

    #[test]
    fn model_rejects_out_of_area_sensor() {
        let g = grid_100();
        let d = Deployment::new(vec![Sensor { x: 120.0, y: 10.0 }], 10.0).unwrap();
        assert!(CoverageModel::new(
            d,
            g,
            Objective::SquaredPerUse,
            CoverageBasis::TotalArea
        )
        .is_err());
    }

    #[test]
    fn control_vector_parses_and_round_trips() {
        let cv: ControlVector = "0101".parse().unwrap();
        assert_eq!(cv.len(), 4);
        assert_eq!(cv.active_count(), 2);
        assert_eq!(cv.to_string(), "0101");
        assert!("01x1".parse::<ControlVector>().is_err());
        assert!("".parse::<ControlVector>().is_err());
    }

    #[test]
    fn deployment_json_round_trip() {
        let d = Deployment::new(
            vec![Sensor { x: 1.5, y: 2.25 }, Sensor { x: 30.0, y: 4.0 }],
            10.0,
        )
        .unwrap();
        let json = d.to_json_string();
        let back = Deployment::from_json_str(&json).unwrap();
        assert_eq!(d, back);
        assert!(Deployment::from_json_str("{\"radius\": 0, \"sensors\": [[1,2]]}").is_err());
        assert!(Deployment::from_json_str("{\"radius\": 5, \"sensors\": []}").is_err());
        assert!(Deployment::from_json_str("not json").is_err());
    }

    #[test]
    fn pgm_and_ascii_render_expected_cells() {
        let g = MonitoringGrid::new(3.0, 2.0, 3, 2).unwrap();
        // Cells (i, j): cover (0,0) and (2,1) only.
        let mut map = vec![false; 6];
        map[0] = true; // (0,0)
        map[1 * 3 + 2] = true; // (2,1)
        let pgm = pgm_from_bitmap(&map, &g).unwrap();
        assert_eq!(pgm, "P2\n3 2\n255\n0 0 255\n255 0 0\n");
        let ascii = ascii_from_bitmap(&map, &g).unwrap();
        assert_eq!(ascii, "..#\n#..\n");
    }
}
