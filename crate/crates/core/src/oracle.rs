//! Brute-force verifier: dense grid search over the feasible set, local
//! refinement and full objective surfaces.
//!
//! Grid points are visited row-major (`y` outer, `x` inner). Rows run in
//! parallel but the reduction walks rows in order and keeps the first strict
//! maximum, so results do not depend on thread count.

use rayon::prelude::*;

use crate::error::SolverError;
use crate::geometry::Point2;
use crate::scenario::{Objective, Scenario};
use crate::solver::{Branch, PlacementResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point2,
    pub max: Point2,
}

impl BoundingBox {
    pub fn new(min: Point2, max: Point2) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub bounds: BoundingBox,
    pub resolution: f64,
    pub respect_epsilon: bool,
}

impl GridSpec {
    pub const DEFAULT_RESOLUTION: f64 = 0.01;
    pub const COARSE_RESOLUTION: f64 = 0.05;

    pub fn new(bounds: BoundingBox, resolution: f64, respect_epsilon: bool) -> Result<Self, SolverError> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(SolverError::InvalidGrid(format!("resolution {resolution}")));
        }
        if !(bounds.width() > 0.0 && bounds.height() > 0.0) || !bounds.min.is_finite() || !bounds.max.is_finite() {
            return Err(SolverError::InvalidGrid("degenerate bounding box".into()));
        }
        Ok(Self { bounds, resolution, respect_epsilon })
    }

    /// Bounding box of the targets inflated by `max(2 epsilon, 2 m)`.
    pub fn around_targets(s: &Scenario, resolution: f64) -> Result<Self, SolverError> {
        if s.n_targets() == 0 {
            return Err(SolverError::NoTargets);
        }
        let pad = (2.0 * s.epsilon()).max(2.0);
        let (mut lo, mut hi) = (s.targets[0].position, s.targets[0].position);
        for t in &s.targets {
            lo = Point2::new(lo.x.min(t.position.x), lo.y.min(t.position.y));
            hi = Point2::new(hi.x.max(t.position.x), hi.y.max(t.position.y));
        }
        let bounds = BoundingBox::new(Point2::new(lo.x - pad, lo.y - pad), Point2::new(hi.x + pad, hi.y + pad));
        Self::new(bounds, resolution, true)
    }

    /// Number of grid columns and rows.
    pub fn dims(&self) -> (usize, usize) {
        let n = |len: f64| (len / self.resolution + 1e-9).floor() as usize + 1;
        (n(self.bounds.width()), n(self.bounds.height()))
    }

    pub fn point(&self, ix: usize, iy: usize) -> Point2 {
        Point2::new(
            self.bounds.min.x + ix as f64 * self.resolution,
            self.bounds.min.y + iy as f64 * self.resolution,
        )
    }
}

#[inline]
fn cell_value(obj: &Objective<'_>, spec: &GridSpec, z: Point2) -> f64 {
    if spec.respect_epsilon {
        obj.constrained(z)
    } else {
        obj.value(z)
    }
}

fn row_values(obj: &Objective<'_>, spec: &GridSpec, iy: usize, nx: usize) -> Vec<f64> {
    (0..nx).map(|ix| cell_value(obj, spec, spec.point(ix, iy))).collect()
}

/// Row-major index of the first strict maximum, ignoring masked cells.
fn first_argmax(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in values.enumerate() {
        if v == f64::NEG_INFINITY || v.is_nan() {
            continue;
        }
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    best
}

/// Exhaustive search over the grid; masked cells never win.
pub fn grid_search(s: &Scenario, spec: &GridSpec) -> Result<PlacementResult, SolverError> {
    let obj = s.objective();
    let (nx, ny) = spec.dims();
    let rows: Vec<Option<(usize, f64)>> = (0..ny)
        .into_par_iter()
        .map(|iy| first_argmax(row_values(&obj, spec, iy, nx).into_iter()))
        .collect();
    let mut best: Option<(usize, usize, f64)> = None;
    for (iy, r) in rows.into_iter().enumerate() {
        if let Some((ix, v)) = r {
            if best.map_or(true, |(_, _, b)| v > b) {
                best = Some((ix, iy, v));
            }
        }
    }
    let (ix, iy, _) = best.ok_or(SolverError::NoFeasiblePoint)?;
    Ok(crate::solver::full_result(s, &obj, spec.point(ix, iy), Branch::GridFallback, &[], Vec::new()))
}

/// Repeated local grid searches around the incumbent. Round `r` uses spacing
/// `step / factor^(r+1)` over a half-width of `step / factor^r`; the incumbent
/// only moves on strict improvement of the constrained objective.
pub fn refine(s: &Scenario, z0: Point2, step: f64, rounds: usize, factor: u32) -> PlacementResult {
    let obj = s.objective();
    let mut best = z0;
    let mut best_v = obj.constrained(z0);
    let f = factor.max(2) as i64;
    let mut half = step;
    for _ in 0..rounds {
        let h = half / f as f64;
        let center = best;
        for a in -f..=f {
            for b in -f..=f {
                let z = Point2::new(center.x + b as f64 * h, center.y + a as f64 * h);
                let v = obj.constrained(z);
                if v > best_v {
                    best = z;
                    best_v = v;
                }
            }
        }
        half = h;
    }
    crate::solver::full_result(s, &obj, best, Branch::GridFallback, &[], Vec::new())
}

/// Objective surface on a grid. Masked cells hold `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub spec: GridSpec,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `y` outer.
    pub values: Vec<f64>,
}

impl FieldMap {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// First strict maximum over unmasked cells.
    pub fn argmax(&self) -> Option<(Point2, f64)> {
        first_argmax(self.values.iter().copied())
            .map(|(k, v)| (self.spec.point(k % self.nx, k / self.nx), v))
    }

    /// Smallest and largest finite values.
    pub fn finite_range(&self) -> Option<(f64, f64)> {
        let mut it = self.values.iter().copied().filter(|v| v.is_finite());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }
}

pub fn field_map(s: &Scenario, spec: &GridSpec) -> FieldMap {
    let obj = s.objective();
    let (nx, ny) = spec.dims();
    let values: Vec<f64> = (0..ny)
        .into_par_iter()
        .flat_map_iter(|iy| row_values(&obj, spec, iy, nx))
        .collect();
    FieldMap { spec: *spec, nx, ny, values }
}

/// Largest CRLB gradient magnitude over feasible points of the box.
pub fn lipschitz_bound(s: &Scenario) -> f64 {
    let jp = &s.jamming;
    let d = s.epsilon();
    s.targets
        .iter()
        .map(|t| t.r * t.k * jp.pj * jp.nu * d.powf(-jp.nu - 1.0))
        .fold(0.0, f64::max)
}

/// Acceptable gap between the solver and a grid of spacing `h`.
pub fn oracle_slack(s: &Scenario, h: f64) -> f64 {
    (lipschitz_bound(s) * h).max(1e-4)
}
