//! Two-target max-min placement, with and without the distance constraint.

use super::{bisect_decreasing, gated, subset_result, Branch, PlacementResult};
use crate::error::SolverError;
use crate::geometry::{circle_circle_intersection, distance, TAU_GEO};
use crate::scenario::Scenario;

pub(crate) fn check_distinct(s: &Scenario, i: usize, j: usize) -> Result<f64, SolverError> {
    let d = distance(s.targets[i].position, s.targets[j].position);
    if i == j || d <= TAU_GEO {
        return Err(SolverError::CoincidentTargets(s.targets[i].id, s.targets[j].id));
    }
    Ok(d)
}

/// Optimal placement for targets `i` and `j` alone under the distance
/// constraint. Value and active set cover the pair only.
pub fn solve_pair(s: &Scenario, i: usize, j: usize) -> Result<PlacementResult, SolverError> {
    if s.is_gated() {
        return gated::solve_pair_gated(s, i, j);
    }
    let dist = check_distinct(s, i, j)?;
    let obj = s.objective();
    let eps = s.epsilon();
    let (xi, xj) = (s.targets[i].position, s.targets[j].position);
    let idx = [i, j];

    if dist < 2.0 * eps + TAU_GEO {
        let mut pts = circle_circle_intersection(xi, eps, xj, eps).unwrap_or_default();
        if pts.is_empty() {
            pts.push(xi + (xj - xi) * 0.5);
        }
        let z = pts.remove(0);
        return Ok(subset_result(s, &obj, &idx, z, Branch::TwoTargetMidpoint, &idx, pts));
    }

    let u = (xj - xi) * (1.0 / dist);
    let fi = |d: f64| obj.crlb_at_distance(i, d);
    let fj = |d: f64| obj.crlb_at_distance(j, d);

    if fi(eps) <= fj(dist - eps) {
        let z = xi + u * eps;
        return Ok(subset_result(s, &obj, &idx, z, Branch::TwoTargetEpsilonEdge, &idx, Vec::new()));
    }
    if fj(eps) <= fi(dist - eps) {
        let z = xj - u * eps;
        return Ok(subset_result(s, &obj, &idx, z, Branch::TwoTargetEpsilonEdge, &idx, Vec::new()));
    }
    let d = bisect_decreasing(eps, dist - eps, |d| fi(d) - fj(dist - d));
    let z = xi + u * d;
    Ok(subset_result(s, &obj, &idx, z, Branch::TwoTargetEqualizer, &idx, Vec::new()))
}

/// Equalizer on the open segment between `i` and `j`, ignoring the distance
/// constraint.
pub fn solve_pair_unconstrained(s: &Scenario, i: usize, j: usize) -> Result<PlacementResult, SolverError> {
    let dist = check_distinct(s, i, j)?;
    let obj = s.objective();
    let (xi, xj) = (s.targets[i].position, s.targets[j].position);
    let u = (xj - xi) * (1.0 / dist);
    let d = bisect_decreasing(0.0, dist, |d| obj.crlb_at_distance(i, d) - obj.crlb_at_distance(j, dist - d));
    let idx = [i, j];
    Ok(subset_result(s, &obj, &idx, xi + u * d, Branch::TwoTargetEqualizer, &idx, Vec::new()))
}
