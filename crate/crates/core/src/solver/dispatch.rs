//! Full dispatch: distance-circle shortcut, pair shortcut, triple enumeration
//! and the constrained grid fallback.

use std::f64::consts::TAU;

use super::pair::solve_pair;
use super::triple::solve_unconstrained;
use super::{full_result, golden_max, index_pairs, Branch, PlacementResult};
use crate::crlb::TAU_VAL;
use crate::error::SolverError;
use crate::geometry::{circle_circle_intersection, distance, Point2};
use crate::oracle::{grid_search, refine, GridSpec};
use crate::scenario::{Objective, Scenario};

const CIRCLE_SAMPLES: usize = 3600;

/// Max-min placement for the whole scenario. The returned value always equals
/// the minimum CRLB at `z_opt`.
pub fn solve(s: &Scenario) -> Result<PlacementResult, SolverError> {
    if s.is_gated() {
        return super::gated::solve_gated(s);
    }
    let obj = s.objective();
    match s.n_targets() {
        0 => Err(SolverError::NoTargets),
        1 => {
            let z = Point2::from_polar(s.targets[0].position, s.epsilon(), 0.0);
            Ok(full_result(s, &obj, z, Branch::Prop1Circle, &[0], Vec::new()))
        }
        2 => {
            let r = solve_pair(s, 0, 1)?;
            Ok(full_result(s, &obj, r.z_opt, r.branch, &[0, 1], r.alternates))
        }
        _ => {
            if let Some((_, r)) = check_prop1(s) {
                return Ok(r);
            }
            let pairs = pair_results(s)?;
            if let Some(r) = check_prop2(s, &pairs) {
                return Ok(r);
            }
            let u = solve_unconstrained(s)?;
            if u.feasible {
                return Ok(u);
            }
            constrained_fallback(s, &obj, &pairs)
        }
    }
}

/// Distance-constrained solutions for every target pair, in lexicographic order.
pub fn pair_results(s: &Scenario) -> Result<Vec<((usize, usize), PlacementResult)>, SolverError> {
    index_pairs(s.n_targets())
        .into_iter()
        .map(|(i, j)| solve_pair(s, i, j).map(|r| ((i, j), r)))
        .collect()
}

/// Fires when some target's CRLB at distance `epsilon` is already no larger
/// than every other target's CRLB anywhere on that circle. Returns the target
/// index and the best feasible circle point.
pub fn check_prop1(s: &Scenario) -> Option<(usize, PlacementResult)> {
    let obj = s.objective();
    let eps = s.epsilon();
    let n = s.n_targets();
    for l in 0..n {
        let xl = s.targets[l].position;
        let own = obj.crlb_at_distance(l, eps);
        let holds = (0..n)
            .filter(|&i| i != l)
            .all(|i| own <= obj.crlb_at_distance(i, distance(s.targets[i].position, xl) + eps));
        if !holds {
            continue;
        }
        if let Some(z) = best_on_circle(&obj, xl, eps) {
            return Some((l, full_result(s, &obj, z, Branch::Prop1Circle, &[l], Vec::new())));
        }
    }
    None
}

/// Feasible point on the circle `(center, radius)` maximizing the constrained
/// objective, or `None` when no sampled point is feasible.
pub(crate) fn best_on_circle(obj: &Objective<'_>, center: Point2, radius: f64) -> Option<Point2> {
    let f = |theta: f64| obj.constrained(Point2::from_polar(center, radius, theta));
    let step = TAU / CIRCLE_SAMPLES as f64;
    let mut best_k = None;
    let mut best_v = f64::NEG_INFINITY;
    for k in 0..CIRCLE_SAMPLES {
        let v = f(k as f64 * step);
        if v > best_v {
            best_v = v;
            best_k = Some(k);
        }
    }
    let theta = best_k? as f64 * step;
    let (t, v) = golden_max(theta - step, theta + step, 80, f);
    let theta = if v > best_v { t } else { theta };
    Some(Point2::from_polar(center, radius, theta))
}

/// Fires when the smallest constrained pair optimum is feasible and leaves
/// every other target at or above the pair value.
pub fn check_prop2(s: &Scenario, pairs: &[((usize, usize), PlacementResult)]) -> Option<PlacementResult> {
    let first = pairs.first()?;
    let mut best = first;
    for p in &pairs[1..] {
        if p.1.value < best.1.value {
            best = p;
        }
    }
    let ((k, i), r) = best;
    let obj = s.objective();
    let level = r.value;
    let ok = |z: Point2| {
        s.is_feasible(z)
            && (0..s.n_targets())
                .filter(|m| m != k && m != i)
                .all(|m| obj.crlb(m, z) >= level * (1.0 - TAU_VAL))
    };
    let mut passing = std::iter::once(r.z_opt).chain(r.alternates.iter().copied()).filter(|z| ok(*z));
    let z = passing.next()?;
    let alternates: Vec<Point2> = passing.collect();
    Some(full_result(s, &obj, z, Branch::Prop2Pair, &[*k, *i], alternates))
}

/// Grid search, local refinement and a polish along the active distance
/// circles, compared against every feasible analytic candidate.
fn constrained_fallback(
    s: &Scenario,
    obj: &Objective<'_>,
    pairs: &[((usize, usize), PlacementResult)],
) -> Result<PlacementResult, SolverError> {
    let spec = GridSpec::around_targets(s, GridSpec::DEFAULT_RESOLUTION)?;
    let coarse = grid_search(s, &spec)?;
    let fine = refine(s, coarse.z_opt, spec.resolution, 2, 10);

    let mut candidates = vec![fine.z_opt];
    candidates.extend(polish_on_circles(s, obj, fine.z_opt, spec.resolution));
    for (_, r) in pairs {
        candidates.push(r.z_opt);
        candidates.extend(r.alternates.iter().copied());
    }
    let eps = s.epsilon();
    for (i, j) in index_pairs(s.n_targets()) {
        if let Ok(pts) = circle_circle_intersection(s.targets[i].position, eps, s.targets[j].position, eps) {
            candidates.extend(pts);
        }
    }

    let mut best = candidates[0];
    let mut best_v = obj.constrained(best);
    for &z in &candidates[1..] {
        let v = obj.constrained(z);
        if v > best_v {
            best = z;
            best_v = v;
        }
    }
    let best = refine(s, best, spec.resolution / 100.0, 4, 10).z_opt;
    Ok(full_result(s, obj, best, Branch::GridFallback, &[], Vec::new()))
}

/// One-dimensional searches on the distance circles passing near `z`.
fn polish_on_circles(s: &Scenario, obj: &Objective<'_>, z: Point2, h: f64) -> Vec<Point2> {
    let eps = s.epsilon();
    let mut out = Vec::new();
    for t in &s.targets {
        let d = distance(z, t.position);
        if (d - eps).abs() > 3.0 * h {
            continue;
        }
        let v = z - t.position;
        let theta0 = v.y.atan2(v.x);
        let span = (4.0 * h / eps).min(std::f64::consts::PI);
        let f = |theta: f64| obj.constrained(Point2::from_polar(t.position, eps, theta));
        let (theta, _) = golden_max(theta0 - span, theta0 + span, 100, f);
        out.push(Point2::from_polar(t.position, eps, theta));
    }
    out
}
