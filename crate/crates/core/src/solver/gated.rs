//! Placement under the SNR gate, where CRLBs jump at critical distances.
//!
//! Pairs are solved exactly on the connecting segment by scanning the
//! continuous pieces between critical distances. Three or more targets use the
//! two circle shortcuts, then a grid search seeded with circle intersections
//! and one-dimensional scans along every critical and distance circle.

use super::dispatch::{check_prop1, check_prop2, solve};
use super::pair::check_distinct;
use super::{bisect_decreasing, full_result, golden_max, index_pairs, subset_result, Branch, PlacementResult};
use crate::crlb::near_equal;
use crate::error::SolverError;
use crate::geometry::{circle_circle_intersection, Point2};
use crate::oracle::{grid_search, refine, GridSpec};
use crate::scenario::{Objective, Scenario};

const NUDGE: f64 = 1e-9;

/// Gated counterpart of the pair solver. Value and active set cover the pair only.
pub fn solve_pair_gated(s: &Scenario, i: usize, j: usize) -> Result<PlacementResult, SolverError> {
    let dist = check_distinct(s, i, j)?;
    let obj = s.objective();
    let eps = s.epsilon();
    let (xi, xj) = (s.targets[i].position, s.targets[j].position);
    let idx = [i, j];

    if dist < 2.0 * eps + crate::geometry::TAU_GEO {
        let mut pts = circle_circle_intersection(xi, eps, xj, eps).unwrap_or_default();
        if pts.is_empty() {
            pts.push(xi + (xj - xi) * 0.5);
        }
        let z = pts.remove(0);
        return Ok(subset_result(s, &obj, &idx, z, Branch::TwoTargetMidpoint, &idx, pts));
    }

    let u = (xj - xi) * (1.0 / dist);
    let at = |d: f64| xi + u * d;
    let h = |d: f64| obj.min_over(&idx, at(d));
    let (lo, hi) = (eps, dist - eps);

    // Jumps of f_i(d) sit at its critical distances; jumps of f_j(D - d) at
    // D minus its critical distances. Each is evaluated on the lost side.
    let mut cuts: Vec<(f64, f64)> = Vec::new();
    for &l in obj.d_lims(i).unwrap_or(&[]) {
        let d = l - NUDGE;
        if d > lo && d < hi {
            cuts.push((l, d));
        }
    }
    for &l in obj.d_lims(j).unwrap_or(&[]) {
        let d = dist - l + NUDGE;
        if d > lo && d < hi {
            cuts.push((dist - l, d));
        }
    }
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut cands: Vec<(f64, Branch)> = vec![(lo, Branch::TwoTargetEpsilonEdge), (hi, Branch::TwoTargetEpsilonEdge)];
    cands.extend(cuts.iter().map(|&(_, d)| (d, Branch::TwoTargetEqualizer)));

    let g = |d: f64| obj.crlb_at_distance(i, d) - obj.crlb_at_distance(j, dist - d);
    let mut edges = vec![lo];
    edges.extend(cuts.iter().map(|c| c.0));
    edges.push(hi);
    for w in edges.windows(2) {
        let (a, b) = (w[0] + 2.0 * NUDGE, w[1] - 2.0 * NUDGE);
        if b <= a {
            continue;
        }
        let (ga, gb) = (g(a), g(b));
        if ga.is_nan() || gb.is_nan() {
            continue;
        }
        if ga > 0.0 && gb < 0.0 {
            cands.push((bisect_decreasing(a, b, g), Branch::TwoTargetEqualizer));
        }
    }

    let mut best = cands[0];
    let mut best_v = h(best.0);
    for &c in &cands[1..] {
        let v = h(c.0);
        if v > best_v {
            best = c;
            best_v = v;
        }
    }
    let z = at(best.0);
    let mut r = subset_result(s, &obj, &idx, z, best.1, &idx, Vec::new());
    if r.branch == Branch::TwoTargetEpsilonEdge && r.active_targets.len() == 2 {
        r.branch = Branch::TwoTargetEqualizer;
    }
    Ok(r)
}

/// Max-min placement with the gated CRLB.
pub fn solve_gated(s: &Scenario) -> Result<PlacementResult, SolverError> {
    if !s.is_gated() {
        return solve(s);
    }
    let obj = s.objective();
    match s.n_targets() {
        0 => Err(SolverError::NoTargets),
        1 => {
            let z = Point2::from_polar(s.targets[0].position, s.epsilon(), 0.0);
            Ok(full_result(s, &obj, z, Branch::Prop1Circle, &[0], Vec::new()))
        }
        2 => {
            let r = solve_pair_gated(s, 0, 1)?;
            Ok(full_result(s, &obj, r.z_opt, r.branch, &[0, 1], r.alternates))
        }
        _ => {
            if let Some((_, r)) = check_prop1(s) {
                return Ok(r);
            }
            let pairs: Vec<_> = index_pairs(s.n_targets())
                .into_iter()
                .map(|(i, j)| solve_pair_gated(s, i, j).map(|r| ((i, j), r)))
                .collect::<Result<_, _>>()?;
            if let Some(r) = check_prop2(s, &pairs) {
                return Ok(r);
            }
            gated_search(s, &obj, &pairs)
        }
    }
}

fn gated_search(
    s: &Scenario,
    obj: &Objective<'_>,
    pairs: &[((usize, usize), PlacementResult)],
) -> Result<PlacementResult, SolverError> {
    let spec = GridSpec::around_targets(s, GridSpec::DEFAULT_RESOLUTION)?;
    let coarse = grid_search(s, &spec)?;
    let mut candidates = vec![refine(s, coarse.z_opt, spec.resolution, 3, 10).z_opt];

    for (_, r) in pairs {
        candidates.push(r.z_opt);
        candidates.extend(r.alternates.iter().copied());
    }
    if let Ok(u) = solve(&s.without_gate()) {
        candidates.push(u.z_opt);
    }

    let circles = critical_circles(s, obj);
    for (a, ca) in circles.iter().enumerate() {
        for cb in &circles[a + 1..] {
            let Ok(pts) = circle_circle_intersection(ca.center, ca.radius, cb.center, cb.radius) else {
                continue;
            };
            for p in pts {
                for sa in [-1.0, 1.0] {
                    for sb in [-1.0, 1.0] {
                        let q = p + unit(p - ca.center) * (sa * NUDGE) + unit(p - cb.center) * (sb * NUDGE);
                        candidates.push(q);
                    }
                }
            }
        }
    }
    for c in &circles {
        for r in [c.radius - NUDGE, c.radius + NUDGE] {
            if r > 0.0 {
                if let Some(z) = scan_circle(obj, c.center, r) {
                    candidates.push(z);
                }
            }
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
    let polished = refine(s, best, spec.resolution / 10.0, 6, 10).z_opt;
    Ok(full_result(s, obj, polished, Branch::GridFallback, &[], Vec::new()))
}

/// For each target, the smallest normalized power in `[lo, hi]` above which
/// its gated CRLB at the gated optimum stays infinite; `None` if it never does.
/// Scanned with spacing `step`, then bisected to `tol`.
pub fn divergence_powers(s: &Scenario, lo: f64, hi: f64, step: f64, tol: f64) -> Result<Vec<Option<f64>>, SolverError> {
    if !(lo < hi && step > 0.0 && tol > 0.0) {
        return Err(SolverError::InvalidGrid(format!("divergence scan [{lo}, {hi}] step {step}")));
    }
    let n = s.n_targets();
    let lost = |p: f64| -> Result<Vec<bool>, SolverError> {
        let sp = s.with_normalized_power(p);
        let r = solve_gated(&sp)?;
        let obj = sp.objective();
        Ok((0..n).map(|i| obj.crlb(i, r.z_opt) == f64::INFINITY).collect())
    };
    let count = ((hi - lo) / step).ceil() as usize;
    let powers: Vec<f64> = (0..=count).map(|k| (lo + k as f64 * step).min(hi)).collect();
    let flags = powers.iter().map(|&p| lost(p)).collect::<Result<Vec<_>, _>>()?;

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let Some(last_finite) = (0..powers.len()).rev().find(|&k| !flags[k][i]) else {
            out.push(Some(lo));
            continue;
        };
        if last_finite + 1 == powers.len() {
            out.push(None);
            continue;
        }
        let (mut a, mut b) = (powers[last_finite], powers[last_finite + 1]);
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if lost(mid)?[i] {
                b = mid;
            } else {
                a = mid;
            }
        }
        out.push(Some(0.5 * (a + b)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct Ring {
    center: Point2,
    radius: f64,
}

fn critical_circles(s: &Scenario, obj: &Objective<'_>) -> Vec<Ring> {
    let mut out = Vec::new();
    for (i, t) in s.targets.iter().enumerate() {
        out.push(Ring { center: t.position, radius: s.epsilon() });
        for &l in obj.d_lims(i).unwrap_or(&[]) {
            if l > 0.0 && !out.iter().any(|c: &Ring| c.center == t.position && near_equal(c.radius, l)) {
                out.push(Ring { center: t.position, radius: l });
            }
        }
    }
    out
}

fn unit(v: Point2) -> Point2 {
    let n = v.norm();
    if n > 0.0 {
        v * (1.0 / n)
    } else {
        v
    }
}

fn scan_circle(obj: &Objective<'_>, center: Point2, radius: f64) -> Option<Point2> {
    const N: usize = 1440;
    let step = std::f64::consts::TAU / N as f64;
    let f = |theta: f64| obj.constrained(Point2::from_polar(center, radius, theta));
    let mut best_k = None;
    let mut best_v = f64::NEG_INFINITY;
    for k in 0..N {
        let v = f(k as f64 * step);
        if v > best_v {
            best_v = v;
            best_k = Some(k);
        }
    }
    let theta = best_k? as f64 * step;
    let (t, v) = golden_max(theta - step, theta + step, 60, f);
    Some(Point2::from_polar(center, radius, if v > best_v { t } else { theta }))
}
