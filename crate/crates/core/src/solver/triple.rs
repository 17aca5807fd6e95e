//! Unconstrained three-target placement and the enumeration over triples.

use rayon::prelude::*;

use super::pair::{check_distinct, solve_pair_unconstrained};
use super::{full_result, golden_max, subset_result, Branch, PlacementResult};
use crate::error::SolverError;
use crate::geometry::{
    circle_circle_intersection, distance, locate_in_triangle, orient, Point2, TriangleLocation, TAU_GEO,
};
use crate::scenario::{Objective, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    /// Strictly inside, with geometric slack.
    pub fn contains_strictly(&self, p: Point2) -> bool {
        distance(p, self.center) < self.radius - TAU_GEO
    }
}

/// Unconstrained optimum for targets `i, j, k` alone.
pub fn solve_triple_unconstrained(s: &Scenario, i: usize, j: usize, k: usize) -> Result<PlacementResult, SolverError> {
    let mut idx = [i, j, k];
    idx.sort_unstable();
    let [a, b, c] = idx;
    check_distinct(s, a, b)?;
    check_distinct(s, a, c)?;
    check_distinct(s, b, c)?;

    let pairs = [(a, b, c), (a, c, b), (b, c, a)];
    let mut sols = Vec::with_capacity(3);
    for &(p, q, _) in &pairs {
        sols.push(solve_pair_unconstrained(s, p, q)?);
    }
    let obj = s.objective();
    let (xa, xb, xc) = (s.targets[a].position, s.targets[b].position, s.targets[c].position);
    let longest = distance(xa, xb).max(distance(xa, xc)).max(distance(xb, xc));
    if orient(xa, xb, xc).abs() <= TAU_GEO * longest {
        return Ok(collinear_triple(s, &obj, idx, &sols));
    }

    let mut best = 0;
    for m in 1..3 {
        if sols[m].value < sols[best].value {
            best = m;
        }
    }
    let (l1, l2, l3) = pairs[best];
    let t12 = sols[best].value;
    let z12 = sols[best].z_opt;
    let r3 = s.targets[l3].radius_for_level(t12, &s.jamming);
    if distance(s.targets[l3].position, z12) <= r3 {
        return Ok(subset_result(s, &obj, &idx, z12, Branch::TriangleBoundary, &[l1, l2], Vec::new()));
    }

    let z = match interior_equalizer(s, [l1, l2, l3], t12) {
        Some(z) => z,
        None => local_maximum(&obj, &idx, z12, longest),
    };
    Ok(subset_result(s, &obj, &idx, z, Branch::TriangleInterior, &idx, Vec::new()))
}

/// Jammer position where the circles of targets `l1, l2` at level `t` meet on
/// the side of `l3`.
fn level_point(s: &Scenario, [l1, l2, l3]: [usize; 3], t: f64) -> Option<Point2> {
    let jp = &s.jamming;
    let (p1, p2, p3) = (s.targets[l1].position, s.targets[l2].position, s.targets[l3].position);
    let r1 = s.targets[l1].radius_for_level(t, jp);
    let r2 = s.targets[l2].radius_for_level(t, jp);
    if !r1.is_finite() || !r2.is_finite() {
        return None;
    }
    let side = orient(p1, p2, p3).signum();
    circle_circle_intersection(p1, r1, p2, r2)
        .ok()?
        .into_iter()
        .max_by(|p, q| (side * orient(p1, p2, *p)).total_cmp(&(side * orient(p1, p2, *q))))
}

fn residual(s: &Scenario, tri: [usize; 3], t: f64) -> Option<(f64, Point2)> {
    let z = level_point(s, tri, t)?;
    let r3 = s.targets[tri[2]].radius_for_level(t, &s.jamming);
    Some((distance(z, s.targets[tri[2]].position) - r3, z))
}

/// Three-way equalizer by a downward scan of the common level from `t12`,
/// then bisection on the first sign change of the residual.
fn interior_equalizer(s: &Scenario, tri: [usize; 3], t12: f64) -> Option<Point2> {
    let floor = tri
        .iter()
        .map(|&m| s.targets[m].r * s.jamming.noise_floor())
        .fold(0.0, f64::max);
    let (pa, pb, pc) = (s.targets[tri[0]].position, s.targets[tri[1]].position, s.targets[tri[2]].position);
    const STEPS: usize = 512;
    let mut hi = t12;
    let mut lo = None;
    for k in 1..STEPS {
        let u = k as f64 / STEPS as f64;
        let t = t12 - (t12 - floor) * u * u;
        let (rho, z) = residual(s, tri, t)?;
        if rho <= 0.0 {
            lo = Some(t);
            break;
        }
        if locate_in_triangle(z, pa, pb, pc) == TriangleLocation::Exterior {
            return None;
        }
        hi = t;
    }
    let mut lo = lo?;
    let mut z_lo = residual(s, tri, lo)?.1;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match residual(s, tri, mid) {
            Some((rho, z)) if rho <= 0.0 => {
                lo = mid;
                z_lo = z;
            }
            Some(_) => hi = mid,
            None => break,
        }
    }
    Some(z_lo)
}

/// Pattern search for the subset max-min around `z0`; backstop for numerically
/// awkward triangles.
fn local_maximum(obj: &Objective<'_>, idx: &[usize], z0: Point2, scale: f64) -> Point2 {
    let mut best = z0;
    let mut best_v = obj.min_over(idx, z0);
    let mut step = scale / 4.0;
    while step > 1e-12 {
        let mut improved = false;
        for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let z = Point2::new(best.x + dx * step, best.y + dy * step);
            let v = obj.min_over(idx, z);
            if v > best_v {
                best = z;
                best_v = v;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Collinear targets: the optimum lies on the segment through them.
fn collinear_triple(s: &Scenario, obj: &Objective<'_>, idx: [usize; 3], sols: &[PlacementResult]) -> PlacementResult {
    let pts: Vec<Point2> = idx.iter().map(|&m| s.targets[m].position).collect();
    let (mut p, mut q) = (pts[0], pts[1]);
    for (u, v) in [(0, 1), (0, 2), (1, 2)] {
        if distance(pts[u], pts[v]) > distance(p, q) {
            p = pts[u];
            q = pts[v];
        }
    }
    let at = |t: f64| p + (q - p) * t;
    let f = |t: f64| obj.min_over(&idx, at(t));

    let mut best_z = sols[0].z_opt;
    let mut best_v = obj.min_over(&idx, best_z);
    for sol in &sols[1..] {
        let v = obj.min_over(&idx, sol.z_opt);
        if v > best_v {
            best_v = v;
            best_z = sol.z_opt;
        }
    }
    const N: usize = 4000;
    let mut k_best = 1;
    let mut v_scan = f64::NEG_INFINITY;
    for k in 1..N {
        let v = f(k as f64 / N as f64);
        if v > v_scan {
            v_scan = v;
            k_best = k;
        }
    }
    let (t, v) = golden_max((k_best - 1) as f64 / N as f64, (k_best + 1) as f64 / N as f64, 120, f);
    if v > best_v {
        best_z = at(t);
    }
    let mut r = subset_result(s, obj, &idx, best_z, Branch::TriangleBoundary, &[], Vec::new());
    r.support = r.active_targets.clone();
    r
}

/// Unconstrained optimum over all targets: the minimum over triples.
pub fn solve_unconstrained(s: &Scenario) -> Result<PlacementResult, SolverError> {
    let n = s.n_targets();
    match n {
        0 => return Err(SolverError::NoTargets),
        1 => return Err(SolverError::Unbounded),
        2 => {
            let r = solve_pair_unconstrained(s, 0, 1)?;
            let obj = s.objective();
            return Ok(full_result(s, &obj, r.z_opt, r.branch, &[0, 1], Vec::new()));
        }
        _ => {}
    }
    let triples: Vec<[usize; 3]> = (0..n)
        .flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| [i, j, k])))
        .collect();
    let results: Vec<PlacementResult> = triples
        .par_iter()
        .map(|&[i, j, k]| solve_triple_unconstrained(s, i, j, k))
        .collect::<Result<_, _>>()?;
    let mut best = 0;
    for m in 1..results.len() {
        if results[m].value < results[best].value {
            best = m;
        }
    }
    let r = &results[best];
    let support: Vec<usize> = r.support.iter().filter_map(|id| s.index_of(*id)).collect();
    let obj = s.objective();
    Ok(full_result(s, &obj, r.z_opt, r.branch, &support, Vec::new()))
}

/// Circles around `i, j, k` that cannot contain the interior triple optimum:
/// radii `|x_i - z_ij|`, `|x_j - z_ij|` and the level-`CRLB_ij` radius of `k`.
pub fn exclusion_region(s: &Scenario, i: usize, j: usize, k: usize, pair: &PlacementResult) -> [Circle; 3] {
    let z = pair.z_opt;
    let (xi, xj, xk) = (s.targets[i].position, s.targets[j].position, s.targets[k].position);
    [
        Circle { center: xi, radius: distance(xi, z) },
        Circle { center: xj, radius: distance(xj, z) },
        Circle { center: xk, radius: s.targets[k].radius_for_level(pair.value, &s.jamming) },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crlb::{ChannelModel, JammingParams};
    use crate::scenario::{bundled, Anchor, AnchorId, TargetId, TargetSpec};
    use approx::assert_abs_diff_eq;

    fn ids(v: &[u32]) -> Vec<TargetId> {
        v.iter().map(|&i| TargetId(i)).collect()
    }

    #[test]
    fn scenario_b_interior_triple() {
        let s = bundled::scenario_b().with_normalized_power(6.0);
        let r = solve_triple_unconstrained(&s, 0, 2, 3).unwrap();
        assert_eq!(r.branch, Branch::TriangleInterior);
        assert_abs_diff_eq!(r.z_opt.x, 5.5115, epsilon = 1e-3);
        assert_abs_diff_eq!(r.z_opt.y, 5.5717, epsilon = 1e-3);
        assert_abs_diff_eq!(r.value, 0.7983, epsilon = 1e-3);
        assert_eq!(r.active_targets, ids(&[1, 3, 4]));
    }

    #[test]
    fn scenario_c_interior_triple() {
        let s = bundled::scenario_c().with_normalized_power(4.0);
        let r = solve_triple_unconstrained(&s, 0, 2, 4).unwrap();
        assert_eq!(r.branch, Branch::TriangleInterior);
        assert_abs_diff_eq!(r.z_opt.x, 5.2987, epsilon = 1e-3);
        assert_abs_diff_eq!(r.z_opt.y, 4.0537, epsilon = 1e-3);
        assert_abs_diff_eq!(r.value, 0.8392, epsilon = 1e-3);
    }

    #[test]
    fn scenario_a_boundary_above_breakpoint() {
        let s = bundled::scenario_a().with_normalized_power(10.0);
        let r = solve_triple_unconstrained(&s, 0, 1, 2).unwrap();
        assert_eq!(r.branch, Branch::TriangleBoundary);
        assert_eq!(r.support, ids(&[1, 3]));
    }

    #[test]
    fn unconstrained_winners() {
        let b = solve_unconstrained(&bundled::scenario_b().with_normalized_power(6.0)).unwrap();
        assert_eq!(b.active_targets, ids(&[1, 3, 4]));
        assert_abs_diff_eq!(b.value, 0.7983, epsilon = 1e-3);
        let c = solve_unconstrained(&bundled::scenario_c().with_normalized_power(4.0)).unwrap();
        assert_eq!(c.active_targets, ids(&[1, 3, 5]));
        let c1 = solve_unconstrained(&bundled::scenario_c().with_normalized_power(1.0)).unwrap();
        assert_eq!(c1.branch, Branch::TriangleBoundary);
        assert_eq!(c1.support, ids(&[3, 4]));
        assert!(matches!(solve_unconstrained(&bundled::scenario_a().with_normalized_power(1.0)), Ok(_)));
    }

    #[test]
    fn exclusion_circles_scenario_b() {
        let s = bundled::scenario_b().with_normalized_power(6.0);
        let r = solve_triple_unconstrained(&s, 0, 2, 3).unwrap();
        let pairs = [(0, 2, 3), (0, 3, 2), (2, 3, 0)];
        let sols: Vec<_> = pairs.iter().map(|&(i, j, _)| solve_pair_unconstrained(&s, i, j).unwrap()).collect();
        let m = (0..3).min_by(|&a, &b| sols[a].value.total_cmp(&sols[b].value)).unwrap();
        let (i, j, k) = pairs[m];
        for c in exclusion_region(&s, i, j, k, &sols[m]) {
            assert!(!c.contains_strictly(r.z_opt));
        }
    }

    #[test]
    fn equilateral_symmetry() {
        let at = |r: f64, deg: f64| {
            let t = deg.to_radians();
            (r * t.cos(), r * t.sin())
        };
        let anchors: Vec<Anchor> = [90.0, 210.0, 330.0]
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let (x, y) = at(20.0, a);
                Anchor { id: AnchorId(i as u32 + 1), position: Point2::new(x, y) }
            })
            .collect();
        let targets: Vec<TargetSpec> = [90.0, 210.0, 330.0]
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let (x, y) = at(4.0 / 3f64.sqrt(), a);
                TargetSpec::new(i as u32 + 1, x, y)
            })
            .collect();
        let jp = JammingParams::from_normalized(6.0, 2.0, 2.0, 0.1).unwrap();
        let s = Scenario::new("eq", anchors, targets, ChannelModel::free_space(100.0, 2.0), jp, None).unwrap();
        let r = solve_triple_unconstrained(&s, 0, 1, 2).unwrap();
        assert_eq!(r.branch, Branch::TriangleInterior);
        assert_abs_diff_eq!(r.z_opt.x, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.z_opt.y, 0.0, epsilon = 1e-9);
        let pair = solve_pair_unconstrained(&s, 0, 1).unwrap();
        let circles = exclusion_region(&s, 0, 1, 2, &pair);
        for c in &circles {
            assert_abs_diff_eq!(c.radius, 2.0, epsilon = 1e-9);
            assert!(!c.contains_strictly(r.z_opt));
        }
    }

    #[test]
    fn collinear_triple_is_boundary() {
        let anchors: Vec<Anchor> = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)]
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Anchor { id: AnchorId(i as u32 + 1), position: Point2::new(x, y) })
            .collect();
        let targets = vec![TargetSpec::new(1, 2.0, 2.0), TargetSpec::new(2, 5.0, 5.0), TargetSpec::new(3, 8.0, 8.0)];
        let jp = JammingParams::from_normalized(6.0, 2.0, 2.0, 1.0).unwrap();
        let s = Scenario::new("line", anchors, targets, ChannelModel::free_space(100.0, 2.0), jp, None).unwrap();
        let r = solve_triple_unconstrained(&s, 0, 1, 2).unwrap();
        assert_eq!(r.branch, Branch::TriangleBoundary);
        assert_abs_diff_eq!(r.z_opt.x, r.z_opt.y, epsilon = 1e-9);
        assert!(r.active_targets.len() >= 2);
    }
}
