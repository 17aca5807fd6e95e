//! Max-min jammer placement.
//!
//! Solver entry points take target *indices* (positions in
//! `Scenario::targets`); results report target *ids*.

mod dispatch;
mod gated;
mod pair;
mod sweep;
mod triple;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use dispatch::{check_prop1, check_prop2, pair_results, solve};
pub use gated::{divergence_powers, solve_gated, solve_pair_gated};
pub use pair::{solve_pair, solve_pair_unconstrained};
pub use sweep::{linspace, sweep, SweepResult};
pub use triple::{exclusion_region, solve_triple_unconstrained, solve_unconstrained, Circle};

use crate::crlb::argmin_set;
use crate::geometry::Point2;
use crate::scenario::{Objective, Scenario, TargetId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Prop1Circle,
    Prop2Pair,
    TwoTargetMidpoint,
    TwoTargetEpsilonEdge,
    TwoTargetEqualizer,
    TriangleBoundary,
    TriangleInterior,
    GridFallback,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Prop1Circle => "Prop1Circle",
            Branch::Prop2Pair => "Prop2Pair",
            Branch::TwoTargetMidpoint => "TwoTargetMidpoint",
            Branch::TwoTargetEpsilonEdge => "TwoTargetEpsilonEdge",
            Branch::TwoTargetEqualizer => "TwoTargetEqualizer",
            Branch::TriangleBoundary => "TriangleBoundary",
            Branch::TriangleInterior => "TriangleInterior",
            Branch::GridFallback => "GridFallback",
        }
    }

    /// Branches whose optimum equalizes at least two CRLBs.
    pub fn is_equalizer(&self) -> bool {
        matches!(self, Branch::TwoTargetEqualizer | Branch::TriangleBoundary | Branch::TriangleInterior)
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementResult {
    pub z_opt: Point2,
    /// Max-min CRLB in m^2; may be `inf` under an SNR gate.
    pub value: f64,
    pub active_targets: Vec<TargetId>,
    pub branch: Branch,
    /// Every target is at least `epsilon` away from `z_opt`.
    pub feasible: bool,
    pub alternates: Vec<Point2>,
    /// The pair or triple that determined the solution.
    pub support: Vec<TargetId>,
}

impl PlacementResult {
    pub fn active_ids(&self) -> Vec<u32> {
        self.active_targets.iter().map(|t| t.0).collect()
    }
}

/// Result at `z` with value and active set taken over the targets in `idx`.
pub(crate) fn subset_result(
    s: &Scenario,
    obj: &Objective<'_>,
    idx: &[usize],
    z: Point2,
    branch: Branch,
    support: &[usize],
    alternates: Vec<Point2>,
) -> PlacementResult {
    let values: Vec<f64> = idx.iter().map(|&i| obj.crlb(i, z)).collect();
    let (value, arg) = argmin_set(&values);
    let mut active: Vec<TargetId> = arg.iter().map(|&k| s.targets[idx[k]].id).collect();
    active.sort();
    PlacementResult {
        z_opt: z,
        value,
        active_targets: active,
        branch,
        feasible: s.is_feasible(z),
        alternates,
        support: s.target_ids(support),
    }
}

/// Result at `z` evaluated over every target.
pub(crate) fn full_result(
    s: &Scenario,
    obj: &Objective<'_>,
    z: Point2,
    branch: Branch,
    support: &[usize],
    alternates: Vec<Point2>,
) -> PlacementResult {
    let all: Vec<usize> = (0..s.n_targets()).collect();
    subset_result(s, obj, &all, z, branch, support, alternates)
}

/// Bisection for the sign change of a decreasing `g` on the open interval
/// `(lo, hi)`; endpoints are never evaluated.
pub(crate) fn bisect_decreasing(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section maximization of `f` on `[a, b]`.
pub(crate) fn golden_max(mut a: f64, mut b: f64, iters: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Index pairs `(i, j)` with `i < j`, in lexicographic order.
pub(crate) fn index_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}
