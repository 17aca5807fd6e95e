//! Power sweeps with regime breakpoint detection.

use rayon::prelude::*;

use super::{solve, Branch, PlacementResult};
use crate::error::SolverError;
use crate::scenario::{Scenario, TargetId};

/// Resolution of breakpoint localization in normalized power.
pub const BREAKPOINT_RESOLUTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub samples: Vec<(f64, PlacementResult)>,
    pub breakpoints: Vec<f64>,
}

type Regime = (Vec<TargetId>, Branch);

fn regime(r: &PlacementResult) -> Regime {
    (r.active_targets.clone(), r.branch)
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Solves at every normalized power in `powers` (ascending) and locates each
/// change of active set or branch between neighbouring samples by bisection.
pub fn sweep(s: &Scenario, powers: &[f64]) -> Result<SweepResult, SolverError> {
    if powers.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SolverError::InvalidGrid("sweep powers must be strictly ascending".into()));
    }
    let samples: Vec<(f64, PlacementResult)> = powers
        .par_iter()
        .map(|&p| solve(&s.with_normalized_power(p)).map(|r| (p, r)))
        .collect::<Result<_, _>>()?;

    let mut breakpoints = Vec::new();
    for w in samples.windows(2) {
        let (pa, ra) = &w[0];
        let (pb, rb) = &w[1];
        let left = regime(ra);
        if left == regime(rb) {
            continue;
        }
        let (mut lo, mut hi) = (*pa, *pb);
        while hi - lo > BREAKPOINT_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if regime(&solve(&s.with_normalized_power(mid))?) == left {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        breakpoints.push(0.5 * (lo + hi));
    }
    Ok(SweepResult { samples, breakpoints })
}
