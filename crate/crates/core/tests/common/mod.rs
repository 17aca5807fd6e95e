#![allow(dead_code)]

use jamloc_core::crlb::{ChannelModel, EnergyModel, JammingParams, SnrGate};
use jamloc_core::{Anchor, AnchorId, Point2, Scenario, TargetSpec};
use proptest::prelude::*;

pub const CORNERS: [(f64, f64); 4] = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)];

pub fn corner_anchors() -> Vec<Anchor> {
    CORNERS
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| Anchor { id: AnchorId(i as u32 + 1), position: Point2::new(x, y) })
        .collect()
}

pub fn well_separated(pts: &[(f64, f64)], min_sep: f64) -> bool {
    pts.iter().enumerate().all(|(i, a)| pts[i + 1..].iter().all(|b| (a.0 - b.0).hypot(a.1 - b.1) >= min_sep))
}

pub fn build(targets: &[(f64, f64)], ks: &[f64], p: f64, eps: f64) -> Scenario {
    let specs = targets
        .iter()
        .zip(ks)
        .enumerate()
        .map(|(i, (&(x, y), &k))| {
            let mut t = TargetSpec::new(i as u32 + 1, x, y);
            t.k = k;
            t
        })
        .collect();
    let jp = JammingParams::from_normalized(p, 2.0, 2.0, eps).unwrap();
    Scenario::new("prop", corner_anchors(), specs, ChannelModel::free_space(100.0, 2.0), jp, None).unwrap()
}

pub fn gated(targets: &[(f64, f64)], p: f64, e0: f64) -> Scenario {
    let specs = targets.iter().enumerate().map(|(i, &(x, y))| TargetSpec::new(i as u32 + 1, x, y)).collect();
    let jp = JammingParams::from_normalized(p, 2.0, 2.0, 1.0).unwrap();
    let gate = SnrGate { snr_threshold: 1.0, energy: EnergyModel::InverseSquare { e0 } };
    Scenario::new("prop", corner_anchors(), specs, ChannelModel::free_space(100.0, 2.0), jp, Some(gate)).unwrap()
}

pub fn coord() -> impl Strategy<Value = f64> {
    1.0..9.0f64
}

/// 3 to 6 targets in the anchor square, pairwise at least `min_sep` apart.
pub fn targets(min: usize, max: usize, min_sep: f64) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((coord(), coord()), min..=max).prop_filter("targets too close", move |v| well_separated(v, min_sep))
}

/// Random scenario: unit K, normalized power in [0.5, 15], epsilon in [0.2, 1.5].
pub fn scenario() -> impl Strategy<Value = Scenario> {
    (targets(3, 6, 0.5), 0.5..15.0f64, 0.2..1.5f64).prop_map(|(t, p, eps)| build(&t, &vec![1.0; t.len()], p, eps))
}
