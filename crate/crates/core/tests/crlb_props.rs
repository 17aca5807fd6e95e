use jamloc_core::crlb::{crlb, crlb_gated, d_lim, EnergyModel, JammingParams, SnrGate, TargetProfile};
use jamloc_core::geometry::distance;
use jamloc_core::{AnchorId, Point2, TargetId};
use proptest::prelude::*;

fn pt(lo: f64, hi: f64) -> impl Strategy<Value = Point2> {
    (lo..hi, lo..hi).prop_map(|(x, y)| Point2::new(x, y))
}

fn profile(target: Point2, anchors: &[Point2], lambdas: &[f64], k: f64, energies: Option<Vec<f64>>) -> Option<TargetProfile> {
    let angles = anchors.iter().map(|a| (a.y - target.y).atan2(a.x - target.x)).collect();
    TargetProfile::new(
        TargetId(1),
        target,
        k,
        (1..=anchors.len() as u32).map(AnchorId).collect(),
        lambdas.to_vec(),
        angles,
        Vec::new(),
        energies,
    )
    .ok()
}

fn free_space(target: Point2, anchors: &[Point2]) -> Vec<f64> {
    anchors.iter().map(|a| 100.0 / distance(*a, target).powi(2)).collect()
}

/// Trace of the inverse of sum_j lambda_j / (N0/2 + K P_J / d^nu) * phi phi^T, built from raw geometry.
fn direct_crlb(target: Point2, anchors: &[Point2], lambdas: &[f64], k: f64, jp: &JammingParams, z: Point2) -> f64 {
    let d = distance(z, target);
    let level = jp.n0 / 2.0 + k * jp.pj / d.powf(jp.nu);
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for (an, &l) in anchors.iter().zip(lambdas) {
        let v = *an - target;
        let n = v.norm();
        let (ux, uy) = (v.x / n, v.y / n);
        let w = l / level;
        a += w * ux * ux;
        b += w * ux * uy;
        c += w * uy * uy;
    }
    (a + c) / (a * c - b * b)
}

fn anchors() -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec(pt(-20.0, 20.0), 3..7)
}

fn jamming() -> impl Strategy<Value = JammingParams> {
    (0.1..50.0f64, 0.5..10.0f64, 2.0..4.0f64).prop_map(|(pj, n0, nu)| JammingParams::new(pj, n0, nu, 1.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn factored_crlb_matches_fisher_inverse(
        anchors in anchors(), target in pt(-5.0, 5.0), z in pt(-15.0, 15.0), jp in jamming(), k in 0.1..3.0f64,
    ) {
        prop_assume!(anchors.iter().all(|a| distance(*a, target) > 0.5));
        prop_assume!(distance(z, target) > 0.05);
        let lambdas = free_space(target, &anchors);
        let Some(p) = profile(target, &anchors, &lambdas, k, None) else { return Ok(()); };
        let want = direct_crlb(target, &anchors, &lambdas, k, &jp, z);
        prop_assume!(want.is_finite() && want > 0.0 && want < 1e8);
        let got = crlb(&p, z, &jp).unwrap();
        prop_assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
        let via_fim = jamloc_core::crlb::fim(&p, z, &jp).unwrap().trace_of_inverse().unwrap();
        prop_assert!((via_fim - got).abs() <= 1e-9 * got);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn crlb_strictly_decreasing_in_distance(
        anchors in anchors(), target in pt(-5.0, 5.0), jp in jamming(),
        d1 in 0.01..50.0f64, gap in 1e-3..50.0f64, theta in 0.0..std::f64::consts::TAU,
    ) {
        prop_assume!(anchors.iter().all(|a| distance(*a, target) > 0.5));
        let Some(p) = profile(target, &anchors, &free_space(target, &anchors), 1.0, None) else { return Ok(()); };
        let near = crlb(&p, Point2::from_polar(target, d1, theta), &jp).unwrap();
        let far = crlb(&p, Point2::from_polar(target, d1 + gap, theta), &jp).unwrap();
        prop_assert!(near > far, "{near} <= {far}");
    }

    #[test]
    fn scaling_lambdas_divides_bound(
        anchors in anchors(), target in pt(-5.0, 5.0), z in pt(-15.0, 15.0), jp in jamming(), s in 0.01..100.0f64,
    ) {
        prop_assume!(anchors.iter().all(|a| distance(*a, target) > 0.5));
        prop_assume!(distance(z, target) > 0.05);
        let l = free_space(target, &anchors);
        let scaled: Vec<f64> = l.iter().map(|v| v * s).collect();
        let (Some(p), Some(q)) = (profile(target, &anchors, &l, 1.0, None), profile(target, &anchors, &scaled, 1.0, None)) else {
            return Ok(());
        };
        prop_assert!((q.r - p.r / s).abs() <= 1e-12 * p.r / s);
        let (a, b) = (crlb(&p, z, &jp).unwrap(), crlb(&q, z, &jp).unwrap());
        prop_assert!((b - a / s).abs() <= 1e-12 * a / s);
    }

    #[test]
    fn rotating_anchors_about_target_keeps_r(
        anchors in anchors(), target in pt(-5.0, 5.0), theta in 0.0..std::f64::consts::TAU,
    ) {
        prop_assume!(anchors.iter().all(|a| distance(*a, target) > 0.5));
        let rotated: Vec<Point2> = anchors.iter().map(|a| a.rotate_about(target, theta)).collect();
        let (Some(p), Some(q)) = (
            profile(target, &anchors, &free_space(target, &anchors), 1.0, None),
            profile(target, &rotated, &free_space(target, &rotated), 1.0, None),
        ) else {
            return Ok(());
        };
        prop_assume!(p.r < 1e8);
        prop_assert!((p.r - q.r).abs() <= 1e-9 * p.r, "{} vs {}", p.r, q.r);
    }

    #[test]
    fn gate_is_inert_beyond_every_critical_distance(
        anchors in anchors(), target in pt(-5.0, 5.0), pbar in 0.5..500.0f64, e0 in 500.0..5000.0f64,
        snr in 0.5..2.0f64, extra in 1e-6..20.0f64,
    ) {
        prop_assume!(anchors.iter().all(|a| distance(*a, target) > 0.5));
        let jp = JammingParams::from_normalized(pbar, 2.0, 2.0, 1.0).unwrap();
        let gate = SnrGate { snr_threshold: snr, energy: EnergyModel::InverseSquare { e0 } };
        let energies: Vec<f64> = anchors.iter().map(|a| e0 / distance(*a, target).powi(2)).collect();
        prop_assume!(energies.iter().all(|e| e / snr > jp.n0 / 2.0));
        let Some(p) = profile(target, &anchors, &free_space(target, &anchors), 1.0, Some(energies.clone())) else {
            return Ok(());
        };
        let max_lim = energies.iter().map(|&e| d_lim(e, &gate, &jp, 1.0).unwrap()).fold(0.0, f64::max);
        let d = max_lim + extra;
        prop_assert_eq!(crlb_gated(&p, d, &jp, &gate), p.crlb_at(d, &jp));
    }

    #[test]
    fn far_jammer_leaves_noise_floor(anchors in anchors(), target in pt(-5.0, 5.0), jp in jamming()) {
        prop_assume!(anchors.iter().all(|a| distance(*a, target) > 0.5));
        let Some(p) = profile(target, &anchors, &free_space(target, &anchors), 1.0, None) else { return Ok(()); };
        let floor = p.r * jp.n0 / 2.0;
        let v = p.crlb_at(1e6, &jp);
        prop_assert!((v - floor).abs() <= 1e-6 * floor);
    }
}
