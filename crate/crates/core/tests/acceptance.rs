//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use jamloc_core::crlb::{JammingParams, TargetProfile, TAU_VAL};
use jamloc_core::geometry::{convex_hull, distance, orient, TAU_GEO};
use jamloc_core::goldens::{self, CriterionReport};
use jamloc_core::oracle::{grid_search, oracle_slack, refine};
use jamloc_core::solver::{solve_pair_unconstrained, solve_triple_unconstrained, solve_unconstrained};
use jamloc_core::{bundled, solve, Branch, GridSpec, Point2, Scenario};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Line {
    id: u8,
    title: String,
    passed: bool,
    summary: String,
    failures: Vec<String>,
}

impl From<CriterionReport> for Line {
    fn from(r: CriterionReport) -> Self {
        let mut failures: Vec<String> = r.failures().map(|c| format!("{}: {}", c.label, c.detail)).collect();
        if !r.within_time() {
            failures.push(format!("runtime {:.2} s over {} s", r.elapsed.as_secs_f64(), r.time_limit.as_secs()));
        }
        Line {
            id: r.id,
            title: r.title.to_string(),
            passed: r.passed(),
            summary: format!(
                "{}/{} checks, {:.2} s, limit {} s",
                r.checks.iter().filter(|c| c.passed).count(),
                r.checks.len(),
                r.elapsed.as_secs_f64(),
                r.time_limit.as_secs()
            ),
            failures,
        }
    }
}

const ORACLE_INSTANCES: usize = 50;
const ORACLE_SEED: u64 = 0x6a61_6d6c;

fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let n = rng.gen_range(3..=6);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    while pts.len() < n {
        let p = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        let clear = common::CORNERS.iter().chain(pts.iter()).all(|q| (p.0 - q.0).hypot(p.1 - q.1) > 0.05);
        if clear {
            pts.push(p);
        }
    }
    common::build(&pts, &vec![1.0; n], rng.gen_range(0.5..15.0), 1.0)
}

fn oracle_equivalence() -> Line {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let h = GridSpec::DEFAULT_RESOLUTION;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 0..ORACLE_INSTANCES {
        let s = random_scenario(&mut rng);
        let sol = solve(&s);
        let orc = GridSpec::around_targets(&s, h)
            .and_then(|spec| grid_search(&s, &spec))
            .map(|g| refine(&s, g.z_opt, h, 4, 10));
        match (sol, orc) {
            (Ok(a), Ok(b)) => {
                let gap = (a.value - b.value).abs();
                let slack = oracle_slack(&s, h);
                worst = worst.max(gap / slack);
                if gap > slack {
                    failures.push(format!(
                        "instance {k} ({} targets, P {:.3}): solver {:.6} ({}) vs oracle {:.6}, slack {slack:.2e}",
                        s.n_targets(),
                        s.normalized_power(),
                        a.value,
                        a.branch,
                        b.value
                    ));
                }
            }
            (Err(e), _) | (_, Err(e)) => failures.push(format!("instance {k}: {e}")),
        }
    }
    Line {
        id: 7,
        title: "oracle equivalence".into(),
        passed: failures.is_empty(),
        summary: format!(
            "{}/{ORACLE_INSTANCES} instances within slack, worst gap/slack {worst:.3}, {:.2} s",
            ORACLE_INSTANCES - failures.len(),
            start.elapsed().as_secs_f64()
        ),
        failures,
    }
}

const SUITE_CASES: u32 = 1000;

fn run_suite<S: Strategy>(
    name: &str,
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), TestCaseError>,
    failures: &mut Vec<String>,
) where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config { cases: SUITE_CASES, failure_persistence: None, ..Config::default() });
    if let Err(e) = runner.run(&strategy, check) {
        failures.push(format!("{name}: {e}"));
    }
}

fn free_profile(target: Point2, anchors: &[Point2]) -> Option<TargetProfile> {
    let lambdas = anchors.iter().map(|a| 100.0 / distance(*a, target).powi(2)).collect();
    let angles = anchors.iter().map(|a| (a.y - target.y).atan2(a.x - target.x)).collect();
    let ids = (1..=anchors.len() as u32).map(jamloc_core::AnchorId).collect();
    TargetProfile::new(jamloc_core::TargetId(1), target, 1.0, ids, lambdas, angles, Vec::new(), None).ok()
}

fn invariant_suites() -> Line {
    let start = Instant::now();
    let mut failures = Vec::new();
    let pt = |lo: f64, hi: f64| (lo..hi, lo..hi).prop_map(|(x, y)| Point2::new(x, y));

    run_suite(
        "hull membership",
        (common::targets(3, 6, 0.5), 0.5..15.0f64),
        |(t, p)| {
            let s = common::build(&t, &vec![1.0; t.len()], p, 0.01);
            let r = solve_unconstrained(&s).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let hull = convex_hull(&s.positions()).unwrap();
            prop_assert!(hull.contains(r.z_opt, TAU_GEO));
            Ok(())
        },
        &mut failures,
    );

    run_suite(
        "equalizer counts",
        common::scenario(),
        |s| {
            let r = solve(&s).map_err(|e| TestCaseError::fail(e.to_string()))?;
            if r.branch.is_equalizer() {
                let crlbs = s.crlbs_at(r.z_opt).unwrap();
                for id in &r.active_targets {
                    let c = crlbs[s.index_of(*id).unwrap()];
                    prop_assert!((c - r.value).abs() <= TAU_VAL * r.value);
                }
                prop_assert!(r.active_targets.len() >= 2);
                if r.branch == Branch::TriangleInterior {
                    prop_assert_eq!(r.active_targets.len(), 3);
                }
            }
            Ok(())
        },
        &mut failures,
    );

    run_suite(
        "triple bounded by pairs",
        (common::targets(3, 3, 0.5), 0.5..15.0f64),
        |(t, p)| {
            let s = common::build(&t, &[1.0; 3], p, 1.0);
            let tri = solve_triple_unconstrained(&s, 0, 1, 2).unwrap();
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                prop_assert!(tri.value <= solve_pair_unconstrained(&s, i, j).unwrap().value * (1.0 + TAU_VAL));
            }
            Ok(())
        },
        &mut failures,
    );

    run_suite(
        "closer to two corners, farther from the third",
        (pt(-10.0, 10.0), pt(-10.0, 10.0), pt(-10.0, 10.0), (0.01..1.0f64, 0.01..1.0f64, 0.01..1.0f64)),
        |(a, b, c, w)| {
            if orient(a, b, c).abs() <= 0.1 {
                return Ok(());
            }
            let s = w.0 + w.1 + w.2;
            let p1 = a * (w.0 / s) + b * (w.1 / s) + c * (w.2 / s);
            let n = 20;
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                    let p2 = a * (1.0 - u - v) + b * u + c * v;
                    if distance(b, p2) <= distance(b, p1) && distance(c, p2) <= distance(c, p1) {
                        prop_assert!(distance(a, p2) >= distance(a, p1) - 1e-12);
                    }
                }
            }
            Ok(())
        },
        &mut failures,
    );

    let anchors = prop::collection::vec(pt(-20.0, 20.0), 3..7);
    let jam = (0.1..50.0f64, 0.5..10.0f64, 2.0..4.0f64).prop_map(|(pj, n0, nu)| JammingParams::new(pj, n0, nu, 1.0).unwrap());

    run_suite(
        "bound decreasing in distance, scaling, rotation",
        (anchors.clone(), pt(-5.0, 5.0), jam.clone(), 0.01..30.0f64, 1e-3..30.0f64, 0.0..6.28f64, 0.01..100.0f64),
        |(an, x, jp, d1, gap, theta, scale)| {
            if an.iter().any(|a| distance(*a, x) <= 0.5) {
                return Ok(());
            }
            let Some(p) = free_profile(x, &an) else { return Ok(()) };
            prop_assert!(p.crlb_at(d1, &jp) > p.crlb_at(d1 + gap, &jp));
            let rotated: Vec<Point2> = an.iter().map(|a| a.rotate_about(x, theta)).collect();
            if let Some(q) = free_profile(x, &rotated) {
                if p.r < 1e8 {
                    prop_assert!((p.r - q.r).abs() <= 1e-9 * p.r);
                }
            }
            let scaled = TargetProfile::new(
                p.id,
                p.position,
                p.k,
                p.los_anchors.clone(),
                p.lambdas.iter().map(|l| l * scale).collect(),
                p.angles.clone(),
                Vec::new(),
                None,
            )
            .unwrap();
            prop_assert!((scaled.r - p.r / scale).abs() <= 1e-12 * p.r / scale);
            Ok(())
        },
        &mut failures,
    );

    run_suite(
        "factored bound equals Fisher inverse",
        (anchors, pt(-5.0, 5.0), pt(-15.0, 15.0), jam),
        |(an, x, z, jp)| {
            if an.iter().any(|a| distance(*a, x) <= 0.5) || distance(z, x) <= 0.05 {
                return Ok(());
            }
            let Some(p) = free_profile(x, &an) else { return Ok(()) };
            let d = distance(z, x);
            let level = jp.n0 / 2.0 + jp.pj / d.powf(jp.nu);
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for an in &an {
                let v = *an - x;
                let n = v.norm();
                let w = 100.0 / (n * n) / level;
                a += w * v.x * v.x / (n * n);
                b += w * v.x * v.y / (n * n);
                c += w * v.y * v.y / (n * n);
            }
            let want = (a + c) / (a * c - b * b);
            if !(want.is_finite() && want > 0.0 && want < 1e8) {
                return Ok(());
            }
            let got = jamloc_core::crlb::crlb(&p, z, &jp).unwrap();
            prop_assert!((got - want).abs() <= 1e-9 * want);
            Ok(())
        },
        &mut failures,
    );

    Line {
        id: 8,
        title: "invariant suites".into(),
        passed: failures.is_empty(),
        summary: format!("6 suites x {SUITE_CASES} cases, {:.2} s", start.elapsed().as_secs_f64()),
        failures,
    }
}

fn main() -> ExitCode {
    let a = bundled::scenario_a();
    let runs: Vec<Box<dyn Fn() -> Line>> = vec![
        Box::new(|| goldens::scenario_a_golden(&a).into()),
        Box::new(|| goldens::scenario_a_breakpoints(&a).into()),
        Box::new(|| goldens::scenario_b_golden(&bundled::scenario_b()).into()),
        Box::new(|| goldens::scenario_c_golden(&bundled::scenario_c()).into()),
        Box::new(|| goldens::heatmap_argmax(&a).into()),
        Box::new(|| goldens::gated_extension(&bundled::scenario_a_gated()).into()),
        Box::new(oracle_equivalence),
        Box::new(invariant_suites),
    ];
    let mut all = true;
    for run in &runs {
        let line = run();
        all &= line.passed;
        println!(
            "{} criterion {}: {} ({})",
            if line.passed { "PASS" } else { "FAIL" },
            line.id,
            line.title,
            line.summary
        );
        for f in &line.failures {
            println!("    {f}");
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
