//! Self-check suites: grid sweeps and randomized property checks tying the
//! closed forms, the planner, the LP oracle and the optimizer together.
//! Driven by the `verify` CLI subcommand and by the acceptance tests.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::bounds::{
    check_symmetrization, check_tightness, constraint_polytope, dual_combination, lp_min_total,
};
use crate::closed_form::{ndt_inner, ndt_inner_component, ndt_outer_component, Regime};
use crate::model::{
    validate_partition, CachePartition, Demand, PopularityProfile, SystemParams,
};
use crate::optimizer::{
    average_ndt, trace_average_tradeoff, AverageMode, ClassScenario, slice_point, SweepOptions,
    SweepSample, trace_region_slice,
};
use crate::planner::{
    build_cache_placement, build_delivery_plan, mix_plans, mixed_allocation, verify_plan,
};
use crate::TOL;

/// Fronthaul rates exercised by every grid sweep.
pub const RATE_GRID: [f64; 6] = [0.1, 0.2, 0.5, 1.0, 1.5, 2.0];

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: true,
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.passed = false;
            if self.failures.len() < 10 {
                self.failures.push(describe());
            }
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} ({} checks{})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.checks,
            if self.failures.is_empty() {
                String::new()
            } else {
                format!(", first failure: {}", self.failures[0])
            }
        )
    }
}

/// The nine labeled boundary points of the two-class slice at `r = 1/5`,
/// `J1 = J2`: `(mu, alloc1, alloc2, d12, d11)`.
pub const SLICE_GOLDEN_POINTS: [(f64, f64, f64, f64, f64); 9] = [
    (0.25, 0.5, 0.0, 4.0, 1.5),
    (0.25, 0.25, 0.25, 3.75, 3.75),
    (0.375, 0.75, 0.0, 4.0, 1.25),
    (0.375, 0.5, 0.25, 2.75, 1.5),
    (0.375, 0.375, 0.375, 2.625, 2.625),
    (0.5, 1.0, 0.0, 4.0, 1.0),
    (0.5, 0.5, 0.5, 1.5, 1.5),
    (0.75, 1.0, 0.5, 1.5, 1.0),
    (0.75, 0.75, 0.75, 1.25, 1.25),
];

/// Criterion 1: the slice evaluator reproduces the nine labeled boundary
/// points and each appears on the traced envelope.
pub fn suite_slice_golden_points() -> SuiteResult {
    let mut result = SuiteResult::new("two-class slice golden points (r = 1/5)");
    for &(mu, a1, a2, d12, d11) in &SLICE_GOLDEN_POINTS {
        let scenario = match ClassScenario::new(2, 2, mu, 0.2, a1, a2) {
            Ok(s) => s,
            Err(e) => {
                result.check(false, || format!("scenario ({a1}, {a2}) rejected: {e}"));
                continue;
            }
        };
        let sp = slice_point(&scenario);
        result.check(
            (sp.d12 - d12).abs() <= TOL && (sp.d11 - d11).abs() <= TOL,
            || format!("({a1}, {a2}): got ({}, {}), want ({d12}, {d11})", sp.d12, sp.d11),
        );
    }
    for &mu in &[0.25, 0.375, 0.5, 0.75] {
        let slice = trace_region_slice(
            2,
            2,
            mu,
            0.2,
            SweepOptions {
                step: 0.01,
                interior: false,
            },
        );
        for &(gmu, a1, a2, d12, d11) in &SLICE_GOLDEN_POINTS {
            if gmu != mu {
                continue;
            }
            result.check(
                slice
                    .points
                    .iter()
                    .any(|p| (p.x - d12).abs() <= TOL && (p.y - d11).abs() <= TOL),
                || format!("envelope for mu={mu} misses ({d12}, {d11}) at ({a1}, {a2})"),
            );
        }
    }
    result
}

/// Criterion 2: achievable bound, converse bound and LP minimum coincide on
/// the full symmetric grid.
pub fn suite_tightness_grid() -> SuiteResult {
    let mut result = SuiteResult::new("tightness sweep (inner = outer = LP)");
    for &rate in &RATE_GRID {
        for i in 0..=100u32 {
            for j in 0..=100u32 {
                let mu_i = i as f64 / 100.0;
                let mu_j = j as f64 / 100.0;
                let rep = check_tightness(mu_i, mu_j, rate);
                result.check(rep.pass(), || {
                    format!(
                        "({mu_i}, {mu_j}, r={rate}): inner {}, outer {}, lp {}",
                        rep.inner, rep.outer, rep.lp.value
                    )
                });
            }
        }
    }
    result
}

/// Criterion 3: every planner-built plan verifies and matches the
/// achievable bound to 1e-12.
pub fn suite_planner_grid() -> SuiteResult {
    let mut result = SuiteResult::new("planner soundness grid");
    let demand = Demand::new(0, 1).expect("distinct");
    for &rate in &RATE_GRID {
        for i in 0..=20u32 {
            for j in 0..=20u32 {
                let mu_i = i as f64 / 20.0;
                let mu_j = j as f64 / 20.0;
                let params = SystemParams::new((mu_i + mu_j) / 2.0, rate, 2).expect("valid");
                let placement = match build_cache_placement(&[mu_i, mu_j], rate, &params) {
                    Ok(p) => p,
                    Err(e) => {
                        result.check(false, || format!("placement ({mu_i}, {mu_j}): {e}"));
                        continue;
                    }
                };
                let plan = match build_delivery_plan(&placement, demand, rate) {
                    Ok(p) => p,
                    Err(e) => {
                        result.check(false, || format!("plan ({mu_i}, {mu_j}, r={rate}): {e}"));
                        continue;
                    }
                };
                let report = verify_plan(&plan, &placement, demand, rate);
                result.check(report.ok(), || {
                    format!(
                        "verify ({mu_i}, {mu_j}, r={rate}): {}",
                        report.failures[0]
                    )
                });
                let (expected, _) = ndt_inner(mu_i, mu_j, rate);
                result.check(
                    (plan.total().total() - expected).abs() <= 1e-12,
                    || {
                        format!(
                            "total ({mu_i}, {mu_j}, r={rate}): plan {} vs closed form {expected}",
                            plan.total().total()
                        )
                    },
                );
            }
        }
    }
    result
}

fn random_rate(rng: &mut StdRng) -> f64 {
    // half low-rate, half high-rate
    if rng.gen_bool(0.5) {
        rng.gen_range(0.05..=1.0)
    } else {
        rng.gen_range(1.0..=2.5f64).max(1.0 + 1e-6)
    }
}

/// Criterion 4: each converse component equals its nonnegative combination
/// of the five constraints and never exceeds the LP minimum.
pub fn suite_dual_reconstruction(samples: usize, seed: u64) -> SuiteResult {
    let mut result = SuiteResult::new("converse dual-combination reconstruction");
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..samples {
        let q: [f64; 4] = [rng.gen(), rng.gen(), rng.gen(), rng.gen()];
        let rate = random_rate(&mut rng);
        let lp = lp_min_total(&constraint_polytope(q[0], q[1], q[2], q[3], rate));
        let regimes: &[Regime] = if rate > 1.0 {
            &[Regime::R4]
        } else {
            &[Regime::R1, Regime::R2, Regime::R3]
        };
        for &l in regimes {
            let direct = ndt_outer_component(l, q[0], q[1], q[2], q[3], rate);
            let combined = dual_combination(l, q[0], q[1], q[2], q[3], rate);
            result.check((direct - combined).abs() <= 1e-12, || {
                format!("{l:?} at {q:?}, r={rate}: direct {direct} vs combined {combined}")
            });
            result.check(direct <= lp.value + TOL, || {
                format!("{l:?} at {q:?}, r={rate}: component {direct} exceeds LP {}", lp.value)
            });
        }
    }
    result
}

/// Criterion 5: symmetrization never worsens any converse component, with
/// strict improvement on allocations whose four entries are all distinct
/// and equality on symmetric ones.
pub fn suite_symmetrization(samples: usize, seed: u64) -> SuiteResult {
    let mut result = SuiteResult::new("symmetrization dominance");
    let mut rng = StdRng::seed_from_u64(seed);
    let demand = Demand::new(0, 1).expect("distinct");
    let mut produced = 0usize;
    while produced < samples {
        let q: [f64; 4] = [rng.gen(), rng.gen(), rng.gen(), rng.gen()];
        // keep entries pairwise separated so the minimum is unique and the
        // dominance is provably strict
        let mut sorted = q;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-6) {
            continue;
        }
        produced += 1;
        let rate = random_rate(&mut rng);
        let partition = CachePartition::new(vec![q[0], q[2]], vec![q[1], q[3]]).expect("2x2");
        let report = check_symmetrization(&partition, demand, rate);
        result.check(report.pass() && !report.symmetric_input, || {
            format!("dominance fails at {q:?}, r={rate}")
        });
        result.check(
            report.entries.iter().all(|e| e.delta() > TOL),
            || format!("expected strict decrease at {q:?}, r={rate}"),
        );
    }
    // equality holds exactly on symmetric inputs
    for _ in 0..64 {
        let (a, b) = (rng.gen::<f64>(), rng.gen::<f64>());
        let rate = random_rate(&mut rng);
        let partition = CachePartition::symmetric(vec![a, b]).expect("2x2");
        let report = check_symmetrization(&partition, demand, rate);
        result.check(
            report.symmetric_input && report.entries.iter().all(|e| e.delta().abs() <= TOL),
            || format!("symmetric input ({a}, {b}) not an equality case"),
        );
    }
    result
}

/// Criterion 6: mixed plans combine convexly and the implied allocation
/// stays within capacity.
pub fn suite_mixing(pairs: usize, seed: u64) -> SuiteResult {
    let mut result = SuiteResult::new("plan mixing linearity");
    let mut rng = StdRng::seed_from_u64(seed);
    let demand = Demand::new(0, 1).expect("distinct");
    for _ in 0..pairs {
        let rate = random_rate(&mut rng);
        let fracs_a = [rng.gen::<f64>(), rng.gen::<f64>()];
        let fracs_b = [rng.gen::<f64>(), rng.gen::<f64>()];
        let mu_a = (fracs_a[0] + fracs_a[1]) / 2.0;
        let mu_b = (fracs_b[0] + fracs_b[1]) / 2.0;
        let build = |fracs: &[f64], mu: f64| {
            let params = SystemParams::new(mu, rate, 2).expect("valid");
            let placement = build_cache_placement(fracs, rate, &params).expect("within budget");
            build_delivery_plan(&placement, demand, rate).expect("canonical placement")
        };
        let plan_a = build(&fracs_a, mu_a);
        let plan_b = build(&fracs_b, mu_b);
        for &alpha in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let mixed = match mix_plans(&plan_a, &plan_b, alpha) {
                Ok(m) => m,
                Err(e) => {
                    result.check(false, || format!("mix failed: {e}"));
                    continue;
                }
            };
            let expect = plan_a
                .total()
                .scale(alpha)
                .add(&plan_b.total().scale(1.0 - alpha));
            result.check(mixed.total().approx_eq(&expect, 1e-12), || {
                format!(
                    "alpha={alpha}: mixed ({}, {}) vs convex ({}, {})",
                    mixed.total().delta_f(),
                    mixed.total().delta_e(),
                    expect.delta_f(),
                    expect.delta_e()
                )
            });
            let alloc = mixed_allocation(&fracs_a, &fracs_b, alpha);
            let mu_mix = alpha * mu_a + (1.0 - alpha) * mu_b;
            let params = SystemParams::new(mu_mix.min(1.0), rate, 2).expect("valid");
            let partition = CachePartition::symmetric(alloc).expect("2x2");
            let ok = validate_partition(&partition, &params)
                .map(|r| r.ok())
                .unwrap_or(false);
            result.check(ok, || {
                format!("alpha={alpha}: mixed allocation violates capacity")
            });
        }
    }
    result
}

fn mirror_matches(lhs: &[SweepSample], rhs: &[SweepSample]) -> Option<String> {
    for p in lhs {
        let found = rhs
            .iter()
            .any(|q| (q.x - p.y).abs() <= TOL && (q.y - p.x).abs() <= TOL);
        if !found {
            return Some(format!("({}, {}) has no mirror", p.x, p.y));
        }
    }
    None
}

/// Criterion 7: average-latency trade-off properties for `mu = 3/8`,
/// `r = 1/5`, balanced classes.
pub fn suite_tradeoff_properties() -> SuiteResult {
    let mut result = SuiteResult::new("average-latency trade-off properties");
    let opts = SweepOptions {
        step: 1e-3,
        interior: false,
    };
    let curve = |a: f64| {
        trace_average_tradeoff(
            2,
            2,
            0.375,
            0.2,
            PopularityProfile::new(a).expect("valid"),
            opts,
            AverageMode::ClassConsistent,
        )
        .expect("a in (0,1)")
    };

    let balanced = curve(0.5);
    match mirror_matches(&balanced.points, &balanced.points) {
        None => result.check(true, String::new),
        Some(msg) => result.check(false, || format!("a=0.5 not diagonal-symmetric: {msg}")),
    }

    let low = curve(0.1);
    let high = curve(0.9);
    for (name, lhs, rhs) in [("0.1 vs 0.9", &low, &high), ("0.9 vs 0.1", &high, &low)] {
        match mirror_matches(&lhs.points, &rhs.points) {
            None => result.check(true, String::new),
            Some(msg) => result.check(false, || format!("a={name} mirror fails: {msg}")),
        }
    }

    for c in [&balanced, &low, &high] {
        let monotone = c
            .points
            .windows(2)
            .all(|w| w[0].x < w[1].x && w[0].y > w[1].y);
        result.check(monotone, || "envelope not Pareto-monotone".to_string());

        // every envelope allocation re-verifies through the planner
        let demand_11 = Demand::new(0, 1).expect("distinct");
        let demand_12 = Demand::new(0, 2).expect("distinct");
        let demand_22 = Demand::new(2, 3).expect("distinct");
        for p in &c.points {
            let fracs = [p.alloc1, p.alloc1, p.alloc2, p.alloc2];
            let params = SystemParams::new(0.375, 0.2, 4).expect("valid");
            let placement = match build_cache_placement(&fracs, 0.2, &params) {
                Ok(pl) => pl,
                Err(e) => {
                    result.check(false, || format!("placement ({}, {}): {e}", p.alloc1, p.alloc2));
                    continue;
                }
            };
            let mut totals = [0.0f64; 3];
            let mut all_ok = true;
            for (slot, demand) in [demand_11, demand_12, demand_22].iter().enumerate() {
                match build_delivery_plan(&placement, *demand, 0.2) {
                    Ok(plan) => {
                        all_ok &= verify_plan(&plan, &placement, *demand, 0.2).ok();
                        totals[slot] = plan.total().total();
                    }
                    Err(_) => all_ok = false,
                }
            }
            result.check(all_ok, || {
                format!("plans at ({}, {}) fail verification", p.alloc1, p.alloc2)
            });
            let (c1, c2) = average_ndt(
                totals[0],
                totals[1],
                totals[2],
                c.profile,
                AverageMode::ClassConsistent,
            );
            result.check(
                (c1.unwrap_or(f64::NAN) - p.x).abs() <= TOL
                    && (c2.unwrap_or(f64::NAN) - p.y).abs() <= TOL,
                || {
                    format!(
                        "replanned averages at ({}, {}) differ from envelope ({}, {})",
                        p.alloc1, p.alloc2, p.x, p.y
                    )
                },
            );
        }
    }
    result
}

/// Criterion 8: the dispatched achievable bound is continuous across the
/// regime boundaries and nonincreasing in each cache fraction.
pub fn suite_continuity_monotonicity() -> SuiteResult {
    let mut result = SuiteResult::new("regime continuity and monotonicity");
    for &rate in &RATE_GRID {
        if rate > 1.0 {
            continue;
        }
        for k in 0..=100u32 {
            let other = k as f64 / 100.0;
            if other <= 0.5 {
                let a = ndt_inner_component(Regime::R1, 0.5, other, rate);
                let b = ndt_inner_component(Regime::R2, 0.5, other, rate);
                result.check((a - b).abs() <= TOL, || {
                    format!("R1/R2 disagree at (0.5, {other}), r={rate}: {a} vs {b}")
                });
            }
            if other >= 0.5 {
                let a = ndt_inner_component(Regime::R2, 0.5, other, rate);
                let b = ndt_inner_component(Regime::R3, 0.5, other, rate);
                result.check((a - b).abs() <= TOL, || {
                    format!("R2/R3 disagree at (0.5, {other}), r={rate}: {a} vs {b}")
                });
            }
        }
    }
    // at r = 1 every component collapses to the same value in its regime
    for i in 0..=20u32 {
        for j in 0..=20u32 {
            let (mu_i, mu_j) = (i as f64 / 20.0, j as f64 / 20.0);
            let (low, _) = ndt_inner(mu_i, mu_j, 1.0);
            let high = ndt_inner_component(Regime::R4, mu_i, mu_j, 1.0);
            result.check((low - high).abs() <= TOL, || {
                format!("r=1 seam at ({mu_i}, {mu_j}): {low} vs {high}")
            });
        }
    }
    // nonincreasing along 0.001-step rays in the first fraction
    for &rate in &RATE_GRID {
        for &fixed in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let mut prev = f64::INFINITY;
            for k in 0..=1000u32 {
                let mu = k as f64 / 1000.0;
                let (v, _) = ndt_inner(mu, fixed, rate);
                result.check(v <= prev + 1e-12, || {
                    format!("not monotone at ({mu}, {fixed}), r={rate}")
                });
                prev = v;
            }
        }
    }
    result
}

/// Run every suite with the default sample counts.
pub fn run_all() -> Vec<SuiteResult> {
    vec![
        suite_slice_golden_points(),
        suite_tightness_grid(),
        suite_planner_grid(),
        suite_dual_reconstruction(1000, 0x5eed_0001),
        suite_symmetrization(1000, 0x5eed_0002),
        suite_mixing(200, 0x5eed_0003),
        suite_tradeoff_properties(),
        suite_continuity_monotonicity(),
    ]
}
