//! Randomized invariants complementing the grid-based acceptance suites.

use proptest::prelude::*;

use ndt_region::bounds::{constraint_polytope, lp_min_total};
use ndt_region::closed_form::{ndt_inner, ndt_outer};
use ndt_region::model::{symmetrize, CachePartition, Demand, SystemParams};
use ndt_region::optimizer::pareto_envelope;
use ndt_region::planner::{
    build_cache_placement, build_delivery_plan, mix_plans, verify_plan,
};
use ndt_region::TOL;

fn frac() -> impl Strategy<Value = f64> {
    0.0f64..=1.0
}

fn rate() -> impl Strategy<Value = f64> {
    0.05f64..=2.5
}

proptest! {
    // delivering two unit files can never take less than one slot
    #[test]
    fn inner_bound_is_at_least_one(mu_i in frac(), mu_j in frac(), r in rate()) {
        let (inner, _) = ndt_inner(mu_i, mu_j, r);
        prop_assert!(inner >= 1.0 - TOL);
    }

    // the demand is unordered: swapping the two files changes nothing
    #[test]
    fn inner_bound_is_symmetric_in_the_demand(mu_i in frac(), mu_j in frac(), r in rate()) {
        let (a, _) = ndt_inner(mu_i, mu_j, r);
        let (b, _) = ndt_inner(mu_j, mu_i, r);
        prop_assert!((a - b).abs() <= TOL);
    }

    // converse <= LP minimum <= achievable, for arbitrary allocations
    #[test]
    fn bounds_are_ordered(q in [frac(), frac(), frac(), frac()], r in rate()) {
        let outer = ndt_outer(q[0], q[1], q[2], q[3], r);
        let lp = lp_min_total(&constraint_polytope(q[0], q[1], q[2], q[3], r));
        prop_assert!(outer <= lp.value + TOL);
        // the achievable bound only applies to symmetric allocations
        let (inner, _) = ndt_inner((q[0] + q[1]) / 2.0, (q[2] + q[3]) / 2.0, r);
        let sym = lp_min_total(&constraint_polytope(
            (q[0] + q[1]) / 2.0,
            (q[0] + q[1]) / 2.0,
            (q[2] + q[3]) / 2.0,
            (q[2] + q[3]) / 2.0,
            r,
        ));
        prop_assert!(sym.value <= inner + TOL);
    }

    // symmetrizing is idempotent and preserves each file's total cache share
    #[test]
    fn symmetrize_is_idempotent_and_share_preserving(
        q in [frac(), frac(), frac(), frac()],
    ) {
        let partition = CachePartition::new(vec![q[0], q[2]], vec![q[1], q[3]]).unwrap();
        let hat = symmetrize(&partition);
        prop_assert!(hat.is_symmetric());
        let again = symmetrize(&hat);
        for file in 0..2 {
            let share = partition.entry(0, file) + partition.entry(1, file);
            let hat_share = hat.entry(0, file) + hat.entry(1, file);
            prop_assert!((share - hat_share).abs() <= TOL);
            prop_assert!((hat.entry(0, file) - again.entry(0, file)).abs() <= TOL);
        }
    }

    // a built plan always verifies and reproduces the closed form
    #[test]
    fn plans_verify_and_match_closed_form(mu_i in frac(), mu_j in frac(), r in rate()) {
        let params = SystemParams::new((mu_i + mu_j) / 2.0, r, 2).unwrap();
        let placement = build_cache_placement(&[mu_i, mu_j], r, &params).unwrap();
        let demand = Demand::new(0, 1).unwrap();
        let plan = build_delivery_plan(&placement, demand, r).unwrap();
        prop_assert!(verify_plan(&plan, &placement, demand, r).ok());
        let (inner, _) = ndt_inner(mu_i, mu_j, r);
        prop_assert!((plan.total().total() - inner).abs() <= 1e-12);
    }

    // mixing interpolates both latency components exactly
    #[test]
    fn mixing_is_affine(
        a in [frac(), frac()],
        b in [frac(), frac()],
        r in rate(),
        alpha in 0.0f64..=1.0,
    ) {
        let demand = Demand::new(0, 1).unwrap();
        let build = |fracs: &[f64; 2]| {
            let params = SystemParams::new((fracs[0] + fracs[1]) / 2.0, r, 2).unwrap();
            let placement = build_cache_placement(fracs, r, &params).unwrap();
            build_delivery_plan(&placement, demand, r).unwrap()
        };
        let (pa, pb) = (build(&a), build(&b));
        let mixed = mix_plans(&pa, &pb, alpha).unwrap();
        let expect = pa.total().scale(alpha).add(&pb.total().scale(1.0 - alpha));
        prop_assert!(mixed.total().approx_eq(&expect, 1e-12));
    }

    // the Pareto envelope keeps only non-dominated input points, sorted
    #[test]
    fn pareto_envelope_is_sound(points in prop::collection::vec((0.0f64..=5.0, 0.0f64..=5.0), 1..40)) {
        let env = pareto_envelope(&points);
        prop_assert!(!env.is_empty());
        for w in env.windows(2) {
            prop_assert!(w[0].0 < w[1].0);
            prop_assert!(w[0].1 > w[1].1);
        }
        for e in &env {
            prop_assert!(points.iter().any(|p| p == e));
            // nothing in the input strictly dominates an envelope point
            prop_assert!(!points
                .iter()
                .any(|p| p.0 < e.0 - 1e-12 && p.1 < e.1 - 1e-12));
        }
    }
}
