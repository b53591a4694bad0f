use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use randlift::dyadic::{
    dyadic_round, is_dyadic_magnitude, quad_form, quad_form_restricted, OperatorKind, Region,
};
use randlift::graph::{BaseGraph, Lift, LiftVector};
use randlift::matchprob::{bigbound_form, exact_probability, stirling_interval, MatchingSpec};
use randlift::pattern::deviation::{
    b_function, large_deviation_lower_bound, small_deviation_lower_bound, LARGE_DEVIATION_THRESHOLD,
};
use randlift::sampler::{permutation_rank, permutation_unrank, sample_lift, SeededRng};

fn any_lift() -> impl Strategy<Value = Lift> {
    (
        prop_oneof![Just(3usize), Just(4), Just(5), Just(10)],
        1usize..12,
        any::<u64>(),
    )
        .prop_map(|(h, n, seed)| {
            let base = if h == 10 {
                BaseGraph::petersen()
            } else {
                BaseGraph::complete(h).unwrap()
            };
            sample_lift(Arc::new(base), n, &SeededRng::new(seed, 0)).unwrap()
        })
}

fn vector_for(l: &Lift, raw: &[f64]) -> LiftVector {
    let e = (0..l.order())
        .map(|k| raw[k % raw.len()] * (1.0 + k as f64 * 0.01))
        .collect();
    LiftVector::new(l.h(), l.n(), e).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lifts_are_regular_and_symmetric(l in any_lift()) {
        for v in 0..l.order() {
            let nb = l.neighbours(v);
            prop_assert_eq!(nb.len(), l.d());
            for &u in &nb {
                prop_assert!(l.is_adjacent(u, v));
                prop_assert_ne!(u / l.n(), v / l.n());
            }
        }
    }

    #[test]
    fn new_operator_output_is_balanced_and_kills_constants(
        l in any_lift(),
        raw in prop::collection::vec(-5.0f64..5.0, 1..16),
    ) {
        let x = vector_for(&l, &raw);
        prop_assert!(l.apply_n(&x).unwrap().is_balanced_within(1e-9));
        let fibre_constant = LiftVector::new(l.h(), l.n(), (0..l.order()).map(|k| raw[(k / l.n()) % raw.len()]).collect()).unwrap();
        prop_assert!(l.apply_n(&fibre_constant).unwrap().norm() < 1e-9);
    }

    #[test]
    fn restricted_forms_add_up(
        l in any_lift(),
        raw in prop::collection::vec(-5.0f64..5.0, 1..16),
        raw2 in prop::collection::vec(-5.0f64..5.0, 1..16),
    ) {
        let x = vector_for(&l, &raw);
        let y = vector_for(&l, &raw2);
        for kind in [OperatorKind::Adjacency, OperatorKind::Averaged, OperatorKind::New] {
            let full = quad_form(&l, kind, &x, &y).unwrap();
            let band = quad_form_restricted(&l, kind, &x, &y, Region::Band).unwrap();
            let rest = quad_form_restricted(&l, kind, &x, &y, Region::Complement).unwrap();
            prop_assert!((band + rest - full).abs() <= 1e-10 * (1.0 + full.abs()));
        }
    }

    #[test]
    fn rounding_stays_in_the_bracket(
        l in any_lift(),
        raw in prop::collection::vec(-1.0f64..1.0, 1..16),
        seed in any::<u64>(),
    ) {
        let x = vector_for(&l, &raw);
        let x = x.scaled((l.order() as f64 / x.norm2().max(1e-300)).sqrt() * 0.999);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = dyadic_round(&x, &mut rng).unwrap();
        prop_assert!(y.norm2() <= 5.0 * l.order() as f64);
        for (&a, &b) in x.entries().iter().zip(y.entries()) {
            prop_assert!(is_dyadic_magnitude(b.abs()));
            prop_assert!(b == 0.0 || a.signum() == b.signum());
            if a.abs() >= 1.0 {
                prop_assert!(b.abs() <= 2.0 * a.abs() && b.abs() * 2.0 > a.abs() * 0.999);
            } else {
                prop_assert!(b.abs() == 0.0 || b.abs() == 1.0);
            }
        }
    }

    #[test]
    fn permutation_ranks_round_trip(n in 1usize..9, rank in any::<u64>()) {
        let total: u128 = (1..=n as u128).product();
        let r = rank as u128 % total;
        let p = permutation_unrank(n, r);
        let mut sorted = p.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(permutation_rank(&p), r);
    }

    #[test]
    fn deviation_function_dominates_its_bounds(eps in -1.0f64..1e4) {
        let b = b_function(eps).unwrap();
        prop_assert!(b >= 0.0);
        let bound = if eps <= LARGE_DEVIATION_THRESHOLD {
            small_deviation_lower_bound(eps)
        } else {
            large_deviation_lower_bound(eps)
        };
        prop_assert!(b >= bound);
    }

    #[test]
    fn matching_probability_sits_in_its_stirling_interval(
        seed in any::<u64>(),
        n in 2u64..40,
    ) {
        // Two blocks on each side with a feasible table determined by one free count.
        let a0 = 1 + seed % (n - 1);
        let b0 = 1 + (seed / 7) % (n - 1);
        let lo = (a0 + b0).saturating_sub(n);
        let hi = a0.min(b0);
        let e00 = lo + (seed / 49) % (hi - lo + 1);
        let e = vec![vec![e00, a0 - e00], vec![b0 - e00, n + e00 - a0 - b0]];
        let spec = MatchingSpec::new(n, vec![a0, n - a0], vec![b0, n - b0], e).unwrap();
        let exact = exact_probability(&spec).unwrap();
        prop_assert!(exact.ln_p <= 1e-12);
        let ratio = exact.ln_p - bigbound_form(&spec).unwrap().ln_asymptotic();
        let (lo, hi) = stirling_interval(&spec).unwrap();
        prop_assert!(lo - 1e-9 <= ratio && ratio <= hi + 1e-9, "{lo} <= {ratio} <= {hi}");
    }
}
