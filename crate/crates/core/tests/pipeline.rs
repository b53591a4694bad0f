//! End-to-end runs through the public API.

use std::sync::Arc;

use randlift::dyadic::z_certificate_from;
use randlift::graph::{BaseGraph, Lift};
use randlift::pattern::check::verify_reduction;
use randlift::pattern::reduce::reduce;
use randlift::pattern::{extract_pattern, witness_sets, Pattern};
use randlift::sampler::{enumerate_lifts, lift_rank, plant_clique, sample_lift, SeededRng};
use randlift::spectrum::{dense_lambda_star, lambda_star, LanczosOptions};
use randlift::witness::{bipartition_witness, pattern_witness_bound};
use randlift::Error;

fn k(h: usize) -> Arc<BaseGraph> {
    Arc::new(BaseGraph::complete(h).unwrap())
}

#[test]
fn planted_clique_certificate_to_reduction() {
    let l = sample_lift(k(9), 60, &SeededRng::new(3, 0)).unwrap();
    let l = plant_clique(&l, &[0, 1, 2, 3, 4]).unwrap();
    let spectral = dense_lambda_star(&l).unwrap();
    assert!(spectral.lambda_star >= 4.0 - 1e-9);
    let mut rng = SeededRng::new(3, 1).generator();
    let cert = z_certificate_from(&l, spectral, 200, &mut rng).unwrap();
    assert!(cert.dyadic.met);
    assert_eq!(cert.met, cert.achieved >= cert.target);

    let z = &cert.selection.z;
    let pattern = extract_pattern(&l, z).unwrap();
    let bound = pattern_witness_bound(&l, &pattern, &witness_sets(z)).unwrap();
    assert!((bound.potency - pattern.potency()).abs() < 1e-12);

    let reduced = reduce(&pattern, 20.0).unwrap();
    assert!(verify_reduction(&pattern, &reduced.reduction).ok());
    assert!(reduced.reduction.retention_holds());

    let again = Pattern::from_json(&pattern.to_json()).unwrap();
    assert_eq!(again.sizes(), pattern.sizes());
    assert_eq!(again.counts(), pattern.counts());
}

#[test]
fn lift_files_round_trip_and_keep_the_spectrum() {
    let l = sample_lift(Arc::new(BaseGraph::petersen()), 7, &SeededRng::new(9, 0)).unwrap();
    let back = Lift::from_json(&l.to_json()).unwrap();
    assert_eq!(back.permutations(), l.permutations());
    let a = dense_lambda_star(&l).unwrap().lambda_star;
    let b = lambda_star(&back, LanczosOptions::default())
        .unwrap()
        .lambda_star;
    assert!((a - b).abs() < 1e-8);
}

#[test]
fn enumeration_visits_every_lift_once() {
    let lifts: Vec<Lift> = enumerate_lifts(k(3), 3).unwrap().collect();
    assert_eq!(lifts.len(), 6 * 6 * 6);
    for (r, l) in lifts.iter().enumerate() {
        assert_eq!(lift_rank(l), r as u128);
    }
}

#[test]
fn bipartition_witness_on_a_random_lift() {
    let n = 10;
    let l = sample_lift(k(4), n, &SeededRng::new(5, 0)).unwrap();
    // Halves given by local indices inside each fibre.
    let halves: Vec<Vec<usize>> = (0..4)
        .map(|i| (0..n / 2).map(|j| (j + i) % n).collect())
        .collect();
    let w = bipartition_witness(&l, &halves).unwrap();
    assert!(w.vector.is_balanced_within(1e-12));
    assert!((w.vector.norm2() - 1.0).abs() < 1e-12);
    assert!(w.rayleigh <= dense_lambda_star(&l).unwrap().lambda_star + 1e-9);
    assert!(matches!(
        bipartition_witness(&l, &halves[..2]),
        Err(Error::BadHalfSizes)
    ));
}
