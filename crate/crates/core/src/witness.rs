//! Explicit balanced vectors certifying lower bounds on the new spectral
//! radius, and the bounds a realised pattern implies.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{Lift, LiftVector};
use crate::linalg::symmetric_eigen;
use crate::pattern::{ClassKey, Pattern};
use crate::spectrum::{dense_lambda_star, DENSE_GUARD};

/// Default cap on the vertex count of a subgraph handed to the dense solver.
pub const DEFAULT_SUBGRAPH_CAP: usize = 2000;

/// Loss allowed when extending a subgraph eigenvector to a balanced vector.
pub const EMBEDDING_LOSS: f64 = 3.5;

/// A balanced vector together with its Rayleigh quotient for `N` and the
/// bound it is supposed to certify.
#[derive(Clone, Debug)]
pub struct WitnessResult {
    pub vector: LiftVector,
    /// `|<x, N x>| / ||x||^2`.
    pub rayleigh: f64,
    pub claimed_bound: f64,
    pub bound_met: bool,
    /// `|| M x - claimed x ||` when the vector is claimed to be an eigenvector.
    pub residual: Option<f64>,
}

fn rayleigh_of(lift: &Lift, x: &LiftVector) -> Result<f64> {
    let norm2 = x.norm2();
    if norm2 == 0.0 {
        return Ok(0.0);
    }
    Ok(x.dot(&lift.apply_n(x)?).abs() / norm2)
}

/// Indicator-style vector of `s` vertices in distinct, pairwise adjacent
/// fibres: 1 on each chosen vertex and `-1/(n-1)` on the rest of its fibre.
///
/// When the vertices form a clique this has Rayleigh quotient `s - 1`; the
/// residual `|| M x - (s - 1) x ||` is reported over the whole lift.
pub fn clique_witness(lift: &Lift, vertices: &[usize]) -> Result<WitnessResult> {
    if vertices.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (n, h) = (lift.n(), lift.h());
    if n < 2 {
        return Err(Error::DomainError("clique witness needs n >= 2".into()));
    }
    let mut fibres = Vec::with_capacity(vertices.len());
    for &v in vertices {
        if v >= lift.order() {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                order: lift.order(),
            });
        }
        let (i, _) = lift.vertex(v);
        if fibres.contains(&i) {
            return Err(Error::FibresNotDistinct(i));
        }
        if let Some(&k) = fibres.iter().find(|&&k| !lift.base().is_adjacent(i, k)) {
            return Err(Error::FibresNotAdjacent(k, i));
        }
        fibres.push(i);
    }
    let mut x = vec![0.0; n * h];
    let off = -1.0 / (n - 1) as f64;
    for &v in vertices {
        let (i, _) = lift.vertex(v);
        x[i * n..(i + 1) * n].iter_mut().for_each(|t| *t = off);
        x[v] = 1.0;
    }
    let x = LiftVector::new(h, n, x)?;
    let s = vertices.len() as f64;
    let mx = lift.apply_m(&x)?;
    let residual = mx
        .entries()
        .iter()
        .zip(x.entries())
        .map(|(a, b)| (a - (s - 1.0) * b).powi(2))
        .sum::<f64>()
        .sqrt();
    let rayleigh = rayleigh_of(lift, &x)?;
    let claimed = s - 1.0;
    Ok(WitnessResult {
        vector: x,
        rayleigh,
        claimed_bound: claimed,
        bound_met: rayleigh >= claimed - 1e-10,
        residual: Some(residual),
    })
}

/// `+-1/sqrt(n h)` according to membership in per-fibre halves `A_i`
/// (local indices). The claimed bound is `2 K sqrt(d)` for the largest `K`
/// with `e(A_i, A_i') >= n/4 + K n / sqrt(d)` on every base edge.
pub fn bipartition_witness(lift: &Lift, halves: &[Vec<usize>]) -> Result<WitnessResult> {
    let (n, h) = (lift.n(), lift.h());
    if n % 2 != 0 || halves.len() != h {
        return Err(Error::BadHalfSizes);
    }
    let mut inside = vec![false; n * h];
    for (i, half) in halves.iter().enumerate() {
        if half.len() != n / 2 {
            return Err(Error::BadHalfSizes);
        }
        for &j in half {
            if j >= n || inside[i * n + j] {
                return Err(Error::BadHalfSizes);
            }
            inside[i * n + j] = true;
        }
    }
    let c = 1.0 / ((n * h) as f64).sqrt();
    let x = LiftVector::new(
        h,
        n,
        inside.iter().map(|&t| if t { c } else { -c }).collect(),
    )?;
    let sd = (lift.d() as f64).sqrt();
    let mut k_min = f64::INFINITY;
    for (e, &(u, v)) in lift.base().edges().iter().enumerate() {
        let p = lift.permutation(e);
        let both = (0..n)
            .filter(|&j| inside[u * n + j] && inside[v * n + p[j]])
            .count() as f64;
        k_min = k_min.min((both - n as f64 / 4.0) * sd / n as f64);
    }
    let claimed = 2.0 * k_min * sd;
    let signed = x.dot(&lift.apply_n(&x)?) / x.norm2();
    Ok(WitnessResult {
        rayleigh: signed.abs(),
        bound_met: signed >= claimed,
        vector: x,
        claimed_bound: claimed,
        residual: None,
    })
}

fn check_vertex_set(lift: &Lift, vertices: &[usize], cap: usize) -> Result<()> {
    if vertices.is_empty() {
        return Err(Error::EmptyInput);
    }
    if vertices.len() > cap {
        return Err(Error::DenseGuard {
            size: vertices.len(),
            guard: cap,
        });
    }
    let mut seen = BTreeSet::new();
    for &v in vertices {
        if v >= lift.order() {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                order: lift.order(),
            });
        }
        if !seen.insert(v) {
            return Err(Error::DomainError(format!("vertex {v} listed twice")));
        }
    }
    Ok(())
}

/// Largest adjacency eigenvalue of the induced subgraph on `vertices` and a
/// unit eigenvector (indexed like `vertices`, nonnegative sum).
pub fn induced_top_eigen(lift: &Lift, vertices: &[usize], cap: usize) -> Result<(f64, Vec<f64>)> {
    check_vertex_set(lift, vertices, cap)?;
    let m = vertices.len();
    let pos: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let mut a = vec![0.0; m * m];
    for (k, &v) in vertices.iter().enumerate() {
        for u in lift.neighbours(v) {
            if let Some(&l) = pos.get(&u) {
                a[k * m + l] = 1.0;
            }
        }
    }
    let eig = symmetric_eigen(&a, m, true);
    let mut vec = eig.vectors.expect("vectors requested").swap_remove(m - 1);
    if vec.iter().sum::<f64>() < 0.0 {
        vec.iter_mut().for_each(|t| *t = -*t);
    }
    Ok((eig.values[m - 1], vec))
}

/// Extends the top eigenvector of the induced subgraph `G'` on `vertices` to
/// a balanced vector by spreading `-t_i` evenly over the vertices of fibre
/// `i` outside `G'`, where `t_i` is the eigenvector's sum on fibre `i`.
///
/// Requires `|V(G')| <= n - h sqrt(n)`; the claimed bound is
/// `lambda(G') - 7/2`.
pub fn embed_subgraph_witness(lift: &Lift, vertices: &[usize]) -> Result<WitnessResult> {
    embed_subgraph_witness_with_cap(lift, vertices, DEFAULT_SUBGRAPH_CAP)
}

pub fn embed_subgraph_witness_with_cap(
    lift: &Lift,
    vertices: &[usize],
    cap: usize,
) -> Result<WitnessResult> {
    let (n, h) = (lift.n(), lift.h());
    let limit = n as f64 - h as f64 * (n as f64).sqrt();
    if vertices.len() as f64 > limit {
        return Err(Error::SubgraphTooLarge {
            size: vertices.len(),
            limit,
        });
    }
    let (top, vec) = induced_top_eigen(lift, vertices, cap)?;
    let mut x = vec![0.0; n * h];
    let mut in_sub = vec![false; n * h];
    let mut t = vec![0.0; h];
    let mut count = vec![0usize; h];
    for (&v, &val) in vertices.iter().zip(&vec) {
        x[v] = val;
        in_sub[v] = true;
        t[v / n] += val;
        count[v / n] += 1;
    }
    for i in 0..h {
        let rest = (n - count[i]) as f64;
        for j in 0..n {
            if !in_sub[i * n + j] {
                x[i * n + j] = -t[i] / rest;
            }
        }
    }
    let x = LiftVector::new(h, n, x)?;
    let rayleigh = rayleigh_of(lift, &x)?;
    let claimed = top - EMBEDDING_LOSS;
    Ok(WitnessResult {
        vector: x,
        rayleigh,
        claimed_bound: claimed,
        bound_met: rayleigh >= claimed,
        residual: None,
    })
}

/// Largest adjacency eigenvalue of the star with `d` leaves, computed densely.
pub fn star_lambda(d: usize) -> f64 {
    let m = d + 1;
    let mut a = vec![0.0; m * m];
    for leaf in 1..m {
        a[leaf] = 1.0;
        a[leaf * m] = 1.0;
    }
    symmetric_eigen(&a, m, false).values[m - 1]
}

/// Lower bounds implied by a pattern realised by concrete witness sets.
///
/// With `P` the potency, `alpha = sum a` and `Y = sum w^2 a` the squared norm
/// of the realising vector:
/// * `stated_spectral = 2 P - 40 sqrt(d)` and
///   `stated_subgraph = stated_spectral - alpha sqrt(10) / n`, the forms
///   that take the realising vector to have unit norm;
/// * `normalized_spectral = stated_spectral / Y` and
///   `normalized_subgraph = (stated_spectral - 10 alpha / n) / Y`, which
///   divide by the actual norm and bound the averaged part by
///   `(sum_i |fibre sum|)^2 / n <= 10 alpha / n`.
#[derive(Clone, Debug)]
pub struct PatternWitnessBound {
    pub potency: f64,
    pub alpha: u64,
    pub norm2: f64,
    pub stated_spectral: f64,
    pub stated_subgraph: f64,
    pub normalized_spectral: f64,
    pub normalized_subgraph: f64,
    /// Dense `lambda*` of the lift, when within the dense guard.
    pub lambda_star: Option<f64>,
    /// Top eigenvalue of the subgraph induced by the witness sets, when
    /// nonempty and within the cap.
    pub subgraph_lambda: Option<f64>,
    /// Vertices of the induced subgraph, sorted.
    pub subgraph_vertices: Vec<usize>,
}

impl PatternWitnessBound {
    pub fn stated_spectral_holds(&self) -> Option<bool> {
        self.lambda_star.map(|l| l >= self.stated_spectral - 1e-9)
    }

    pub fn stated_subgraph_holds(&self) -> Option<bool> {
        self.subgraph_lambda
            .map(|l| l >= self.stated_subgraph - 1e-9)
    }

    pub fn normalized_spectral_holds(&self) -> Option<bool> {
        self.lambda_star
            .map(|l| l >= self.normalized_spectral - 1e-9)
    }

    pub fn normalized_subgraph_holds(&self) -> Option<bool> {
        self.subgraph_lambda
            .map(|l| l >= self.normalized_subgraph - 1e-9)
    }
}

/// Checks that `sets` realise `pattern` in `lift` by recounting, then
/// evaluates the implied lower bounds and, where affordable, the spectra
/// they bound.
pub fn pattern_witness_bound(
    lift: &Lift,
    pattern: &Pattern,
    sets: &BTreeMap<ClassKey, Vec<usize>>,
) -> Result<PatternWitnessBound> {
    let (n, h) = (lift.n(), lift.h());
    if pattern.n() != n || pattern.base() != lift.base() {
        return Err(Error::WitnessMismatch(
            "pattern and lift have different shapes".into(),
        ));
    }
    let mut class_of: Vec<Option<ClassKey>> = vec![None; n * h];
    for (&c, vs) in sets {
        if vs.len() as u64 != pattern.size(c) {
            return Err(Error::WitnessMismatch(format!(
                "class {c:?} has {} vertices but the pattern wants {}",
                vs.len(),
                pattern.size(c)
            )));
        }
        for &v in vs {
            if v >= n * h || v / n != c.0 {
                return Err(Error::WitnessMismatch(format!(
                    "vertex {v} is not in fibre {}",
                    c.0
                )));
            }
            if class_of[v].replace(c).is_some() {
                return Err(Error::WitnessMismatch(format!(
                    "vertex {v} lies in two classes"
                )));
            }
        }
    }
    for (&c, &a) in pattern.sizes() {
        if a > 0 && !sets.contains_key(&c) {
            return Err(Error::WitnessMismatch(format!(
                "class {c:?} has no witness set"
            )));
        }
    }
    let mut recount: BTreeMap<(ClassKey, ClassKey), u64> = BTreeMap::new();
    for (e, &(u, v)) in lift.base().edges().iter().enumerate() {
        let p = lift.permutation(e);
        for j in 0..n {
            if let (Some(a), Some(b)) = (class_of[u * n + j], class_of[v * n + p[j]]) {
                *recount.entry((a, b)).or_insert(0) += 1;
            }
        }
    }
    for (&(a, b), &e) in &recount {
        if pattern.count(a, b) != e {
            return Err(Error::WitnessMismatch(format!(
                "{a:?}-{b:?}: {e} matched pairs but the pattern wants {}",
                pattern.count(a, b)
            )));
        }
    }
    let recorded: u64 = pattern.counts().values().sum();
    if recorded != recount.values().sum::<u64>() {
        return Err(Error::WitnessMismatch(
            "pattern lists counts the witness does not realise".into(),
        ));
    }

    let sd = (lift.d() as f64).sqrt();
    let potency = pattern.potency();
    let alpha = pattern.total_size();
    let norm2 = pattern.weighted_size();
    let stated_spectral = 2.0 * potency - 40.0 * sd;
    let stated_subgraph = stated_spectral - alpha as f64 * 10f64.sqrt() / n as f64;
    let (normalized_spectral, normalized_subgraph) = if norm2 > 0.0 {
        (
            stated_spectral / norm2,
            (stated_spectral - 10.0 * alpha as f64 / n as f64) / norm2,
        )
    } else {
        (f64::NEG_INFINITY, f64::NEG_INFINITY)
    };
    let lambda_star = if lift.order() <= DENSE_GUARD {
        Some(dense_lambda_star(lift)?.lambda_star)
    } else {
        None
    };
    let mut subgraph_vertices: Vec<usize> = sets.values().flatten().copied().collect();
    subgraph_vertices.sort_unstable();
    let subgraph_lambda =
        if !subgraph_vertices.is_empty() && subgraph_vertices.len() <= DEFAULT_SUBGRAPH_CAP {
            Some(induced_top_eigen(lift, &subgraph_vertices, DEFAULT_SUBGRAPH_CAP)?.0)
        } else {
            None
        };
    Ok(PatternWitnessBound {
        potency,
        alpha,
        norm2,
        stated_spectral,
        stated_subgraph,
        normalized_spectral,
        normalized_subgraph,
        lambda_star,
        subgraph_lambda,
        subgraph_vertices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{DyadicConfig, ZVector};
    use crate::graph::BaseGraph;
    use crate::pattern::{extract_pattern, witness_sets};
    use crate::sampler::{plant_clique, sample_lift, SeededRng};
    use std::sync::Arc;

    fn lift(h: usize, n: usize, seed: u64) -> Lift {
        sample_lift(
            Arc::new(BaseGraph::complete(h).unwrap()),
            n,
            &SeededRng::new(seed, 0),
        )
        .unwrap()
    }

    #[test]
    fn planted_triangle_in_k4_has_quotient_two() {
        let g = plant_clique(&lift(4, 12, 1), &[0, 1, 2]).unwrap();
        let w = clique_witness(&g, &[0, 12, 24]).unwrap();
        assert!((w.rayleigh - 2.0).abs() < 1e-10);
        assert!(w.bound_met);
        assert!(w.vector.is_balanced());
    }

    #[test]
    fn clique_over_every_fibre_is_an_eigenvector() {
        let g = plant_clique(&lift(4, 9, 2), &[0, 1, 2, 3]).unwrap();
        let w = clique_witness(&g, &[0, 9, 18, 27]).unwrap();
        assert!(w.residual.unwrap() < 1e-10);
        assert!((w.rayleigh - 3.0).abs() < 1e-10);
    }

    #[test]
    fn single_vertex_has_zero_quotient() {
        let w = clique_witness(&lift(3, 5, 3), &[2]).unwrap();
        assert!(w.rayleigh.abs() < 1e-12);
        assert!(w.vector.is_balanced());
    }

    #[test]
    fn non_clique_falls_short() {
        let g = Lift::identity(Arc::new(BaseGraph::complete(4).unwrap()), 6).unwrap();
        // (0,0), (1,1), (2,2) are pairwise non-adjacent under identity matchings.
        let w = clique_witness(&g, &[0, 7, 14]).unwrap();
        assert!(w.rayleigh < 2.0);
        assert!(!w.bound_met);
    }

    #[test]
    fn clique_input_errors() {
        let g = lift(4, 5, 4);
        assert!(matches!(
            clique_witness(&g, &[0, 1]),
            Err(Error::FibresNotDistinct(0))
        ));
        let c = sample_lift(
            Arc::new(BaseGraph::cycle_power(6, 1).unwrap()),
            4,
            &SeededRng::new(0, 0),
        )
        .unwrap();
        assert!(matches!(
            clique_witness(&c, &[0, 8]),
            Err(Error::FibresNotAdjacent(_, _))
        ));
    }

    #[test]
    fn identity_lift_with_equal_halves_gives_degree() {
        let g = Lift::identity(Arc::new(BaseGraph::complete(4).unwrap()), 8).unwrap();
        let halves = vec![(0..4).collect::<Vec<_>>(); 4];
        let w = bipartition_witness(&g, &halves).unwrap();
        assert!((w.rayleigh - 3.0).abs() < 1e-12);
        assert!((w.vector.norm2() - 1.0).abs() < 1e-12);
        assert!(w.bound_met);
    }

    #[test]
    fn odd_n_or_wrong_sizes_are_rejected() {
        let g = lift(3, 5, 5);
        assert!(matches!(
            bipartition_witness(&g, &vec![vec![0, 1]; 3]),
            Err(Error::BadHalfSizes)
        ));
        let g = lift(3, 6, 5);
        assert!(matches!(
            bipartition_witness(&g, &vec![vec![0, 1]; 3]),
            Err(Error::BadHalfSizes)
        ));
        assert!(matches!(
            bipartition_witness(&g, &vec![vec![0, 0, 1]; 3]),
            Err(Error::BadHalfSizes)
        ));
    }

    #[test]
    fn embedded_single_vertex_is_balanced() {
        let g = lift(4, 100, 6);
        let w = embed_subgraph_witness(&g, &[5]).unwrap();
        assert!(w.vector.is_balanced());
        assert!(w.bound_met);
    }

    #[test]
    fn embedded_planted_clique_meets_bound() {
        let g = plant_clique(&lift(5, 100, 7), &[0, 1, 2, 3, 4]).unwrap();
        let vs: Vec<usize> = (0..5).map(|i| i * 100).collect();
        let w = embed_subgraph_witness(&g, &vs).unwrap();
        assert!((w.claimed_bound - (4.0 - EMBEDDING_LOSS)).abs() < 1e-9);
        assert!(w.bound_met);
        assert!(w.vector.is_balanced_within(1e-10));
    }

    #[test]
    fn oversized_subgraph_is_refused() {
        let g = lift(4, 16, 8);
        // n - h sqrt(n) = 0
        assert!(matches!(
            embed_subgraph_witness(&g, &[0]),
            Err(Error::SubgraphTooLarge { .. })
        ));
    }

    #[test]
    fn star_has_root_degree_eigenvalue() {
        for d in [1, 3, 4, 9] {
            assert!((star_lambda(d) - (d as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn clique_pattern_bounds_hold() {
        let n = 20;
        let g = plant_clique(&lift(4, n, 9), &[0, 1, 2, 3]).unwrap();
        let cfg = DyadicConfig::of(&g);
        let mut exps = vec![None; 4 * n];
        for i in 0..4 {
            exps[i * n] = Some(0);
        }
        let z = ZVector::from_exponents(cfg, exps).unwrap();
        let p = extract_pattern(&g, &z).unwrap();
        let sets = witness_sets(&z);
        let b = pattern_witness_bound(&g, &p, &sets).unwrap();
        assert_eq!(b.alpha, 4);
        assert_eq!(b.subgraph_vertices, vec![0, n, 2 * n, 3 * n]);
        assert!((b.subgraph_lambda.unwrap() - 3.0).abs() < 1e-9);
        assert!(b.stated_spectral_holds().unwrap());
        assert!(b.stated_subgraph_holds().unwrap());
        assert!(b.normalized_spectral_holds().unwrap());
        assert!(b.normalized_subgraph_holds().unwrap());
    }

    #[test]
    fn mismatched_sets_are_rejected() {
        let n = 10;
        let g = Lift::identity(Arc::new(BaseGraph::complete(3).unwrap()), n).unwrap();
        let cfg = DyadicConfig::of(&g);
        let mut exps = vec![None; 3 * n];
        exps[0] = Some(0);
        exps[n] = Some(0);
        let z = ZVector::from_exponents(cfg, exps).unwrap();
        let p = extract_pattern(&g, &z).unwrap();
        let mut sets = witness_sets(&z);
        // Under identity matchings (1, 1) is not matched to (0, 0).
        sets.get_mut(&(1, 0)).unwrap()[0] = n + 1;
        assert!(matches!(
            pattern_witness_bound(&g, &p, &sets),
            Err(Error::WitnessMismatch(_))
        ));
        sets.get_mut(&(1, 0)).unwrap()[0] = 0;
        assert!(matches!(
            pattern_witness_bound(&g, &p, &sets),
            Err(Error::WitnessMismatch(_))
        ));
    }
}
