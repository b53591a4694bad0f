//! Spectra of lifts: the dense path for small lifts and a matrix-free Lanczos
//! solver for the largest new eigenvalue in absolute value.
//!
//! The new eigenvalues are the eigenvalues of `M` on the balanced subspace
//! (vectors with zero sum on every fibre). That subspace is spanned, fibre by
//! fibre, by the orthonormal Helmert vectors `c_k (1, .., 1, -k, 0, .., 0)`
//! with `k` ones and `c_k = 1 / sqrt(k (k + 1))`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Lift, LiftVector};
use crate::linalg::{symmetric_eigen, tridiagonal_eigen};

/// Largest `n h` accepted by the dense path.
pub const DENSE_GUARD: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dense,
    Iterative,
}

/// Outcome of a spectral computation.
#[derive(Clone, Debug)]
pub struct SpectralReport {
    /// Largest eigenvalue of `M` (equal to d).
    pub lambda_top: f64,
    /// Largest absolute new eigenvalue.
    pub lambda_star: f64,
    /// Unit balanced vector whose Rayleigh quotient for `N` is `+-lambda_star`.
    pub witness: LiftVector,
    /// Signed eigenvalue attaining `lambda_star`.
    pub signed: f64,
    pub iterations: usize,
    /// `|| N w - signed w ||` for the witness `w`.
    pub residual: f64,
    pub converged: bool,
    pub method: Method,
}

/// Options for [`lambda_star`].
#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub tol: f64,
    /// Defaults to `10 n h` when `None`.
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: None,
            seed: 0,
        }
    }
}

fn dense_guard(lift: &Lift) -> Result<()> {
    if lift.order() > DENSE_GUARD {
        return Err(Error::DenseGuard {
            size: lift.order(),
            guard: DENSE_GUARD,
        });
    }
    Ok(())
}

/// Row-major dense adjacency matrix of the lift.
pub fn dense_adjacency(lift: &Lift) -> Result<Vec<f64>> {
    dense_guard(lift)?;
    let m = lift.order();
    let mut a = vec![0.0; m * m];
    for u in 0..m {
        for v in lift.neighbours(u) {
            a[u * m + v] += 1.0;
        }
    }
    Ok(a)
}

/// All `n h` eigenvalues of `M`, ascending.
pub fn dense_spectrum(lift: &Lift) -> Result<Vec<f64>> {
    let a = dense_adjacency(lift)?;
    Ok(symmetric_eigen(&a, lift.order(), false).values)
}

/// Eigenvalues of the base graph, ascending.
pub fn base_spectrum(lift: &Lift) -> Vec<f64> {
    let base = lift.base();
    symmetric_eigen(&base.dense_adjacency(), base.order(), false).values
}

fn helmert_coeff(k: usize) -> f64 {
    1.0 / ((k * (k + 1)) as f64).sqrt()
}

/// Maps reduced coordinates (`n - 1` per fibre) to a balanced lift vector.
fn helmert_expand(n: usize, h: usize, s: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n * h];
    for i in 0..h {
        let si = &s[i * (n - 1)..(i + 1) * (n - 1)];
        let xi = &mut x[i * n..(i + 1) * n];
        // x_j = sum_{k > j} s_k c_k - j s_j c_j, with s indexed from k = 1.
        let mut tail = 0.0;
        for j in (0..n).rev() {
            let own = if j >= 1 {
                j as f64 * si[j - 1] * helmert_coeff(j)
            } else {
                0.0
            };
            xi[j] = tail - own;
            if j >= 1 {
                tail += si[j - 1] * helmert_coeff(j);
            }
        }
    }
    x
}

/// Adjoint of [`helmert_expand`].
fn helmert_reduce(n: usize, h: usize, y: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; (n - 1) * h];
    for i in 0..h {
        let yi = &y[i * n..(i + 1) * n];
        let mut prefix = 0.0;
        for k in 1..n {
            prefix += yi[k - 1];
            s[i * (n - 1) + k - 1] = helmert_coeff(k) * (prefix - k as f64 * yi[k]);
        }
    }
    s
}

/// `M` restricted to the balanced subspace, in Helmert coordinates.
fn reduced_matrix(lift: &Lift) -> Vec<f64> {
    let (n, h) = (lift.n(), lift.h());
    let dim = (n - 1) * h;
    let mut r = vec![0.0; dim * dim];
    let mut unit = vec![0.0; dim];
    let mut y = vec![0.0; n * h];
    for c in 0..dim {
        unit[c] = 1.0;
        let x = helmert_expand(n, h, &unit);
        unit[c] = 0.0;
        lift.adjacency_into(&x, &mut y);
        let col = helmert_reduce(n, h, &y);
        for (row, v) in col.into_iter().enumerate() {
            r[row * dim + c] = v;
        }
    }
    for a in 0..dim {
        for b in 0..a {
            let avg = 0.5 * (r[a * dim + b] + r[b * dim + a]);
            r[a * dim + b] = avg;
            r[b * dim + a] = avg;
        }
    }
    r
}

/// The `(n - 1) h` new eigenvalues, ascending.
pub fn new_spectrum(lift: &Lift) -> Result<Vec<f64>> {
    dense_guard(lift)?;
    let dim = (lift.n() - 1) * lift.h();
    Ok(symmetric_eigen(&reduced_matrix(lift), dim, false).values)
}

fn report_from_witness(
    lift: &Lift,
    x: Vec<f64>,
    iterations: usize,
    converged: bool,
    method: Method,
) -> SpectralReport {
    let (n, h) = (lift.n(), lift.h());
    let mut x = LiftVector::new(h, n, x).expect("sizes agree").balanced();
    let norm = x.norm();
    if norm > 0.0 {
        x = x.scaled(1.0 / norm);
    }
    let nx = lift.apply_n(&x).expect("sizes agree");
    let signed = x.dot(&nx);
    let residual = nx
        .entries()
        .iter()
        .zip(x.entries())
        .map(|(a, b)| (a - signed * b).powi(2))
        .sum::<f64>()
        .sqrt();
    let ones = LiftVector::new(h, n, vec![1.0; n * h]).expect("sizes agree");
    let lambda_top = ones.dot(&lift.apply_m(&ones).expect("sizes agree")) / (n * h) as f64;
    SpectralReport {
        lambda_top,
        lambda_star: signed.abs(),
        witness: x,
        signed,
        iterations,
        residual,
        converged,
        method,
    }
}

/// Largest absolute new eigenvalue from the dense reduced matrix.
pub fn dense_lambda_star(lift: &Lift) -> Result<SpectralReport> {
    dense_guard(lift)?;
    let (n, h) = (lift.n(), lift.h());
    let dim = (n - 1) * h;
    if dim == 0 {
        return Ok(report_from_witness(
            lift,
            vec![0.0; n * h],
            0,
            true,
            Method::Dense,
        ));
    }
    let eig = symmetric_eigen(&reduced_matrix(lift), dim, true);
    let vectors = eig.vectors.expect("vectors requested");
    let k = if eig.values[0].abs() > eig.values[dim - 1].abs() {
        0
    } else {
        dim - 1
    };
    let x = helmert_expand(n, h, &vectors[k]);
    Ok(report_from_witness(lift, x, dim, true, Method::Dense))
}

fn project_balanced(x: &mut [f64], n: usize) {
    for fibre in x.chunks_mut(n) {
        let mean = fibre.iter().sum::<f64>() / n as f64;
        fibre.iter_mut().for_each(|v| *v -= mean);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_balanced(rng: &mut ChaCha8Rng, n: usize, h: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n * h).map(|_| rng.gen::<f64>() - 0.5).collect();
    project_balanced(&mut x, n);
    x
}

/// Largest absolute new eigenvalue by Lanczos iteration on `N` with full
/// reorthogonalisation, started from a random balanced vector.
///
/// Stops once the Ritz residual of the dominant extreme is at most `tol` and
/// the opposite extreme is either converged or provably smaller. Returns
/// [`Error::NotConverged`] carrying the best estimate otherwise.
pub fn lambda_star(lift: &Lift, opts: LanczosOptions) -> Result<SpectralReport> {
    let (n, h) = (lift.n(), lift.h());
    let len = n * h;
    let dim = (n - 1) * h;
    if dim == 0 {
        return Ok(report_from_witness(
            lift,
            vec![0.0; len],
            0,
            true,
            Method::Iterative,
        ));
    }
    let max_iter = opts.max_iter.unwrap_or(10 * len).max(1);
    let kmax = max_iter.min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q = random_balanced(&mut rng, n, h);
    let nq = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|v| *v /= nq);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; len];
    let mut next_check = 8usize;
    let mut outcome: Option<(Vec<f64>, bool)> = None;

    while basis.len() < kmax {
        lift.new_operator_into(&q, &mut w);
        project_balanced(&mut w, n);
        let a = dot(&q, &w);
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi -= a * qi;
        }
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= b * pi;
            }
        }
        basis.push(std::mem::take(&mut q));
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        let b = dot(&w, &w).sqrt();
        let k = basis.len();
        let exhausted = b <= 1e-10 * (1.0 + a.abs()) || k == kmax;
        if k >= next_check || exhausted {
            next_check = k + (k / 8).max(4);
            let eig = tridiagonal_eigen(&alpha, &beta, true);
            let vecs = eig.vectors.expect("vectors requested");
            let (lo, hi) = (eig.values[0], eig.values[k - 1]);
            let res = |idx: usize| b * vecs[idx][k - 1].abs();
            let (main, other) = if lo.abs() > hi.abs() {
                (0, k - 1)
            } else {
                (k - 1, 0)
            };
            let main_ok = res(main) <= opts.tol;
            let other_ok = res(other) <= opts.tol
                || eig.values[other].abs() + res(other) < eig.values[main].abs();
            let invariant = b <= 1e-10 * (1.0 + a.abs());
            if (main_ok && other_ok) || invariant || k == kmax {
                let coords = &vecs[main];
                let mut x = vec![0.0; len];
                for (c, v) in coords.iter().zip(&basis) {
                    for (xi, vi) in x.iter_mut().zip(v) {
                        *xi += c * vi;
                    }
                }
                let converged = (main_ok && other_ok) || invariant || k == dim;
                outcome = Some((x, converged));
                break;
            }
        }
        beta.push(b);
        q = w.iter().map(|v| v / b).collect();
    }
    let (x, converged) = outcome.expect("loop always records an outcome");
    let report = report_from_witness(lift, x, basis.len(), converged, Method::Iterative);
    if converged {
        Ok(report)
    } else {
        Err(Error::NotConverged(Box::new(report)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BaseGraph;
    use crate::sampler::{sample_lift, SeededRng};
    use std::sync::Arc;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn helmert_basis_is_orthonormal_and_balanced() {
        let (n, h) = (5, 2);
        let dim = (n - 1) * h;
        let cols: Vec<Vec<f64>> = (0..dim)
            .map(|c| {
                let mut s = vec![0.0; dim];
                s[c] = 1.0;
                helmert_expand(n, h, &s)
            })
            .collect();
        for (a, ca) in cols.iter().enumerate() {
            for (b, cb) in cols.iter().enumerate() {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot(ca, cb) - expect).abs() < 1e-14);
            }
            assert!(ca[..n].iter().sum::<f64>().abs() < 1e-14);
            let back = helmert_reduce(n, h, ca);
            assert!((back[a] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_two_lift_of_k4_has_new_spectrum_of_k4() {
        let lift = Lift::identity(Arc::new(BaseGraph::complete(4).unwrap()), 2).unwrap();
        let new = new_spectrum(&lift).unwrap();
        let expect = [-1.0, -1.0, -1.0, 3.0];
        for (a, b) in new.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let r = lambda_star(&lift, LanczosOptions::default()).unwrap();
        assert!((r.lambda_star - 3.0).abs() < 1e-8);
        assert!((r.lambda_top - 3.0).abs() < 1e-12);
    }

    #[test]
    fn new_spectrum_and_base_spectrum_make_up_the_lift_spectrum() {
        let base = Arc::new(BaseGraph::petersen());
        let lift = sample_lift(base, 6, &SeededRng::new(9, 0)).unwrap();
        let mut joined = base_spectrum(&lift);
        joined.extend(new_spectrum(&lift).unwrap());
        let all = dense_spectrum(&lift).unwrap();
        for (a, b) in sorted(joined).iter().zip(&all) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn n_equal_one_has_no_new_eigenvalues() {
        let lift = Lift::identity(Arc::new(BaseGraph::complete(4).unwrap()), 1).unwrap();
        assert!(new_spectrum(&lift).unwrap().is_empty());
        let r = lambda_star(&lift, LanczosOptions::default()).unwrap();
        assert_eq!(r.lambda_star, 0.0);
    }

    #[test]
    fn lanczos_matches_dense() {
        let base = Arc::new(BaseGraph::complete(5).unwrap());
        for seed in 0..5 {
            let lift = sample_lift(base.clone(), 30, &SeededRng::new(seed, 0)).unwrap();
            let dense = dense_lambda_star(&lift).unwrap();
            let iter = lambda_star(
                &lift,
                LanczosOptions {
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!((dense.lambda_star - iter.lambda_star).abs() < 1e-6);
            assert!(iter.witness.is_balanced());
            assert!(iter.residual < 1e-6);
        }
    }

    #[test]
    fn dense_guard_refuses_large_lifts() {
        let lift = Lift::identity(Arc::new(BaseGraph::complete(4).unwrap()), 501).unwrap();
        assert!(matches!(
            dense_spectrum(&lift),
            Err(Error::DenseGuard { .. })
        ));
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let base = Arc::new(BaseGraph::complete(4).unwrap());
        let lift = sample_lift(base, 200, &SeededRng::new(1, 0)).unwrap();
        let res = lambda_star(
            &lift,
            LanczosOptions {
                max_iter: Some(3),
                ..Default::default()
            },
        );
        match res {
            Err(Error::NotConverged(r)) => assert!(r.lambda_star > 0.0 && !r.converged),
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }
}
