//! Dense symmetric eigensolver: Householder tridiagonalisation followed by
//! the implicit QL algorithm with Wilkinson-style shifts.

/// Eigenvalues in ascending order and, optionally, matching unit eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the eigenvector of `values[k]`.
    pub vectors: Option<Vec<Vec<f64>>>,
}

/// Eigen-decomposition of a symmetric `n x n` row-major matrix.
pub fn symmetric_eigen(matrix: &[f64], n: usize, want_vectors: bool) -> Eigen {
    assert_eq!(matrix.len(), n * n, "matrix must be n x n");
    if n == 0 {
        return Eigen {
            values: vec![],
            vectors: want_vectors.then(Vec::new),
        };
    }
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| matrix[i * n..(i + 1) * n].to_vec())
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder(&mut v, &mut d, &mut e, want_vectors);
    implicit_ql(&mut d, &mut e, want_vectors.then_some(&mut v));
    finish(d, want_vectors.then_some(v))
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off[i]` couples `i` and `i + 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], want_vectors: bool) -> Eigen {
    let n = diag.len();
    assert!(
        n == 0 || off.len() + 1 == n,
        "off-diagonal must have length n - 1"
    );
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    for i in 1..n {
        e[i] = off[i - 1];
    }
    let mut v: Vec<Vec<f64>> = if want_vectors {
        (0..n)
            .map(|i| {
                let mut r = vec![0.0; n];
                r[i] = 1.0;
                r
            })
            .collect()
    } else {
        Vec::new()
    };
    implicit_ql(&mut d, &mut e, want_vectors.then_some(&mut v));
    finish(d, want_vectors.then_some(v))
}

fn finish(d: Vec<f64>, v: Option<Vec<Vec<f64>>>) -> Eigen {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = v.map(|v| {
        order
            .iter()
            .map(|&k| (0..n).map(|r| v[r][k]).collect())
            .collect()
    });
    Eigen { values, vectors }
}

/// Reduces `v` (holding the matrix) to tridiagonal form. On return `d` holds
/// the diagonal, `e[1..]` the sub-diagonal, and `v` the accumulated
/// orthogonal transform when `accumulate` is set.
fn householder(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    if !accumulate {
        for (i, di) in d.iter_mut().enumerate() {
            *di = v[i][i];
        }
        e[0] = 0.0;
        return;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iteration on a symmetric tridiagonal matrix (`e[i]` couples
/// `i - 1` and `i`). Rotations are applied to `v` when given.
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut v: Option<&mut Vec<Vec<f64>>>) {
    let n = d.len();
    if n == 0 {
        return;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                assert!(iterations < 1000, "implicit QL failed to converge");
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for row in v.iter_mut() {
                            let hk = row[i + 1];
                            row[i + 1] = s * row[i] + c * hk;
                            row[i] = c * row[i] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[f64], n: usize, lambda: f64, x: &[f64]) -> f64 {
        (0..n)
            .map(|i| {
                let ax: f64 = (0..n).map(|j| a[i * n + j] * x[j]).sum();
                (ax - lambda * x[i]).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn diagonal_matrix() {
        let a = [3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0];
        let eig = symmetric_eigen(&a, 3, false);
        assert_eq!(eig.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn path_graph_matches_closed_form() {
        let n = 12;
        let mut a = vec![0.0; n * n];
        for i in 0..n - 1 {
            a[i * n + i + 1] = 1.0;
            a[(i + 1) * n + i] = 1.0;
        }
        let eig = symmetric_eigen(&a, n, true);
        let mut expect: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (std::f64::consts::PI * k as f64 / (n as f64 + 1.0)).cos())
            .collect();
        expect.sort_by(f64::total_cmp);
        for (x, y) in eig.values.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-12);
        }
        for (lambda, x) in eig.values.iter().zip(eig.vectors.as_ref().unwrap()) {
            assert!(residual(&a, n, *lambda, x) < 1e-12);
        }
        let t = tridiagonal_eigen(&vec![0.0; n], &vec![1.0; n - 1], false);
        for (x, y) in t.values.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn agrees_with_reference_solver_on_random_matrices() {
        let mut state = 12345u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for n in [1usize, 2, 5, 17, 40] {
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let x = next();
                    a[i * n + j] = x;
                    a[j * n + i] = x;
                }
            }
            let ours = symmetric_eigen(&a, n, true);
            let reference = nalgebra::DMatrix::from_row_slice(n, n, &a).symmetric_eigenvalues();
            let mut r: Vec<f64> = reference.iter().copied().collect();
            r.sort_by(f64::total_cmp);
            for (x, y) in ours.values.iter().zip(&r) {
                assert!((x - y).abs() < 1e-12, "n={n}: {x} vs {y}");
            }
            for (lambda, x) in ours.values.iter().zip(ours.vectors.as_ref().unwrap()) {
                assert!(residual(&a, n, *lambda, x) < 1e-11);
            }
        }
    }
}
