//! The deviation function `b(eps) = (1 + eps) ln(1 + eps) - eps` and the
//! split of pattern edges into large and small deviations.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// Edges with relative deviation above `e^2 - 1` are large deviations.
pub const LARGE_DEVIATION_THRESHOLD: f64 = E * E - 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Large,
    Small,
}

impl Regime {
    pub fn of(eps: f64) -> Self {
        if eps > LARGE_DEVIATION_THRESHOLD {
            Regime::Large
        } else {
            Regime::Small
        }
    }
}

/// `b(eps)` on `[-1, inf)`, with `b(-1) = 1`.
pub fn b_function(eps: f64) -> Result<f64> {
    if eps.is_nan() || eps < -1.0 {
        return Err(Error::DomainError(format!(
            "b is defined on [-1, inf), got {eps}"
        )));
    }
    if eps == -1.0 {
        return Ok(1.0);
    }
    if eps.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if eps.abs() < 0.1 {
        // Alternating series sum_{k>=2} (-eps)^k / (k (k - 1)) avoids the
        // cancellation of the closed form near zero.
        let mut term = eps * eps;
        let mut sum = 0.0;
        for k in 2..40 {
            sum += term / (k * (k - 1)) as f64;
            term *= -eps;
        }
        return Ok(sum);
    }
    Ok((1.0 + eps) * eps.ln_1p() - eps)
}

/// Lower bound `eps^2 / 15`, valid on `(-1, e^2 - 1]`.
pub fn small_deviation_lower_bound(eps: f64) -> f64 {
    eps * eps / 15.0
}

/// Lower bound `(1 + eps / 2) ln(1 + eps)`, valid above `e^2 - 1`.
pub fn large_deviation_lower_bound(eps: f64) -> f64 {
    (1.0 + eps / 2.0) * eps.ln_1p()
}

/// Expected count `a a' / n` and relative deviation `e / mu - 1` of a pair of
/// classes; the deviation is 1 by convention when either class is empty.
pub fn deviation(a: u64, a2: u64, e: u64, n: usize) -> (f64, f64) {
    let mu = (a as f64) * (a2 as f64) / n as f64;
    if a == 0 || a2 == 0 {
        (mu, 1.0)
    } else {
        (mu, e as f64 / mu - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_values() {
        assert_eq!(b_function(0.0).unwrap(), 0.0);
        assert_eq!(b_function(-1.0).unwrap(), 1.0);
        let at = b_function(LARGE_DEVIATION_THRESHOLD).unwrap();
        assert!((at - (E * E + 1.0)).abs() < 1e-12);
        assert!(matches!(b_function(-1.5), Err(Error::DomainError(_))));
    }

    #[test]
    fn series_and_closed_form_agree_at_the_switch() {
        for eps in [-0.0999999, 0.0999999, -0.1, 0.1] {
            let closed = (1.0 + eps) * f64::ln_1p(eps) - eps;
            assert!((b_function(eps).unwrap() - closed).abs() < 1e-15);
        }
    }

    #[test]
    fn small_arguments_are_accurate() {
        // b(eps) = eps^2/2 - eps^3/6 + ... near zero.
        let eps: f64 = 1e-6;
        let series = eps * eps / 2.0 - eps.powi(3) / 6.0;
        assert!((b_function(eps).unwrap() - series).abs() < 1e-24);
    }

    #[test]
    fn regime_boundary() {
        assert_eq!(Regime::of(LARGE_DEVIATION_THRESHOLD), Regime::Small);
        assert_eq!(Regime::of(LARGE_DEVIATION_THRESHOLD + 1e-9), Regime::Large);
        assert_eq!(deviation(0, 5, 0, 10).1, 1.0);
        let (mu, eps) = deviation(2, 3, 3, 6);
        assert_eq!((mu, eps), (1.0, 2.0));
    }
}
