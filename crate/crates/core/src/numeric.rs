//! Small numeric helpers shared across modules.

use statrs::function::gamma::ln_gamma;

/// Neumaier-compensated sum.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `ln(k!)` via the log-gamma function.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// `ln C(n, k)` via the log-gamma function.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n, "binomial needs k <= n");
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(neumaier_sum(v), 2.0);
    }

    #[test]
    fn factorials_match_products() {
        let mut acc = 0.0f64;
        for k in 1..30u64 {
            acc += (k as f64).ln();
            assert!((ln_factorial(k) - acc).abs() < 1e-12 * acc.max(1.0));
        }
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-12);
    }
}
