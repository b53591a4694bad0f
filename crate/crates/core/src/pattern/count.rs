//! Probability and counting bounds for patterns.

use std::collections::BTreeSet;

use super::{band_width, weights_close, ClassKey, Pattern};
use crate::dyadic::pow4;
use crate::error::{Error, Result};
use crate::graph::BaseGraph;
use crate::numeric::ln_binomial;

/// Default cap on the number of size assignments [`count_patterns`] visits.
pub const DEFAULT_COUNT_GUARD: u128 = 1_000_000;

/// Natural log of
/// `prod_{c in S} a_c^(d/4) * (prod_{c in S} C(n, min(a_c, floor(n/2))))^(1 - L/10)`.
pub fn pattern_probability_bound(
    p: &Pattern,
    within: &BTreeSet<ClassKey>,
    strength: f64,
) -> Result<f64> {
    let d = p.d() as f64;
    let n = p.n() as u64;
    let mut acc = 0.0;
    for &c in within {
        let a = p.size(c);
        if a == 0 {
            return Err(Error::VertexNotInU(c.0, c.1));
        }
        acc += d / 4.0 * (a as f64).ln() + (1.0 - strength / 10.0) * ln_binomial(n, a.min(n / 2));
    }
    Ok(acc)
}

/// Natural log of `log2(n h) * A^(2 h d log2 d)`.
pub fn patcount_bound(n: usize, h: usize, d: usize, cap: u64) -> f64 {
    let nh = (n * h) as f64;
    let d = d as f64;
    nh.log2().ln() + 2.0 * h as f64 * d * d.log2() * (cap as f64).ln()
}

/// Number of distinct patterns on lifts of size `n` of `base` with every
/// class size below `cap`, counting matched counts only on class-graph edges.
///
/// A nonempty pattern is determined by its smallest exponent `k0`, the sizes
/// of the classes in `[k0, k0 + log2 d]` (at least one class at `k0`
/// nonempty) and the counts `0 ..= min(a, a')` on its class-graph edges; the
/// empty pattern is counted once.
pub fn count_patterns(base: &BaseGraph, n: usize, cap: u64, guard: u128) -> Result<u128> {
    if cap == 0 {
        return Ok(0);
    }
    let h = base.order();
    let d = base.degree();
    let width = band_width(d);
    let slots = h * width as usize;
    let limit = 10 * (n * h) as u128;
    let mut floors = 0u32;
    while pow4(floors) <= limit {
        floors += 1;
    }
    let per_floor = (0..slots).try_fold(1u128, |acc, _| acc.checked_mul(cap as u128));
    match per_floor.and_then(|x| x.checked_mul(floors as u128)) {
        Some(total) if total <= guard => {}
        _ => {
            return Err(Error::TooLarge(format!(
                "more than {guard} size assignments to enumerate"
            )))
        }
    }
    // Class-graph edges between slots (fibre * width + offset).
    let mut edges = Vec::new();
    for &(u, v) in base.edges() {
        for s in 0..width {
            for t in 0..width {
                if weights_close(s, t, d) {
                    edges.push((
                        u * width as usize + s as usize,
                        v * width as usize + t as usize,
                    ));
                }
            }
        }
    }
    let mut total = 1u128;
    for k0 in 0..floors {
        let mut sizes = vec![0u64; slots];
        let mut per_fibre = vec![0u64; h];
        total += walk(
            &mut Walk {
                n: n as u64,
                cap,
                width: width as usize,
                k0,
                limit,
                edges: &edges,
                sizes: &mut sizes,
                per_fibre: &mut per_fibre,
            },
            0,
            0,
        );
    }
    Ok(total)
}

struct Walk<'a> {
    n: u64,
    cap: u64,
    width: usize,
    k0: u32,
    limit: u128,
    edges: &'a [(usize, usize)],
    sizes: &'a mut Vec<u64>,
    per_fibre: &'a mut Vec<u64>,
}

fn walk(w: &mut Walk<'_>, slot: usize, mass: u128) -> u128 {
    if slot == w.sizes.len() {
        let floor_used = (0..w.sizes.len()).step_by(w.width).any(|s| w.sizes[s] > 0);
        if !floor_used {
            return 0;
        }
        return w.edges.iter().fold(1u128, |acc, &(s, t)| {
            let (a, b) = (w.sizes[s], w.sizes[t]);
            if a > 0 && b > 0 {
                acc * (a.min(b) as u128 + 1)
            } else {
                acc
            }
        });
    }
    let fibre = slot / w.width;
    let k = w.k0 + (slot % w.width) as u32;
    let mut total = 0u128;
    for a in 0..w.cap {
        let m = mass + pow4(k).saturating_mul(a as u128);
        if m > w.limit || w.per_fibre[fibre] + a > w.n {
            break;
        }
        w.sizes[slot] = a;
        w.per_fibre[fibre] += a;
        total += walk(w, slot + 1, m);
        w.per_fibre[fibre] -= a;
    }
    w.sizes[slot] = 0;
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    #[test]
    fn probability_bound_single_class() {
        let base = Arc::new(BaseGraph::complete(4).unwrap());
        let n = 50;
        let p = Pattern::new(base, n, 0, BTreeMap::from([((0, 0), 1)]), BTreeMap::new()).unwrap();
        let s = BTreeSet::from([(0, 0)]);
        let got = pattern_probability_bound(&p, &s, 20.0).unwrap();
        assert!((got - (1.0 - 2.0) * (n as f64).ln()).abs() < 1e-12);
        assert_eq!(
            pattern_probability_bound(&p, &BTreeSet::new(), 20.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn count_bound_example_value() {
        let b = patcount_bound(8, 3, 2, 2).exp();
        assert!((b - 24f64.log2() * 4096.0).abs() < 1e-6 * b);
    }

    #[test]
    fn cap_one_counts_only_the_empty_pattern() {
        let base = BaseGraph::complete(3).unwrap();
        assert_eq!(count_patterns(&base, 8, 1, DEFAULT_COUNT_GUARD).unwrap(), 1);
    }

    #[test]
    fn hand_count_for_triangle() {
        // K3, d = 2: two exponents per band, only equal exponents adjacent.
        // For a band where both exponents fit, each exponent layer contributes
        // sum over nonempty fibre subsets S of 2^{C(|S|,2)} = 1 + 3 + 6 + 8 = 18.
        let base = BaseGraph::complete(3).unwrap();
        let count = count_patterns(&base, 8, 2, DEFAULT_COUNT_GUARD).unwrap();
        // n h = 24, 10 n h = 240, so k0 = 0..=3. For k0 <= 2 both layers fit
        // (3 * 16 + 3 * 64 = 240), giving 17 * 18 patterns with a nonempty
        // floor layer; for k0 = 3 the upper layer (4^4 = 256) is empty: 17.
        assert_eq!(count, 1 + 3 * 17 * 18 + 17);
    }

    #[test]
    fn guard_refuses_large_enumerations() {
        let base = BaseGraph::complete(6).unwrap();
        assert!(matches!(
            count_patterns(&base, 100, 4, 1000),
            Err(Error::TooLarge(_))
        ));
    }
}
