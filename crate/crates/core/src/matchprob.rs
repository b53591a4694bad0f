//! Joint edge counts between the blocks of two partitions under one uniform
//! random perfect matching.
//!
//! Zero-size blocks carry no vertices and are skipped in every product.

use std::thread;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ln_factorial;
use crate::pattern::deviation::b_function;
use crate::sampler::SeededRng;

/// Largest `n` for which [`exact_probability`] also returns an exact rational.
pub const RATIONAL_LIMIT: u64 = 64;

/// Largest `n` accepted by [`brute_force_probability`].
pub const BRUTE_FORCE_LIMIT: u64 = 8;

/// Number of independent shards used by [`monte_carlo_probability`].
pub const MONTE_CARLO_SHARDS: u64 = 8;

/// Block sizes `a`, `b` of two partitions of an `n`-set and the prescribed
/// edge counts `e[i][j]` between `A_i` and `B_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingSpec {
    pub n: u64,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub e: Vec<Vec<u64>>,
}

impl MatchingSpec {
    pub fn new(n: u64, a: Vec<u64>, b: Vec<u64>, e: Vec<Vec<u64>>) -> Result<Self> {
        let spec = Self { n, a, b, e };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMarginals(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.a.is_empty() || self.b.is_empty() {
            return bad("both partitions need at least one block".into());
        }
        if self.a.iter().sum::<u64>() != self.n || self.b.iter().sum::<u64>() != self.n {
            return bad(format!("block sizes must sum to n = {}", self.n));
        }
        if self.e.len() != self.a.len() || self.e.iter().any(|r| r.len() != self.b.len()) {
            return bad(format!("e must be {} x {}", self.a.len(), self.b.len()));
        }
        for (i, row) in self.e.iter().enumerate() {
            if row.iter().sum::<u64>() != self.a[i] {
                return bad(format!(
                    "row {i} of e does not sum to a[{i}] = {}",
                    self.a[i]
                ));
            }
        }
        for j in 0..self.b.len() {
            if self.e.iter().map(|r| r[j]).sum::<u64>() != self.b[j] {
                return bad(format!(
                    "column {j} of e does not sum to b[{j}] = {}",
                    self.b[j]
                ));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }

    /// `mu_ij = a_i b_j / n`.
    pub fn mu(&self, i: usize, j: usize) -> f64 {
        self.a[i] as f64 * self.b[j] as f64 / self.n as f64
    }

    /// `e_ij / mu_ij - 1`, or `None` when `mu_ij = 0`.
    pub fn eps(&self, i: usize, j: usize) -> Option<f64> {
        let mu = self.mu(i, j);
        (mu > 0.0).then(|| self.e[i][j] as f64 / mu - 1.0)
    }

    fn entries(&self) -> impl Iterator<Item = u64> + '_ {
        self.e.iter().flatten().copied()
    }
}

/// Exact probability of a spec: natural log always, rational for small `n`.
#[derive(Clone, Debug)]
pub struct ExactProbability {
    pub ln_p: f64,
    pub rational: Option<BigRational>,
}

impl ExactProbability {
    pub fn value(&self) -> f64 {
        self.ln_p.exp()
    }
}

fn factorial(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, t| acc * t)
}

fn to_rational(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `(prod a_i!)(prod b_j!) / (n! prod e_ij!)`.
pub fn exact_probability(spec: &MatchingSpec) -> Result<ExactProbability> {
    spec.validate()?;
    let ln_p = spec
        .a
        .iter()
        .chain(&spec.b)
        .map(|&k| ln_factorial(k))
        .sum::<f64>()
        - ln_factorial(spec.n)
        - spec.entries().map(ln_factorial).sum::<f64>();
    let rational = (spec.n <= RATIONAL_LIMIT).then(|| {
        let num = spec
            .a
            .iter()
            .chain(&spec.b)
            .fold(BigUint::one(), |acc, &k| acc * factorial(k));
        let den = spec
            .entries()
            .fold(factorial(spec.n), |acc, k| acc * factorial(k));
        to_rational(num, den)
    });
    let ln_p = match &rational {
        Some(r) => ln_rational(r),
        None => ln_p,
    };
    Ok(ExactProbability { ln_p, rational })
}

fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().expect("finite").ln();
    }
    let shift = bits - 900;
    (x >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

fn ln_rational(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_big(r.numer()) - ln_big(r.denom())
}

fn block_labels(sizes: &[u64]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| std::iter::repeat_n(i, s as usize))
        .collect()
}

/// Fraction of all `n!` matchings realising the prescribed counts, counted one by one.
pub fn brute_force_probability(spec: &MatchingSpec) -> Result<BigRational> {
    spec.validate()?;
    if spec.n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(format!(
            "brute force needs n <= {BRUTE_FORCE_LIMIT}, got {}",
            spec.n
        )));
    }
    let n = spec.n as usize;
    let row = block_labels(&spec.a);
    let col = block_labels(&spec.b);
    let (s, t) = (spec.a.len(), spec.b.len());
    let target: Vec<u64> = spec.entries().collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut counts = vec![0u64; s * t];
    loop {
        counts.iter_mut().for_each(|c| *c = 0);
        for v in 0..n {
            counts[row[v] * t + col[perm[v]]] += 1;
        }
        total += 1;
        if counts == target {
            hits += 1;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(total)))
}

/// Advances to the next permutation in lexicographic order.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len())
        .rev()
        .find(|&j| p[j] > p[i - 1])
        .expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Every nonnegative integer matrix with row sums `a` and column sums `b`.
pub fn feasible_tables(a: &[u64], b: &[u64]) -> Vec<Vec<Vec<u64>>> {
    fn rows(
        i: usize,
        a: &[u64],
        remaining: &mut Vec<u64>,
        acc: &mut Vec<Vec<u64>>,
        out: &mut Vec<Vec<Vec<u64>>>,
    ) {
        if i == a.len() {
            if remaining.iter().all(|&r| r == 0) {
                out.push(acc.clone());
            }
            return;
        }
        let mut row = vec![0u64; remaining.len()];
        fill(0, a[i], &mut row, i, a, remaining, acc, out);
    }
    #[allow(clippy::too_many_arguments)]
    fn fill(
        j: usize,
        left: u64,
        row: &mut Vec<u64>,
        i: usize,
        a: &[u64],
        remaining: &mut Vec<u64>,
        acc: &mut Vec<Vec<u64>>,
        out: &mut Vec<Vec<Vec<u64>>>,
    ) {
        if j + 1 == row.len() {
            if left > remaining[j] {
                return;
            }
            row[j] = left;
            for (r, &x) in remaining.iter_mut().zip(row.iter()) {
                *r -= x;
            }
            acc.push(row.clone());
            rows(i + 1, a, remaining, acc, out);
            acc.pop();
            for (r, &x) in remaining.iter_mut().zip(row.iter()) {
                *r += x;
            }
            return;
        }
        for x in 0..=left.min(remaining[j]) {
            row[j] = x;
            fill(j + 1, left - x, row, i, a, remaining, acc, out);
        }
    }
    let mut out = Vec::new();
    if a.iter().sum::<u64>() != b.iter().sum::<u64>() || b.is_empty() {
        return out;
    }
    rows(0, a, &mut b.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// The two factors of the asymptotic form `chi * exp(-exponent)`.
#[derive(Clone, Copy, Debug)]
pub struct BigBound {
    /// `ln chi` with `chi = n^(-1/2) (prod a_i prod b_j / prod_{e_ij > 0} e_ij)^(1/2)`.
    pub ln_chi: f64,
    /// `sum_ij mu_ij b(eps_ij)`.
    pub exponent: f64,
}

impl BigBound {
    pub fn ln_asymptotic(&self) -> f64 {
        self.ln_chi - self.exponent
    }
}

fn ln_positive(values: impl Iterator<Item = u64>) -> f64 {
    values.filter(|&k| k > 0).map(|k| (k as f64).ln()).sum()
}

pub fn bigbound_form(spec: &MatchingSpec) -> Result<BigBound> {
    spec.validate()?;
    let ln_chi = 0.5
        * (ln_positive(spec.a.iter().copied()) + ln_positive(spec.b.iter().copied())
            - ln_positive(spec.entries())
            - (spec.n as f64).ln());
    let mut exponent = 0.0;
    for i in 0..spec.a.len() {
        for j in 0..spec.b.len() {
            if let Some(eps) = spec.eps(i, j) {
                exponent += spec.mu(i, j) * b_function(eps)?;
            }
        }
    }
    Ok(BigBound { ln_chi, exponent })
}

/// Interval `[lo, hi]` containing `ln(exact / asymptotic)`, from Stirling's
/// formula `k! = sqrt(2 pi k) (k/e)^k e^(r_k)` with
/// `1/(12k + 1) < r_k < 1/(12k)`.
pub fn stirling_interval(spec: &MatchingSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let nonzero = |v: &[u64]| v.iter().filter(|&&k| k > 0).count() as f64;
    let q = spec.entries().filter(|&k| k > 0).count() as f64;
    let base =
        0.5 * (nonzero(&spec.a) + nonzero(&spec.b) - 1.0 - q) * (2.0 * std::f64::consts::PI).ln();
    let lower_r = |k: u64| 1.0 / (12.0 * k as f64 + 1.0);
    let upper_r = |k: u64| 1.0 / (12.0 * k as f64);
    let blocks = || spec.a.iter().chain(&spec.b).copied().filter(|&k| k > 0);
    let cells = || spec.entries().filter(|&k| k > 0);
    let lo =
        blocks().map(lower_r).sum::<f64>() - upper_r(spec.n) - cells().map(upper_r).sum::<f64>();
    let hi =
        blocks().map(upper_r).sum::<f64>() - lower_r(spec.n) - cells().map(lower_r).sum::<f64>();
    Ok((base + lo, base + hi))
}

/// `ln[(prod_{i>=1} a_i prod_{j>=1} b_j)^(1/4) exp(-sum mu b(eps))]`.
pub fn corollary_bound(spec: &MatchingSpec) -> Result<f64> {
    let big = bigbound_form(spec)?;
    let tail = ln_positive(spec.a[1..].iter().copied()) + ln_positive(spec.b[1..].iter().copied());
    Ok(0.25 * tail - big.exponent)
}

/// `ln C` for the constant with `exact <= C * corollary` on every spec with
/// `s + 1` and `t + 1` blocks:
/// `C = (2 pi)^(min(s,t)/2) e^((s+t+2)/12) ((t+1)^(s+1) (s+1)^(t+1))^(1/4)`.
///
/// The last factor covers rows (columns) whose nonzero counts multiply to
/// less than the block size; such a product is still at least the block
/// size divided by the number of nonzero counts.
pub fn corollary_constant(blocks_a: usize, blocks_b: usize) -> f64 {
    let (s1, t1) = (blocks_a as f64, blocks_b as f64);
    0.5 * (s1.min(t1) - 1.0) * (2.0 * std::f64::consts::PI).ln()
        + (s1 + t1) / 12.0
        + 0.25 * (s1 * t1.ln() + t1 * s1.ln())
}

/// Empirical frequency with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub p: f64,
    pub stderr: f64,
    pub hits: u64,
    pub samples: u64,
}

/// Frequency of the prescribed counts over `samples` uniform matchings, drawn in
/// [`MONTE_CARLO_SHARDS`] shards with independent streams.
pub fn monte_carlo_probability(
    spec: &MatchingSpec,
    samples: u64,
    rng: &SeededRng,
) -> Result<Estimate> {
    spec.validate()?;
    if samples == 0 {
        return Err(Error::DomainError("need at least one sample".into()));
    }
    let n = spec.n as usize;
    let row = block_labels(&spec.a);
    let col = block_labels(&spec.b);
    let t = spec.b.len();
    let target: Vec<u64> = spec.entries().collect();
    let shard = |k: u64| {
        let quota = samples / MONTE_CARLO_SHARDS + u64::from(k < samples % MONTE_CARLO_SHARDS);
        let mut gen = rng.substream(k);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut counts = vec![0u64; target.len()];
        let mut hits = 0u64;
        for _ in 0..quota {
            perm.shuffle(&mut gen);
            counts.iter_mut().for_each(|c| *c = 0);
            for v in 0..n {
                counts[row[v] * t + col[perm[v]]] += 1;
            }
            hits += u64::from(counts == target);
        }
        hits
    };
    let hits: u64 = thread::scope(|scope| {
        let handles: Vec<_> = (0..MONTE_CARLO_SHARDS)
            .map(|k| scope.spawn(move || shard(k)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("shard panicked"))
            .sum()
    });
    let p = hits as f64 / samples as f64;
    Ok(Estimate {
        p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        hits,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: u64, a: &[u64], b: &[u64], e: &[&[u64]]) -> MatchingSpec {
        MatchingSpec::new(
            n,
            a.to_vec(),
            b.to_vec(),
            e.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    fn ratio(p: u64, q: u64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn small_examples() {
        let s = spec(2, &[1, 1], &[1, 1], &[&[1, 0], &[0, 1]]);
        assert_eq!(
            exact_probability(&s).unwrap().rational.unwrap(),
            ratio(1, 2)
        );
        assert_eq!(brute_force_probability(&s).unwrap(), ratio(1, 2));
        let s = spec(4, &[2, 2], &[2, 2], &[&[2, 0], &[0, 2]]);
        assert_eq!(
            exact_probability(&s).unwrap().rational.unwrap(),
            ratio(1, 6)
        );
        assert_eq!(brute_force_probability(&s).unwrap(), ratio(1, 6));
        let s = spec(5, &[5], &[5], &[&[5]]);
        assert_eq!(
            exact_probability(&s).unwrap().rational.unwrap(),
            ratio(1, 1)
        );
        assert_eq!(exact_probability(&s).unwrap().ln_p, 0.0);
    }

    #[test]
    fn invalid_marginals_are_rejected() {
        assert!(matches!(
            MatchingSpec::new(3, vec![2, 1], vec![3], vec![vec![2], vec![0]]),
            Err(Error::InvalidMarginals(_))
        ));
        assert!(matches!(
            MatchingSpec::new(3, vec![2, 2], vec![3], vec![vec![2], vec![1]]),
            Err(Error::InvalidMarginals(_))
        ));
        assert!(matches!(
            MatchingSpec::new(0, vec![], vec![], vec![]),
            Err(Error::InvalidMarginals(_))
        ));
    }

    #[test]
    fn log_path_matches_rational_path() {
        let s = spec(30, &[10, 20], &[15, 15], &[&[7, 3], &[8, 12]]);
        let exact = exact_probability(&s).unwrap();
        let ln_gamma = [10u64, 20, 15, 15]
            .iter()
            .map(|&k| ln_factorial(k))
            .sum::<f64>()
            - ln_factorial(30)
            - [7u64, 3, 8, 12]
                .iter()
                .map(|&k| ln_factorial(k))
                .sum::<f64>();
        assert!((exact.ln_p - ln_gamma).abs() < 1e-10);
        let big = spec(200, &[100, 100], &[100, 100], &[&[50, 50], &[50, 50]]);
        let p = exact_probability(&big).unwrap();
        assert!(p.rational.is_none());
        assert!(p.ln_p < 0.0);
    }

    #[test]
    fn tables_sum_to_one() {
        let (a, b) = (vec![2u64, 1, 3], vec![3u64, 3]);
        let mut total = BigRational::zero();
        for e in feasible_tables(&a, &b) {
            let s = MatchingSpec::new(6, a.clone(), b.clone(), e).unwrap();
            total += exact_probability(&s).unwrap().rational.unwrap();
        }
        assert_eq!(total, BigRational::one());
    }

    #[test]
    fn exact_mean_counts_give_zero_exponent() {
        let s = spec(4, &[2, 2], &[2, 2], &[&[1, 1], &[1, 1]]);
        assert!(bigbound_form(&s).unwrap().exponent.abs() < 1e-15);
    }

    #[test]
    fn empty_cells_contribute_their_mean() {
        let s = spec(4, &[2, 2], &[2, 2], &[&[2, 0], &[0, 2]]);
        let big = bigbound_form(&s).unwrap();
        // Two cells at eps = 1 and two at eps = -1, all with mu = 1.
        let expected = 2.0 * (2.0 * 2f64.ln() - 1.0) + 2.0;
        assert!((big.exponent - expected).abs() < 1e-12);
        let ln_ratio = exact_probability(&s).unwrap().ln_p - big.ln_asymptotic();
        let (lo, hi) = stirling_interval(&s).unwrap();
        assert!(lo <= ln_ratio && ln_ratio <= hi);
    }

    #[test]
    fn corollary_holds_with_its_constant() {
        let s = spec(4, &[2, 2], &[2, 2], &[&[2, 0], &[0, 2]]);
        let lhs = exact_probability(&s).unwrap().ln_p;
        assert!(lhs <= corollary_constant(2, 2) + corollary_bound(&s).unwrap());
    }

    #[test]
    fn monte_carlo_examples() {
        let rng = SeededRng::new(11, 0);
        let s = spec(1, &[1], &[1], &[&[1]]);
        assert_eq!(monte_carlo_probability(&s, 100, &rng).unwrap().p, 1.0);
        let s = spec(4, &[2, 2], &[2, 2], &[&[2, 0], &[0, 2]]);
        let est = monte_carlo_probability(&s, 20_000, &rng).unwrap();
        assert!((est.p - 1.0 / 6.0).abs() <= 4.0 * (1.0 / 6.0 * 5.0 / 6.0 / 20_000f64).sqrt());
        assert_eq!(est.samples, 20_000);
    }

    #[test]
    fn brute_force_refuses_large_n() {
        let s = spec(9, &[9], &[9], &[&[9]]);
        assert!(matches!(
            brute_force_probability(&s),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let s = spec(4, &[2, 2], &[1, 3], &[&[1, 1], &[0, 2]]);
        assert_eq!(MatchingSpec::from_json(&s.to_json()).unwrap(), s);
        assert!(MatchingSpec::from_json(r#"{"n":2,"a":[2],"b":[2],"e":[[1]]}"#).is_err());
    }
}
