//! Seeded random lifts, exhaustive lift enumeration and clique planting.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{BaseGraph, Lift};

/// Default cap on the number of lifts [`enumerate_lifts`] will walk.
pub const DEFAULT_ENUMERATION_GUARD: u128 = 10_000_000;

/// A `(seed, stream)` pair. Each base edge draws its permutation from its own
/// ChaCha8 stream, so a lift does not depend on the order edges are visited.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeededRng {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    fn key(&self) -> u64 {
        splitmix64(self.seed ^ splitmix64(self.stream.wrapping_add(0x5eed)))
    }

    /// Generator for sub-stream `sub`.
    pub fn substream(&self, sub: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.key());
        rng.set_stream(sub);
        rng
    }

    /// General-purpose generator for this `(seed, stream)`, disjoint from the
    /// per-edge sub-streams.
    pub fn generator(&self) -> ChaCha8Rng {
        self.substream(u64::MAX)
    }
}

/// Samples a uniform n-lift: one independent uniform permutation per base edge.
pub fn sample_lift(base: Arc<BaseGraph>, n: usize, rng: &SeededRng) -> Result<Lift> {
    if n == 0 {
        return Err(Error::DomainError("lift size n must be positive".into()));
    }
    let perms = (0..base.edges().len())
        .map(|e| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng.substream(e as u64));
            p
        })
        .collect();
    Ok(Lift::from_parts_unchecked(base, n, perms))
}

fn factorial_checked(n: usize) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

/// Lexicographic rank of a permutation.
pub fn permutation_rank(p: &[usize]) -> u128 {
    let n = p.len();
    let mut rank = 0u128;
    let mut used = vec![false; n];
    for (pos, &x) in p.iter().enumerate() {
        let smaller = (0..x).filter(|&y| !used[y]).count() as u128;
        rank = rank * (n - pos) as u128 + smaller;
        used[x] = true;
    }
    rank
}

/// Permutation of `0..n` with the given lexicographic rank.
pub fn permutation_unrank(n: usize, mut rank: u128) -> Vec<usize> {
    let mut digits = vec![0usize; n];
    for k in 1..=n {
        digits[n - k] = (rank % k as u128) as usize;
        rank /= k as u128;
    }
    let mut pool: Vec<usize> = (0..n).collect();
    digits.into_iter().map(|dgt| pool.remove(dgt)).collect()
}

/// Rank of a lift within [`enumerate_lifts`] order: the tuple of edge
/// permutations read lexicographically, the last edge varying fastest.
pub fn lift_rank(lift: &Lift) -> u128 {
    let radix = factorial_checked(lift.n()).expect("n! fits in u128");
    lift.permutations()
        .iter()
        .fold(0u128, |acc, p| acc * radix + permutation_rank(p))
}

/// Iterator over every n-lift of a base graph.
#[derive(Debug)]
pub struct LiftEnumerator {
    base: Arc<BaseGraph>,
    n: usize,
    radix: u128,
    next: u128,
    total: u128,
}

impl Iterator for LiftEnumerator {
    type Item = Lift;

    fn next(&mut self) -> Option<Lift> {
        if self.next >= self.total {
            return None;
        }
        let m = self.base.edges().len();
        let mut r = self.next;
        let mut perms = vec![Vec::new(); m];
        for e in (0..m).rev() {
            perms[e] = permutation_unrank(self.n, r % self.radix);
            r /= self.radix;
        }
        self.next += 1;
        Some(Lift::from_parts_unchecked(self.base.clone(), self.n, perms))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

/// Enumerates all `(n!)^m` lifts in lexicographic order, refusing when the
/// count exceeds [`DEFAULT_ENUMERATION_GUARD`].
pub fn enumerate_lifts(base: Arc<BaseGraph>, n: usize) -> Result<LiftEnumerator> {
    enumerate_lifts_with_guard(base, n, DEFAULT_ENUMERATION_GUARD)
}

pub fn enumerate_lifts_with_guard(
    base: Arc<BaseGraph>,
    n: usize,
    guard: u128,
) -> Result<LiftEnumerator> {
    if n == 0 {
        return Err(Error::DomainError("lift size n must be positive".into()));
    }
    let too_large = || Error::TooLarge(format!("(n!)^m lifts exceed the guard {guard}"));
    let radix = factorial_checked(n).ok_or_else(too_large)?;
    let total = (0..base.edges().len())
        .try_fold(1u128, |acc, _| acc.checked_mul(radix))
        .filter(|&t| t <= guard)
        .ok_or_else(too_large)?;
    Ok(LiftEnumerator {
        base,
        n,
        radix,
        next: 0,
        total,
    })
}

/// Forces the vertices `(i, 0)` for `i` in `fibres` to form a clique by
/// composing each relevant edge permutation with one transposition.
pub fn plant_clique(lift: &Lift, fibres: &[usize]) -> Result<Lift> {
    let base = lift.base();
    for (a, &i) in fibres.iter().enumerate() {
        if i >= base.order() {
            return Err(Error::VertexOutOfRange {
                vertex: i,
                order: base.order(),
            });
        }
        if fibres[..a].contains(&i) {
            return Err(Error::FibresNotDistinct(i));
        }
    }
    let mut perms = lift.permutations().to_vec();
    for (a, &i) in fibres.iter().enumerate() {
        for &k in &fibres[a + 1..] {
            let e = base
                .edge_index(i, k)
                .ok_or(Error::FibresNotPairwiseAdjacent)?;
            let p = &mut perms[e];
            let j = p
                .iter()
                .position(|&t| t == 0)
                .expect("permutation contains 0");
            p.swap(0, j);
        }
    }
    Lift::new(lift.base_arc().clone(), lift.n(), perms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Arc<BaseGraph> {
        Arc::new(BaseGraph::complete(3).unwrap())
    }

    #[test]
    fn sampling_is_deterministic_per_seed_and_stream() {
        let base = Arc::new(BaseGraph::petersen());
        let a = sample_lift(base.clone(), 7, &SeededRng::new(5, 0)).unwrap();
        let b = sample_lift(base.clone(), 7, &SeededRng::new(5, 0)).unwrap();
        let c = sample_lift(base.clone(), 7, &SeededRng::new(5, 1)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_ne!(a, c);
    }

    #[test]
    fn n_equal_one_gives_the_base_graph() {
        let lift = sample_lift(k3(), 1, &SeededRng::new(1, 0)).unwrap();
        assert!(lift.permutations().iter().all(|p| p == &vec![0]));
    }

    #[test]
    fn rank_and_unrank_are_inverse() {
        for r in 0..120u128 {
            let p = permutation_unrank(5, r);
            assert_eq!(permutation_rank(&p), r);
        }
        assert_eq!(permutation_unrank(3, 0), vec![0, 1, 2]);
        assert_eq!(permutation_unrank(3, 5), vec![2, 1, 0]);
    }

    #[test]
    fn enumeration_counts_and_order() {
        let lifts: Vec<Lift> = enumerate_lifts(k3(), 2).unwrap().collect();
        assert_eq!(lifts.len(), 8);
        for (r, l) in lifts.iter().enumerate() {
            assert_eq!(lift_rank(l), r as u128);
        }
    }

    #[test]
    fn enumeration_guard_refuses() {
        let res = enumerate_lifts_with_guard(k3(), 6, 6u128.pow(6));
        assert!(matches!(res, Err(Error::TooLarge(_))));
        assert!(enumerate_lifts(Arc::new(BaseGraph::complete(4).unwrap()), 6).is_err());
    }

    #[test]
    fn planted_clique_is_a_clique() {
        let base = Arc::new(BaseGraph::complete(5).unwrap());
        let lift = sample_lift(base, 9, &SeededRng::new(3, 0)).unwrap();
        let fibres = [0, 2, 3, 4];
        let planted = plant_clique(&lift, &fibres).unwrap();
        for &a in &fibres {
            for &b in &fibres {
                if a != b {
                    assert!(planted.is_adjacent(planted.index(a, 0), planted.index(b, 0)));
                }
            }
        }
        assert!(matches!(
            plant_clique(&lift, &[1, 1]),
            Err(Error::FibresNotDistinct(1))
        ));
    }

    #[test]
    fn planting_requires_adjacent_fibres() {
        let base = Arc::new(BaseGraph::cycle_power(7, 1).unwrap());
        let lift = sample_lift(base, 4, &SeededRng::new(0, 0)).unwrap();
        assert!(matches!(
            plant_clique(&lift, &[0, 3]),
            Err(Error::FibresNotPairwiseAdjacent)
        ));
    }
}
