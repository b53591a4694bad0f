//! Patterns: class sizes and pairwise matched counts extracted from a
//! Z-vector, the weighted class graph, potencies and their reductions.
//!
//! A class is a pair `(fibre, exponent)` standing for the vertices of one
//! fibre carrying weight `2^exponent / sqrt(n h)`. Two classes are joined in
//! the class graph when their fibres are adjacent in the base graph and their
//! weights differ by a factor strictly inside `(d^-1/2, d^1/2)`.

pub mod check;
pub mod count;
pub mod deviation;
pub mod reduce;
pub mod select;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dyadic::{pow4, ZVector};
use crate::error::{Error, Result};
use crate::graph::{BaseGraph, BaseGraphFile, Lift};
use crate::numeric::neumaier_sum;
use deviation::{deviation, Regime};

/// `(fibre, exponent)`.
pub type ClassKey = (usize, u32);

/// Number of exponents in a band: `floor(log2 d) + 1`.
pub fn band_width(d: usize) -> u32 {
    usize::BITS - d.leading_zeros()
}

/// Whether weights `2^k` and `2^k2` are within a factor strictly below `sqrt(d)`.
pub fn weights_close(k: u32, k2: u32, d: usize) -> bool {
    let gap = k.abs_diff(k2);
    gap < 63 && pow4(gap) < d as u128
}

/// Class sizes and matched counts.
#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    base: Arc<BaseGraph>,
    n: usize,
    floor: u32,
    sizes: BTreeMap<ClassKey, u64>,
    counts: BTreeMap<(ClassKey, ClassKey), u64>,
}

fn canonical(a: ClassKey, b: ClassKey) -> (ClassKey, ClassKey) {
    if a.0 < b.0 {
        (a, b)
    } else {
        (b, a)
    }
}

impl Pattern {
    /// Validates and builds a pattern. Zero sizes and zero counts are dropped.
    ///
    /// Requirements: exponents lie in `[floor, floor + log2 d]`; each fibre
    /// holds at most `n` vertices; `sum 4^k a <= 10 n h`; counts join classes
    /// in adjacent fibres, both present, and never exceed the smaller size.
    pub fn new(
        base: Arc<BaseGraph>,
        n: usize,
        floor: u32,
        sizes: BTreeMap<ClassKey, u64>,
        counts: BTreeMap<(ClassKey, ClassKey), u64>,
    ) -> Result<Self> {
        let h = base.order();
        let d = base.degree();
        let sizes: BTreeMap<ClassKey, u64> = sizes.into_iter().filter(|&(_, a)| a > 0).collect();
        let mut per_fibre = vec![0u64; h];
        let mut mass = 0u128;
        for (&(i, k), &a) in &sizes {
            if i >= h {
                return Err(Error::VertexOutOfRange {
                    vertex: i,
                    order: h,
                });
            }
            if k < floor || k - floor >= band_width(d) {
                return Err(Error::InvalidPattern(format!(
                    "exponent {k} of fibre {i} is outside the band starting at {floor}"
                )));
            }
            per_fibre[i] += a;
            mass = mass.saturating_add(pow4(k).saturating_mul(a as u128));
        }
        if let Some(i) = per_fibre.iter().position(|&c| c > n as u64) {
            return Err(Error::InvalidPattern(format!(
                "fibre {i} holds more than n = {n} vertices"
            )));
        }
        if mass > 10 * (n * h) as u128 {
            return Err(Error::InvalidPattern("weighted size exceeds 10".into()));
        }
        let mut canon = BTreeMap::new();
        for ((a, b), e) in counts {
            if e == 0 {
                continue;
            }
            let (a, b) = canonical(a, b);
            if !base.is_adjacent(a.0, b.0) {
                return Err(Error::FibresNotAdjacent(a.0, b.0));
            }
            let (sa, sb) = (
                sizes.get(&a).copied().unwrap_or(0),
                sizes.get(&b).copied().unwrap_or(0),
            );
            if e > sa.min(sb) {
                return Err(Error::InvalidPattern(format!(
                    "count {e} between {a:?} and {b:?} exceeds the class sizes {sa}, {sb}"
                )));
            }
            if canon.insert((a, b), e).is_some() {
                return Err(Error::InvalidPattern(format!(
                    "count for {a:?}-{b:?} given twice"
                )));
            }
        }
        Ok(Self {
            base,
            n,
            floor,
            sizes,
            counts: canon,
        })
    }

    pub fn base(&self) -> &BaseGraph {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<BaseGraph> {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> usize {
        self.base.order()
    }

    pub fn d(&self) -> usize {
        self.base.degree()
    }

    pub fn floor(&self) -> u32 {
        self.floor
    }

    pub fn sizes(&self) -> &BTreeMap<ClassKey, u64> {
        &self.sizes
    }

    pub fn counts(&self) -> &BTreeMap<(ClassKey, ClassKey), u64> {
        &self.counts
    }

    pub fn size(&self, c: ClassKey) -> u64 {
        self.sizes.get(&c).copied().unwrap_or(0)
    }

    pub fn count(&self, a: ClassKey, b: ClassKey) -> u64 {
        self.counts.get(&canonical(a, b)).copied().unwrap_or(0)
    }

    /// `2^k / sqrt(n h)`.
    pub fn weight(&self, k: u32) -> f64 {
        2f64.powi(k as i32) / ((self.n * self.h()) as f64).sqrt()
    }

    /// Total number of vertices, `sum a`.
    pub fn total_size(&self) -> u64 {
        self.sizes.values().sum()
    }

    /// `sum w^2 a`.
    pub fn weighted_size(&self) -> f64 {
        neumaier_sum(
            self.sizes
                .iter()
                .map(|(&(_, k), &a)| self.weight(k).powi(2) * a as f64),
        )
    }

    pub fn is_adjacent(&self, a: ClassKey, b: ClassKey) -> bool {
        self.base.is_adjacent(a.0, b.0) && weights_close(a.1, b.1, self.d())
    }

    /// The sub-pattern on the classes in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<ClassKey>) -> Pattern {
        let sizes = self
            .sizes
            .iter()
            .filter(|(c, _)| keep.contains(c))
            .map(|(&c, &a)| (c, a))
            .collect();
        let counts = self
            .counts
            .iter()
            .filter(|((a, b), _)| keep.contains(a) && keep.contains(b))
            .map(|(&k, &e)| (k, e))
            .collect();
        Pattern {
            base: self.base.clone(),
            n: self.n,
            floor: self.floor,
            sizes,
            counts,
        }
    }

    pub fn classes(&self) -> BTreeSet<ClassKey> {
        self.sizes.keys().copied().collect()
    }

    pub fn gamma(&self) -> GammaView {
        GammaView::new(self)
    }

    /// `|sum over class-graph edges of w w' (e - a a' / n)|`.
    pub fn potency(&self) -> f64 {
        let g = self.gamma();
        g.potency(&g.all(), None)
    }

    pub fn potency_large(&self) -> f64 {
        let g = self.gamma();
        g.potency(&g.all(), Some(Regime::Large))
    }

    pub fn potency_small(&self) -> f64 {
        let g = self.gamma();
        g.potency(&g.all(), Some(Regime::Small))
    }

    /// Larger of the positive and the negative mass of the edge terms.
    pub fn potency_tilde(&self) -> f64 {
        let g = self.gamma();
        g.potency_tilde(&g.all())
    }

    /// `(sum a) (sum w^2 a)`, an upper bound on the tilde potency.
    pub fn potency_ceiling(&self) -> f64 {
        self.total_size() as f64 * self.weighted_size()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PatternFile::from(self)).expect("pattern serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: PatternFile = serde_json::from_str(text)?;
        f.into_pattern()
    }
}

/// Vertex sets of a Z-vector's classes, as flat lift indices.
pub fn witness_sets(z: &ZVector) -> BTreeMap<ClassKey, Vec<usize>> {
    let n = z.config().n;
    let mut sets: BTreeMap<ClassKey, Vec<usize>> = BTreeMap::new();
    for (idx, e) in z.exponents().iter().enumerate() {
        if let Some(k) = e {
            sets.entry((idx / n, *k)).or_default().push(idx);
        }
    }
    sets
}

/// Counts class sizes and matched pairs across every base edge.
pub fn extract_pattern(lift: &Lift, z: &ZVector) -> Result<Pattern> {
    let cfg = z.config();
    if cfg.n != lift.n() || cfg.h != lift.h() {
        return Err(Error::DimensionMismatch {
            expected: lift.order(),
            actual: cfg.n * cfg.h,
        });
    }
    let n = lift.n();
    let exps = z.exponents();
    let mut counts: BTreeMap<(ClassKey, ClassKey), u64> = BTreeMap::new();
    for (e, &(u, v)) in lift.base().edges().iter().enumerate() {
        let p = lift.permutation(e);
        for j in 0..n {
            if let (Some(ku), Some(kv)) = (exps[u * n + j], exps[v * n + p[j]]) {
                *counts.entry(((u, ku), (v, kv))).or_insert(0) += 1;
            }
        }
    }
    let sizes = z
        .histogram()
        .into_iter()
        .map(|(c, a)| (c, a as u64))
        .collect();
    Pattern::new(
        lift.base_arc().clone(),
        n,
        z.floor_exponent().unwrap_or(0),
        sizes,
        counts,
    )
}

/// One edge of the class graph, seen from one endpoint.
#[derive(Clone, Copy, Debug)]
pub struct GammaEdge {
    pub to: usize,
    pub count: u64,
    pub mu: f64,
    pub eps: f64,
    /// `w w' (e - mu)`.
    pub term: f64,
    pub regime: Regime,
}

/// The class graph of a pattern with per-edge deviation data.
#[derive(Clone, Debug)]
pub struct GammaView {
    pub classes: Vec<ClassKey>,
    pub sizes: Vec<u64>,
    pub weights: Vec<f64>,
    pub adjacency: Vec<Vec<GammaEdge>>,
    index: HashMap<ClassKey, usize>,
}

impl GammaView {
    pub fn new(p: &Pattern) -> Self {
        let classes: Vec<ClassKey> = p.sizes.keys().copied().collect();
        let index: HashMap<ClassKey, usize> =
            classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let sizes: Vec<u64> = classes.iter().map(|c| p.sizes[c]).collect();
        let weights: Vec<f64> = classes.iter().map(|c| p.weight(c.1)).collect();
        let mut by_fibre: Vec<Vec<usize>> = vec![Vec::new(); p.h()];
        for (v, c) in classes.iter().enumerate() {
            by_fibre[c.0].push(v);
        }
        let mut adjacency = vec![Vec::new(); classes.len()];
        for (v, &(i, k)) in classes.iter().enumerate() {
            for i2 in p.base.neighbours(i) {
                for &u in &by_fibre[i2] {
                    let k2 = classes[u].1;
                    if !weights_close(k, k2, p.d()) {
                        continue;
                    }
                    let e = p.count((i, k), (i2, k2));
                    let (mu, eps) = deviation(sizes[v], sizes[u], e, p.n);
                    adjacency[v].push(GammaEdge {
                        to: u,
                        count: e,
                        mu,
                        eps,
                        term: weights[v] * weights[u] * (e as f64 - mu),
                        regime: Regime::of(eps),
                    });
                }
            }
        }
        Self {
            classes,
            sizes,
            weights,
            adjacency,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn index_of(&self, c: ClassKey) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn all(&self) -> Vec<bool> {
        vec![true; self.len()]
    }

    pub fn mask(&self, keep: &BTreeSet<ClassKey>) -> Vec<bool> {
        self.classes.iter().map(|c| keep.contains(c)).collect()
    }

    /// Unordered edges `(v, edge)` with both endpoints active, each once.
    fn active_edges<'a>(&'a self, active: &'a [bool]) -> impl Iterator<Item = &'a GammaEdge> + 'a {
        self.adjacency
            .iter()
            .enumerate()
            .filter(move |(v, _)| active[*v])
            .flat_map(move |(v, list)| list.iter().filter(move |e| e.to > v && active[e.to]))
    }

    /// Potency of the sub-pattern on `active`, optionally restricted to one regime.
    pub fn potency(&self, active: &[bool], regime: Option<Regime>) -> f64 {
        neumaier_sum(
            self.active_edges(active)
                .filter(|e| regime.is_none_or(|r| e.regime == r))
                .map(|e| e.term),
        )
        .abs()
    }

    pub fn potency_tilde(&self, active: &[bool]) -> f64 {
        let terms: Vec<f64> = self.active_edges(active).map(|e| e.term).collect();
        let pos = neumaier_sum(terms.iter().copied().filter(|&t| t > 0.0));
        let neg = neumaier_sum(terms.iter().copied().filter(|&t| t < 0.0)).abs();
        pos.max(neg)
    }

    /// Signed sum of the terms at `v` over active neighbours.
    pub fn local_signed(&self, v: usize, active: &[bool], regime: Option<Regime>) -> f64 {
        neumaier_sum(
            self.adjacency[v]
                .iter()
                .filter(|e| active[e.to] && regime.is_none_or(|r| e.regime == r))
                .map(|e| e.term),
        )
    }

    /// Local potency `|sum_{u ~ v, u active} w_v w_u (e - mu)|`.
    pub fn local_potency(&self, v: usize, active: &[bool], regime: Option<Regime>) -> f64 {
        self.local_signed(v, active, regime).abs()
    }
}

/// Per-class aggregates of the full pattern used by the reductions.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregates {
    pub class: ClassKey,
    /// `sum over classes of neighbouring fibres of w'^2 a'`.
    pub neighbour_mass: f64,
    /// `sum over class-graph neighbours of w'^2 a' (w' / (w sqrt d))`.
    pub scaled_mass: f64,
    /// `max(neighbour_mass / (a w^2 d), e n / a)`.
    pub big_m: f64,
    /// `ln(big_m) / big_m`.
    pub small_m: f64,
    pub potency: f64,
    pub potency_large: f64,
    pub potency_small: f64,
}

/// Aggregates for every class of a pattern.
pub fn aggregates(p: &Pattern) -> Vec<Aggregates> {
    let g = p.gamma();
    let active = g.all();
    let d = p.d() as f64;
    let mut fibre_mass = vec![0.0; p.h()];
    for (&(i, k), &a) in p.sizes() {
        fibre_mass[i] += p.weight(k).powi(2) * a as f64;
    }
    (0..g.len())
        .map(|v| {
            let (i, _) = g.classes[v];
            let w = g.weights[v];
            let a = g.sizes[v] as f64;
            let neighbour_mass = neumaier_sum(p.base().neighbours(i).map(|k| fibre_mass[k]));
            let scaled_mass = neumaier_sum(g.adjacency[v].iter().map(|e| {
                let w2 = g.weights[e.to];
                w2 * w2 * g.sizes[e.to] as f64 * (w2 / (w * d.sqrt()))
            }));
            let big_m =
                (neighbour_mass / (a * w * w * d)).max(std::f64::consts::E * p.n() as f64 / a);
            Aggregates {
                class: g.classes[v],
                neighbour_mass,
                scaled_mass,
                big_m,
                small_m: big_m.ln() / big_m,
                potency: g.local_potency(v, &active, None),
                potency_large: g.local_potency(v, &active, Some(Regime::Large)),
                potency_small: g.local_potency(v, &active, Some(Regime::Small)),
            }
        })
        .collect()
}

/// One class-graph edge with its deviation data.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationEntry {
    pub a: ClassKey,
    pub b: ClassKey,
    pub count: u64,
    pub mu: f64,
    pub eps: f64,
    pub regime: Regime,
    pub b_value: f64,
}

/// Deviation data of every class-graph edge (each unordered edge once).
pub fn deviation_table(p: &Pattern) -> Vec<DeviationEntry> {
    let g = p.gamma();
    let mut out = Vec::new();
    for (v, list) in g.adjacency.iter().enumerate() {
        for e in list.iter().filter(|e| e.to > v) {
            out.push(DeviationEntry {
                a: g.classes[v],
                b: g.classes[e.to],
                count: e.count,
                mu: e.mu,
                eps: e.eps,
                regime: e.regime,
                b_value: deviation::b_function(e.eps).expect("eps >= -1"),
            });
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassSize {
    pub fibre: usize,
    pub exponent: u32,
    pub size: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassCount {
    pub a: ClassKey,
    pub b: ClassKey,
    pub count: u64,
}

/// On-disk pattern.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatternFile {
    pub n: usize,
    pub h: usize,
    pub d: usize,
    pub floor: u32,
    pub base: BaseGraphFile,
    pub sizes: Vec<ClassSize>,
    pub counts: Vec<ClassCount>,
}

impl From<&Pattern> for PatternFile {
    fn from(p: &Pattern) -> Self {
        Self {
            n: p.n,
            h: p.h(),
            d: p.d(),
            floor: p.floor,
            base: p.base().into(),
            sizes: p
                .sizes
                .iter()
                .map(|(&(fibre, exponent), &size)| ClassSize {
                    fibre,
                    exponent,
                    size,
                })
                .collect(),
            counts: p
                .counts
                .iter()
                .map(|(&(a, b), &count)| ClassCount { a, b, count })
                .collect(),
        }
    }
}

impl PatternFile {
    pub fn into_pattern(self) -> Result<Pattern> {
        let base = Arc::new(self.base.into_graph()?);
        if base.order() != self.h || base.degree() != self.d {
            return Err(Error::Parse("h or d disagrees with the base graph".into()));
        }
        let mut sizes = BTreeMap::new();
        for s in self.sizes {
            if sizes.insert((s.fibre, s.exponent), s.size).is_some() {
                return Err(Error::Parse(format!(
                    "class ({}, {}) listed twice",
                    s.fibre, s.exponent
                )));
            }
        }
        let counts = self
            .counts
            .into_iter()
            .map(|c| ((c.a, c.b), c.count))
            .collect();
        Pattern::new(base, self.n, self.floor, sizes, counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{quad_form_restricted, DyadicConfig, OperatorKind, Region};
    use crate::sampler::{sample_lift, SeededRng};

    fn k4() -> Arc<BaseGraph> {
        Arc::new(BaseGraph::complete(4).unwrap())
    }

    #[test]
    fn band_width_counts_dyadic_steps() {
        assert_eq!(band_width(2), 2);
        assert_eq!(band_width(3), 2);
        assert_eq!(band_width(4), 3);
        assert_eq!(band_width(5), 3);
        assert!(weights_close(3, 4, 5));
        assert!(!weights_close(3, 4, 4));
    }

    #[test]
    fn empty_pattern_has_zero_potency() {
        let p = Pattern::new(k4(), 5, 0, BTreeMap::new(), BTreeMap::new()).unwrap();
        assert_eq!(p.potency(), 0.0);
        assert_eq!(p.potency_tilde(), 0.0);
    }

    #[test]
    fn single_class_pair_example() {
        // a = 1 on two adjacent fibres, matched once: potency w^2 (1 - 1/n).
        let n = 8;
        let sizes = BTreeMap::from([((0, 0), 1), ((1, 0), 1)]);
        let counts = BTreeMap::from([(((0, 0), (1, 0)), 1)]);
        let p = Pattern::new(k4(), n, 0, sizes, counts).unwrap();
        let w = p.weight(0);
        assert!((p.potency() - w * w * (1.0 - 1.0 / n as f64)).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_patterns() {
        let sizes = BTreeMap::from([((0, 0), 2), ((1, 0), 1)]);
        let counts = BTreeMap::from([(((0, 0), (1, 0)), 2)]);
        assert!(Pattern::new(k4(), 8, 0, sizes.clone(), counts).is_err());
        let far = BTreeMap::from([((0, 0), 1), ((1, 5), 1)]);
        assert!(Pattern::new(k4(), 8, 0, far, BTreeMap::new()).is_err());
        let heavy = BTreeMap::from([((0, 4), 1)]);
        assert!(Pattern::new(k4(), 2, 4, heavy, BTreeMap::new()).is_err());
        let cyc = Arc::new(BaseGraph::cycle_power(6, 1).unwrap());
        let sizes = BTreeMap::from([((0, 0), 1), ((3, 0), 1)]);
        let counts = BTreeMap::from([(((0, 0), (3, 0)), 1)]);
        assert!(matches!(
            Pattern::new(cyc, 8, 0, sizes, counts),
            Err(Error::FibresNotAdjacent(0, 3))
        ));
    }

    #[test]
    fn extraction_matches_band_form() {
        let lift = sample_lift(k4(), 6, &SeededRng::new(4, 0)).unwrap();
        let cfg = DyadicConfig::of(&lift);
        let exps: Vec<Option<u32>> = (0..lift.order())
            .map(|i| [None, Some(1), Some(2), Some(1)][i % 4])
            .collect();
        let z = ZVector::from_exponents(cfg, exps).unwrap();
        let p = extract_pattern(&lift, &z).unwrap();
        let form = quad_form_restricted(
            &lift,
            OperatorKind::New,
            z.values(),
            z.values(),
            Region::Band,
        )
        .unwrap();
        assert!((form.abs() - 2.0 * p.potency()).abs() < 1e-12);
        assert!(p.potency_tilde() >= p.potency());
        assert!(p.potency_tilde() <= p.potency_ceiling());
        let back = Pattern::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        let sets = witness_sets(&z);
        assert_eq!(
            sets.values().map(Vec::len).sum::<usize>() as u64,
            p.total_size()
        );
    }

    #[test]
    fn aggregates_respect_the_m_inequalities() {
        let lift = sample_lift(k4(), 10, &SeededRng::new(1, 0)).unwrap();
        let cfg = DyadicConfig::of(&lift);
        let exps: Vec<Option<u32>> = (0..lift.order())
            .map(|i| [Some(0), Some(1), None][i % 3])
            .collect();
        let p = extract_pattern(&lift, &ZVector::from_exponents(cfg, exps).unwrap()).unwrap();
        for agg in aggregates(&p) {
            assert!(agg.big_m >= std::f64::consts::E);
            assert!(agg.small_m <= 1.18 * agg.big_m.powf(-2.0 / 3.0));
        }
    }
}
