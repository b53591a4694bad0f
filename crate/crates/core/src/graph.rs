//! Base graphs, their n-lifts, vectors on lifts and the three lift operators.
//!
//! A vertex of an n-lift is a pair `(i, j)` with `i` a base vertex (its fibre)
//! and `j < n`; it is stored at flat index `i * n + j`. For every base edge
//! `u < v` the lift keeps a permutation `pi` of `0..n` and joins `(u, j)` to
//! `(v, pi[j])`.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::neumaier_sum;

/// One entry of a base adjacency list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub neighbour: usize,
    pub edge: usize,
    /// True when this vertex is the smaller endpoint of the edge, so the
    /// stored permutation maps this fibre to the neighbour's fibre.
    pub forward: bool,
}

/// A simple d-regular graph with d >= 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseGraph {
    h: usize,
    d: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<Incidence>>,
}

impl BaseGraph {
    /// Builds a base graph from an edge list; edges are normalised to `u < v`
    /// and sorted.
    pub fn from_edges(h: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if h == 0 {
            return Err(Error::EmptyInput);
        }
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= h {
                    return Err(Error::VertexOutOfRange {
                        vertex: v,
                        order: h,
                    });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        for w in norm.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        let mut adjacency = vec![Vec::new(); h];
        for (e, &(u, v)) in norm.iter().enumerate() {
            adjacency[u].push(Incidence {
                neighbour: v,
                edge: e,
                forward: true,
            });
            adjacency[v].push(Incidence {
                neighbour: u,
                edge: e,
                forward: false,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|inc| inc.neighbour);
        }
        let d = adjacency[0].len();
        for (vertex, list) in adjacency.iter().enumerate() {
            if list.len() != d {
                return Err(Error::NonRegular {
                    vertex,
                    degree: list.len(),
                    expected: d,
                });
            }
        }
        if d < 2 {
            return Err(Error::NonRegular {
                vertex: 0,
                degree: d,
                expected: 2,
            });
        }
        Ok(Self {
            h,
            d,
            edges: norm,
            adjacency,
        })
    }

    /// The complete graph on `h` vertices (degree `h - 1`).
    pub fn complete(h: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..h {
            for v in u + 1..h {
                edges.push((u, v));
            }
        }
        Self::from_edges(h, &edges)
    }

    /// The k-th power of the cycle on `h` vertices (degree `2k`, needs `h > 2k`).
    pub fn cycle_power(h: usize, k: usize) -> Result<Self> {
        if k == 0 || h <= 2 * k {
            return Err(Error::DomainError(format!(
                "cycle power needs h > 2k >= 2, got h={h}, k={k}"
            )));
        }
        let mut edges = Vec::new();
        for u in 0..h {
            for s in 1..=k {
                let v = (u + s) % h;
                edges.push((u.min(v), u.max(v)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Self::from_edges(h, &edges)
    }

    /// The Petersen graph.
    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        Self::from_edges(10, &edges).expect("Petersen graph is 3-regular")
    }

    pub fn order(&self) -> usize {
        self.h
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn incidences(&self, v: usize) -> &[Incidence] {
        &self.adjacency[v]
    }

    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(|inc| inc.neighbour)
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.edge_index(u, v).is_some()
    }

    /// Index of the edge `{u, v}` in [`BaseGraph::edges`].
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.h || v >= self.h {
            return None;
        }
        let list = &self.adjacency[u];
        list.binary_search_by_key(&v, |inc| inc.neighbour)
            .ok()
            .map(|p| list[p].edge)
    }

    /// Dense row-major adjacency matrix.
    pub fn dense_adjacency(&self) -> Vec<f64> {
        let h = self.h;
        let mut a = vec![0.0; h * h];
        for &(u, v) in &self.edges {
            a[u * h + v] = 1.0;
            a[v * h + u] = 1.0;
        }
        a
    }

    /// Parses the text format: a header line `h m` followed by `m` lines `u v`
    /// (0-based). Blank lines and lines starting with `#` are ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or(Error::EmptyInput)?;
        let nums = parse_usizes(header)?;
        if nums.len() != 2 {
            return Err(Error::Parse(format!(
                "header must be `h m`, got `{header}`"
            )));
        }
        let (h, m) = (nums[0], nums[1]);
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let pair = parse_usizes(line)?;
            if pair.len() != 2 {
                return Err(Error::Parse(format!(
                    "edge line must be `u v`, got `{line}`"
                )));
            }
            edges.push((pair[0], pair[1]));
        }
        if edges.len() != m {
            return Err(Error::Parse(format!(
                "header announces {m} edges, found {}",
                edges.len()
            )));
        }
        Self::from_edges(h, &edges)
    }

    /// Writes the text format read by [`BaseGraph::parse_text`].
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.h, self.edges.len());
        for &(u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }
}

fn parse_usizes(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("not a non-negative integer: `{t}`")))
        })
        .collect()
}

/// An n-lift of a base graph.
#[derive(Debug)]
pub struct Lift {
    base: Arc<BaseGraph>,
    n: usize,
    perms: Vec<Vec<usize>>,
    inverses: Vec<OnceLock<Vec<usize>>>,
}

impl Clone for Lift {
    fn clone(&self) -> Self {
        Self::from_parts_unchecked(self.base.clone(), self.n, self.perms.clone())
    }
}

impl PartialEq for Lift {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.base == other.base && self.perms == other.perms
    }
}

impl Lift {
    /// Builds a lift from one permutation per base edge (in edge order).
    pub fn new(base: Arc<BaseGraph>, n: usize, perms: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::DomainError("lift size n must be positive".into()));
        }
        if perms.len() != base.edges().len() {
            return Err(Error::DimensionMismatch {
                expected: base.edges().len(),
                actual: perms.len(),
            });
        }
        for (e, p) in perms.iter().enumerate() {
            let (u, v) = base.edges()[e];
            if p.len() != n {
                return Err(Error::InvalidPermutation(u, v));
            }
            let mut seen = vec![false; n];
            for &x in p {
                if x >= n || seen[x] {
                    return Err(Error::InvalidPermutation(u, v));
                }
                seen[x] = true;
            }
        }
        Ok(Self::from_parts_unchecked(base, n, perms))
    }

    pub(crate) fn from_parts_unchecked(
        base: Arc<BaseGraph>,
        n: usize,
        perms: Vec<Vec<usize>>,
    ) -> Self {
        let inverses = (0..perms.len()).map(|_| OnceLock::new()).collect();
        Self {
            base,
            n,
            perms,
            inverses,
        }
    }

    /// The lift whose permutations are all the identity (n disjoint copies).
    pub fn identity(base: Arc<BaseGraph>, n: usize) -> Result<Self> {
        let m = base.edges().len();
        Self::new(base, n, vec![(0..n).collect(); m])
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

    /// Number of lift vertices, `n * h`.
    pub fn order(&self) -> usize {
        self.n * self.base.order()
    }

    pub fn index(&self, fibre: usize, j: usize) -> usize {
        fibre * self.n + j
    }

    pub fn vertex(&self, index: usize) -> (usize, usize) {
        (index / self.n, index % self.n)
    }

    pub fn permutations(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn permutation(&self, edge: usize) -> &[usize] {
        &self.perms[edge]
    }

    /// Inverse of the permutation on `edge`, computed once and cached.
    pub fn inverse(&self, edge: usize) -> &[usize] {
        self.inverses[edge].get_or_init(|| {
            let p = &self.perms[edge];
            let mut inv = vec![0; p.len()];
            for (j, &t) in p.iter().enumerate() {
                inv[t] = j;
            }
            inv
        })
    }

    /// The vertex of fibre `inc.neighbour` matched to `(fibre, j)`.
    pub fn matched(&self, inc: Incidence, j: usize) -> usize {
        if inc.forward {
            self.perms[inc.edge][j]
        } else {
            self.inverse(inc.edge)[j]
        }
    }

    /// Flat indices of the lift neighbours of a vertex.
    pub fn neighbours(&self, index: usize) -> Vec<usize> {
        let (i, j) = self.vertex(index);
        self.base
            .incidences(i)
            .iter()
            .map(|&inc| self.index(inc.neighbour, self.matched(inc, j)))
            .collect()
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        let (i, j) = self.vertex(a);
        let (i2, j2) = self.vertex(b);
        self.base
            .incidences(i)
            .iter()
            .any(|&inc| inc.neighbour == i2 && self.matched(inc, j) == j2)
    }

    /// Replaces the permutation on `edge`.
    pub fn with_permutation(&self, edge: usize, perm: Vec<usize>) -> Result<Self> {
        let mut perms = self.perms.clone();
        perms[edge] = perm;
        Self::new(self.base.clone(), self.n, perms)
    }

    /// `y = M x` on raw slices of length `n h`.
    pub fn adjacency_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        y.iter_mut().for_each(|v| *v = 0.0);
        for (e, &(u, v)) in self.base.edges().iter().enumerate() {
            let p = &self.perms[e];
            let (xu, xv) = (&x[u * n..(u + 1) * n], &x[v * n..(v + 1) * n]);
            for j in 0..n {
                let t = p[j];
                y[u * n + j] += xv[t];
                y[v * n + t] += xu[j];
            }
        }
    }

    /// `y = Mbar x`: the fibre-averaged operator, `(Mbar x)_(i,j) = (1/n) sum_{i'~i} S_{i'}`
    /// where `S` are the fibre sums of `x`.
    pub fn averaged_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        let sums: Vec<f64> = (0..self.h())
            .map(|i| neumaier_sum(x[i * n..(i + 1) * n].iter().copied()))
            .collect();
        for i in 0..self.h() {
            let t = neumaier_sum(self.base.neighbours(i).map(|k| sums[k])) / n as f64;
            y[i * n..(i + 1) * n].iter_mut().for_each(|v| *v = t);
        }
    }

    /// `y = N x = M x - Mbar x`.
    pub fn new_operator_into(&self, x: &[f64], y: &mut [f64]) {
        let mut avg = vec![0.0; x.len()];
        self.averaged_into(x, &mut avg);
        self.adjacency_into(x, y);
        for (a, b) in y.iter_mut().zip(&avg) {
            *a -= b;
        }
    }

    fn check_len(&self, x: &LiftVector) -> Result<()> {
        if x.h() != self.h() || x.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.order(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn apply_m(&self, x: &LiftVector) -> Result<LiftVector> {
        self.check_len(x)?;
        let mut y = vec![0.0; x.len()];
        self.adjacency_into(x.entries(), &mut y);
        LiftVector::new(self.h(), self.n, y)
    }

    pub fn apply_mbar(&self, x: &LiftVector) -> Result<LiftVector> {
        self.check_len(x)?;
        let mut y = vec![0.0; x.len()];
        self.averaged_into(x.entries(), &mut y);
        LiftVector::new(self.h(), self.n, y)
    }

    pub fn apply_n(&self, x: &LiftVector) -> Result<LiftVector> {
        self.check_len(x)?;
        let mut y = vec![0.0; x.len()];
        self.new_operator_into(x.entries(), &mut y);
        LiftVector::new(self.h(), self.n, y)
    }

    /// Serialises to the JSON lift format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&LiftFile::from(self)).expect("lift serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LiftFile = serde_json::from_str(text)?;
        file.into_lift()
    }
}

/// On-disk base graph description.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct BaseGraphFile {
    pub h: usize,
    pub edges: Vec<(usize, usize)>,
}

impl From<&BaseGraph> for BaseGraphFile {
    fn from(g: &BaseGraph) -> Self {
        Self {
            h: g.order(),
            edges: g.edges().to_vec(),
        }
    }
}

impl BaseGraphFile {
    pub fn into_graph(self) -> Result<BaseGraph> {
        BaseGraph::from_edges(self.h, &self.edges)
    }
}

/// On-disk lift: the base graph, `n`, and a map from `"u-v"` to the
/// permutation carried by that base edge.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftFile {
    pub base: BaseGraphFile,
    pub n: usize,
    pub perms: BTreeMap<String, Vec<usize>>,
}

impl From<&Lift> for LiftFile {
    fn from(l: &Lift) -> Self {
        let perms = l
            .base()
            .edges()
            .iter()
            .zip(l.permutations())
            .map(|(&(u, v), p)| (format!("{u}-{v}"), p.clone()))
            .collect();
        Self {
            base: l.base().into(),
            n: l.n(),
            perms,
        }
    }
}

impl LiftFile {
    pub fn into_lift(self) -> Result<Lift> {
        let base = Arc::new(self.base.into_graph()?);
        let mut perms = Vec::with_capacity(base.edges().len());
        for &(u, v) in base.edges() {
            let p = self
                .perms
                .get(&format!("{u}-{v}"))
                .ok_or_else(|| Error::Parse(format!("missing permutation for edge {u}-{v}")))?;
            perms.push(p.clone());
        }
        if self.perms.len() != perms.len() {
            return Err(Error::Parse(
                "permutation map has keys that are not base edges".into(),
            ));
        }
        Lift::new(base, self.n, perms)
    }
}

/// A real vector on the vertices of an n-lift with cached squared norm and
/// fibre sums (both accumulated with compensated summation).
#[derive(Clone, Debug, PartialEq)]
pub struct LiftVector {
    h: usize,
    n: usize,
    entries: Vec<f64>,
    norm2: f64,
    fibre_sums: Vec<f64>,
}

impl LiftVector {
    pub fn new(h: usize, n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * h {
            return Err(Error::DimensionMismatch {
                expected: n * h,
                actual: entries.len(),
            });
        }
        let norm2 = neumaier_sum(entries.iter().map(|x| x * x));
        let fibre_sums = (0..h)
            .map(|i| neumaier_sum(entries[i * n..(i + 1) * n].iter().copied()))
            .collect();
        Ok(Self {
            h,
            n,
            entries,
            norm2,
            fibre_sums,
        })
    }

    pub fn zeros(h: usize, n: usize) -> Self {
        Self::new(h, n, vec![0.0; n * h]).expect("sizes agree")
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    pub fn get(&self, fibre: usize, j: usize) -> f64 {
        self.entries[fibre * self.n + j]
    }

    pub fn norm2(&self) -> f64 {
        self.norm2
    }

    pub fn norm(&self) -> f64 {
        self.norm2.sqrt()
    }

    pub fn fibre_sums(&self) -> &[f64] {
        &self.fibre_sums
    }

    /// True when every fibre sum is zero up to `tol * max(1, ||x||)`.
    pub fn is_balanced_within(&self, tol: f64) -> bool {
        let scale = self.norm().max(1.0);
        self.fibre_sums.iter().all(|s| s.abs() <= tol * scale)
    }

    /// Balanced with the default tolerance `1e-10`.
    pub fn is_balanced(&self) -> bool {
        self.is_balanced_within(1e-10)
    }

    /// Applies `f` entrywise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(self.h, self.n, self.entries.iter().map(|&x| f(x)).collect())
            .expect("sizes agree")
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|x| c * x)
    }

    /// Euclidean inner product.
    pub fn dot(&self, other: &Self) -> f64 {
        neumaier_sum(self.entries.iter().zip(&other.entries).map(|(a, b)| a * b))
    }

    /// Removes the mean of every fibre.
    pub fn balanced(&self) -> Self {
        let mut e = self.entries.clone();
        for i in 0..self.h {
            let mean = self.fibre_sums[i] / self.n as f64;
            e[i * self.n..(i + 1) * self.n]
                .iter_mut()
                .for_each(|x| *x -= mean);
        }
        Self::new(self.h, self.n, e).expect("sizes agree")
    }
}

/// Lifts a base vector `t` to the fibre-constant vector `x_(i,j) = t_i`.
pub fn lifted_eigenvector(lift: &Lift, base_vector: &[f64]) -> Result<LiftVector> {
    if base_vector.len() != lift.h() {
        return Err(Error::DimensionMismatch {
            expected: lift.h(),
            actual: base_vector.len(),
        });
    }
    let n = lift.n();
    let entries = base_vector
        .iter()
        .flat_map(|&t| std::iter::repeat_n(t, n))
        .collect();
    LiftVector::new(lift.h(), n, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> Arc<BaseGraph> {
        Arc::new(BaseGraph::complete(4).unwrap())
    }

    #[test]
    fn families_have_expected_degrees() {
        assert_eq!(BaseGraph::complete(5).unwrap().degree(), 4);
        let p = BaseGraph::petersen();
        assert_eq!((p.order(), p.degree(), p.edges().len()), (10, 3, 15));
        let c = BaseGraph::cycle_power(9, 2).unwrap();
        assert_eq!((c.order(), c.degree()), (9, 4));
        assert!(BaseGraph::cycle_power(4, 2).is_err());
    }

    #[test]
    fn rejects_malformed_base_graphs() {
        assert!(matches!(
            BaseGraph::from_edges(3, &[(0, 0), (1, 2)]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            BaseGraph::from_edges(3, &[(0, 1), (1, 0), (1, 2)]),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            BaseGraph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (0, 3)]),
            Err(Error::NonRegular { .. })
        ));
    }

    #[test]
    fn text_format_round_trips() {
        let g = BaseGraph::petersen();
        let back = BaseGraph::parse_text(&g.to_text()).unwrap();
        assert_eq!(g, back);
        assert!(BaseGraph::parse_text("3 2\n0 1\n1 2\n").is_err());
    }

    #[test]
    fn lift_json_round_trips() {
        let lift = Lift::new(
            k4(),
            3,
            vec![
                vec![1, 2, 0],
                vec![0, 2, 1],
                vec![2, 1, 0],
                vec![0, 1, 2],
                vec![1, 0, 2],
                vec![2, 0, 1],
            ],
        )
        .unwrap();
        let back = Lift::from_json(&lift.to_json()).unwrap();
        assert_eq!(lift, back);
        assert_eq!(lift.to_json(), back.to_json());
    }

    #[test]
    fn lift_is_d_regular_and_inverse_consistent() {
        let lift = Lift::new(
            k4(),
            3,
            vec![
                vec![1, 2, 0],
                vec![0, 2, 1],
                vec![2, 1, 0],
                vec![0, 1, 2],
                vec![1, 0, 2],
                vec![2, 0, 1],
            ],
        )
        .unwrap();
        for v in 0..lift.order() {
            let nb = lift.neighbours(v);
            assert_eq!(nb.len(), 3);
            for &w in &nb {
                assert!(lift.neighbours(w).contains(&v));
                assert!(lift.is_adjacent(v, w));
            }
        }
    }

    #[test]
    fn identity_lift_of_k4_has_m_one_equal_three() {
        let lift = Lift::identity(k4(), 2).unwrap();
        let ones = LiftVector::new(4, 2, vec![1.0; 8]).unwrap();
        let y = lift.apply_m(&ones).unwrap();
        assert!(y.entries().iter().all(|&v| v == 3.0));
        let z = lift.apply_n(&ones).unwrap();
        assert!(z.entries().iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn averaged_operator_kills_balanced_vectors() {
        let lift = Lift::new(
            k4(),
            3,
            vec![
                vec![1, 2, 0],
                vec![0, 2, 1],
                vec![2, 1, 0],
                vec![0, 1, 2],
                vec![1, 0, 2],
                vec![2, 0, 1],
            ],
        )
        .unwrap();
        let x = LiftVector::new(4, 3, (0..12).map(|k| (k as f64).sin()).collect())
            .unwrap()
            .balanced();
        assert!(x.is_balanced());
        let y = lift.apply_mbar(&x).unwrap();
        assert!(y.entries().iter().all(|v| v.abs() < 1e-14));
        let nx = lift.apply_n(&x).unwrap();
        let mx = lift.apply_m(&x).unwrap();
        for (a, b) in nx.entries().iter().zip(mx.entries()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn lifted_eigenvector_of_petersen() {
        let base = Arc::new(BaseGraph::petersen());
        let lift = Lift::identity(base.clone(), 3).unwrap();
        // 3 is the Perron eigenvalue with the all-ones eigenvector.
        let x = lifted_eigenvector(&lift, &[1.0; 10]).unwrap();
        let y = lift.apply_m(&x).unwrap();
        assert!(y.entries().iter().all(|&v| (v - 3.0).abs() < 1e-14));
        assert!(lifted_eigenvector(&lift, &[1.0; 9]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let lift = Lift::identity(k4(), 2).unwrap();
        let x = LiftVector::zeros(4, 3);
        assert!(matches!(
            lift.apply_m(&x),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
