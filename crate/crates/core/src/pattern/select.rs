//! Selection steps: neighbour subsets carrying half the local potency and
//! the weighted-measure selection they rest on.

use std::collections::BTreeSet;

use super::deviation::Regime;
use super::{aggregates, ClassKey, Pattern};
use crate::error::{Error, Result};

/// Neighbours of `c` within `within` whose edges carry most of `c`'s local
/// potency of the given regime.
///
/// * Large: neighbours `(i', w')` with `eps w^2 d / w'^2 >= L n / (2 a)`.
/// * Small: neighbours with `|eps| / (w w' n) >= p / (2 w^2 a N_i)` where `p`
///   is the local small-deviation potency and `N_i` the neighbour mass.
pub fn u_select(
    p: &Pattern,
    within: &BTreeSet<ClassKey>,
    c: ClassKey,
    regime: Regime,
    strength: f64,
) -> Result<BTreeSet<ClassKey>> {
    if !within.contains(&c) || p.size(c) == 0 {
        return Err(Error::VertexNotInU(c.0, c.1));
    }
    let g = p.gamma();
    let v = g.index_of(c).expect("class present");
    let active = g.mask(within);
    let a = g.sizes[v] as f64;
    let w = g.weights[v];
    let n = p.n() as f64;
    let d = p.d() as f64;
    let local = g.local_potency(v, &active, Some(regime));
    let neighbour_mass = aggregates(p)[v].neighbour_mass;
    let mut out = BTreeSet::new();
    for e in g.adjacency[v]
        .iter()
        .filter(|e| active[e.to] && e.regime == regime)
    {
        let w2 = g.weights[e.to];
        let keep = match regime {
            Regime::Large => e.eps * w * w * d / (w2 * w2) >= strength * n / (2.0 * a),
            Regime::Small => {
                neighbour_mass > 0.0
                    && e.eps.abs() / (w * w2 * n) >= local / (2.0 * w * w * a * neighbour_mass)
            }
        };
        if keep {
            out.insert(g.classes[e.to]);
        }
    }
    Ok(out)
}

/// Indices `k` with `h_k / g_k >= c (sum h mu) / (sum g mu)`. For `h >= 0`,
/// `g > 0`, `mu >= 0` and `0 < c < 1` the selected set carries at least
/// `(1 - c)` of `sum h mu`.
pub fn measure_select(h: &[f64], g: &[f64], mu: &[f64], c: f64) -> Result<Vec<usize>> {
    if h.is_empty() {
        return Err(Error::EmptyInput);
    }
    if h.len() != g.len() || h.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            actual: g.len().min(mu.len()),
        });
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::DomainError(format!("c must lie in (0, 1), got {c}")));
    }
    if h.iter().any(|&x| !(x >= 0.0))
        || g.iter().any(|&x| !(x > 0.0))
        || mu.iter().any(|&x| !(x >= 0.0))
    {
        return Err(Error::DomainError("need h >= 0, g > 0 and mu >= 0".into()));
    }
    let ih: f64 = h.iter().zip(mu).map(|(a, m)| a * m).sum();
    let ig: f64 = g.iter().zip(mu).map(|(a, m)| a * m).sum();
    if ig == 0.0 {
        return Err(Error::DomainError("mu has no mass".into()));
    }
    let cut = c * ih / ig;
    Ok((0..h.len()).filter(|&k| h[k] / g[k] >= cut).collect())
}
