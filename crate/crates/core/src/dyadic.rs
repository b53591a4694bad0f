//! Bilinear forms on lifts, randomized dyadic rounding, polarization and
//! the band selection that turns a top eigenvector into a Z-vector.
//!
//! The "band" region is the set of pairs `(a, b)` with `a, b > 0` and
//! `a / b` strictly between `d^-1/2` and `d^1/2`.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Lift, LiftVector};
use crate::numeric::neumaier_sum;
use crate::spectrum::{lambda_star, LanczosOptions, SpectralReport};

/// Which lift operator a form uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    /// The adjacency matrix `M`.
    Adjacency,
    /// The fibre-averaged matrix `Mbar`.
    Averaged,
    /// `N = M - Mbar`.
    New,
}

/// Region of value pairs a restricted form sums over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Band,
    Complement,
}

/// True when `(a, b)` lies in the band region for degree `d`.
pub fn in_band(a: f64, b: f64, d: f64) -> bool {
    a > 0.0 && b > 0.0 && a * a < d * b * b && b * b < d * a * a
}

fn check_dims(lift: &Lift, vs: &[&LiftVector]) -> Result<()> {
    for v in vs {
        if v.h() != lift.h() || v.n() != lift.n() {
            return Err(Error::DimensionMismatch {
                expected: lift.order(),
                actual: v.len(),
            });
        }
    }
    Ok(())
}

/// `<x, y>_K = sum_{u,v} x_u K_uv y_v`.
pub fn quad_form(lift: &Lift, kind: OperatorKind, x: &LiftVector, y: &LiftVector) -> Result<f64> {
    check_dims(lift, &[x, y])?;
    let ky = match kind {
        OperatorKind::Adjacency => lift.apply_m(y)?,
        OperatorKind::Averaged => lift.apply_mbar(y)?,
        OperatorKind::New => lift.apply_n(y)?,
    };
    Ok(x.dot(&ky))
}

/// Sorted positive entries of one fibre with prefix sums.
struct PositiveFibre {
    values: Vec<f64>,
    prefix: Vec<f64>,
    total: f64,
}

impl PositiveFibre {
    fn new(entries: &[f64]) -> Self {
        let mut values: Vec<f64> = entries.iter().copied().filter(|&v| v > 0.0).collect();
        values.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for v in &values {
            acc += v;
            prefix.push(acc);
        }
        Self {
            values,
            prefix,
            total: neumaier_sum(entries.iter().copied()),
        }
    }

    /// Sum of entries `b` with `(a, b)` in the band, for `a > 0`.
    fn band_sum(&self, a: f64, d: f64) -> f64 {
        let lo = self.values.partition_point(|&b| d * b * b <= a * a);
        let hi = self.values.partition_point(|&b| b * b < d * a * a);
        if hi > lo {
            self.prefix[hi] - self.prefix[lo]
        } else {
            0.0
        }
    }
}

/// `(band part, complement part)` of `<x, y>_K`.
fn restricted_parts(lift: &Lift, kind: OperatorKind, x: &LiftVector, y: &LiftVector) -> (f64, f64) {
    let n = lift.n();
    let d = lift.d() as f64;
    let (xs, ys) = (x.entries(), y.entries());
    let mut m_band = Vec::new();
    let mut m_comp = Vec::new();
    if kind != OperatorKind::Averaged {
        for (e, &(u, v)) in lift.base().edges().iter().enumerate() {
            let p = lift.permutation(e);
            for j in 0..n {
                let (a, b) = (u * n + j, v * n + p[j]);
                for (s, t) in [(a, b), (b, a)] {
                    let term = xs[s] * ys[t];
                    if in_band(xs[s], ys[t], d) {
                        m_band.push(term);
                    } else {
                        m_comp.push(term);
                    }
                }
            }
        }
    }
    let mut a_band = Vec::new();
    let mut a_comp = Vec::new();
    if kind != OperatorKind::Adjacency {
        let fibres: Vec<PositiveFibre> = (0..lift.h())
            .map(|i| PositiveFibre::new(&ys[i * n..(i + 1) * n]))
            .collect();
        for i in 0..lift.h() {
            for k in lift.base().neighbours(i) {
                let f = &fibres[k];
                for &a in &xs[i * n..(i + 1) * n] {
                    if a > 0.0 {
                        let w = f.band_sum(a, d);
                        a_band.push(a * w);
                        a_comp.push(a * (f.total - w));
                    } else {
                        a_comp.push(a * f.total);
                    }
                }
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    let band = neumaier_sum(m_band) - inv_n * neumaier_sum(a_band);
    let comp = neumaier_sum(m_comp) - inv_n * neumaier_sum(a_comp);
    match kind {
        OperatorKind::Averaged => (-band, -comp),
        _ => (band, comp),
    }
}

/// `<x, y>_{K, R}`: the form summed only over pairs `(u, v)` whose values
/// `(x_u, y_v)` lie in region `R`.
pub fn quad_form_restricted(
    lift: &Lift,
    kind: OperatorKind,
    x: &LiftVector,
    y: &LiftVector,
    region: Region,
) -> Result<f64> {
    check_dims(lift, &[x, y])?;
    let (band, comp) = restricted_parts(lift, kind, x, y);
    Ok(match region {
        Region::Band => band,
        Region::Complement => comp,
    })
}

/// Dimensions of the dyadic grid: weights are `2^k / sqrt(n h)`, `k >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicConfig {
    pub n: usize,
    pub h: usize,
    pub d: usize,
}

impl DyadicConfig {
    pub fn of(lift: &Lift) -> Self {
        Self {
            n: lift.n(),
            h: lift.h(),
            d: lift.d(),
        }
    }

    pub fn scale(&self) -> f64 {
        ((self.n * self.h) as f64).sqrt()
    }

    /// The weight `2^k / sqrt(n h)`.
    pub fn weight(&self, exponent: u32) -> f64 {
        2f64.powi(exponent as i32) / self.scale()
    }
}

/// `4^k` as an exact integer, saturating.
pub(crate) fn pow4(k: u32) -> u128 {
    if k >= 63 {
        u128::MAX
    } else {
        1u128 << (2 * k)
    }
}

/// A vector whose nonzero entries are `2^k / sqrt(n h)` with `k >= 0`, of
/// squared norm at most 10, and with largest entry at most `d` times the
/// smallest nonzero entry.
#[derive(Clone, Debug, PartialEq)]
pub struct ZVector {
    config: DyadicConfig,
    exponents: Vec<Option<u32>>,
    values: LiftVector,
}

impl ZVector {
    pub fn from_exponents(config: DyadicConfig, exponents: Vec<Option<u32>>) -> Result<Self> {
        let len = config.n * config.h;
        if exponents.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: exponents.len(),
            });
        }
        let present: Vec<u32> = exponents.iter().flatten().copied().collect();
        let mass: u128 = present
            .iter()
            .fold(0u128, |acc, &k| acc.saturating_add(pow4(k)));
        let limit = 10 * (len as u128);
        if mass > limit {
            return Err(Error::NotZVector(format!(
                "squared norm {mass}/{len} exceeds 10"
            )));
        }
        if let (Some(&lo), Some(&hi)) = (present.iter().min(), present.iter().max()) {
            let ratio_ok = hi - lo < 127 && (1u128 << (hi - lo)) <= config.d as u128;
            if !ratio_ok {
                return Err(Error::NotZVector(format!(
                    "largest weight 2^{hi} exceeds d = {} times the smallest 2^{lo}",
                    config.d
                )));
            }
        }
        let values = exponents
            .iter()
            .map(|e| e.map_or(0.0, |k| config.weight(k)))
            .collect();
        let values = LiftVector::new(config.h, config.n, values)?;
        Ok(Self {
            config,
            exponents,
            values,
        })
    }

    /// Recovers exponents from a real vector, failing unless every entry is
    /// exactly zero or an admissible weight.
    pub fn from_vector(config: DyadicConfig, x: &LiftVector) -> Result<Self> {
        let scale = config.scale();
        let exps = x
            .entries()
            .iter()
            .enumerate()
            .map(|(idx, &v)| {
                if v == 0.0 {
                    return Ok(None);
                }
                let t = v * scale;
                let k = t.log2().round();
                if !(0.0..=1000.0).contains(&k)
                    || (config.weight(k as u32) - v).abs() > 1e-12 * v.abs()
                {
                    return Err(Error::NotZVector(format!(
                        "entry {idx} = {v} is not a dyadic weight"
                    )));
                }
                Ok(Some(k as u32))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_exponents(config, exps)
    }

    pub fn config(&self) -> DyadicConfig {
        self.config
    }

    pub fn exponents(&self) -> &[Option<u32>] {
        &self.exponents
    }

    pub fn values(&self) -> &LiftVector {
        &self.values
    }

    /// Smallest exponent present.
    pub fn floor_exponent(&self) -> Option<u32> {
        self.exponents.iter().flatten().min().copied()
    }

    /// Number of vertices per `(fibre, exponent)` class.
    pub fn histogram(&self) -> BTreeMap<(usize, u32), usize> {
        let mut hist = BTreeMap::new();
        for (idx, e) in self.exponents.iter().enumerate() {
            if let Some(k) = e {
                *hist.entry((idx / self.config.n, *k)).or_insert(0) += 1;
            }
        }
        hist
    }
}

fn split_power(a: f64) -> f64 {
    // Largest power of two not exceeding a (a >= 1).
    let mut p = 2f64.powi(a.log2().floor() as i32);
    while p > a {
        p /= 2.0;
    }
    while 2.0 * p <= a {
        p *= 2.0;
    }
    p
}

/// Randomized rounding to signed powers of two: each entry is replaced by
/// the bracketing value below or above it with probabilities that preserve
/// its mean. Needs `||x||^2 <= n h`; the result has squared norm at most
/// `5 n h`.
pub fn dyadic_round(x: &LiftVector, rng: &mut impl Rng) -> Result<LiftVector> {
    let limit = x.len() as f64;
    if x.norm2() > limit {
        return Err(Error::NormTooLarge {
            norm2: x.norm2(),
            limit,
        });
    }
    let entries = x
        .entries()
        .iter()
        .map(|&v| {
            let a = v.abs();
            let s = v.signum();
            if a == 0.0 {
                0.0
            } else if a < 1.0 {
                if rng.gen::<f64>() < a {
                    s
                } else {
                    0.0
                }
            } else {
                let lo = split_power(a);
                let p = (a - lo) / lo;
                if rng.gen::<f64>() < p {
                    s * 2.0 * lo
                } else {
                    s * lo
                }
            }
        })
        .collect();
    LiftVector::new(x.h(), x.n(), entries)
}

/// True for zero or a power of two `2^k` with `k >= 0`.
pub fn is_dyadic_magnitude(v: f64) -> bool {
    v == 0.0 || (v >= 1.0 && v.is_finite() && split_power(v) == v)
}

/// Checks membership of the nonnegative dyadic set with squared norm at most
/// `10 n h`.
pub fn check_nonneg_dyadic(y: &LiftVector) -> Result<()> {
    if let Some((idx, v)) = y
        .entries()
        .iter()
        .enumerate()
        .find(|(_, &v)| v < 0.0 || !is_dyadic_magnitude(v))
    {
        return Err(Error::NotDyadic(format!("entry {idx} = {v}")));
    }
    let limit = 10.0 * y.len() as f64;
    if y.norm2() > limit {
        return Err(Error::NormTooLarge {
            norm2: y.norm2(),
            limit,
        });
    }
    Ok(())
}

/// One polarization candidate.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub label: &'static str,
    pub vector: LiftVector,
    /// `|<c, c>_N|`.
    pub value: f64,
}

/// Result of [`polarize`].
#[derive(Clone, Debug)]
pub struct Polarization {
    /// `<y, z>_N`.
    pub cross: f64,
    /// Candidates that are nonnegative dyadic with squared norm at most `10 n h`.
    pub candidates: Vec<Candidate>,
}

impl Polarization {
    pub fn best(&self) -> Option<&Candidate> {
        self.candidates
            .iter()
            .fold(None, |best: Option<&Candidate>, c| match best {
                Some(b) if b.value >= c.value => Some(b),
                _ => Some(c),
            })
    }
}

/// Builds the nonnegative candidates `y+, y-, z+, z-, y+ + z-, y- + z+` and,
/// for `w = y+ - z+` and `w' = y- - z-`, the vectors `w+, w-, w+ + w-` (and
/// likewise for `w'`). Only candidates in the nonnegative dyadic set are kept.
///
/// Some candidate satisfies `|<c, c>_N| >= |<y, z>_N| / 12`.
pub fn polarize(lift: &Lift, y: &LiftVector, z: &LiftVector) -> Result<Polarization> {
    check_dims(lift, &[y, z])?;
    for (idx, (&a, &b)) in y.entries().iter().zip(z.entries()).enumerate() {
        if a * b < 0.0 {
            return Err(Error::NotSignCompatible(idx));
        }
        if !is_dyadic_magnitude(a.abs()) || !is_dyadic_magnitude(b.abs()) {
            return Err(Error::NotDyadic(format!("entry {idx}")));
        }
    }
    let pos = |v: &LiftVector| v.map(|t| t.max(0.0));
    let neg = |v: &LiftVector| v.map(|t| (-t).max(0.0));
    let add = |a: &LiftVector, b: &LiftVector| {
        LiftVector::new(
            a.h(),
            a.n(),
            a.entries()
                .iter()
                .zip(b.entries())
                .map(|(p, q)| p + q)
                .collect(),
        )
        .expect("sizes agree")
    };
    let sub = |a: &LiftVector, b: &LiftVector| {
        LiftVector::new(
            a.h(),
            a.n(),
            a.entries()
                .iter()
                .zip(b.entries())
                .map(|(p, q)| p - q)
                .collect(),
        )
        .expect("sizes agree")
    };
    let (yp, yn, zp, zn) = (pos(y), neg(y), pos(z), neg(z));
    let w = sub(&yp, &zp);
    let w2 = sub(&yn, &zn);
    let (wp, wn, w2p, w2n) = (pos(&w), neg(&w), pos(&w2), neg(&w2));
    let raw: Vec<(&'static str, LiftVector)> = vec![
        ("y+", yp.clone()),
        ("y-", yn.clone()),
        ("z+", zp.clone()),
        ("z-", zn.clone()),
        ("y+ + z-", add(&yp, &zn)),
        ("y- + z+", add(&yn, &zp)),
        ("w+", wp.clone()),
        ("w-", wn.clone()),
        ("w+ + w-", add(&wp, &wn)),
        ("w'+", w2p.clone()),
        ("w'-", w2n.clone()),
        ("w'+ + w'-", add(&w2p, &w2n)),
    ];
    let mut candidates = Vec::new();
    for (label, vector) in raw {
        if check_nonneg_dyadic(&vector).is_ok() {
            let value = quad_form(lift, OperatorKind::New, &vector, &vector)?.abs();
            candidates.push(Candidate {
                label,
                vector,
                value,
            });
        }
    }
    Ok(Polarization {
        cross: quad_form(lift, OperatorKind::New, y, z)?,
        candidates,
    })
}

/// Outcome of [`dyprop_certificate`].
#[derive(Clone, Debug)]
pub struct DyadicCertificate {
    pub best: LiftVector,
    pub label: &'static str,
    /// `|<best, best>_N|`.
    pub value: f64,
    /// `|<x, x>_N| / 12`.
    pub target: f64,
    pub met: bool,
    /// Trial index (0-based) that produced `best`.
    pub trial: usize,
    pub trials: usize,
}

/// Rounds `x` twice per trial, polarizes, and keeps the candidate with the
/// largest `|<c, c>_N|` over all trials (ties go to the earliest trial).
pub fn dyprop_certificate(
    lift: &Lift,
    x: &LiftVector,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<DyadicCertificate> {
    check_dims(lift, &[x])?;
    if trials == 0 {
        return Err(Error::DomainError("at least one trial is needed".into()));
    }
    let target = quad_form(lift, OperatorKind::New, x, x)?.abs() / 12.0;
    let mut best: Option<(LiftVector, &'static str, f64, usize)> = None;
    for t in 0..trials {
        let y = dyadic_round(x, rng)?;
        let z = dyadic_round(x, rng)?;
        let pol = polarize(lift, &y, &z)?;
        if let Some(c) = pol.best() {
            if best.as_ref().is_none_or(|b| c.value > b.2) {
                best = Some((c.vector.clone(), c.label, c.value, t));
            }
        }
    }
    let (best, label, value, trial) =
        best.unwrap_or_else(|| (LiftVector::zeros(x.h(), x.n()), "y+", 0.0, 0));
    Ok(DyadicCertificate {
        best,
        label,
        value,
        target,
        met: value >= target,
        trial,
        trials,
    })
}

/// Outcome of [`band_select`].
#[derive(Clone, Debug)]
pub struct BandSelection {
    pub z: ZVector,
    /// Index `m` of the chosen window `[d^(m/2), d^((m+2)/2))`.
    pub window: u32,
    /// Fraction of `||y||^2` carried by each window.
    pub masses: Vec<f64>,
    /// Share ratio of each window (0 for empty windows).
    pub ratios: Vec<f64>,
    /// Power of two the truncated vector was multiplied by.
    pub shift: u32,
    /// Whether the chosen window has ratio at least 1/2.
    pub ratio_met: bool,
    /// `|<z, z>_{N, band}|` for the output.
    pub achieved: f64,
    /// `|<y, y>_{N, band}| / (8 n h)`.
    pub target: f64,
}

fn pow_saturating(base: u128, e: u32) -> u128 {
    (0..e).fold(1u128, |acc, _| acc.saturating_mul(base))
}

/// Keeps one window `[d^(m/2), d^((m+2)/2))` of a nonnegative dyadic vector,
/// rescales it by the largest power of two that keeps the squared norm at
/// most `10 n h`, and divides by `sqrt(n h)`, giving a Z-vector.
///
/// The window chosen is the first whose share of the band form is at least
/// half its share of the squared norm; if no window qualifies the one with
/// the largest ratio is used and `ratio_met` is false.
pub fn band_select(lift: &Lift, y: &LiftVector) -> Result<BandSelection> {
    check_dims(lift, &[y])?;
    check_nonneg_dyadic(y)?;
    if y.norm2() == 0.0 {
        return Err(Error::EmptyVector);
    }
    let d = lift.d() as u128;
    let nh = lift.order() as u128;
    let sq: Vec<u128> = y
        .entries()
        .iter()
        .map(|&v| (v as u128) * (v as u128))
        .collect();
    let top = *sq.iter().max().expect("nonempty");
    let mut windows = 0u32;
    while pow_saturating(d, windows) <= top {
        windows += 1;
    }
    let total_mass: u128 = sq.iter().sum();
    let total_form = quad_form_restricted(lift, OperatorKind::New, y, y, Region::Band)?.abs();
    let mut masses = Vec::new();
    let mut ratios = Vec::new();
    let mut truncated = Vec::new();
    for m in 0..windows {
        let (lo, hi) = (pow_saturating(d, m), pow_saturating(d, m + 2));
        let keep: Vec<bool> = sq.iter().map(|&s| s >= lo && s < hi).collect();
        let mass: u128 = sq
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(s, _)| s)
            .sum();
        let zm = LiftVector::new(
            y.h(),
            y.n(),
            y.entries()
                .iter()
                .zip(&keep)
                .map(|(&v, &k)| if k { v } else { 0.0 })
                .collect(),
        )?;
        let p = mass as f64 / total_mass as f64;
        let ratio = if mass == 0 {
            0.0
        } else if total_form == 0.0 {
            1.0
        } else {
            quad_form_restricted(lift, OperatorKind::New, &zm, &zm, Region::Band)?.abs()
                / (total_form * p)
        };
        masses.push(p);
        ratios.push(ratio);
        truncated.push((zm, mass));
    }
    let chosen = ratios.iter().position(|&r| r >= 0.5).unwrap_or_else(|| {
        (0..ratios.len())
            .max_by(|&a, &b| ratios[a].total_cmp(&ratios[b]))
            .expect("at least one window")
    });
    let (zm, mass) = &truncated[chosen];
    let mut shift = 0u32;
    while pow4(shift + 1).saturating_mul(*mass) <= 10 * nh {
        shift += 1;
    }
    let config = DyadicConfig::of(lift);
    let exps = zm
        .entries()
        .iter()
        .map(|&v| (v > 0.0).then(|| v.log2().round() as u32 + shift))
        .collect();
    let z = ZVector::from_exponents(config, exps)?;
    let achieved = quad_form_restricted(
        lift,
        OperatorKind::New,
        z.values(),
        z.values(),
        Region::Band,
    )?
    .abs();
    Ok(BandSelection {
        z,
        window: chosen as u32,
        ratio_met: ratios[chosen] >= 0.5,
        masses,
        ratios,
        shift,
        achieved,
        target: total_form / (8.0 * nh as f64),
    })
}

/// Full certificate: top new eigenvector, dyadic rounding with
/// polarization, then band selection.
#[derive(Clone, Debug)]
pub struct ZCertificate {
    pub spectral: SpectralReport,
    pub dyadic: DyadicCertificate,
    pub selection: BandSelection,
    /// `|<z, z>_{N, band}|`.
    pub achieved: f64,
    /// `lambda_star / 96 - 5 sqrt(d)`.
    pub target: f64,
    pub met: bool,
}

pub fn z_certificate(
    lift: &Lift,
    opts: LanczosOptions,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<ZCertificate> {
    let spectral = lambda_star(lift, opts)?;
    z_certificate_from(lift, spectral, trials, rng)
}

/// As [`z_certificate`] but starting from an already computed spectrum.
pub fn z_certificate_from(
    lift: &Lift,
    spectral: SpectralReport,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<ZCertificate> {
    let nh = lift.order() as f64;
    // Slightly below sqrt(n h) so rounding never pushes the norm past n h.
    let x = spectral.witness.scaled(nh.sqrt() * (1.0 - 1e-12));
    let dyadic = dyprop_certificate(lift, &x, trials, rng)?;
    let selection = band_select(lift, &dyadic.best)?;
    let achieved = selection.achieved;
    let target = spectral.lambda_star / 96.0 - 5.0 * (lift.d() as f64).sqrt();
    Ok(ZCertificate {
        met: achieved >= target,
        spectral,
        dyadic,
        selection,
        achieved,
        target,
    })
}
