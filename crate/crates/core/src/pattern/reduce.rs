//! Greedy reductions: repeatedly drop classes whose local potency falls
//! below one of the thresholds of the chosen mode, recording every removal.
//!
//! Thresholds depend on the full pattern (its aggregates); local potencies
//! are taken in the current sub-pattern. Classes are scanned in ascending
//! `(fibre, exponent)` order and passes repeat until nothing is removed.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::deviation::{b_function, Regime};
use super::{aggregates, ClassKey, GammaView, Pattern};
use crate::error::{Error, Result};

/// Smallest admissible strength parameter.
pub const MIN_STRENGTH: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Large-deviation edges only.
    Large,
    /// Small-deviation edges only.
    Small,
    /// All edges, doubled thresholds.
    General,
}

impl Mode {
    /// Regime whose edges enter the local potency.
    pub fn regime(self) -> Option<Regime> {
        match self {
            Mode::Large => Some(Regime::Large),
            Mode::Small => Some(Regime::Small),
            Mode::General => None,
        }
    }

    /// Budget on the summed local potencies of removed classes, in units of
    /// `L sqrt(d)`.
    pub fn budget_factor(self) -> f64 {
        match self {
            Mode::Large => 30.0,
            Mode::Small => 55.0,
            Mode::General => 150.0,
        }
    }
}

/// A removal condition. Each compares the local potency of a class `(i, w)`
/// of size `a` with a threshold:
///
/// * `Mass`: `c L a w^2 sqrt(d)`
/// * `Scaled`: `c L Nhat / sqrt(d)`
/// * `Share`: `c L N_i a / (n sqrt(d))`
/// * `Entropy`: `c L N_i m / sqrt(d)`
///
/// with `c = 2` in general mode and `c = 1` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    Mass,
    Scaled,
    Share,
    Entropy,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::Mass => "mass",
            Condition::Scaled => "scaled",
            Condition::Share => "share",
            Condition::Entropy => "entropy",
        };
        f.write_str(s)
    }
}

/// Conditions enforced by a mode.
pub fn conditions(mode: Mode) -> &'static [Condition] {
    match mode {
        Mode::Large => &[Condition::Mass, Condition::Scaled],
        Mode::Small => &[Condition::Mass, Condition::Share, Condition::Entropy],
        Mode::General => &[
            Condition::Mass,
            Condition::Scaled,
            Condition::Share,
            Condition::Entropy,
        ],
    }
}

/// Threshold of `cond` at a class, from the full pattern's aggregates.
pub fn threshold(
    p: &Pattern,
    mode: Mode,
    strength: f64,
    agg: &super::Aggregates,
    cond: Condition,
) -> f64 {
    let sd = (p.d() as f64).sqrt();
    let c = if mode == Mode::General { 2.0 } else { 1.0 };
    let a = p.size(agg.class) as f64;
    let w = p.weight(agg.class.1);
    c * strength
        * match cond {
            Condition::Mass => a * w * w * sd,
            Condition::Scaled => agg.scaled_mass / sd,
            Condition::Share => agg.neighbour_mass * a / (p.n() as f64 * sd),
            Condition::Entropy => agg.neighbour_mass * agg.small_m / sd,
        }
}

/// One step of a reduction transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub class: ClassKey,
    pub violated: Vec<Condition>,
    /// Local potency (of the mode's regime) in the sub-pattern just before removal.
    pub local_potency: f64,
}

/// Outcome of a greedy reduction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub mode: Mode,
    pub strength: f64,
    pub kept: BTreeSet<ClassKey>,
    pub transcript: Vec<Removal>,
    /// Potency of the mode's regime in the full pattern.
    pub initial: f64,
    /// Potency of the mode's regime in the kept sub-pattern.
    pub retained: f64,
    /// Sum of the recorded local potencies.
    pub removed: f64,
    /// `budget_factor L sqrt(d)`.
    pub budget: f64,
}

impl Reduction {
    pub fn within_budget(&self) -> bool {
        self.removed <= self.budget
    }

    /// `retained >= initial - removed`, up to rounding.
    pub fn retention_holds(&self) -> bool {
        self.retained >= self.initial - self.removed - 1e-9 * (1.0 + self.initial.abs())
    }

    /// Human-readable transcript.
    pub fn transcript_text(&self) -> String {
        let mut s = format!(
            "mode {:?} strength {} initial {:.6e} budget {:.6e}\n",
            self.mode, self.strength, self.initial, self.budget
        );
        for (step, r) in self.transcript.iter().enumerate() {
            let names: Vec<String> = r.violated.iter().map(|c| c.to_string()).collect();
            s.push_str(&format!(
                "remove {step}: fibre {} exponent {} local {:.6e} violates {}\n",
                r.class.0,
                r.class.1,
                r.local_potency,
                names.join(",")
            ));
        }
        s.push_str(&format!(
            "kept {} classes, retained {:.6e}, removed total {:.6e}\n",
            self.kept.len(),
            self.retained,
            self.removed
        ));
        s
    }
}

fn check_strength(strength: f64) -> Result<()> {
    if !(strength >= MIN_STRENGTH) || !strength.is_finite() {
        return Err(Error::DomainError(format!(
            "strength must be at least {MIN_STRENGTH}, got {strength}"
        )));
    }
    Ok(())
}

/// Greedy reduction in the given mode.
pub fn reduce_with(p: &Pattern, mode: Mode, strength: f64) -> Result<Reduction> {
    check_strength(strength)?;
    let g: GammaView = p.gamma();
    let aggs = aggregates(p);
    let conds = conditions(mode);
    let thresholds: Vec<Vec<f64>> = aggs
        .iter()
        .map(|agg| {
            conds
                .iter()
                .map(|&c| threshold(p, mode, strength, agg, c))
                .collect()
        })
        .collect();
    let regime = mode.regime();
    let mut active = g.all();
    let initial = g.potency(&active, regime);
    let mut transcript = Vec::new();
    loop {
        let mut changed = false;
        for v in 0..g.len() {
            if !active[v] {
                continue;
            }
            let local = g.local_potency(v, &active, regime);
            let violated: Vec<Condition> = conds
                .iter()
                .zip(&thresholds[v])
                .filter(|(_, &t)| local < t)
                .map(|(&c, _)| c)
                .collect();
            if !violated.is_empty() {
                active[v] = false;
                changed = true;
                transcript.push(Removal {
                    class: g.classes[v],
                    violated,
                    local_potency: local,
                });
            }
        }
        if !changed {
            break;
        }
    }
    let kept = g
        .classes
        .iter()
        .zip(&active)
        .filter(|(_, &a)| a)
        .map(|(&c, _)| c)
        .collect();
    let removed =
        crate::numeric::neumaier_sum(transcript.iter().map(|r: &Removal| r.local_potency));
    Ok(Reduction {
        mode,
        strength,
        kept,
        retained: g.potency(&active, regime),
        initial,
        removed,
        budget: mode.budget_factor() * strength * (p.d() as f64).sqrt(),
        transcript,
    })
}

pub fn reduce_ld(p: &Pattern, strength: f64) -> Result<Reduction> {
    reduce_with(p, Mode::Large, strength)
}

pub fn reduce_sd(p: &Pattern, strength: f64) -> Result<Reduction> {
    reduce_with(p, Mode::Small, strength)
}

pub fn reduce_general(p: &Pattern, strength: f64) -> Result<Reduction> {
    reduce_with(p, Mode::General, strength)
}

/// Outcome of [`reduce`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reduced {
    pub reduction: Reduction,
    /// Potency of the full pattern.
    pub potency: f64,
    /// Tilde potency of the kept sub-pattern.
    pub tilde_kept: f64,
    /// `potency / 2 - 55 L sqrt(d)`.
    pub guarantee: f64,
    /// Smallest value over kept classes of
    /// `sum_{kept neighbours} mu b(eps) - (L / 10) a ln(e n / a)`.
    pub unlikeliness_slack: Option<f64>,
}

impl Reduced {
    pub fn guarantee_met(&self) -> bool {
        self.tilde_kept >= self.guarantee
    }

    pub fn unlikely(&self) -> bool {
        self.unlikeliness_slack.is_none_or(|s| s >= 0.0)
    }
}

/// Dispatches to the large-deviation reduction when that part carries at
/// least half the potency, and to the small-deviation reduction otherwise.
pub fn reduce(p: &Pattern, strength: f64) -> Result<Reduced> {
    check_strength(strength)?;
    let potency = p.potency();
    let mode = if p.potency_large() >= potency / 2.0 {
        Mode::Large
    } else {
        Mode::Small
    };
    let reduction = reduce_with(p, mode, strength)?;
    let g = p.gamma();
    let active = g.mask(&reduction.kept);
    let tilde_kept = g.potency_tilde(&active);
    let n = p.n() as f64;
    let mut slack: Option<f64> = None;
    for v in (0..g.len()).filter(|&v| active[v]) {
        let a = g.sizes[v] as f64;
        let sum = crate::numeric::neumaier_sum(
            g.adjacency[v]
                .iter()
                .filter(|e| active[e.to])
                .map(|e| e.mu * b_function(e.eps).expect("eps >= -1")),
        );
        let need = strength / 10.0 * a * (std::f64::consts::E * n / a).ln();
        let s = sum - need;
        slack = Some(slack.map_or(s, |t: f64| t.min(s)));
    }
    Ok(Reduced {
        guarantee: potency / 2.0 - 55.0 * strength * (p.d() as f64).sqrt(),
        reduction,
        potency,
        tilde_kept,
        unlikeliness_slack: slack,
    })
}
