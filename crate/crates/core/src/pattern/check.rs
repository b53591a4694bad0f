//! Independent verification of reductions. Everything is recomputed from the
//! pattern's size and count maps without the class-graph view used by the
//! reductions themselves.

use std::collections::BTreeSet;

use super::deviation::LARGE_DEVIATION_THRESHOLD;
use super::reduce::{conditions, Condition, Mode, Reduction};
use super::{weights_close, ClassKey, Pattern};

/// Relative slack for comparing recomputed floating-point quantities.
const SLACK: f64 = 1e-9;

/// Findings of [`verify_reduction`]; empty `problems` means the reduction checks out.
#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub problems: Vec<String>,
    pub replayed_steps: usize,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

fn in_regime(mode: Mode, a: u64, a2: u64, e: u64, n: usize) -> bool {
    let mu = a as f64 * a2 as f64 / n as f64;
    let eps = if a == 0 || a2 == 0 {
        1.0
    } else {
        e as f64 / mu - 1.0
    };
    match mode {
        Mode::Large => eps > LARGE_DEVIATION_THRESHOLD,
        Mode::Small => eps <= LARGE_DEVIATION_THRESHOLD,
        Mode::General => true,
    }
}

/// Signed local sum at `c` over neighbours inside `within`.
fn local_sum(p: &Pattern, mode: Mode, c: ClassKey, within: &BTreeSet<ClassKey>) -> f64 {
    let a = p.size(c);
    let mut sum = 0.0;
    for i2 in p.base().neighbours(c.0) {
        for (&c2, &a2) in p.sizes().range((i2, 0)..=(i2, u32::MAX)) {
            if !within.contains(&c2) || !weights_close(c.1, c2.1, p.d()) {
                continue;
            }
            let e = p.count(c, c2);
            if in_regime(mode, a, a2, e, p.n()) {
                sum += p.weight(c.1)
                    * p.weight(c2.1)
                    * (e as f64 - a as f64 * a2 as f64 / p.n() as f64);
            }
        }
    }
    sum
}

fn potency_of(p: &Pattern, mode: Mode, within: &BTreeSet<ClassKey>) -> f64 {
    // Each unordered edge appears twice in the sum of local sums.
    within
        .iter()
        .map(|&c| local_sum(p, mode, c, within))
        .sum::<f64>()
        .abs()
        / 2.0
}

fn thresholds_of(p: &Pattern, mode: Mode, strength: f64, c: ClassKey) -> Vec<(Condition, f64)> {
    let d = p.d() as f64;
    let sd = d.sqrt();
    let n = p.n() as f64;
    let a = p.size(c) as f64;
    let w = p.weight(c.1);
    let mut neighbour_mass = 0.0;
    let mut scaled = 0.0;
    for i2 in p.base().neighbours(c.0) {
        for (&(_, k2), &a2) in p.sizes().range((i2, 0)..=(i2, u32::MAX)) {
            let w2 = p.weight(k2);
            neighbour_mass += w2 * w2 * a2 as f64;
            if weights_close(c.1, k2, p.d()) {
                scaled += w2 * w2 * a2 as f64 * w2 / (w * sd);
            }
        }
    }
    let big_m = (neighbour_mass / (a * w * w * d)).max(std::f64::consts::E * n / a);
    let small_m = big_m.ln() / big_m;
    let factor = if mode == Mode::General {
        2.0 * strength
    } else {
        strength
    };
    conditions(mode)
        .iter()
        .map(|&cond| {
            let t = match cond {
                Condition::Mass => a * w * w * sd,
                Condition::Scaled => scaled / sd,
                Condition::Share => neighbour_mass * a / (n * sd),
                Condition::Entropy => neighbour_mass * small_m / sd,
            };
            (cond, factor * t)
        })
        .collect()
}

/// Replays the transcript from the full pattern and checks that every
/// removal was justified, every kept class satisfies all conditions, the
/// removed local potencies fit the budget, and the potency retention
/// inequality holds.
pub fn verify_reduction(p: &Pattern, r: &Reduction) -> CheckReport {
    let mut report = CheckReport::default();
    let mode = r.mode;
    let full: BTreeSet<ClassKey> = p.sizes().keys().copied().collect();
    let mut current = full.clone();
    let mut removed_total = 0.0;
    for (step, rem) in r.transcript.iter().enumerate() {
        if !current.remove(&rem.class) {
            report.problems.push(format!(
                "step {step}: {:?} removed twice or unknown",
                rem.class
            ));
            continue;
        }
        current.insert(rem.class);
        let local = local_sum(p, mode, rem.class, &current).abs();
        if (local - rem.local_potency).abs() > SLACK * (1.0 + local) {
            report.problems.push(format!(
                "step {step}: recorded local potency {} but recomputed {local}",
                rem.local_potency
            ));
        }
        let thresholds = thresholds_of(p, mode, r.strength, rem.class);
        let justified = thresholds
            .iter()
            .any(|&(c, t)| rem.violated.contains(&c) && local < t * (1.0 + SLACK));
        if !justified {
            report.problems.push(format!(
                "step {step}: removal of {:?} violates no condition",
                rem.class
            ));
        }
        current.remove(&rem.class);
        removed_total += local;
        report.replayed_steps += 1;
    }
    if current != r.kept {
        report
            .problems
            .push("replayed sub-pattern differs from the kept set".into());
    }
    for &c in &r.kept {
        let local = local_sum(p, mode, c, &r.kept).abs();
        for (cond, t) in thresholds_of(p, mode, r.strength, c) {
            if local < t * (1.0 - SLACK) {
                report
                    .problems
                    .push(format!("kept {c:?} fails {cond}: {local} < {t}"));
            }
        }
    }
    let budget = mode.budget_factor() * r.strength * (p.d() as f64).sqrt();
    if removed_total > budget * (1.0 + SLACK) {
        report.problems.push(format!(
            "removed local potencies {removed_total} exceed the budget {budget}"
        ));
    }
    let initial = potency_of(p, mode, &full);
    let retained = potency_of(p, mode, &r.kept);
    if retained < initial - removed_total - SLACK * (1.0 + initial) {
        report.problems.push(format!(
            "retention fails: {retained} < {initial} - {removed_total}"
        ));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::super::reduce::{reduce_general, reduce_with, Removal};
    use super::*;
    use crate::graph::BaseGraph;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn sample_pattern() -> Pattern {
        let base = Arc::new(BaseGraph::complete(4).unwrap());
        let sizes = BTreeMap::from([((0, 1), 3), ((1, 1), 2), ((2, 2), 4), ((3, 1), 1)]);
        let counts = BTreeMap::from([
            (((0, 1), (1, 1)), 2),
            (((1, 1), (3, 1)), 1),
            (((0, 1), (3, 1)), 0),
        ]);
        Pattern::new(base, 40, 1, sizes, counts).unwrap()
    }

    #[test]
    fn honest_reductions_verify() {
        let p = sample_pattern();
        for mode in [Mode::Large, Mode::Small, Mode::General] {
            let r = reduce_with(&p, mode, 20.0).unwrap();
            let rep = verify_reduction(&p, &r);
            assert!(rep.ok(), "{mode:?}: {:?}", rep.problems);
        }
    }

    #[test]
    fn tampered_transcripts_are_caught() {
        let p = sample_pattern();
        let mut r = reduce_general(&p, 20.0).unwrap();
        assert!(!r.transcript.is_empty());
        r.transcript[0].local_potency += 1.0;
        assert!(!verify_reduction(&p, &r).ok());
        let mut r2 = reduce_general(&p, 20.0).unwrap();
        r2.transcript.push(Removal {
            class: (0, 1),
            violated: vec![Condition::Mass],
            local_potency: 0.0,
        });
        assert!(!verify_reduction(&p, &r2).ok());
    }
}
