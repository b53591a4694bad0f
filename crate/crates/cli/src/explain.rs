//! End-to-end explanation of a lift's new spectral radius: certificate,
//! pattern, reduction and the induced subgraph it leaves behind.

use std::collections::BTreeMap;

use randlift::bounds::SUBGRAPH_CONSTANT;
use randlift::dyadic::z_certificate_from;
use randlift::graph::Lift;
use randlift::pattern::check::verify_reduction;
use randlift::pattern::reduce::reduce_general;
use randlift::pattern::{extract_pattern, witness_sets};
use randlift::sampler::SeededRng;
use randlift::spectrum::{
    dense_lambda_star, lambda_star, LanczosOptions, SpectralReport, DENSE_GUARD,
};
use randlift::witness::{pattern_witness_bound, star_lambda};
use serde::Serialize;

use crate::error::CliError;

/// Which comparison graph the report ends with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `lambda* = 0`: nothing to explain.
    Empty,
    /// The induced subgraph on the surviving witness sets.
    Subgraph,
    /// The star with `d` leaves, `lambda = sqrt(d)`.
    Star,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionSummary {
    pub kept: usize,
    pub removed_steps: usize,
    pub initial: f64,
    pub retained: f64,
    pub removed: f64,
    pub budget: f64,
    pub checker_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub n: usize,
    pub h: usize,
    pub d: usize,
    pub lambda_star: f64,
    pub z_value: Option<f64>,
    pub z_target: Option<f64>,
    /// Vertices carrying the certificate's Z-vector.
    pub support: Vec<usize>,
    pub pattern_classes: usize,
    pub potency: Option<f64>,
    pub reduction: Option<ReductionSummary>,
    /// Vertices of the subgraph induced by the surviving witness sets.
    pub subgraph_vertices: Vec<usize>,
    pub alpha: usize,
    pub subgraph_lambda: Option<f64>,
    pub branch: Branch,
    /// `lambda` of the comparison graph of the chosen branch.
    pub reference_lambda: f64,
    /// `lambda* <= SUBGRAPH_CONSTANT * reference_lambda`.
    pub check: bool,
}

/// Lifts up to this order use the dense solver in sweeps and reports.
pub const DENSE_PREFERRED: usize = 200;

/// Spectrum by the dense path for small lifts, iteratively otherwise, with a
/// dense retry when the iteration does not converge within the dense guard.
pub fn spectrum_for(lift: &Lift, tol: f64, seed: u64) -> Result<SpectralReport, CliError> {
    if lift.order() <= DENSE_PREFERRED {
        return Ok(dense_lambda_star(lift)?);
    }
    match lambda_star(
        lift,
        LanczosOptions {
            tol,
            max_iter: None,
            seed,
        },
    ) {
        Ok(r) => Ok(r),
        Err(randlift::Error::NotConverged(_)) if lift.order() <= DENSE_GUARD => {
            Ok(dense_lambda_star(lift)?)
        }
        Err(e) => Err(e.into()),
    }
}

/// Runs certificate, extraction, general reduction and the pattern-witness
/// bound, then compares `lambda*` with the surviving subgraph when it has at
/// most `h d` vertices and `lambda* >= SUBGRAPH_CONSTANT sqrt(d)`, and with
/// the star otherwise.
pub fn explain_pipeline(
    lift: &Lift,
    strength: f64,
    trials: usize,
    seed: u64,
) -> Result<PipelineReport, CliError> {
    let spectral = spectrum_for(lift, 1e-8, seed)?;
    explain_from(lift, spectral, strength, trials, seed)
}

pub fn explain_from(
    lift: &Lift,
    spectral: SpectralReport,
    strength: f64,
    trials: usize,
    seed: u64,
) -> Result<PipelineReport, CliError> {
    let (n, h, d) = (lift.n(), lift.h(), lift.d());
    let sd = (d as f64).sqrt();
    let ls = spectral.lambda_star;
    let mut report = PipelineReport {
        n,
        h,
        d,
        lambda_star: ls,
        z_value: None,
        z_target: None,
        support: Vec::new(),
        pattern_classes: 0,
        potency: None,
        reduction: None,
        subgraph_vertices: Vec::new(),
        alpha: 0,
        subgraph_lambda: None,
        branch: Branch::Empty,
        reference_lambda: 0.0,
        check: true,
    };
    if ls == 0.0 || spectral.witness.norm2() == 0.0 {
        return Ok(report);
    }
    let mut rng = SeededRng::new(seed, 1).generator();
    let cert = z_certificate_from(lift, spectral, trials, &mut rng)?;
    report.z_value = Some(cert.achieved);
    report.z_target = Some(cert.target);
    let z = &cert.selection.z;
    let sets = witness_sets(z);
    report.support = sets.values().flatten().copied().collect();
    report.support.sort_unstable();
    let pattern = extract_pattern(lift, z)?;
    report.pattern_classes = pattern.sizes().len();
    report.potency = Some(pattern.potency());
    let reduction = reduce_general(&pattern, strength)?;
    report.reduction = Some(ReductionSummary {
        kept: reduction.kept.len(),
        removed_steps: reduction.transcript.len(),
        initial: reduction.initial,
        retained: reduction.retained,
        removed: reduction.removed,
        budget: reduction.budget,
        checker_ok: verify_reduction(&pattern, &reduction).ok(),
    });
    if !reduction.kept.is_empty() {
        let kept_sets: BTreeMap<_, _> = sets
            .into_iter()
            .filter(|(c, _)| reduction.kept.contains(c))
            .collect();
        let sub = pattern.restrict(&reduction.kept);
        let bound = pattern_witness_bound(lift, &sub, &kept_sets)?;
        report.alpha = bound.subgraph_vertices.len();
        report.subgraph_lambda = bound.subgraph_lambda;
        report.subgraph_vertices = bound.subgraph_vertices;
    }
    let use_subgraph = report.alpha > 0 && report.alpha <= h * d && ls >= SUBGRAPH_CONSTANT * sd;
    match (use_subgraph, report.subgraph_lambda) {
        (true, Some(l)) => {
            report.branch = Branch::Subgraph;
            report.reference_lambda = l;
        }
        _ => {
            report.branch = Branch::Star;
            report.reference_lambda = star_lambda(d);
        }
    }
    report.check = ls <= SUBGRAPH_CONSTANT * report.reference_lambda;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use randlift::graph::BaseGraph;
    use randlift::sampler::sample_lift;
    use std::sync::Arc;

    #[test]
    fn single_fibre_lift_is_empty() {
        let base = Arc::new(BaseGraph::complete(4).unwrap());
        let lift = sample_lift(base, 1, &SeededRng::new(0, 0)).unwrap();
        let r = explain_pipeline(&lift, 41.0, 10, 0).unwrap();
        assert_eq!(r.branch, Branch::Empty);
        assert_eq!(r.lambda_star, 0.0);
        assert!(r.check);
    }

    #[test]
    fn desk_scale_lift_takes_the_star_branch() {
        let base = Arc::new(BaseGraph::complete(5).unwrap());
        let lift = sample_lift(base, 40, &SeededRng::new(3, 0)).unwrap();
        let r = explain_pipeline(&lift, 41.0, 20, 3).unwrap();
        assert_eq!(r.branch, Branch::Star);
        assert!((r.reference_lambda - 2.0).abs() < 1e-12);
        assert!(r.check);
        assert!(r.reduction.unwrap().checker_ok);
    }
}
