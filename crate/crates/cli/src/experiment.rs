//! Parameter sweeps over `(n, seed)` cells with one CSV row per cell.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::sync::Arc;
use std::time::Instant;

use randlift::bounds::{ramanujan_ratio, spectral_ratio};
use randlift::dyadic::z_certificate_from;
use randlift::graph::{BaseGraph, Lift};
use randlift::pattern::extract_pattern;
use randlift::pattern::reduce::{reduce, Mode};
use randlift::sampler::{sample_lift, SeededRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Stage};
use crate::error::CliError;
use crate::explain::{explain_from, spectrum_for};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "RANDLIFT_THREADS";

/// Exact CSV header of a sweep.
pub const CSV_HEADER: &str = "seed,h,d,n,lambda_top,lambda_star,ramanujan_ratio,paper_ratio,dyprop_met,z_value,reduce_branch,reduce_kept,retention_slack,wall_ms";

/// One cell of a sweep. Columns of stages that did not run are empty; a
/// failed cell has `reduce_branch = "failed"` and empty numeric columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub seed: u64,
    pub h: usize,
    pub d: usize,
    pub n: usize,
    pub lambda_top: Option<f64>,
    pub lambda_star: Option<f64>,
    pub ramanujan_ratio: Option<f64>,
    #[serde(rename = "paper_ratio")]
    pub spectral_ratio: Option<f64>,
    pub dyprop_met: Option<bool>,
    pub z_value: Option<f64>,
    pub reduce_branch: Option<String>,
    pub reduce_kept: Option<usize>,
    pub retention_slack: Option<f64>,
    pub wall_ms: u64,
}

impl ResultRow {
    fn empty(seed: u64, h: usize, d: usize, n: usize) -> Self {
        Self {
            seed,
            h,
            d,
            n,
            lambda_top: None,
            lambda_star: None,
            ramanujan_ratio: None,
            spectral_ratio: None,
            dyprop_met: None,
            z_value: None,
            reduce_branch: None,
            reduce_kept: None,
            retention_slack: None,
            wall_ms: 0,
        }
    }

    pub fn failed(&self) -> bool {
        self.reduce_branch.as_deref() == Some("failed")
    }
}

/// Outcome of one cell, with the optional explanation report as JSON.
struct CellOutcome {
    row: ResultRow,
    report: Option<String>,
    error: Option<String>,
}

fn run_cell(cfg: &ExperimentConfig, base: &Arc<BaseGraph>, n: usize, seed: u64) -> CellOutcome {
    let start = Instant::now();
    let (h, d) = (base.order(), base.degree());
    let mut row = ResultRow::empty(seed, h, d, n);
    let mut report = None;
    let result = (|| -> Result<(), CliError> {
        let lift: Lift = sample_lift(base.clone(), n, &SeededRng::new(seed, 0))?;
        let spectral = spectrum_for(&lift, cfg.tol, seed)?;
        row.lambda_top = Some(spectral.lambda_top);
        row.lambda_star = Some(spectral.lambda_star);
        row.ramanujan_ratio = Some(ramanujan_ratio(spectral.lambda_star, d));
        row.spectral_ratio = Some(spectral_ratio(spectral.lambda_star, d));
        let nonzero = spectral.lambda_star > 0.0;
        if cfg.runs(Stage::Witnesses) {
            let r = explain_from(&lift, spectral.clone(), cfg.strength, cfg.trials, seed)?;
            report = Some(serde_json::to_string(&r).expect("report serialises"));
        }
        if !(nonzero && (cfg.runs(Stage::Certificate) || cfg.runs(Stage::Reduction))) {
            return Ok(());
        }
        let mut rng = SeededRng::new(seed, 1).generator();
        let cert = z_certificate_from(&lift, spectral, cfg.trials, &mut rng)?;
        row.dyprop_met = Some(cert.dyadic.met);
        row.z_value = Some(cert.achieved);
        if cfg.runs(Stage::Reduction) {
            let pattern = extract_pattern(&lift, &cert.selection.z)?;
            let reduced = reduce(&pattern, cfg.strength)?;
            let r = &reduced.reduction;
            row.reduce_branch = Some(if r.mode == Mode::Large { "ld" } else { "sd" }.into());
            row.reduce_kept = Some(r.kept.len());
            row.retention_slack = Some(r.retained - (r.initial - r.removed));
        }
        Ok(())
    })();
    let error = match result {
        Ok(()) => None,
        Err(e) => {
            row = ResultRow::empty(seed, h, d, n);
            row.reduce_branch = Some("failed".into());
            Some(format!("n={n} seed={seed}: {e}"))
        }
    };
    row.wall_ms = start.elapsed().as_millis() as u64;
    CellOutcome { row, report, error }
}

/// Summary of a finished sweep.
#[derive(Clone, Debug)]
pub struct ExperimentSummary {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<String>,
    /// Rows whose `lambda_top` is more than `1e-6` from `d`.
    pub top_violations: usize,
    /// Rows whose `lambda*` reaches the proven bound.
    pub ratio_violations: usize,
}

/// Worker count from [`THREADS_ENV`], or rayon's default.
pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(rayon::current_num_threads()),
    }
}

/// Runs every `(n, seed)` cell, writing rows sorted by `(n, seed)` and
/// flushing after each chunk so an interrupted sweep keeps its finished rows.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary, CliError> {
    cfg.validate()?;
    let base = cfg.base.build()?;
    let threads = thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let mut cells: Vec<(usize, u64)> = cfg
        .n
        .iter()
        .flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s)))
        .collect();
    cells.sort_unstable();
    cells.dedup();

    let mut csv = csv::Writer::from_path(&cfg.output.csv)?;
    let mut reports = match &cfg.output.reports {
        Some(p) => Some(BufWriter::new(File::create(p)?)),
        None => None,
    };
    let mut summary = ExperimentSummary {
        rows: Vec::with_capacity(cells.len()),
        failures: Vec::new(),
        top_violations: 0,
        ratio_violations: 0,
    };
    if cells.is_empty() {
        csv.write_record(CSV_HEADER.split(','))?;
    }
    for chunk in cells.chunks(threads.max(1) * 2) {
        let outcomes: Vec<CellOutcome> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&(n, seed)| run_cell(cfg, &base, n, seed))
                .collect()
        });
        for out in outcomes {
            csv.serialize(&out.row)?;
            if let (Some(w), Some(r)) = (reports.as_mut(), out.report.as_ref()) {
                writeln!(w, "{r}")?;
            }
            if let Some(e) = out.error {
                summary.failures.push(e);
            }
            let d = out.row.d as f64;
            if out.row.lambda_top.is_some_and(|t| (t - d).abs() > 1e-6) {
                summary.top_violations += 1;
            }
            if out.row.spectral_ratio.is_some_and(|r| r >= 1.0) {
                summary.ratio_violations += 1;
            }
            summary.rows.push(out.row);
        }
        csv.flush()?;
        if let Some(w) = reports.as_mut() {
            w.flush()?;
        }
    }
    Ok(summary)
}
