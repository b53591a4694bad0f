//! Subcommands: each wraps one library operation and prints plain text (or
//! JSON with `--json`).

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use randlift::dyadic::z_certificate_from;
use randlift::graph::Lift;
use randlift::matchprob::{
    bigbound_form, brute_force_probability, corollary_bound, corollary_constant, exact_probability,
    monte_carlo_probability, stirling_interval, MatchingSpec, BRUTE_FORCE_LIMIT,
};
use randlift::pattern::check::verify_reduction;
use randlift::pattern::extract_pattern;
use randlift::pattern::reduce::{reduce, reduce_with, Mode};
use randlift::pattern::Pattern;
use randlift::sampler::{plant_clique, sample_lift, SeededRng};
use randlift::spectrum::{
    dense_lambda_star, lambda_star, new_spectrum, LanczosOptions, SpectralReport, DENSE_GUARD,
};

use crate::config::{read, BaseSource, ExperimentConfig};
use crate::error::CliError;
use crate::experiment::run_experiment;
use crate::explain::{explain_pipeline, spectrum_for};

#[derive(Debug, Parser)]
#[command(
    name = "randlift",
    version,
    about = "Random lifts of regular graphs: spectra, certificates and probabilities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dense,
    Iterative,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Ld,
    Sd,
    General,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a random lift and write it as JSON.
    Gen {
        /// k<h>, petersen, cycle:<h>:<k> or file:<path>.
        #[arg(long)]
        base: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated fibres whose index-0 vertices become a clique.
        #[arg(long, value_delimiter = ',')]
        plant: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Largest new eigenvalue of a lift; `--all` lists the new spectrum.
    Spectrum {
        #[arg(long)]
        lift: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print every new eigenvalue (dense path only).
        #[arg(long)]
        all: bool,
        #[arg(long)]
        json: bool,
    },
    /// Dyadic and Z-vector certificates for the top new eigenvector.
    Certify {
        #[arg(long)]
        lift: PathBuf,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Write the extracted pattern here.
        #[arg(long)]
        pattern_out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Greedy reduction of a pattern, checked independently.
    Reduce {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[arg(long, default_value_t = 20.0)]
        strength: f64,
        /// Print the removal transcript.
        #[arg(long)]
        transcript: bool,
        #[arg(long)]
        json: bool,
    },
    /// Probability of prescribed block edge counts under a random matching.
    Prob {
        #[arg(long)]
        spec: PathBuf,
        /// Also count all matchings one by one (n <= 8).
        #[arg(long)]
        brute: bool,
        /// Monte Carlo sample count.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Sweep over (n, seed) cells; without a config runs the default grid.
    Experiment {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the CSV path of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certificate, pattern, reduction and comparison subgraph for one lift.
    Explain {
        #[arg(long)]
        lift: PathBuf,
        #[arg(long, default_value_t = randlift::bounds::subgraph_strength())]
        strength: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_lift(path: &PathBuf) -> Result<Lift, CliError> {
    Ok(Lift::from_json(&read(path)?)?)
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serialises")
}

fn spectral_json(r: &SpectralReport, all: Option<&[f64]>) -> serde_json::Value {
    serde_json::json!({
        "lambda_top": r.lambda_top,
        "lambda_star": r.lambda_star,
        "signed": r.signed,
        "method": format!("{:?}", r.method).to_lowercase(),
        "iterations": r.iterations,
        "residual": r.residual,
        "converged": r.converged,
        "new_spectrum": all,
    })
}

/// Runs a parsed command and returns what it prints on success.
pub fn execute(cmd: Command) -> Result<String, CliError> {
    let mut out = String::new();
    match cmd {
        Command::Gen {
            base,
            n,
            seed,
            plant,
            out: path,
        } => {
            let base = BaseSource::parse(&base)?.build()?;
            let mut lift = sample_lift(base, n, &SeededRng::new(seed, 0))?;
            if !plant.is_empty() {
                lift = plant_clique(&lift, &plant)?;
            }
            write_file(&path, &lift.to_json())?;
            writeln!(
                out,
                "wrote lift h={} d={} n={} to {}",
                lift.h(),
                lift.d(),
                lift.n(),
                path.display()
            )
            .unwrap();
        }
        Command::Spectrum {
            lift,
            method,
            tol,
            max_iter,
            seed,
            all,
            json: as_json,
        } => {
            let lift = load_lift(&lift)?;
            let dense = match method {
                MethodArg::Dense => true,
                MethodArg::Iterative => false,
                MethodArg::Auto => lift.order() <= DENSE_GUARD,
            };
            if all && !dense {
                return Err(CliError::Usage("--all needs the dense method".into()));
            }
            let report = if dense {
                dense_lambda_star(&lift)?
            } else {
                lambda_star(
                    &lift,
                    LanczosOptions {
                        tol,
                        max_iter,
                        seed,
                    },
                )?
            };
            let listing = if all {
                Some(new_spectrum(&lift)?)
            } else {
                None
            };
            if as_json {
                out = json(&spectral_json(&report, listing.as_deref()));
            } else {
                writeln!(out, "lambda_top {:.12}", report.lambda_top).unwrap();
                writeln!(out, "lambda_star {:.12}", report.lambda_star).unwrap();
                writeln!(
                    out,
                    "method {:?} iterations {} residual {:.3e}",
                    report.method, report.iterations, report.residual
                )
                .unwrap();
                for v in listing.iter().flatten() {
                    writeln!(out, "{v:.12}").unwrap();
                }
            }
        }
        Command::Certify {
            lift,
            trials,
            seed,
            tol,
            pattern_out,
            json: as_json,
        } => {
            let lift = load_lift(&lift)?;
            let spectral = spectrum_for(&lift, tol, seed)?;
            let mut rng = SeededRng::new(seed, 1).generator();
            let cert = z_certificate_from(&lift, spectral, trials, &mut rng)?;
            let pattern = extract_pattern(&lift, &cert.selection.z)?;
            if let Some(p) = &pattern_out {
                write_file(p, &pattern.to_json())?;
            }
            let value = serde_json::json!({
                "lambda_star": cert.spectral.lambda_star,
                "dyadic_value": cert.dyadic.value,
                "dyadic_target": cert.dyadic.target,
                "dyadic_met": cert.dyadic.met,
                "dyadic_trial": cert.dyadic.trial,
                "dyadic_candidate": cert.dyadic.label,
                "window": cert.selection.window,
                "ratio_met": cert.selection.ratio_met,
                "z_value": cert.achieved,
                "z_target": cert.target,
                "z_met": cert.met,
                "pattern_classes": pattern.sizes().len(),
                "potency": pattern.potency(),
            });
            out = if as_json {
                json(&value)
            } else {
                value
                    .as_object()
                    .expect("object")
                    .iter()
                    .map(|(k, v)| format!("{k} {v}\n"))
                    .collect()
            };
        }
        Command::Reduce {
            pattern,
            mode,
            strength,
            transcript,
            json: as_json,
        } => {
            let p = Pattern::from_json(&read(&pattern)?)?;
            let reduction = match mode {
                ModeArg::Auto => reduce(&p, strength)?.reduction,
                ModeArg::Ld => reduce_with(&p, Mode::Large, strength)?,
                ModeArg::Sd => reduce_with(&p, Mode::Small, strength)?,
                ModeArg::General => reduce_with(&p, Mode::General, strength)?,
            };
            let check = verify_reduction(&p, &reduction);
            if as_json {
                out = json(&serde_json::json!({
                    "reduction": reduction,
                    "within_budget": reduction.within_budget(),
                    "retention_holds": reduction.retention_holds(),
                    "checker_ok": check.ok(),
                    "checker_problems": check.problems,
                }));
            } else {
                if transcript {
                    out.push_str(&reduction.transcript_text());
                }
                writeln!(out, "mode {:?}", reduction.mode).unwrap();
                writeln!(out, "kept {}", reduction.kept.len()).unwrap();
                writeln!(
                    out,
                    "initial {:.6e} retained {:.6e} removed {:.6e} budget {:.6e}",
                    reduction.initial, reduction.retained, reduction.removed, reduction.budget
                )
                .unwrap();
                writeln!(
                    out,
                    "within_budget {} retention_holds {} checker_ok {}",
                    reduction.within_budget(),
                    reduction.retention_holds(),
                    check.ok()
                )
                .unwrap();
                for problem in &check.problems {
                    writeln!(out, "problem {problem}").unwrap();
                }
            }
            if !check.ok() {
                return Err(CliError::Numeric(format!(
                    "reduction failed its check:\n{out}"
                )));
            }
        }
        Command::Prob {
            spec,
            brute,
            samples,
            seed,
            json: as_json,
        } => {
            let spec = MatchingSpec::from_json(&read(&spec)?)?;
            let exact = exact_probability(&spec)?;
            let big = bigbound_form(&spec)?;
            let (lo, hi) = stirling_interval(&spec)?;
            let corollary = corollary_bound(&spec)?;
            let constant = corollary_constant(spec.a.len(), spec.b.len());
            let brute = if brute {
                if spec.n > BRUTE_FORCE_LIMIT {
                    return Err(CliError::Usage(format!(
                        "--brute needs n <= {BRUTE_FORCE_LIMIT}"
                    )));
                }
                Some(brute_force_probability(&spec)?.to_string())
            } else {
                None
            };
            let mc = match samples {
                Some(k) => Some(monte_carlo_probability(&spec, k, &SeededRng::new(seed, 2))?),
                None => None,
            };
            let value = serde_json::json!({
                "ln_exact": exact.ln_p,
                "exact": exact.value(),
                "rational": exact.rational.as_ref().map(|r| r.to_string()),
                "brute_force": brute,
                "ln_chi": big.ln_chi,
                "exponent": big.exponent,
                "ln_asymptotic": big.ln_asymptotic(),
                "ln_ratio": exact.ln_p - big.ln_asymptotic(),
                "stirling_interval": [lo, hi],
                "ln_corollary": corollary,
                "ln_corollary_constant": constant,
                "monte_carlo": mc.map(|e| serde_json::json!({"p": e.p, "stderr": e.stderr, "samples": e.samples})),
            });
            out = if as_json {
                json(&value)
            } else {
                value
                    .as_object()
                    .expect("object")
                    .iter()
                    .filter(|(_, v)| !v.is_null())
                    .map(|(k, v)| format!("{k} {v}\n"))
                    .collect()
            };
        }
        Command::Experiment { config, out: csv } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::default_grid(PathBuf::from("results.csv")),
            };
            if let Some(path) = csv {
                cfg.output.csv = path;
            }
            let summary = run_experiment(&cfg)?;
            writeln!(
                out,
                "rows {} failures {}",
                summary.rows.len(),
                summary.failures.len()
            )
            .unwrap();
            for f in &summary.failures {
                writeln!(out, "failed {f}").unwrap();
            }
            writeln!(out, "wrote {}", cfg.output.csv.display()).unwrap();
            if summary.top_violations > 0 || summary.ratio_violations > 0 {
                return Err(CliError::Numeric(format!(
                    "{out}{} rows with lambda_top away from d, {} rows with lambda* at or above the proven bound",
                    summary.top_violations, summary.ratio_violations
                )));
            }
        }
        Command::Explain {
            lift,
            strength,
            trials,
            seed,
        } => {
            let lift = load_lift(&lift)?;
            out = json(&explain_pipeline(&lift, strength, trials, seed)?);
        }
    }
    Ok(out)
}
