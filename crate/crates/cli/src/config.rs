//! Experiment configuration files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use randlift::graph::BaseGraph;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Where the base graph comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BaseSource {
    /// `K_{d+1}`.
    Complete {
        d: usize,
    },
    /// Cycle on `h` vertices joined to every vertex within distance `k`.
    CyclePower {
        h: usize,
        k: usize,
    },
    Petersen,
    /// Text file: `h m` then one `u v` line per edge.
    File {
        path: PathBuf,
    },
}

impl BaseSource {
    pub fn build(&self) -> Result<Arc<BaseGraph>, CliError> {
        let g = match self {
            BaseSource::Complete { d } => BaseGraph::complete(d + 1)?,
            BaseSource::CyclePower { h, k } => BaseGraph::cycle_power(*h, *k)?,
            BaseSource::Petersen => BaseGraph::petersen(),
            BaseSource::File { path } => BaseGraph::parse_text(&read(path)?)?,
        };
        Ok(Arc::new(g))
    }

    /// Parses the command-line shorthand: `k<h>` (complete graph on `h`
    /// vertices), `petersen`, `cycle:<h>:<k>` or `file:<path>`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("unrecognised base graph `{text}`"));
        if text == "petersen" {
            return Ok(BaseSource::Petersen);
        }
        if let Some(path) = text.strip_prefix("file:") {
            return Ok(BaseSource::File { path: path.into() });
        }
        if let Some(rest) = text.strip_prefix("cycle:") {
            let (h, k) = rest.split_once(':').ok_or_else(bad)?;
            return Ok(BaseSource::CyclePower {
                h: h.parse().map_err(|_| bad())?,
                k: k.parse().map_err(|_| bad())?,
            });
        }
        if let Some(h) = text.strip_prefix('k').or_else(|| text.strip_prefix('K')) {
            let h: usize = h.parse().map_err(|_| bad())?;
            if h < 3 {
                return Err(bad());
            }
            return Ok(BaseSource::Complete { d: h - 1 });
        }
        Err(bad())
    }
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Pipeline stages a sweep can run; the spectrum is always computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Spectrum,
    Certificate,
    Reduction,
    Witnesses,
}

/// Output locations of a sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outputs {
    pub csv: PathBuf,
    /// JSON-lines file for per-cell pipeline reports (witnesses stage).
    #[serde(default)]
    pub reports: Option<PathBuf>,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_trials() -> usize {
    200
}

fn default_strength() -> f64 {
    20.0
}

fn default_stages() -> Vec<Stage> {
    vec![Stage::Spectrum]
}

/// A sweep over `(n, seed)` cells on one base graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base: BaseSource,
    pub n: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_stages")]
    pub stages: Vec<Stage>,
    pub output: Outputs,
    /// Rounding trials for the certificate stage.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Strength `L` for the reduction and witness stages.
    #[serde(default = "default_strength")]
    pub strength: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&read(path)?)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Usage(format!("config: {m}")));
        if self.n.is_empty() || self.n.contains(&0) {
            return bad("n values must be a nonempty list of positive integers");
        }
        if self.seeds.is_empty() {
            return bad("seeds must be nonempty");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol must be positive");
        }
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        if !(self.strength >= randlift::pattern::reduce::MIN_STRENGTH) {
            return bad("strength must be at least 20");
        }
        Ok(())
    }

    pub fn runs(&self, stage: Stage) -> bool {
        stage == Stage::Spectrum || self.stages.contains(&stage)
    }

    /// Grid that finishes in minutes: `K_4`, `n` up to 2000, 20 seeds.
    pub fn default_grid(csv: PathBuf) -> Self {
        Self {
            base: BaseSource::Complete { d: 3 },
            n: vec![100, 400, 1000, 2000],
            seeds: (1..=20).collect(),
            tol: default_tol(),
            stages: vec![Stage::Spectrum, Stage::Certificate, Stage::Reduction],
            output: Outputs { csv, reports: None },
            trials: 20,
            strength: default_strength(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let cfg = ExperimentConfig::from_json(
            r#"{"base": {"family": "complete", "d": 3}, "n": [100, 400], "seeds": [1, 2],
                "stages": ["spectrum", "certificate"], "output": {"csv": "out.csv"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.base, BaseSource::Complete { d: 3 });
        assert_eq!(cfg.tol, 1e-8);
        assert!(cfg.runs(Stage::Certificate) && !cfg.runs(Stage::Reduction));
    }

    #[test]
    fn rejects_bad_configs() {
        let base = r#""base": {"family": "petersen"}, "output": {"csv": "o.csv"}"#;
        for body in [
            format!(r#"{{{base}, "n": [], "seeds": [1]}}"#),
            format!(r#"{{{base}, "n": [0], "seeds": [1]}}"#),
            format!(r#"{{{base}, "n": [5], "seeds": []}}"#),
            format!(r#"{{{base}, "n": [5], "seeds": [1], "stages": ["plot"]}}"#),
            format!(r#"{{{base}, "n": [5], "seeds": [1], "strength": 5}}"#),
        ] {
            assert!(
                matches!(ExperimentConfig::from_json(&body), Err(CliError::Usage(_))),
                "{body}"
            );
        }
    }

    #[test]
    fn shorthand_base_names() {
        assert_eq!(
            BaseSource::parse("k4").unwrap(),
            BaseSource::Complete { d: 3 }
        );
        assert_eq!(BaseSource::parse("petersen").unwrap(), BaseSource::Petersen);
        assert_eq!(
            BaseSource::parse("cycle:8:2").unwrap(),
            BaseSource::CyclePower { h: 8, k: 2 }
        );
        assert!(BaseSource::parse("k2").is_err());
        assert!(BaseSource::parse("wheel").is_err());
    }

    #[test]
    fn default_grid_is_desk_sized() {
        let cfg = ExperimentConfig::default_grid("x.csv".into());
        cfg.validate().unwrap();
        let g = cfg.base.build().unwrap();
        assert!(g.order() * g.degree() <= 30);
        assert!(cfg.n.iter().all(|&n| n <= 2000) && cfg.seeds.len() <= 50);
    }
}
