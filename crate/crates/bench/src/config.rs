//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spider_vr::estimator::SamplingMode;
use spider_vr::smooth::OutputRule;

use crate::error::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Target stationarity; also the default `eps` of every solver.
    pub eps: f64,
    pub seeds: Vec<u64>,
    #[serde(default = "default_stride")]
    pub trace_stride: usize,
    /// Evaluate true gradient norm, loss and `||G_eta||` at recorded iterations.
    #[serde(default = "default_true")]
    pub diagnostics: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub start: StartSpec,
    #[serde(default)]
    pub solvers: Vec<SolverSpec>,
}

fn default_stride() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    SyntheticLogistic {
        n: usize,
        d: usize,
        seed: u64,
        alpha_reg: f64,
    },
    /// LIBSVM text file; a relative path is taken relative to the config file.
    Libsvm { path: PathBuf, alpha_reg: f64 },
    SparseRegression {
        n: usize,
        d: usize,
        support: usize,
        amplitude: f64,
        noise: f64,
        seed: u64,
    },
    OnlineLogistic {
        pool_size: usize,
        d: usize,
        seed: u64,
        alpha_reg: f64,
    },
    NoisyQuadratic {
        curvature: Vec<f64>,
        center: Vec<f64>,
        noise_std: f64,
    },
}

impl ProblemSpec {
    pub fn is_online(&self) -> bool {
        matches!(
            self,
            ProblemSpec::OnlineLogistic { .. } | ProblemSpec::NoisyQuadratic { .. }
        )
    }
}

/// Initial point shared by every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StartSpec {
    /// The origin, or the simplex center for the entropy geometry.
    #[default]
    Default,
    Gaussian {
        scale: f64,
        seed: u64,
    },
    Point {
        x: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Sarah,
    Spider,
    Spiderboost,
    ProxSpiderboost,
    ProxSpiderboostGd,
    ProxSpiderboostO,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sarah => "sarah",
            Algorithm::Spider => "spider",
            Algorithm::Spiderboost => "spiderboost",
            Algorithm::ProxSpiderboost => "prox-spiderboost",
            Algorithm::ProxSpiderboostGd => "prox-spiderboost-gd",
            Algorithm::ProxSpiderboostO => "prox-spiderboost-o",
        }
    }

    pub fn is_online(self) -> bool {
        self == Algorithm::ProxSpiderboostO
    }

    pub fn is_composite(self) -> bool {
        matches!(
            self,
            Algorithm::ProxSpiderboost | Algorithm::ProxSpiderboostGd | Algorithm::ProxSpiderboostO
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegularizerSpec {
    #[default]
    Zero,
    L1 {
        lambda: f64,
    },
    Box {
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometrySpec {
    #[default]
    Euclidean,
    EntropySimplex {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
}

fn default_alpha() -> f64 {
    1.0
}

/// One solver column of the experiment; unset fields take the solver defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub algorithm: Algorithm,
    /// Label used in file names and reports; defaults to the algorithm name.
    pub label: Option<String>,
    pub eta: Option<f64>,
    pub q: Option<usize>,
    /// Inner batch (`s` for smooth solvers, `s2` for composite ones).
    pub batch: Option<usize>,
    pub s1: Option<usize>,
    pub max_iters: Option<usize>,
    pub eps: Option<f64>,
    pub output_rule: Option<OutputRule>,
    pub sampling: Option<SamplingMode>,
    pub stop_at_target: Option<bool>,
    #[serde(default)]
    pub regularizer: RegularizerSpec,
    #[serde(default)]
    pub geometry: GeometrySpec,
    pub sigma_sq: Option<f64>,
    pub tau: Option<f64>,
    pub epoch_constant: Option<f64>,
    pub max_epochs: Option<usize>,
}

impl SolverSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            label: None,
            eta: None,
            q: None,
            batch: None,
            s1: None,
            max_iters: None,
            eps: None,
            output_rule: None,
            sampling: None,
            stop_at_target: None,
            regularizer: RegularizerSpec::Zero,
            geometry: GeometrySpec::Euclidean,
            sigma_sq: None,
            tau: None,
            epoch_constant: None,
            max_epochs: None,
        }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.algorithm.name())
    }
}

fn positive(name: &str, v: f64, errs: &mut Vec<String>) {
    if !(v > 0.0 && v.is_finite()) {
        errs.push(format!("{name} must be a positive finite number, got {v}"));
    }
}

fn positive_int(name: &str, v: Option<usize>, errs: &mut Vec<String>) {
    if v == Some(0) {
        errs.push(format!("{name} must be positive"));
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(vec![e.to_string()]))
    }

    /// Parses and validates; relative data paths are resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(vec![format!("{}: {e}", path.display())]))?;
        let mut cfg = Self::from_toml(&text)?;
        if let ProblemSpec::Libsvm { path: data, .. } = &mut cfg.problem {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Schema checks that serde cannot express. Collects every problem found.
    pub fn validate(&self) -> Result<(), BenchError> {
        let mut errs = Vec::new();
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            errs.push(format!(
                "name {:?} must be a non-empty file-name component",
                self.name
            ));
        }
        positive("eps", self.eps, &mut errs);
        if self.seeds.is_empty() {
            errs.push("seeds must not be empty".into());
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            errs.push("seeds must be distinct".into());
        }
        if self.trace_stride == 0 {
            errs.push("trace_stride must be positive".into());
        }
        match &self.problem {
            ProblemSpec::SyntheticLogistic {
                n, d, alpha_reg, ..
            } => {
                positive_int("problem.n", Some(*n), &mut errs);
                positive_int("problem.d", Some(*d), &mut errs);
                if !(*alpha_reg >= 0.0) {
                    errs.push("problem.alpha_reg must be nonnegative".into());
                }
            }
            ProblemSpec::Libsvm { alpha_reg, .. } => {
                if !(*alpha_reg >= 0.0) {
                    errs.push("problem.alpha_reg must be nonnegative".into());
                }
            }
            ProblemSpec::SparseRegression {
                n,
                d,
                support,
                noise,
                ..
            } => {
                positive_int("problem.n", Some(*n), &mut errs);
                positive_int("problem.d", Some(*d), &mut errs);
                if support > d {
                    errs.push("problem.support exceeds problem.d".into());
                }
                if !(*noise >= 0.0) {
                    errs.push("problem.noise must be nonnegative".into());
                }
            }
            ProblemSpec::OnlineLogistic {
                pool_size,
                d,
                alpha_reg,
                ..
            } => {
                positive_int("problem.pool_size", Some(*pool_size), &mut errs);
                positive_int("problem.d", Some(*d), &mut errs);
                if !(*alpha_reg >= 0.0) {
                    errs.push("problem.alpha_reg must be nonnegative".into());
                }
            }
            ProblemSpec::NoisyQuadratic {
                curvature,
                center,
                noise_std,
            } => {
                if curvature.is_empty() || curvature.len() != center.len() {
                    errs.push("problem.curvature and problem.center must be non-empty and of equal length".into());
                }
                if !(*noise_std >= 0.0) {
                    errs.push("problem.noise_std must be nonnegative".into());
                }
            }
        }
        match &self.start {
            StartSpec::Gaussian { scale, .. } if !(*scale >= 0.0 && scale.is_finite()) => {
                errs.push("start.scale must be nonnegative".into())
            }
            StartSpec::Point { x } if x.iter().any(|v| !v.is_finite()) => {
                errs.push("start.x must be finite".into())
            }
            _ => {}
        }
        let mut labels: Vec<&str> = Vec::new();
        for (i, s) in self.solvers.iter().enumerate() {
            let at = format!("solvers[{i}] ({})", s.label());
            if labels.contains(&s.label()) {
                errs.push(format!("{at}: duplicate label; set `label`"));
            }
            labels.push(s.label());
            if s.label().is_empty() || s.label().contains(['/', '\\']) {
                errs.push(format!(
                    "{at}: label must be a non-empty file-name component"
                ));
            }
            if s.algorithm.is_online() != self.problem.is_online() {
                errs.push(format!(
                    "{at}: algorithm {} does not apply to a {} problem",
                    s.algorithm.name(),
                    if self.problem.is_online() {
                        "online"
                    } else {
                        "finite-sum"
                    }
                ));
            }
            if !s.algorithm.is_composite()
                && (s.regularizer != RegularizerSpec::Zero || s.geometry != GeometrySpec::Euclidean)
            {
                errs.push(format!(
                    "{at}: regularizer and geometry apply only to composite solvers"
                ));
            }
            if let Some(v) = s.eta {
                positive(&format!("{at}: eta"), v, &mut errs);
            }
            if let Some(v) = s.eps {
                positive(&format!("{at}: eps"), v, &mut errs);
            }
            if let Some(v) = s.tau {
                positive(&format!("{at}: tau"), v, &mut errs);
            }
            positive_int(&format!("{at}: q"), s.q, &mut errs);
            positive_int(&format!("{at}: batch"), s.batch, &mut errs);
            positive_int(&format!("{at}: s1"), s.s1, &mut errs);
            positive_int(&format!("{at}: max_iters"), s.max_iters, &mut errs);
            positive_int(&format!("{at}: max_epochs"), s.max_epochs, &mut errs);
            if s.algorithm == Algorithm::ProxSpiderboostGd && s.q.is_none() && s.tau.is_none() {
                errs.push(format!("{at}: prox-spiderboost-gd needs q or tau"));
            }
            match s.regularizer {
                RegularizerSpec::L1 { lambda } if !(lambda >= 0.0) => {
                    errs.push(format!("{at}: l1 lambda must be nonnegative"))
                }
                RegularizerSpec::Box { lo, hi } if !(lo <= hi) => {
                    errs.push(format!("{at}: box needs lo <= hi"))
                }
                _ => {}
            }
            if let GeometrySpec::EntropySimplex { alpha } = s.geometry {
                positive(&format!("{at}: geometry.alpha"), alpha, &mut errs);
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(BenchError::Config(errs))
        }
    }
}
