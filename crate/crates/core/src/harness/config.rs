use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detectors::{binomial, DetectorKind, DEFAULT_SUBSET_BUDGET};
use crate::error::{Error, Result};
use crate::estimators::{floor_snapped, split_point};
use crate::exponents::DEFAULT_BERNOULLI_STEP;
use crate::probability::Distribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Constrained mean-test exponent versus contamination, no sampling.
    Fig2,
    /// Average detector error versus contamination on fresh random laws.
    Fig3,
    /// Empirical frequency of estimates leaving the ε-ball versus the Hoeffding bounds.
    BoundCheck,
    /// Detector error sweep with caller-chosen laws and `t` or `c` values.
    Custom,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Fig3 => "fig3",
            ExperimentKind::BoundCheck => "bound-check",
            ExperimentKind::Custom => "custom",
        }
    }
}

/// Bernoulli pair given by success probabilities (probability of symbol 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaPair {
    pub theta_mu: f64,
    pub theta_pi: f64,
}

impl ThetaPair {
    pub fn laws(&self) -> Result<(Distribution, Distribution)> {
        Ok((
            Distribution::bernoulli(self.theta_pi)?,
            Distribution::bernoulli(self.theta_mu)?,
        ))
    }

    pub fn label(&self) -> String {
        format!("theta_mu={};theta_pi={}", self.theta_mu, self.theta_pi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistributionSpec {
    Explicit { pi: Distribution, mu: Distribution },
    Bernoulli { pairs: Vec<ThetaPair> },
    /// Fresh `π`, `μ` with i.i.d. uniform entries normalized to one.
    RandomCategorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMetric {
    /// One error whenever the decision differs from the ground-truth set.
    #[default]
    ExactSet,
    /// Fraction of ground-truth outliers missing from the decision.
    Hamming,
}

fn default_rho() -> f64 {
    0.5
}

fn default_runs() -> usize {
    1
}

fn default_budget() -> u64 {
    DEFAULT_SUBSET_BUDGET
}

/// Declarative description of one experiment run, loaded from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub alphabet_size: usize,
    pub distributions: DistributionSpec,
    /// Number of sequences `M`.
    #[serde(default)]
    pub m: usize,
    /// Sequence length `n`.
    #[serde(default)]
    pub n: usize,
    /// Contamination sweep; `T = ⌊cM⌋` at every point.
    #[serde(default)]
    pub c_values: Vec<f64>,
    /// Fixed outlier count, used instead of `c_values` by custom and bound-check runs.
    #[serde(default)]
    pub t: Option<usize>,
    #[serde(default)]
    pub eps_values: Vec<f64>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub detectors: Vec<String>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub subset_budget: u64,
    /// Grid step of the exponent minimization (Bernoulli step, or 1/N for larger alphabets).
    #[serde(default)]
    pub grid_step: Option<f64>,
    #[serde(default)]
    pub error_metric: ErrorMetric,
    #[serde(default)]
    pub threads: Option<usize>,
    /// CSV destination; the SVG goes next to it.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// One point of a contamination sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub t: usize,
    /// `2T ≥ M`: the point is recorded but not simulated.
    pub admissible: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    /// Bernoulli pairs (0.10, 0.15) and (0.8, 0.3), `c ∈ {0, 0.05, …, 0.55}`.
    pub fn fig2_preset() -> Self {
        Self {
            experiment: ExperimentKind::Fig2,
            alphabet_size: 2,
            distributions: DistributionSpec::Bernoulli {
                pairs: vec![
                    ThetaPair {
                        theta_mu: 0.10,
                        theta_pi: 0.15,
                    },
                    ThetaPair {
                        theta_mu: 0.8,
                        theta_pi: 0.3,
                    },
                ],
            },
            m: 0,
            n: 0,
            c_values: (0..12).map(|k| k as f64 * 5.0 / 100.0).collect(),
            t: None,
            eps_values: vec![],
            rho: default_rho(),
            detectors: vec![],
            runs: 1,
            seed: 0,
            subset_budget: DEFAULT_SUBSET_BUDGET,
            grid_step: Some(DEFAULT_BERNOULLI_STEP),
            error_metric: ErrorMetric::ExactSet,
            threads: None,
            output: None,
        }
    }

    /// `M = 500`, `n = 250`, `|Y| = 5`, `c ∈ {0.05, 0.06, …, 0.50}`, 200 runs, `ρ = 0.5`.
    pub fn fig3_preset() -> Self {
        Self {
            experiment: ExperimentKind::Fig3,
            alphabet_size: 5,
            distributions: DistributionSpec::RandomCategorical,
            m: 500,
            n: 250,
            c_values: (5..=50).map(|k| k as f64 / 100.0).collect(),
            t: None,
            eps_values: vec![],
            rho: 0.5,
            detectors: vec!["mean".into(), "median1".into(), "median2".into()],
            runs: 200,
            seed: 0,
            subset_budget: DEFAULT_SUBSET_BUDGET,
            grid_step: None,
            error_metric: ErrorMetric::ExactSet,
            threads: None,
            output: None,
        }
    }

    pub fn detector_kinds(&self) -> Result<Vec<DetectorKind>> {
        self.detectors
            .iter()
            .map(|name| {
                DetectorKind::from_name(name).ok_or_else(|| {
                    Error::Config(format!(
                        "unknown detector {name:?}; expected one of mean, median1, median2, glrt, ml"
                    ))
                })
            })
            .collect()
    }

    /// Sweep points for the detector experiments: the fixed `t` if given,
    /// otherwise `T = ⌊cM⌋` for every `c`.
    pub fn sweep(&self) -> Vec<SweepPoint> {
        if let Some(t) = self.t {
            return vec![SweepPoint {
                value: t as f64,
                t,
                admissible: 2 * t < self.m,
            }];
        }
        self.c_values
            .iter()
            .map(|&c| {
                let t = floor_snapped(c * self.m as f64) as usize;
                SweepPoint {
                    value: c,
                    t,
                    admissible: 2 * t < self.m,
                }
            })
            .collect()
    }

    pub fn sweep_param(&self) -> &'static str {
        match self.experiment {
            ExperimentKind::BoundCheck => "eps",
            _ if self.t.is_some() => "t",
            _ => "c",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.alphabet_size < 2 {
            return fail(format!("alphabet_size must be at least 2, got {}", self.alphabet_size));
        }
        if self.runs == 0 {
            return fail("runs must be at least 1".into());
        }
        if self.threads == Some(0) {
            return fail("threads must be at least 1".into());
        }
        match &self.distributions {
            DistributionSpec::Explicit { pi, mu } => {
                for (name, d) in [("pi", pi), ("mu", mu)] {
                    if d.alphabet_size() != self.alphabet_size {
                        return fail(format!(
                            "{name} has {} entries but alphabet_size is {}",
                            d.alphabet_size(),
                            self.alphabet_size
                        ));
                    }
                }
                if pi == mu {
                    return fail("π ≠ μ required".into());
                }
            }
            DistributionSpec::Bernoulli { pairs } => {
                if self.alphabet_size != 2 {
                    return fail("Bernoulli pairs need alphabet_size = 2".into());
                }
                if pairs.is_empty() {
                    return fail("at least one Bernoulli pair is required".into());
                }
                for p in pairs {
                    let (pi, mu) = p.laws().map_err(|e| Error::Config(e.to_string()))?;
                    if pi == mu {
                        return fail(format!("π ≠ μ required ({})", p.label()));
                    }
                }
                if self.experiment != ExperimentKind::Fig2 && pairs.len() != 1 {
                    return fail("detector experiments take exactly one Bernoulli pair".into());
                }
            }
            DistributionSpec::RandomCategorical => {
                if self.experiment == ExperimentKind::Fig2 {
                    return fail("fig2 needs explicit or Bernoulli distributions".into());
                }
            }
        }
        if let Some(step) = self.grid_step {
            if !(step > 0.0 && step < 0.5) {
                return fail(format!("grid_step {step} must lie in (0, 0.5)"));
            }
        }
        if let Some(c) = self.c_values.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return fail(format!("contamination {c} outside [0, 1]"));
        }
        match self.experiment {
            ExperimentKind::Fig2 => {
                if self.c_values.is_empty() {
                    return fail("fig2 needs c_values".into());
                }
                Ok(())
            }
            ExperimentKind::BoundCheck => self.validate_bound_check(),
            ExperimentKind::Fig3 | ExperimentKind::Custom => self.validate_detection(),
        }
    }

    fn validate_sizes(&self) -> Result<()> {
        if self.m < 3 || self.n == 0 {
            return Err(Error::Config(format!(
                "need m ≥ 3 and n ≥ 1, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        Ok(())
    }

    fn validate_bound_check(&self) -> Result<()> {
        self.validate_sizes()?;
        let t = self
            .t
            .ok_or_else(|| Error::Config("bound-check needs a fixed t".into()))?;
        if 2 * t >= self.m {
            return Err(Error::Config(format!("t = {t} violates t < m/2 with m = {}", self.m)));
        }
        if self.eps_values.is_empty() {
            return Err(Error::Config("bound-check needs eps_values".into()));
        }
        if let Some(e) = self.eps_values.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!("eps {e} must be positive")));
        }
        Ok(())
    }

    fn validate_detection(&self) -> Result<()> {
        self.validate_sizes()?;
        let kinds = self.detector_kinds()?;
        if kinds.is_empty() {
            return Err(Error::Config("at least one detector is required".into()));
        }
        if self.t.is_none() && self.c_values.is_empty() {
            return Err(Error::Config("need either t or c_values".into()));
        }
        if self.t.is_some() && !self.c_values.is_empty() {
            return Err(Error::Config("give either t or c_values, not both".into()));
        }
        if let Some(t) = self.t {
            if 2 * t >= self.m {
                return Err(Error::Config(format!("t = {t} violates t < m/2 with m = {}", self.m)));
            }
        }
        if kinds.contains(&DetectorKind::MedianTwoStep) {
            split_point(self.n, self.rho).map_err(|e| Error::Config(e.to_string()))?;
        }
        if kinds.contains(&DetectorKind::Glrt) {
            for p in self.sweep().iter().filter(|p| p.admissible) {
                let subsets = binomial(self.m, p.t);
                if subsets > self.subset_budget as u128 {
                    return Err(Error::BudgetExceeded {
                        m: self.m,
                        t: p.t,
                        subsets: if subsets == u128::MAX {
                            "more than 2^128".to_string()
                        } else {
                            subsets.to_string()
                        },
                        budget: self.subset_budget,
                    });
                }
            }
        }
        Ok(())
    }
}
