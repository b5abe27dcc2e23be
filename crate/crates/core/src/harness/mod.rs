//! Seeded Monte Carlo experiments.
//!
//! Every random quantity comes from a stream derived from the master seed and
//! an index path (sweep point, trial), so results do not depend on how many
//! worker threads run the trials. Trials are collected in index order before
//! aggregation.
//!
//! Outlier rows are placed uniformly at random in each batch and recorded as
//! ground truth. All detectors are permutation-equivariant, so the averaged
//! error estimates the same maximal error probability as a fixed placement.

mod config;
mod output;

pub use config::{DistributionSpec, ErrorMetric, ExperimentConfig, ExperimentKind, SweepPoint, ThetaPair};
pub use output::{csv_string, format_sig12, render_plot, write_csv, write_outputs, CSV_HEADER};

use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::detectors::{
    glrt, mean_test, median_test_single_step, median_test_two_step, ml_test_known, DetectorKind,
    OutlierDecision,
};
use crate::error::{invalid, Error, Result};
use crate::estimators::{mean_estimate, median_estimate};
use crate::exponents::{
    hoeffding_mean_bound, hoeffding_median_bound, mean_exponent_grid, optimal_exponent, ProbabilityGrid,
};
use crate::probability::{in_linf_ball, stream, Distribution, Sampler, SequenceBatch, Symbol};

/// Stream index reserved for drawing the laws of a sweep point.
const LAW_STREAM: u64 = u64::MAX;

/// `m` rows of length `n`: `t` from `μ` at uniformly random positions, the rest from `π`.
pub fn generate_batch<R: Rng + ?Sized>(
    pi: &Distribution,
    mu: &Distribution,
    m: usize,
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<SequenceBatch> {
    if pi.alphabet_size() != mu.alphabet_size() {
        return Err(Error::DimensionMismatch {
            left: pi.alphabet_size(),
            right: mu.alphabet_size(),
        });
    }
    if 2 * t >= m || n == 0 {
        return Err(invalid(format!(
            "need t < m/2 and n ≥ 1, got m = {m}, t = {t}, n = {n}"
        )));
    }
    let outliers = sample(rng, m, t).into_vec();
    let mut is_outlier = vec![false; m];
    for &i in &outliers {
        is_outlier[i] = true;
    }
    let typical = Sampler::new(pi);
    let outlier = Sampler::new(mu);
    let mut data: Vec<Symbol> = vec![0; m * n];
    for (row, flag) in data.chunks_exact_mut(n).zip(&is_outlier) {
        let sampler = if *flag { &outlier } else { &typical };
        sampler.fill(rng, row);
    }
    SequenceBatch::from_flat(m, n, data, outliers, pi.alphabet_size())
}

/// Entries drawn i.i.d. uniform on `(0, 1)` and normalized.
pub fn random_categorical<R: Rng + ?Sized>(alphabet_size: usize, rng: &mut R) -> Result<Distribution> {
    if alphabet_size < 2 {
        return Err(invalid("alphabet size must be at least 2"));
    }
    loop {
        let weights: Vec<f64> = (0..alphabet_size).map(|_| rng.random::<f64>()).collect();
        // an exact zero has probability 2^-53 per entry; redraw to keep π_min > 0
        if weights.iter().all(|&w| w > 0.0) {
            return Distribution::normalized(weights);
        }
    }
}

/// Parameters shared by the detectors in one trial.
#[derive(Debug, Clone)]
pub struct TrialParams {
    pub t: usize,
    pub rho: f64,
    pub subset_budget: u64,
    /// True laws, needed by the known-distribution baseline.
    pub known: Option<(Distribution, Distribution)>,
    pub metric: ErrorMetric,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    /// Error of this trial: 0 or 1 for the exact-set metric.
    Scored(f64),
    /// The detector could not produce a decision (e.g. a degenerate median).
    Failed(String),
}

pub fn run_detector(kind: DetectorKind, batch: &SequenceBatch, params: &TrialParams) -> Result<OutlierDecision> {
    let t = params.t;
    match kind {
        DetectorKind::Mean => mean_test(batch, t),
        DetectorKind::MedianSingleStep => median_test_single_step(batch, t),
        DetectorKind::MedianTwoStep => median_test_two_step(batch, t, params.rho),
        DetectorKind::Glrt => glrt(batch, t, params.subset_budget),
        DetectorKind::MlKnown => {
            let (pi, mu) = params
                .known
                .as_ref()
                .ok_or_else(|| invalid("the ml detector needs the true distributions"))?;
            ml_test_known(batch, t, pi, mu)
        }
    }
}

/// Runs every detector on `batch` and scores it against the ground truth.
pub fn run_trial(batch: &SequenceBatch, detectors: &[DetectorKind], params: &TrialParams) -> Vec<TrialOutcome> {
    detectors
        .iter()
        .map(|&kind| match run_detector(kind, batch, params) {
            Ok(decision) => {
                assert_eq!(decision.len(), params.t, "{kind} returned a decision of the wrong size");
                let truth = batch.outliers();
                let error = match params.metric {
                    ErrorMetric::ExactSet => f64::from(u8::from(decision.indices() != truth)),
                    ErrorMetric::Hamming if truth.is_empty() => 0.0,
                    ErrorMetric::Hamming => decision.misses(truth) as f64 / truth.len() as f64,
                };
                TrialOutcome::Scored(error)
            }
            Err(e) => TrialOutcome::Failed(e.to_string()),
        })
        .collect()
}

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub detector: String,
    /// Mean error over the trials that produced a decision.
    pub avg_error: Option<f64>,
    /// Trials that produced a decision.
    pub trials: usize,
    pub failures: usize,
    /// Constrained exponent (fig2 rows).
    pub exponent: Option<f64>,
    /// Reference curve value, `2B(π,μ)` or an analytic bound.
    pub reference: Option<f64>,
    pub extra: Vec<(String, String)>,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub experiment: ExperimentKind,
    pub sweep_param: String,
    pub rows: Vec<ResultRow>,
}

impl ExperimentResult {
    pub fn rows_for<'a>(&'a self, detector: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.detector == detector)
    }
}

fn in_pool<T: Send>(threads: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(work()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

/// Validates `config` and dispatches on its experiment kind.
///
/// `threads` overrides the configured worker count; `None` in both uses the
/// global pool. The result is identical for every worker count.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult> {
    config.validate()?;
    match config.experiment {
        ExperimentKind::Fig2 => run_experiment_fig2(config),
        ExperimentKind::Fig3 | ExperimentKind::Custom => {
            in_pool(threads.or(config.threads), || run_experiment_fig3(config))?
        }
        ExperimentKind::BoundCheck => in_pool(threads.or(config.threads), || run_bound_check(config))?,
    }
}

fn fmt_extra(pairs: &[(&str, f64)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), format_sig12(*v))).collect()
}

/// Grid-minimized mean-test exponent per (law pair, c), with `2B(π,μ)` alongside.
pub fn run_experiment_fig2(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let grid = ProbabilityGrid::with_step(config.alphabet_size, config.grid_step)?;
    let series: Vec<(String, Distribution, Distribution)> = match &config.distributions {
        DistributionSpec::Bernoulli { pairs } => pairs
            .iter()
            .map(|p| {
                let (pi, mu) = p.laws()?;
                Ok((format!("alpha_mean({})", p.label()), pi, mu))
            })
            .collect::<Result<_>>()?,
        DistributionSpec::Explicit { pi, mu } => vec![("alpha_mean".to_string(), pi.clone(), mu.clone())],
        DistributionSpec::RandomCategorical => unreachable!("rejected by validation"),
    };
    let mut rows = Vec::new();
    for (name, pi, mu) in &series {
        let two_b = optimal_exponent(pi, mu)?;
        for &c in &config.c_values {
            let start = Instant::now();
            let r = mean_exponent_grid(pi, mu, c, &grid)?;
            let mut extra = fmt_extra(&[
                ("alpha_mean", r.value),
                ("two_b", two_b),
                ("grid_resolution", r.grid_resolution),
            ]);
            extra.push(("q1".into(), join_probs(r.q1.probs())));
            extra.push(("q2".into(), join_probs(r.q2.probs())));
            rows.push(ResultRow {
                sweep_value: c,
                detector: name.clone(),
                avg_error: None,
                trials: 0,
                failures: 0,
                exponent: Some(r.value),
                reference: Some(two_b),
                extra,
                wall_time: start.elapsed(),
            });
        }
    }
    Ok(ExperimentResult {
        experiment: config.experiment,
        sweep_param: config.sweep_param().into(),
        rows,
    })
}

fn join_probs(p: &[f64]) -> String {
    p.iter().map(|v| format_sig12(*v)).collect::<Vec<_>>().join(" ")
}

fn laws_for_point(config: &ExperimentConfig, point_index: usize) -> Result<(Distribution, Distribution)> {
    match &config.distributions {
        DistributionSpec::Explicit { pi, mu } => Ok((pi.clone(), mu.clone())),
        DistributionSpec::Bernoulli { pairs } => pairs[0].laws(),
        DistributionSpec::RandomCategorical => {
            let mut rng = stream(config.seed, &[point_index as u64, LAW_STREAM]);
            loop {
                let pi = random_categorical(config.alphabet_size, &mut rng)?;
                let mu = random_categorical(config.alphabet_size, &mut rng)?;
                if pi != mu {
                    return Ok((pi, mu));
                }
            }
        }
    }
}

fn aggregate(outcomes: impl Iterator<Item = TrialOutcome>) -> (Option<f64>, usize, usize) {
    let (mut sum, mut trials, mut failures) = (0.0, 0usize, 0usize);
    for o in outcomes {
        match o {
            TrialOutcome::Scored(e) => {
                sum += e;
                trials += 1;
            }
            TrialOutcome::Failed(_) => failures += 1,
        }
    }
    let avg = (trials > 0).then(|| sum / trials as f64);
    (avg, trials, failures)
}

fn metric_name(metric: ErrorMetric) -> &'static str {
    match metric {
        ErrorMetric::ExactSet => "exact-set",
        ErrorMetric::Hamming => "hamming",
    }
}

/// Average detector error per sweep point (used by fig3 and custom runs).
///
/// Points with `2T ≥ M` are emitted with zero trials and an `inadmissible`
/// marker instead of being simulated.
pub fn run_experiment_fig3(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let detectors = config.detector_kinds()?;
    let mut rows = Vec::new();
    for (index, point) in config.sweep().into_iter().enumerate() {
        let start = Instant::now();
        if !point.admissible {
            for kind in &detectors {
                rows.push(ResultRow {
                    sweep_value: point.value,
                    detector: kind.name().into(),
                    avg_error: None,
                    trials: 0,
                    failures: 0,
                    exponent: None,
                    reference: None,
                    extra: vec![
                        ("t".into(), point.t.to_string()),
                        ("inadmissible".into(), format!("2T >= M with M = {}", config.m)),
                    ],
                    wall_time: start.elapsed(),
                });
            }
            continue;
        }
        let (pi, mu) = laws_for_point(config, index)?;
        let params = TrialParams {
            t: point.t,
            rho: config.rho,
            subset_budget: config.subset_budget,
            known: Some((pi.clone(), mu.clone())),
            metric: config.error_metric,
        };
        let outcomes: Vec<Result<Vec<TrialOutcome>>> = (0..config.runs)
            .into_par_iter()
            .map(|trial| {
                let mut rng = stream(config.seed, &[index as u64, trial as u64]);
                let batch = generate_batch(&pi, &mu, config.m, point.t, config.n, &mut rng)?;
                Ok(run_trial(&batch, &detectors, &params))
            })
            .collect();
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        let elapsed = start.elapsed();
        let two_b = optimal_exponent(&pi, &mu)?;
        for (d, kind) in detectors.iter().enumerate() {
            let (avg_error, trials, failures) = aggregate(outcomes.iter().map(|o| o[d].clone()));
            let mut extra = vec![("t".to_string(), point.t.to_string())];
            extra.extend(fmt_extra(&[("two_b", two_b)]));
            extra.push(("metric".into(), metric_name(config.error_metric).into()));
            rows.push(ResultRow {
                sweep_value: point.value,
                detector: kind.name().into(),
                avg_error,
                trials,
                failures,
                exponent: None,
                reference: None,
                extra,
                wall_time: elapsed,
            });
        }
    }
    Ok(ExperimentResult {
        experiment: config.experiment,
        sweep_param: config.sweep_param().into(),
        rows,
    })
}

/// Frequency of `estimate ∉ B_{ε,∞}(π)` for the mean and median estimates,
/// next to the corresponding Hoeffding bounds, for every configured ε.
pub fn run_bound_check(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let t = config.t.expect("validated");
    let (pi, mu) = laws_for_point(config, 0)?;
    let mut rows = Vec::new();
    for (index, &eps) in config.eps_values.iter().enumerate() {
        let start = Instant::now();
        let outcomes: Vec<Result<(TrialOutcome, TrialOutcome)>> = (0..config.runs)
            .into_par_iter()
            .map(|trial| {
                let mut rng = stream(config.seed, &[index as u64, trial as u64]);
                let batch = generate_batch(&pi, &mu, config.m, t, config.n, &mut rng)?;
                let types = batch.types();
                let outside = |estimate: Result<Distribution>| match estimate {
                    Ok(e) => in_linf_ball(&e, &pi, eps)
                        .map(|inside| TrialOutcome::Scored(if inside { 0.0 } else { 1.0 })),
                    Err(e) => Ok(TrialOutcome::Failed(e.to_string())),
                };
                Ok((outside(mean_estimate(&types))?, outside(median_estimate(&types))?))
            })
            .collect();
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        let elapsed = start.elapsed();

        let mean_bound = hoeffding_mean_bound(config.alphabet_size, config.m, t, eps)?;
        let median_bound = hoeffding_median_bound(config.alphabet_size, config.m, t, config.n, eps)?;
        let (avg, trials, failures) = aggregate(outcomes.iter().map(|o| o.0.clone()));
        let mut extra = fmt_extra(&[("bound", mean_bound.value)]);
        extra.push(("vacuous".into(), mean_bound.vacuous.to_string()));
        rows.push(ResultRow {
            sweep_value: eps,
            detector: "mean-estimate".into(),
            avg_error: avg,
            trials,
            failures,
            exponent: None,
            reference: Some(mean_bound.value),
            extra,
            wall_time: elapsed,
        });
        let (avg, trials, failures) = aggregate(outcomes.iter().map(|o| o.1.clone()));
        let mut extra = fmt_extra(&[("bound", median_bound)]);
        extra.push(("vacuous".into(), (median_bound >= 1.0).to_string()));
        rows.push(ResultRow {
            sweep_value: eps,
            detector: "median-estimate".into(),
            avg_error: avg,
            trials,
            failures,
            exponent: None,
            reference: Some(median_bound),
            extra,
            wall_time: elapsed,
        });
    }
    Ok(ExperimentResult {
        experiment: config.experiment,
        sweep_param: config.sweep_param().into(),
        rows,
    })
}
