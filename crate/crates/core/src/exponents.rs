//! Error exponents and deviation bounds.
//!
//! * [`optimal_exponent`] is `2B(π,μ)`, the exponent of the likelihood test
//!   that knows both laws, also attained by the mean-based test when `T = o(M)`
//!   and, as a typical exponent, by the two-step median test.
//! * [`mean_exponent_grid`] evaluates the constrained minimum
//!   `min D(Q₁‖μ) + D(Q₂‖π)` subject to `D(Q₂‖ν) ≥ D(Q₁‖ν)` over a finite grid,
//!   which describes the mean-based test when a fraction `c` of the rows are
//!   outliers and `ν = (1−c)π + cμ`.
//! * The Hoeffding bounds use the natural exponential.

use crate::error::{invalid, Error, Result};
use crate::estimators::median;
use crate::probability::{bhattacharyya, kl_bits, mixture, same_alphabet, Distribution};

/// Slack on the feasibility test `D(Q₂‖ν) − D(Q₁‖ν) ≥ 0`.
pub const CONSTRAINT_SLACK: f64 = 1e-12;

/// Largest candidate count of a default non-binary grid (10⁶ pairs).
pub const MAX_DEFAULT_GRID_POINTS: usize = 1000;

/// Grid step of the Bernoulli grid `{0.001, 0.006, …, 0.996}`.
pub const DEFAULT_BERNOULLI_STEP: f64 = 0.005;

/// `2·B(π, μ)` in bits.
pub fn optimal_exponent(pi: &Distribution, mu: &Distribution) -> Result<f64> {
    Ok(2.0 * bhattacharyya(pi, mu)?)
}

/// Finite set of candidate distributions for grid minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityGrid {
    points: Vec<Distribution>,
    resolution: f64,
}

impl ProbabilityGrid {
    pub fn new(points: Vec<Distribution>, resolution: f64) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| invalid("grid must contain at least one distribution"))?;
        let k = first.alphabet_size();
        for p in &points {
            same_alphabet(k, p.alphabet_size())?;
        }
        Ok(Self { points, resolution })
    }

    /// Bernoulli laws with success probabilities `step/5 + i·step < 1`.
    ///
    /// `step = 0.005` gives `{0.001, 0.006, …, 0.996}`; neither 0 nor 1 is included.
    pub fn bernoulli(step: f64) -> Result<Self> {
        if !(step > 0.0 && step < 0.5) {
            return Err(invalid(format!("Bernoulli grid step {step} must lie in (0, 0.5)")));
        }
        let first = step / 5.0;
        let count = ((1.0 - first) / step).ceil() as usize;
        let points = (0..count)
            .map(|i| first + i as f64 * step)
            .filter(|&theta| theta < 1.0)
            .map(Distribution::bernoulli)
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, step)
    }

    /// Interior lattice `{q : q(y) = k_y/N, k_y ≥ 1, Σ k_y = N}`.
    pub fn simplex_interior(alphabet_size: usize, divisions: usize) -> Result<Self> {
        if alphabet_size < 2 || divisions < alphabet_size {
            return Err(invalid(format!(
                "an interior lattice over {alphabet_size} symbols needs at least that many divisions, got {divisions}"
            )));
        }
        let mut parts = Vec::with_capacity(alphabet_size);
        let mut points = Vec::new();
        compositions(divisions, alphabet_size, &mut parts, &mut |parts| {
            let probs = parts.iter().map(|&k| k as f64 / divisions as f64).collect();
            points.push(probs);
        });
        let points = points
            .into_iter()
            .map(Distribution::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, 1.0 / divisions as f64)
    }

    /// Bernoulli grid of step 0.005 for binary alphabets, otherwise the finest
    /// interior lattice with at most [`MAX_DEFAULT_GRID_POINTS`] points.
    pub fn default_for(alphabet_size: usize) -> Result<Self> {
        if alphabet_size == 2 {
            return Self::bernoulli(DEFAULT_BERNOULLI_STEP);
        }
        let mut divisions = alphabet_size;
        while crate::detectors::binomial(divisions, alphabet_size - 1)
            <= MAX_DEFAULT_GRID_POINTS as u128
        {
            divisions += 1;
        }
        Self::simplex_interior(alphabet_size, divisions)
    }

    /// Bernoulli grid of the given step for binary alphabets, otherwise the
    /// interior lattice with `N = round(1/step)`; `None` selects [`Self::default_for`].
    pub fn with_step(alphabet_size: usize, step: Option<f64>) -> Result<Self> {
        match step {
            None => Self::default_for(alphabet_size),
            Some(step) if alphabet_size == 2 => Self::bernoulli(step),
            Some(step) if step > 0.0 && step < 0.5 => {
                Self::simplex_interior(alphabet_size, (1.0 / step).round() as usize)
            }
            Some(step) => Err(invalid(format!("grid step {step} must lie in (0, 0.5)"))),
        }
    }

    pub fn points(&self) -> &[Distribution] {
        &self.points
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn alphabet_size(&self) -> usize {
        self.points[0].alphabet_size()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Grid minimum of the constrained exponent and the pair attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentResult {
    pub value: f64,
    pub grid_resolution: f64,
    pub q1: Distribution,
    pub q2: Distribution,
}

/// `min D(Q₁‖μ) + D(Q₂‖π)` over grid pairs with `D(Q₂‖ν) − D(Q₁‖ν) ≥ 0`.
///
/// Pairs involving an infinite divergence are skipped. Ties go to the
/// lexicographically smallest `(Q₁, Q₂)` grid index pair.
pub fn mean_exponent_grid(
    pi: &Distribution,
    mu: &Distribution,
    c: f64,
    grid: &ProbabilityGrid,
) -> Result<ExponentResult> {
    same_alphabet(pi.alphabet_size(), grid.alphabet_size())?;
    let nu = mixture(pi, mu, c)?;
    let to_mu: Vec<f64> = grid.points.iter().map(|q| kl_bits(q.probs(), mu.probs())).collect();
    let to_pi: Vec<f64> = grid.points.iter().map(|q| kl_bits(q.probs(), pi.probs())).collect();
    let to_nu: Vec<f64> = grid.points.iter().map(|q| kl_bits(q.probs(), nu.probs())).collect();

    let mut best: Option<(f64, usize, usize)> = None;
    for (i, (&a, &v1)) in to_mu.iter().zip(&to_nu).enumerate() {
        if !a.is_finite() || !v1.is_finite() {
            continue;
        }
        for (j, (&b, &v2)) in to_pi.iter().zip(&to_nu).enumerate() {
            if !b.is_finite() || !v2.is_finite() || v2 - v1 < -CONSTRAINT_SLACK {
                continue;
            }
            let value = a + b;
            if best.is_none_or(|(bv, _, _)| value < bv) {
                best = Some((value, i, j));
            }
        }
    }
    let (value, i, j) = best.ok_or(Error::NoFeasiblePair)?;
    Ok(ExponentResult {
        value,
        grid_resolution: grid.resolution,
        q1: grid.points[i].clone(),
        q2: grid.points[j].clone(),
    })
}

// Visits every composition of `total` into `parts` positive summands, in
// lexicographic order.
fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if parts == 1 {
        prefix.push(total);
        visit(prefix);
        prefix.pop();
        return;
    }
    for first in 1..=total - (parts - 1) {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, visit);
        prefix.pop();
    }
}

fn check_counts(m: usize, t: usize, eps: f64) -> Result<()> {
    if 2 * t >= m {
        return Err(invalid(format!("t = {t} must satisfy t < m/2 with m = {m}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid(format!("ε = {eps} must be positive")));
    }
    Ok(())
}

/// `2|Y|(M−T)·exp(−2n ε′²)` with `ε′ = ε/(1+|Y|)`: bounds the probability that
/// the median estimate leaves `B_{ε,∞}(π)`.
pub fn hoeffding_median_bound(alphabet_size: usize, m: usize, t: usize, n: usize, eps: f64) -> Result<f64> {
    check_counts(m, t, eps)?;
    let k = alphabet_size as f64;
    let eps_prime = eps / (1.0 + k);
    Ok(2.0 * k * (m - t) as f64 * (-2.0 * n as f64 * eps_prime * eps_prime).exp())
}

/// Hoeffding bound on the mean estimate leaving `B_{ε,∞}(π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanBound {
    pub value: f64,
    /// `εM < T`: the deviation threshold is nonpositive and only `2|Y|` remains.
    pub vacuous: bool,
}

/// `2|Y|·exp(−2(εM − T)²/M)`, valid for `εM ≥ T`.
pub fn hoeffding_mean_bound(alphabet_size: usize, m: usize, t: usize, eps: f64) -> Result<MeanBound> {
    check_counts(m, t, eps)?;
    let k = alphabet_size as f64;
    let margin = eps * m as f64 - t as f64;
    if margin < 0.0 {
        return Ok(MeanBound {
            value: 2.0 * k,
            vacuous: true,
        });
    }
    Ok(MeanBound {
        value: 2.0 * k * (-2.0 * margin * margin / m as f64).exp(),
        vacuous: false,
    })
}

/// Whether the median of `values` lies between the smallest and largest
/// value indexed by `subset`. Always true when `|subset| > L/2`; the function
/// exists to check that property.
pub fn median_property_check(values: &[f64], subset: &[usize]) -> Result<bool> {
    let len = values.len();
    if 2 * subset.len() <= len {
        return Err(invalid(format!(
            "subset of size {} is not larger than half of {len} values",
            subset.len()
        )));
    }
    let mut seen = vec![false; len];
    for &i in subset {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return Err(invalid(format!("subset index {i} is out of range or repeated")));
        }
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(invalid("values must not be NaN"));
    }
    let med = median(values).expect("subset nonempty implies values nonempty");
    let lo = subset.iter().map(|&i| values[i]).fold(f64::INFINITY, f64::min);
    let hi = subset.iter().map(|&i| values[i]).fold(f64::NEG_INFINITY, f64::max);
    Ok(lo <= med && med <= hi)
}

/// Least-squares line through `(n, −log₂ ε̂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    /// Estimated exponent in bits per sample.
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the residuals.
    pub residual_norm: f64,
}

/// Finite-sample exponent estimate from `(n, error probability)` points.
pub fn empirical_exponent(points: &[(usize, f64)]) -> Result<ExponentFit> {
    if points.len() < 2 {
        return Err(invalid("need at least two points to fit an exponent"));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(invalid("sequence lengths must be strictly increasing"));
    }
    if let Some(&(n, p)) = points.iter().find(|(_, p)| !(*p > 0.0 && *p <= 1.0)) {
        return Err(invalid(format!(
            "error probability {p} at n = {n} must lie in (0, 1]; zero estimates need more trials"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, p)| -p.log2()).collect();
    let len = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / len;
    let y_mean = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let residual_norm = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ExponentFit {
        slope,
        intercept,
        residual_norm,
    })
}
