//! Finite-alphabet distributions and the divergences between them.
//!
//! All divergences are reported in bits. Positive infinity is represented by
//! [`f64::INFINITY`] and only arises when the first argument puts mass on a
//! symbol the second argument excludes (or, for the Bhattacharyya distance,
//! when the two supports are disjoint). NaN is never returned.

mod sampling;
mod types;

pub use sampling::{derive_seed, sample_sequence, stream, Sampler, StreamRng};
pub use types::{empirical_type, SequenceBatch, Symbol, TypeVector};

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `Σ p(y) = 1` accepted by [`Distribution::new`].
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// A probability vector over the alphabet `{0, …, k−1}`, `k ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates `probs` as-is: nonnegative, finite, summing to one within
    /// [`SIMPLEX_TOLERANCE`], at least two symbols. Nothing is renormalized.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "alphabet size must be at least 2, got {}",
                probs.len()
            )));
        }
        if let Some((y, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {y} is {p}, expected a finite nonnegative value"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Divides nonnegative weights by their sum.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    /// A distribution usable as the typical law: every entry strictly positive.
    pub fn typical(probs: Vec<f64>) -> Result<Self> {
        let d = Self::new(probs)?;
        if d.min_prob() <= 0.0 {
            return Err(Error::InvalidDistribution(
                "typical distribution must have a strictly positive minimum".into(),
            ));
        }
        Ok(d)
    }

    /// Bernoulli law with success probability `theta`, i.e. `(1 − θ, θ)`.
    pub fn bernoulli(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidDistribution(format!(
                "success probability {theta} outside [0, 1]"
            )));
        }
        Self::new(vec![1.0 - theta, theta])
    }

    pub fn uniform(alphabet_size: usize) -> Result<Self> {
        Self::new(vec![1.0 / alphabet_size as f64; alphabet_size])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    /// Smallest entry, `π_min`.
    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max_y |p(y) − q(y)|`.
    pub fn linf_distance(&self, other: &Distribution) -> Result<f64> {
        same_alphabet(self.alphabet_size(), other.alphabet_size())?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

impl Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, y: usize) -> &f64 {
        &self.probs[y]
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

pub(crate) fn same_alphabet(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// Relative entropy `D(q‖p)` in bits with `0·log 0 = 0`.
pub fn kl_divergence(q: &Distribution, p: &Distribution) -> Result<f64> {
    same_alphabet(q.alphabet_size(), p.alphabet_size())?;
    Ok(kl_bits(&q.probs, &p.probs))
}

/// Slice form of [`kl_divergence`]; callers guarantee equal lengths.
pub(crate) fn kl_bits(q: &[f64], p: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (&qy, &py) in q.iter().zip(p) {
        if qy == 0.0 {
            continue;
        }
        if py == 0.0 {
            return f64::INFINITY;
        }
        sum += qy * (qy / py).log2();
    }
    // Rounding can leave a tiny negative value for nearly equal arguments.
    sum.max(0.0)
}

/// Bhattacharyya distance `B(p, q) = −log₂ Σ √(p(y) q(y))` in bits.
pub fn bhattacharyya(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_alphabet(p.alphabet_size(), q.alphabet_size())?;
    if p.probs == q.probs {
        return Ok(0.0);
    }
    let coefficient: f64 = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    if coefficient == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((-coefficient.log2()).max(0.0))
}

/// `(1 − c)·π + c·μ`, the law the mean estimate converges to when a fraction
/// `c` of the sequences are outliers.
pub fn mixture(pi: &Distribution, mu: &Distribution, c: f64) -> Result<Distribution> {
    same_alphabet(pi.alphabet_size(), mu.alphabet_size())?;
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidInput(format!(
            "mixture weight {c} outside [0, 1]"
        )));
    }
    let probs = pi
        .probs
        .iter()
        .zip(&mu.probs)
        .map(|(a, b)| (1.0 - c) * a + c * b)
        .collect();
    Distribution::new(probs)
}

/// Membership in the closed L∞ ball `B_{ε,∞}(π)`.
pub fn in_linf_ball(q: &Distribution, pi: &Distribution, eps: f64) -> Result<bool> {
    Ok(q.linf_distance(pi)? <= eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(p: &[f64]) -> Distribution {
        Distribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn constructor_rejects_bad_vectors() {
        assert!(Distribution::new(vec![1.0]).is_err());
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Distribution::new(vec![0.5, 0.5 + 5e-10]).is_ok());
        assert!(Distribution::typical(vec![0.0, 1.0]).is_err());
        assert_eq!(Distribution::bernoulli(0.3).unwrap().probs(), &[0.7, 0.3]);
    }

    #[test]
    fn normalized_divides_by_sum() {
        let n = Distribution::normalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(n.probs(), &[0.25, 0.75]);
        assert!(Distribution::normalized(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&d(&[0.3, 0.7]), &d(&[0.3, 0.7])).unwrap(), 0.0);
        let v = kl_divergence(&d(&[0.5, 0.5]), &d(&[0.25, 0.75])).unwrap();
        // 0.5·log₂2 + 0.5·log₂(2/3)
        assert!((v - 0.207_518_749_639_421_9).abs() < 1e-12);
        assert_eq!(
            kl_divergence(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(),
            f64::INFINITY
        );
        assert!(matches!(
            kl_divergence(&d(&[0.5, 0.5]), &d(&[0.2, 0.3, 0.5])),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn bhattacharyya_examples() {
        let p = d(&[0.5, 0.5]);
        assert_eq!(bhattacharyya(&p, &p).unwrap(), 0.0);
        let v = bhattacharyya(&p, &d(&[0.3, 0.7])).unwrap();
        // −log₂(√0.15 + √0.35), evaluated at 40 digits.
        assert!((v - 0.030_757_302_819_326_54).abs() < 1e-12);
        assert_eq!(
            bhattacharyya(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn mixture_examples() {
        let pi = d(&[0.2, 0.8]);
        let mu = d(&[0.6, 0.4]);
        assert_eq!(mixture(&pi, &mu, 0.0).unwrap(), pi);
        assert_eq!(mixture(&pi, &mu, 1.0).unwrap(), mu);
        assert_eq!(
            mixture(&d(&[1.0, 0.0]), &d(&[0.0, 1.0]), 0.5).unwrap().probs(),
            &[0.5, 0.5]
        );
        assert!(mixture(&pi, &mu, 1.5).is_err());
        assert!(mixture(&pi, &mu, -0.1).is_err());
    }

    #[test]
    fn linf_ball_examples() {
        let pi = d(&[0.5, 0.5]);
        let q = d(&[0.6, 0.4]);
        assert!(in_linf_ball(&pi, &pi, 1e-6).unwrap());
        assert!(!in_linf_ball(&q, &pi, 0.05).unwrap());
        assert!(in_linf_ball(&q, &pi, 0.1).unwrap());
    }

    #[test]
    fn serde_validates() {
        let ok: Distribution = serde_json::from_str("[0.25, 0.75]").unwrap();
        assert_eq!(ok.probs(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<Distribution>("[0.25, 0.25]").is_err());
    }
}
