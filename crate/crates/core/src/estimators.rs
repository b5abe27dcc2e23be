//! Estimates of the typical distribution from a collection of types.
//!
//! The mean estimate averages all types and is pulled toward the outlier law
//! when outliers make up a constant fraction of the batch. The median
//! estimate takes the per-symbol median and renormalizes; it stays close to
//! the typical law as long as fewer than half of the sequences are outliers.

use std::cmp::Ordering;

use crate::error::{invalid, Error, Result};
use crate::probability::{Distribution, SequenceBatch, TypeVector};

fn check_types(types: &[TypeVector]) -> Result<usize> {
    let first = types
        .first()
        .ok_or_else(|| invalid("cannot estimate from an empty list of types"))?;
    let k = first.alphabet_size();
    if let Some(t) = types.iter().find(|t| t.alphabet_size() != k) {
        return Err(Error::DimensionMismatch {
            left: k,
            right: t.alphabet_size(),
        });
    }
    Ok(k)
}

/// Entrywise average of the type probabilities.
pub fn mean_estimate(types: &[TypeVector]) -> Result<Distribution> {
    let k = check_types(types)?;
    let n = types[0].len();
    let probs = if types.iter().all(|t| t.len() == n) {
        // Equal lengths: integer column sums keep the estimate independent of row order.
        let mut sums = vec![0u64; k];
        for t in types {
            for (s, c) in sums.iter_mut().zip(t.counts()) {
                *s += c;
            }
        }
        let total = (n * types.len() as u64) as f64;
        sums.into_iter().map(|s| s as f64 / total).collect()
    } else {
        let mut sums = vec![0.0; k];
        for t in types {
            for (y, s) in sums.iter_mut().enumerate() {
                *s += t.prob(y);
            }
        }
        let m = types.len() as f64;
        sums.into_iter().map(|s| s / m).collect()
    };
    Distribution::new(probs)
}

/// Median with the midpoint rule for an even count. `None` for an empty slice.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut buf = values.to_vec();
    median_in_place(&mut buf)
}

fn median_in_place(buf: &mut [f64]) -> Option<f64> {
    let len = buf.len();
    if len == 0 {
        return None;
    }
    let mid = len / 2;
    let (lower, upper, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if len % 2 == 1 {
        return Some(upper);
    }
    let below = lower
        .iter()
        .copied()
        .max_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
        .expect("even length ≥ 2 leaves a nonempty lower half");
    Some((below + upper) / 2.0)
}

/// Unnormalized per-symbol medians `m(y)`.
pub fn symbol_medians(types: &[TypeVector]) -> Result<Vec<f64>> {
    let k = check_types(types)?;
    let mut column = vec![0.0; types.len()];
    Ok((0..k)
        .map(|y| {
            for (slot, t) in column.iter_mut().zip(types) {
                *slot = t.prob(y);
            }
            median_in_place(&mut column).expect("types are nonempty")
        })
        .collect())
}

/// Per-symbol median of the types, normalized to sum to one.
///
/// Fails with [`Error::DegenerateMedian`] when every per-symbol median is zero.
/// A normalizer that is tiny but nonzero is used as-is.
pub fn median_estimate(types: &[TypeVector]) -> Result<Distribution> {
    let medians = symbol_medians(types)?;
    let total: f64 = medians.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateMedian);
    }
    Distribution::new(medians.into_iter().map(|m| m / total).collect())
}

/// Length `⌈ρn⌉` of the estimation part of a split.
///
/// Products within 1e−9 of an integer are snapped to it before the ceiling,
/// so `ρ = 0.3, n = 10` yields 3 rather than 4.
pub fn split_point(n: usize, rho: f64) -> Result<usize> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(invalid(format!("split fraction ρ = {rho} must lie in (0, 1)")));
    }
    let k = ceil_snapped(rho * n as f64) as usize;
    if k == 0 || k >= n {
        return Err(invalid(format!(
            "split at ⌈{rho}·{n}⌉ = {k} leaves an empty part"
        )));
    }
    Ok(k)
}

pub(crate) fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r
    } else {
        x.ceil()
    }
}

pub(crate) fn floor_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r
    } else {
        x.floor()
    }
}

/// Splits every row into the first `⌈ρn⌉` samples and the remainder.
pub fn split_batch(batch: &SequenceBatch, rho: f64) -> Result<(SequenceBatch, SequenceBatch)> {
    let k = split_point(batch.n(), rho)?;
    Ok((batch.columns(0..k)?, batch.columns(k..batch.n())?))
}
