//! Outlier detectors. Each returns a size-`t` set of row indices.
//!
//! The mean-based and median-based detectors score every row by the relative
//! entropy between its type and an estimate of the typical law and keep the
//! `t` largest scores. Because the objective `Σ_{j∈S} D(P_j‖π̂)` is separable,
//! this top-`t` selection is its exact maximizer and costs `O(M log M)`.
//! The GLRT searches every size-`t` subset and is guarded by a budget.

use std::cmp::Ordering;

use crate::error::{invalid, Error, Result};
use crate::estimators::{mean_estimate, median_estimate, split_batch};
use crate::probability::{kl_bits, same_alphabet, Distribution, SequenceBatch, TypeVector};

/// Default cap on the number of subsets the GLRT may enumerate.
pub const DEFAULT_SUBSET_BUDGET: u64 = 1_000_000;

/// Absolute slack (bits) under which two GLRT objectives count as tied.
pub const GLRT_TIE_TOLERANCE: f64 = 1e-9;

/// Sorted set of row indices declared as outliers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutlierDecision {
    indices: Vec<usize>,
}

impl OutlierDecision {
    pub(crate) fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Number of ground-truth outliers the decision missed.
    pub fn misses(&self, truth: &[usize]) -> usize {
        truth.iter().filter(|&&i| !self.contains(i)).count()
    }
}

/// Per-row test statistic `D(P_i‖reference)` in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
    reference: Distribution,
}

impl ScoreVector {
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn reference(&self) -> &Distribution {
        &self.reference
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// The detectors the crate implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    Mean,
    MedianSingleStep,
    MedianTwoStep,
    Glrt,
    MlKnown,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 5] = [
        DetectorKind::Mean,
        DetectorKind::MedianSingleStep,
        DetectorKind::MedianTwoStep,
        DetectorKind::Glrt,
        DetectorKind::MlKnown,
    ];

    /// Short name used on the command line and in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Mean => "mean",
            DetectorKind::MedianSingleStep => "median1",
            DetectorKind::MedianTwoStep => "median2",
            DetectorKind::Glrt => "glrt",
            DetectorKind::MlKnown => "ml",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub fn score_sequences(types: &[TypeVector], reference: &Distribution) -> Result<ScoreVector> {
    let k = reference.alphabet_size();
    let mut probs = vec![0.0; k];
    let mut scores = Vec::with_capacity(types.len());
    for t in types {
        same_alphabet(t.alphabet_size(), k)?;
        let n = t.len() as f64;
        for (p, &c) in probs.iter_mut().zip(t.counts()) {
            *p = c as f64 / n;
        }
        scores.push(kl_bits(&probs, reference.probs()));
    }
    Ok(ScoreVector {
        scores,
        reference: reference.clone(),
    })
}

fn check_t(t: usize, m: usize) -> Result<()> {
    if t == 0 || 2 * t >= m {
        return Err(invalid(format!("t = {t} must satisfy 1 ≤ t < M/2 with M = {m}")));
    }
    Ok(())
}

// Larger score first, then smaller index. +∞ compares above every finite value.
fn rank_order(scores: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b))
}

fn top_t_raw(scores: &[f64], t: usize) -> Result<OutlierDecision> {
    check_t(t, scores.len())?;
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(invalid(format!("score of row {i} is NaN")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    let cmp = rank_order(scores);
    order.select_nth_unstable_by(t - 1, &cmp);
    order.truncate(t);
    Ok(OutlierDecision::from_unsorted(order))
}

/// Indices of the `t` largest scores, ties going to the smaller index.
pub fn top_t(scores: &ScoreVector, t: usize) -> Result<OutlierDecision> {
    top_t_raw(&scores.scores, t)
}

/// Scores every row against the mean of all types.
pub fn mean_test(batch: &SequenceBatch, t: usize) -> Result<OutlierDecision> {
    check_t(t, batch.m())?;
    let types = batch.types();
    let reference = mean_estimate(&types)?;
    top_t(&score_sequences(&types, &reference)?, t)
}

/// Median estimate and scoring on the same samples.
pub fn median_test_single_step(batch: &SequenceBatch, t: usize) -> Result<OutlierDecision> {
    check_t(t, batch.m())?;
    let types = batch.types();
    let reference = median_estimate(&types)?;
    top_t(&score_sequences(&types, &reference)?, t)
}

/// Median estimate from the first `⌈ρn⌉` samples of every row, scoring on the rest.
pub fn median_test_two_step(batch: &SequenceBatch, t: usize, rho: f64) -> Result<OutlierDecision> {
    check_t(t, batch.m())?;
    let (estimation, detection) = split_batch(batch, rho)?;
    let reference = median_estimate(&estimation.types())?;
    top_t(&score_sequences(&detection.types(), &reference)?, t)
}

/// `C(m, t)`, saturating at `u128::MAX`.
pub fn binomial(m: usize, t: usize) -> u128 {
    if t > m {
        return 0;
    }
    let t = t.min(m - t);
    let mut acc: u128 = 1;
    for i in 0..t {
        // acc·(m−i) is divisible by (i+1) at every step
        acc = match acc.checked_mul((m - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic successor of a combination of `{0, …, m−1}`; false at the end.
pub(crate) fn next_combination(comb: &mut [usize], m: usize) -> bool {
    let t = comb.len();
    let Some(i) = (0..t).rev().find(|&i| comb[i] < m - t + i) else {
        return false;
    };
    comb[i] += 1;
    for j in i + 1..t {
        comb[j] = comb[j - 1] + 1;
    }
    true
}

fn neg_entropy_bits(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum()
}

/// Generalized likelihood ratio test: the size-`t` subset `S` minimizing
/// `Σ_{j∉S} D(P_j ‖ Σ_{k∉S} P_k / (M − t))`.
///
/// Uses `Σ_{j∉S} D(P_j‖ν) = Σ_{j∉S} Σ_y P_j log P_j − (M−t) Σ_y ν log ν`, so each
/// subset costs `O(t·|Y|)` after an `O(M·|Y|)` precomputation. Objectives within
/// [`GLRT_TIE_TOLERANCE`] of the minimum are ties and resolve to the
/// lexicographically smallest subset.
pub fn glrt(batch: &SequenceBatch, t: usize, subset_budget: u64) -> Result<OutlierDecision> {
    let m = batch.m();
    check_t(t, m)?;
    let subsets = binomial(m, t);
    if subsets > subset_budget as u128 {
        return Err(Error::BudgetExceeded {
            m,
            t,
            subsets: if subsets == u128::MAX {
                "more than 2^128".into()
            } else {
                subsets.to_string()
            },
            budget: subset_budget,
        });
    }
    let types = batch.types();
    let k = batch.alphabet_size();
    let n = batch.n() as f64;
    let neg_entropy: Vec<f64> = types.iter().map(|ty| neg_entropy_bits(ty.counts(), n)).collect();
    let mut totals = vec![0u64; k];
    for ty in &types {
        for (s, c) in totals.iter_mut().zip(ty.counts()) {
            *s += c;
        }
    }
    let neg_entropy_total: f64 = neg_entropy.iter().sum();
    let keep = (m - t) as f64;

    let mut out_counts = vec![0u64; k];
    let mut inside = vec![0.0; t];
    let mut objective = |comb: &[usize]| -> f64 {
        out_counts.copy_from_slice(&totals);
        for (slot, &i) in inside.iter_mut().zip(comb) {
            for (o, c) in out_counts.iter_mut().zip(types[i].counts()) {
                *o -= c;
            }
            *slot = neg_entropy[i];
        }
        // Summing the in-subset terms in sorted order makes the objective a
        // function of the multiset of removed types.
        inside.sort_unstable_by(f64::total_cmp);
        let removed: f64 = inside.iter().sum();
        let denom = n * keep;
        let mixture_neg_entropy: f64 = out_counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / denom;
                p * p.log2()
            })
            .sum();
        ((neg_entropy_total - removed) - keep * mixture_neg_entropy).max(0.0)
    };

    let mut comb: Vec<usize> = (0..t).collect();
    let mut best = f64::INFINITY;
    loop {
        best = best.min(objective(&comb));
        if !next_combination(&mut comb, m) {
            break;
        }
    }
    let threshold = best + GLRT_TIE_TOLERANCE;
    let mut comb: Vec<usize> = (0..t).collect();
    loop {
        if objective(&comb) <= threshold {
            return Ok(OutlierDecision::from_unsorted(comb));
        }
        if !next_combination(&mut comb, m) {
            unreachable!("the minimizing subset is revisited on the second pass");
        }
    }
}

/// Known-distribution baseline: ranks rows by `Σ_k log₂(μ(y_k)/π(y_k))`.
///
/// A symbol impossible under π but possible under μ contributes +∞, and the
/// reverse −∞. A row containing both (or a symbol impossible under both laws)
/// is rejected.
pub fn ml_test_known(
    batch: &SequenceBatch,
    t: usize,
    pi: &Distribution,
    mu: &Distribution,
) -> Result<OutlierDecision> {
    same_alphabet(pi.alphabet_size(), mu.alphabet_size())?;
    same_alphabet(batch.alphabet_size(), pi.alphabet_size())?;
    check_t(t, batch.m())?;
    let llr: Vec<f64> = pi
        .probs()
        .iter()
        .zip(mu.probs())
        .map(|(&p, &q)| match (p > 0.0, q > 0.0) {
            (true, true) => (q / p).log2(),
            (false, true) => f64::INFINITY,
            (true, false) => f64::NEG_INFINITY,
            (false, false) => f64::NAN,
        })
        .collect();
    let mut scores = Vec::with_capacity(batch.m());
    for (i, ty) in batch.types().iter().enumerate() {
        let mut score = 0.0;
        for (&c, &l) in ty.counts().iter().zip(&llr) {
            if c > 0 {
                score += c as f64 * l;
            }
        }
        if score.is_nan() {
            return Err(invalid(format!(
                "row {i} has zero likelihood under both distributions"
            )));
        }
        scores.push(score);
    }
    top_t_raw(&scores, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(counts: &[u64]) -> TypeVector {
        TypeVector::from_counts(counts.to_vec()).unwrap()
    }

    fn sv(scores: &[f64]) -> ScoreVector {
        ScoreVector {
            scores: scores.to_vec(),
            reference: Distribution::uniform(2).unwrap(),
        }
    }

    fn batch(rows: &[&[u32]], k: usize) -> SequenceBatch {
        SequenceBatch::new(rows.iter().map(|r| r.to_vec()).collect(), vec![], k).unwrap()
    }

    #[test]
    fn score_examples() {
        let r = Distribution::new(vec![0.25, 0.75]).unwrap();
        let s = score_sequences(&[ty(&[1, 3])], &r).unwrap();
        assert_eq!(s.scores(), &[0.0]);
        let s = score_sequences(&[ty(&[2, 2]), ty(&[1, 3])], &r).unwrap();
        assert!((s.scores()[0] - 0.207_518_749_639_421_9).abs() < 1e-12);
        assert_eq!(s.scores()[1], 0.0);
        let r = Distribution::new(vec![1.0, 0.0]).unwrap();
        let s = score_sequences(&[ty(&[1, 1])], &r).unwrap();
        assert_eq!(s.scores(), &[f64::INFINITY]);
        assert!(score_sequences(&[ty(&[1, 1, 1])], &r).is_err());
    }

    #[test]
    fn top_t_examples() {
        assert_eq!(top_t(&sv(&[0.1, 0.9, 0.2]), 1).unwrap().indices(), &[1]);
        assert_eq!(top_t(&sv(&[0.1, 0.9, 0.2, 0.3, 0.05]), 2).unwrap().indices(), &[1, 3]);
        assert_eq!(top_t(&sv(&[0.5, 0.5, 0.1]), 1).unwrap().indices(), &[0]);
    }

    #[test]
    fn top_t_infinities_and_range() {
        let inf = f64::INFINITY;
        assert_eq!(top_t(&sv(&[1e300, inf, 0.0, inf, 5.0]), 2).unwrap().indices(), &[1, 3]);
        assert_eq!(top_t(&sv(&[inf, 0.0, inf, 0.0, 0.0]), 1).unwrap().indices(), &[0]);
        assert!(top_t(&sv(&[0.1, 0.2, 0.3]), 0).is_err());
        assert!(top_t(&sv(&[0.1, 0.2, 0.3, 0.4]), 2).is_err());
    }

    #[test]
    fn mean_test_hand_example() {
        let b = batch(&[&[1, 1, 1, 1], &[0, 0, 0, 1], &[0, 0, 1, 0]], 2);
        assert_eq!(mean_test(&b, 1).unwrap().indices(), &[0]);
    }

    #[test]
    fn identical_rows_fall_back_to_index_order() {
        let b = batch(&[&[0, 1, 1], &[0, 1, 1], &[0, 1, 1], &[0, 1, 1], &[0, 1, 1]], 2);
        assert_eq!(mean_test(&b, 2).unwrap().indices(), &[0, 1]);
        assert_eq!(median_test_single_step(&b, 2).unwrap().indices(), &[0, 1]);
        assert_eq!(median_test_two_step(&b, 2, 0.5).unwrap().indices(), &[0, 1]);
        assert_eq!(glrt(&b, 2, 100).unwrap().indices(), &[0, 1]);
        let pi = Distribution::new(vec![0.4, 0.6]).unwrap();
        assert_eq!(ml_test_known(&b, 2, &pi, &pi).unwrap().indices(), &[0, 1]);
    }

    #[test]
    fn median_single_step_hand_example() {
        // types (0.2,0.8), (0.5,0.5), (0.9,0.1): reference (0.5,0.5)
        let rows: [&[u32]; 3] = [
            &[0, 0, 1, 1, 1, 1, 1, 1, 1, 1],
            &[0, 0, 0, 0, 0, 1, 1, 1, 1, 1],
            &[0, 0, 0, 0, 0, 0, 0, 0, 0, 1],
        ];
        assert_eq!(median_test_single_step(&batch(&rows, 2), 1).unwrap().indices(), &[2]);
    }

    #[test]
    fn two_step_scores_only_the_second_part() {
        // First halves are identical; only the second half of row 3 deviates.
        let rows: [&[u32]; 5] = [
            &[0, 1, 0, 1, 0, 1],
            &[0, 1, 0, 0, 1, 1],
            &[0, 1, 0, 1, 1, 0],
            &[0, 1, 0, 1, 1, 1],
            &[0, 1, 0, 0, 1, 1],
        ];
        let b = batch(&rows, 2);
        assert_eq!(median_test_two_step(&b, 1, 0.5).unwrap().indices(), &[3]);
        assert!(median_test_two_step(&b, 1, 0.99).is_err());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(50, 5), 2_118_760);
        assert_eq!(binomial(500, 10), 245_810_588_801_891_098_700);
        assert_eq!(binomial(500, 25), u128::MAX);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(100_000, 50_000), u128::MAX);
    }

    #[test]
    fn combinations_in_lexicographic_order() {
        let mut c = vec![0, 1];
        let mut all = vec![c.clone()];
        while next_combination(&mut c, 4) {
            all.push(c.clone());
        }
        assert_eq!(
            all,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
    }

    #[test]
    fn glrt_budget_refusal_names_the_count() {
        let rows: Vec<Vec<u32>> = (0..20).map(|i| vec![i % 2, 1]).collect();
        let b = SequenceBatch::new(rows, vec![], 2).unwrap();
        let err = glrt(&b, 5, 1000).unwrap_err();
        assert!(err.to_string().contains("C(20, 5) = 15504"), "{err}");
    }

    #[test]
    fn glrt_finds_the_odd_row() {
        let b = batch(&[&[0, 0, 0, 1], &[0, 0, 1, 0], &[1, 1, 1, 1], &[0, 1, 0, 0]], 2);
        assert_eq!(glrt(&b, 1, 10).unwrap().indices(), &[2]);
    }

    #[test]
    fn ml_known_picks_symbol_one_row() {
        let pi = Distribution::new(vec![0.9, 0.1]).unwrap();
        let mu = Distribution::new(vec![0.1, 0.9]).unwrap();
        let b = batch(&[&[0, 0, 0], &[0, 0, 0], &[1, 1, 1], &[0, 0, 0]], 2);
        assert_eq!(ml_test_known(&b, 1, &pi, &mu).unwrap().indices(), &[2]);
    }

    #[test]
    fn ml_known_infinite_scores() {
        let pi = Distribution::new(vec![1.0, 0.0]).unwrap();
        let mu = Distribution::new(vec![0.5, 0.5]).unwrap();
        let b = batch(&[&[0, 0], &[0, 1], &[0, 0]], 2);
        assert_eq!(ml_test_known(&b, 1, &pi, &mu).unwrap().indices(), &[1]);
        let mu = Distribution::new(vec![0.0, 1.0]).unwrap();
        let pi = Distribution::new(vec![0.5, 0.5]).unwrap();
        // rows 0 and 2 contain symbol 0, impossible under μ (−∞); row 1 scores 2
        let b = batch(&[&[0, 0], &[1, 1], &[0, 1]], 2);
        assert_eq!(ml_test_known(&b, 1, &pi, &mu).unwrap().indices(), &[1]);
    }

    #[test]
    fn ml_known_rejects_doubly_impossible_rows() {
        let pi = Distribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        let mu = Distribution::new(vec![0.0, 1.0, 0.0]).unwrap();
        let b = batch(&[&[0, 0], &[1, 1], &[2, 0]], 3);
        assert!(ml_test_known(&b, 1, &pi, &mu).is_err());
    }

    #[test]
    fn detector_names_round_trip() {
        for k in DetectorKind::ALL {
            assert_eq!(DetectorKind::from_name(k.name()), Some(k));
        }
        assert_eq!(DetectorKind::from_name("median"), None);
    }
}
