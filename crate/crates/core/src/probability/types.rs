use std::ops::Range;

use crate::error::{invalid, Result};

use super::Distribution;

/// An alphabet symbol, `0 ≤ s < |Y|`.
pub type Symbol = u32;

/// Empirical distribution (type) of one sequence, stored as symbol counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeVector {
    counts: Vec<u64>,
    n: u64,
}

impl TypeVector {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(invalid("a type needs an alphabet of at least 2 symbols"));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(invalid("a type needs at least one observation"));
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Sequence length `n`.
    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn prob(&self, y: usize) -> f64 {
        self.counts[y] as f64 / self.n as f64
    }

    pub fn probs(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn to_distribution(&self) -> Distribution {
        // counts sum to n, so the quotient vector is on the simplex up to rounding
        Distribution::new(self.probs()).expect("type vectors are valid distributions")
    }
}

/// Counts symbol occurrences in `sequence`.
pub fn empirical_type(sequence: &[Symbol], alphabet_size: usize) -> Result<TypeVector> {
    if sequence.is_empty() {
        return Err(invalid("cannot take the type of an empty sequence"));
    }
    if alphabet_size < 2 {
        return Err(invalid("alphabet size must be at least 2"));
    }
    let mut counts = vec![0u64; alphabet_size];
    for &s in sequence {
        let slot = counts.get_mut(s as usize).ok_or_else(|| {
            invalid(format!(
                "symbol {s} out of range for alphabet size {alphabet_size}"
            ))
        })?;
        *slot += 1;
    }
    Ok(TypeVector {
        counts,
        n: sequence.len() as u64,
    })
}

/// `M` sequences of equal length `n` plus the ground-truth outlier rows.
///
/// Rows are stored contiguously; the outlier set is kept sorted and must
/// satisfy `2·T < M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceBatch {
    data: Vec<Symbol>,
    m: usize,
    n: usize,
    alphabet_size: usize,
    outliers: Vec<usize>,
}

impl SequenceBatch {
    pub fn new(rows: Vec<Vec<Symbol>>, outliers: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return Err(invalid(format!(
                "row {i} has length {}, expected {n}",
                rows[i].len()
            )));
        }
        Self::from_flat(m, n, rows.concat(), outliers, alphabet_size)
    }

    pub fn from_flat(
        m: usize,
        n: usize,
        data: Vec<Symbol>,
        mut outliers: Vec<usize>,
        alphabet_size: usize,
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(invalid("a batch needs at least one row and one column"));
        }
        if alphabet_size < 2 {
            return Err(invalid("alphabet size must be at least 2"));
        }
        if data.len() != m * n {
            return Err(invalid(format!(
                "expected {} symbols for a {m}×{n} batch, got {}",
                m * n,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|&s| s as usize >= alphabet_size) {
            return Err(invalid(format!(
                "symbol {} at row {}, column {} is out of range for alphabet size {alphabet_size}",
                data[pos],
                pos / n,
                pos % n
            )));
        }
        outliers.sort_unstable();
        let before = outliers.len();
        outliers.dedup();
        if outliers.len() != before {
            return Err(invalid("duplicate outlier index"));
        }
        if let Some(&i) = outliers.iter().find(|&&i| i >= m) {
            return Err(invalid(format!("outlier index {i} out of range for M = {m}")));
        }
        if 2 * outliers.len() >= m {
            return Err(invalid(format!(
                "T = {} outliers violates T < M/2 with M = {m}",
                outliers.len()
            )));
        }
        Ok(Self {
            data,
            m,
            n,
            alphabet_size,
            outliers,
        })
    }

    /// Number of sequences `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Sequence length `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Sorted ground-truth outlier rows.
    pub fn outliers(&self) -> &[usize] {
        &self.outliers
    }

    pub fn row(&self, i: usize) -> &[Symbol] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[Symbol]> {
        self.data.chunks_exact(self.n)
    }

    /// The type of every row, in row order.
    pub fn types(&self) -> Vec<TypeVector> {
        self.rows()
            .map(|row| {
                let mut counts = vec![0u64; self.alphabet_size];
                for &s in row {
                    counts[s as usize] += 1;
                }
                TypeVector {
                    counts,
                    n: self.n as u64,
                }
            })
            .collect()
    }

    /// Restriction to a contiguous column range; ground truth is carried over.
    pub fn columns(&self, range: Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.n {
            return Err(invalid(format!(
                "column range {range:?} is empty or exceeds n = {}",
                self.n
            )));
        }
        let width = range.end - range.start;
        let mut data = Vec::with_capacity(self.m * width);
        for row in self.rows() {
            data.extend_from_slice(&row[range.clone()]);
        }
        Ok(Self {
            data,
            m: self.m,
            n: width,
            alphabet_size: self.alphabet_size,
            outliers: self.outliers.clone(),
        })
    }

    /// Row `i` of the result is row `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.m];
        if perm.len() != self.m
            || perm
                .iter()
                .any(|&p| p >= self.m || std::mem::replace(&mut seen[p], true))
        {
            return Err(invalid("not a permutation of the batch rows"));
        }
        let mut inverse = vec![0; self.m];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let data = perm.iter().flat_map(|&p| self.row(p).iter().copied()).collect();
        let outliers = self.outliers.iter().map(|&o| inverse[o]).collect();
        Self::from_flat(self.m, self.n, data, outliers, self.alphabet_size)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_type_examples() {
        assert_eq!(empirical_type(&[0, 0, 1, 1], 2).unwrap().probs(), vec![0.5, 0.5]);
        assert_eq!(empirical_type(&[2, 2, 2], 3).unwrap().probs(), vec![0.0, 0.0, 1.0]);
        assert_eq!(
            empirical_type(&[0, 1, 1, 2], 3).unwrap().probs(),
            vec![0.25, 0.5, 0.25]
        );
    }

    #[test]
    fn empirical_type_errors() {
        assert!(empirical_type(&[], 2).is_err());
        assert!(empirical_type(&[0, 3], 3).is_err());
    }

    #[test]
    fn batch_validation() {
        let rows = vec![vec![0, 1], vec![1, 1], vec![0, 0]];
        assert!(SequenceBatch::new(rows.clone(), vec![1], 2).is_ok());
        // T = 2 is not < M/2 = 1.5
        assert!(SequenceBatch::new(rows.clone(), vec![0, 1], 2).is_err());
        assert!(SequenceBatch::new(rows.clone(), vec![3], 2).is_err());
        assert!(SequenceBatch::new(rows.clone(), vec![], 1).is_err());
        assert!(SequenceBatch::new(vec![vec![0, 2]], vec![], 2).is_err());
        assert!(SequenceBatch::new(vec![vec![0, 1], vec![0]], vec![], 2).is_err());
    }

    #[test]
    fn permuted_tracks_ground_truth() {
        let rows = vec![vec![0, 0], vec![1, 1], vec![0, 1]];
        let b = SequenceBatch::new(rows, vec![1], 2).unwrap();
        let p = b.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.row(2), &[1, 1]);
        assert_eq!(p.outliers(), &[2]);
        assert!(b.permuted(&[0, 0, 1]).is_err());
    }

    #[test]
    fn columns_slice_every_row() {
        let rows = vec![vec![0, 1, 2], vec![2, 1, 0], vec![1, 1, 1]];
        let b = SequenceBatch::new(rows, vec![0], 3).unwrap();
        let c = b.columns(1..3).unwrap();
        assert_eq!(c.n(), 2);
        assert_eq!(c.row(1), &[1, 0]);
        assert_eq!(c.outliers(), &[0]);
        assert!(b.columns(2..2).is_err());
        assert!(b.columns(1..4).is_err());
    }
}
