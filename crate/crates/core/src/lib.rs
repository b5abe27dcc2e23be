//! Universal outlier hypothesis testing on finite alphabets.
//!
//! A batch holds `M` sequences of length `n`. Most are drawn i.i.d. from an
//! unknown typical law `π`, and a known number `T < M/2` from an unknown
//! outlier law `μ ≠ π`. The detectors here return the `T` sequences they
//! believe are outliers without knowing either law.
//!
//! ```
//! use outlier_core::detectors::median_test_single_step;
//! use outlier_core::probability::SequenceBatch;
//!
//! let rows = vec![
//!     vec![0, 0, 0, 1],
//!     vec![0, 0, 1, 0],
//!     vec![1, 1, 1, 1],
//!     vec![0, 1, 0, 0],
//!     vec![0, 0, 0, 0],
//! ];
//! let batch = SequenceBatch::new(rows, vec![2], 2)?;
//! assert_eq!(median_test_single_step(&batch, 1)?.indices(), &[2]);
//! # Ok::<(), outlier_core::Error>(())
//! ```

pub mod batch_file;
pub mod detectors;
mod error;
pub mod estimators;
pub mod exponents;
pub mod harness;
pub mod probability;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/distributions.md")]
    struct Distributions;
    #[doc = include_str!("../../../book/src/estimators.md")]
    struct Estimators;
    #[doc = include_str!("../../../book/src/detectors.md")]
    struct Detectors;
    #[doc = include_str!("../../../book/src/exponents.md")]
    struct Exponents;
    #[doc = include_str!("../../../book/src/experiments.md")]
    struct Experiments;
}
