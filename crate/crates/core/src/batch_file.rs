//! Plain-text batch files.
//!
//! ```text
//! M n |Y|
//! <M lines of n whitespace-separated symbols>
//! outliers: i j k        (optional)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::probability::{SequenceBatch, Symbol};

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn numbers<T: std::str::FromStr>(text: &str, line: usize, what: &str) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse()
                .map_err(|_| parse_error(line, format!("expected {what}, found {tok:?}")))
        })
        .collect()
}

/// Parses a batch; every error carries its 1-based line number.
pub fn parse(text: &str) -> Result<SequenceBatch> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or_else(|| parse_error(1, "empty batch file"))?;
    let dims: Vec<usize> = numbers(header, header_line, "a non-negative integer")?;
    let [m, n, k] = dims[..] else {
        return Err(parse_error(header_line, "header must be `M n |Y|`"));
    };
    if m == 0 || n == 0 || k < 2 {
        return Err(parse_error(header_line, "need M ≥ 1, n ≥ 1 and |Y| ≥ 2"));
    }

    let mut data: Vec<Symbol> = Vec::with_capacity(m * n);
    let mut last_line = header_line;
    for row in 0..m {
        let (line, text) = lines
            .next()
            .ok_or_else(|| parse_error(last_line + 1, format!("expected {m} sequences, found {row}")))?;
        last_line = line;
        if text.starts_with("outliers:") {
            return Err(parse_error(line, format!("expected {m} sequences, found {row}")));
        }
        let symbols: Vec<Symbol> = numbers(text, line, "a symbol")?;
        if symbols.len() != n {
            return Err(parse_error(line, format!("expected {n} symbols, found {}", symbols.len())));
        }
        if let Some(s) = symbols.iter().find(|&&s| s as usize >= k) {
            return Err(parse_error(line, format!("symbol {s} outside alphabet of size {k}")));
        }
        data.extend(symbols);
    }

    let mut outliers = Vec::new();
    if let Some((line, text)) = lines.next() {
        let rest = text
            .strip_prefix("outliers:")
            .ok_or_else(|| parse_error(line, "expected `outliers:` or end of file"))?;
        outliers = numbers(rest, line, "a row index")?;
        if let Some(&i) = outliers.iter().find(|&&i| i >= m) {
            return Err(parse_error(line, format!("outlier index {i} out of range for M = {m}")));
        }
        if let Some((line, _)) = lines.next() {
            return Err(parse_error(line, "unexpected content after the outlier line"));
        }
        return SequenceBatch::from_flat(m, n, data, outliers, k).map_err(|e| parse_error(line, e.to_string()));
    }
    SequenceBatch::from_flat(m, n, data, outliers, k).map_err(|e| parse_error(header_line, e.to_string()))
}

pub fn read(path: &Path) -> Result<SequenceBatch> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text)
}

/// Inverse of [`parse`]; the outlier line is written only when there are outliers.
pub fn to_string(batch: &SequenceBatch) -> String {
    let mut out = format!("{} {} {}\n", batch.m(), batch.n(), batch.alphabet_size());
    for row in batch.rows() {
        let mut first = true;
        for s in row {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{s}");
        }
        out.push('\n');
    }
    if !batch.outliers().is_empty() {
        out.push_str("outliers:");
        for i in batch.outliers() {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    out
}

pub fn write(batch: &SequenceBatch, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(batch)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
