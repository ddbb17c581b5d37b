// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! CSV import/export for distributions and counts.
//!
//! Outcomes are bitstrings with the highest qubit first. Distributions use columns
//! `outcome,probability`; counts use `outcome,count`. Only listed outcomes are non-zero.

use std::path::Path;

use crate::error::{Error, Result};
use crate::statevec::{format_outcome, parse_outcome, Counts, ProbDist};

fn read_pairs<T: std::str::FromStr>(text: &str, value_col: &str) -> Result<(usize, Vec<(usize, T)>)>
where
    T::Err: std::fmt::Display,
{
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "outcome" || &headers[1] != value_col {
        return Err(Error::Parse(format!(
            "expected header 'outcome,{value_col}', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut n_qubits = None;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let (idx, n) = parse_outcome(rec[0].trim()).map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        match n_qubits {
            None => n_qubits = Some(n),
            Some(m) if m != n => {
                return Err(Error::Parse(format!("line {line}: bitstring length {n}, earlier rows have {m}")))
            }
            _ => {}
        }
        let v = rec[1]
            .trim()
            .parse::<T>()
            .map_err(|e| Error::Parse(format!("line {line}: bad {value_col} '{}': {e}", &rec[1])))?;
        rows.push((idx, v));
    }
    let n = n_qubits.ok_or_else(|| Error::Parse("no data rows".into()))?;
    Ok((n, rows))
}

/// Parses a distribution. Entries may be negative (mitigated quasi-probabilities);
/// the total must be 1 within 1e-9.
pub fn dist_from_csv(text: &str) -> Result<ProbDist> {
    let (n, rows) = read_pairs::<f64>(text, "probability")?;
    let mut p = vec![0.0; 1 << n];
    for (idx, v) in rows {
        if !v.is_finite() {
            return Err(Error::Parse(format!("non-finite probability for outcome {}", format_outcome(idx, n))));
        }
        p[idx] += v;
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Normalization(format!("probabilities sum to {total}")));
    }
    Ok(ProbDist::from_raw(n, p))
}

/// Writes every outcome, including zeros, with round-trip precision.
pub fn dist_to_csv(dist: &ProbDist) -> String {
    let n = dist.n_qubits();
    let mut s = String::with_capacity(dist.as_slice().len() * (n + 26));
    s.push_str("outcome,probability\n");
    for (i, p) in dist.as_slice().iter().enumerate() {
        s.push_str(&format_outcome(i, n));
        s.push(',');
        s.push_str(&format!("{p:e}"));
        s.push('\n');
    }
    s
}

pub fn counts_from_csv(text: &str) -> Result<Counts> {
    let (n, rows) = read_pairs::<u64>(text, "count")?;
    let mut c = vec![0u64; 1 << n];
    for (idx, v) in rows {
        c[idx] += v;
    }
    Counts::new(n, c)
}

/// Writes non-zero outcomes in index order.
pub fn counts_to_csv(counts: &Counts) -> String {
    let n = counts.n_qubits();
    let mut s = String::from("outcome,count\n");
    for (i, k) in counts.iter_nonzero() {
        s.push_str(&format_outcome(i, n));
        s.push(',');
        s.push_str(&k.to_string());
        s.push('\n');
    }
    s
}

pub fn read_dist(path: &Path) -> Result<ProbDist> {
    dist_from_csv(&read(path)?)
}

pub fn read_counts(path: &Path) -> Result<Counts> {
    counts_from_csv(&read(path)?)
}

pub fn write_dist(path: &Path, dist: &ProbDist) -> Result<()> {
    std::fs::write(path, dist_to_csv(dist))?;
    Ok(())
}

pub fn write_counts(path: &Path, counts: &Counts) -> Result<()> {
    std::fs::write(path, counts_to_csv(counts))?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}
