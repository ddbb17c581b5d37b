// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Readout confusion model and its inversion.
//!
//! Each qubit has an independent column-stochastic matrix
//!
//! ```text
//! T = | f00      1 - f11 |
//!     | 1 - f00  f11     |
//! ```
//!
//! and the joint map is the Kronecker product over qubits. Every operation here sweeps
//! one qubit at a time in O(n 2^n); the 2^n x 2^n matrix is never formed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::ProbDist;

const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub f00: f64,
    pub f11: f64,
}

impl TransitionMatrix {
    pub fn new(f00: f64, f11: f64) -> Result<Self> {
        for (name, v) in [("f00", f00), ("f11", f11)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Domain(format!("{name} = {v} outside (0, 1]")));
            }
        }
        Ok(Self { f00, f11 })
    }

    pub fn perfect() -> Self {
        Self { f00: 1.0, f11: 1.0 }
    }

    /// `f00 + f11 - 1`.
    pub fn determinant(&self) -> f64 {
        self.f00 + self.f11 - 1.0
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.f00, 1.0 - self.f11], [1.0 - self.f00, self.f11]]
    }

    pub fn inverse(&self) -> Result<[[f64; 2]; 2]> {
        let det = self.determinant();
        if det <= SINGULAR_TOL {
            return Err(Error::Conditioning(format!(
                "confusion matrix with f00 = {}, f11 = {} is singular (f00 + f11 - 1 = {det:.3e})",
                self.f00, self.f11
            )));
        }
        Ok([[self.f11 / det, -(1.0 - self.f11) / det], [-(1.0 - self.f00) / det, self.f00 / det]])
    }

    /// Reported bit for a true bit, drawn with this qubit's error rates.
    pub(crate) fn flip<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> bool {
        let u: f64 = rng.random();
        if bit {
            u < self.f11
        } else {
            u >= self.f00
        }
    }
}

/// Applies `m_q` to qubit `q` of a real vector, for every qubit.
pub(crate) fn apply_per_qubit(v: &mut [f64], mats: &[[[f64; 2]; 2]]) {
    for (q, m) in mats.iter().enumerate() {
        let half = 1usize << q;
        for chunk in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = m[0][0] * x + m[0][1] * y;
                *b = m[1][0] * x + m[1][1] * y;
            }
        }
    }
}

fn check_len(n: usize, t: &[TransitionMatrix]) -> Result<()> {
    if t.len() != n {
        return Err(Error::Shape(format!("{} transition matrices for {n} qubits", t.len())));
    }
    Ok(())
}

/// `(T_1 (x) ... (x) T_n) dist`.
pub fn apply_readout_noise(dist: &ProbDist, t: &[TransitionMatrix]) -> Result<ProbDist> {
    check_len(dist.n_qubits(), t)?;
    let mats: Vec<_> = t.iter().map(TransitionMatrix::matrix).collect();
    let mut v = dist.as_slice().to_vec();
    apply_per_qubit(&mut v, &mats);
    Ok(ProbDist::from_raw(dist.n_qubits(), v))
}

/// `(T_1 (x) ... (x) T_n)^-1 measured`. Negative entries are kept.
pub fn mitigate(measured: &ProbDist, t: &[TransitionMatrix]) -> Result<ProbDist> {
    check_len(measured.n_qubits(), t)?;
    let mats = t.iter().map(TransitionMatrix::inverse).collect::<Result<Vec<_>>>()?;
    let mut v = measured.as_slice().to_vec();
    apply_per_qubit(&mut v, &mats);
    Ok(ProbDist::from_raw(measured.n_qubits(), v))
}

/// Row-vector transform `alpha^T T^-1`, so that `alpha . (T^-1 p) == w . p`.
pub fn mitigated_weights(alpha: &[f64], t: &[TransitionMatrix]) -> Result<Vec<f64>> {
    let n = t.len();
    if alpha.len() != 1 << n {
        return Err(Error::Shape(format!("coefficient vector of length {} for {n} qubits", alpha.len())));
    }
    let mats = t
        .iter()
        .map(|tm| tm.inverse().map(|m| [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]))
        .collect::<Result<Vec<_>>>()?;
    let mut w = alpha.to_vec();
    apply_per_qubit(&mut w, &mats);
    Ok(w)
}

/// Worst-case amplification of statistical noise by mitigation,
/// `prod_q 1 / (f00_q + f11_q - 1)`.
pub fn amplification_bound(t: &[TransitionMatrix]) -> Result<f64> {
    t.iter().try_fold(1.0, |acc, tm| {
        let det = tm.determinant();
        if det <= SINGULAR_TOL {
            Err(Error::Conditioning(format!("f00 + f11 - 1 = {det:.3e}")))
        } else {
            Ok(acc / det)
        }
    })
}

/// Per-qubit calibration record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub name: String,
    pub freq_idle_ghz: Option<f64>,
    pub freq_opt_ghz: Option<f64>,
    pub anharmonicity_mhz: Option<f64>,
    pub t1_us: f64,
    pub t2star_us: f64,
    pub f00: f64,
    pub f11: f64,
    pub y2_fidelity: Option<f64>,
}

/// Device calibration table. `cz_fidelity[i]` belongs to the pair (qubit i, qubit i+1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub qubits: Vec<QubitParams>,
    pub cz_fidelity: Vec<Option<f64>>,
}

#[derive(Deserialize)]
struct RawDoc {
    #[serde(default)]
    qubit: Vec<toml::Table>,
    #[serde(default)]
    pair: Vec<toml::Table>,
}

fn get_f64(rec: &toml::Table, key: &str, who: &str, required: bool) -> Result<Option<f64>> {
    match rec.get(key) {
        None if required => Err(Error::Parse(format!("{who}: missing required field '{key}'"))),
        None => Ok(None),
        Some(toml::Value::Float(v)) => Ok(Some(*v)),
        Some(toml::Value::Integer(v)) => Ok(Some(*v as f64)),
        Some(other) => Err(Error::Parse(format!("{who}: field '{key}' must be a number, found {}", other.type_str()))),
    }
}

const QUBIT_KEYS: [&str; 9] =
    ["name", "freq_idle_ghz", "freq_opt_ghz", "anharmonicity_mhz", "t1_us", "t2star_us", "f00", "f11", "y2_fidelity"];

impl DeviceParams {
    /// Parses `[[qubit]]` and `[[pair]]` records from a TOML document; other sections
    /// are ignored so the same file can carry noise and experiment settings.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: RawDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.qubit.is_empty() {
            return Err(Error::Parse("no [[qubit]] records".into()));
        }
        let mut qubits = Vec::with_capacity(doc.qubit.len());
        for (i, rec) in doc.qubit.iter().enumerate() {
            let name = match rec.get("name") {
                Some(toml::Value::String(s)) => s.clone(),
                Some(_) => return Err(Error::Parse(format!("qubit record {}: 'name' must be a string", i + 1))),
                None => format!("Q{}", i + 1),
            };
            let who = format!("qubit {name} (record {})", i + 1);
            if let Some(k) = rec.keys().find(|k| !QUBIT_KEYS.contains(&k.as_str())) {
                return Err(Error::Parse(format!("{who}: unknown field '{k}'")));
            }
            let q = QubitParams {
                freq_idle_ghz: get_f64(rec, "freq_idle_ghz", &who, false)?,
                freq_opt_ghz: get_f64(rec, "freq_opt_ghz", &who, false)?,
                anharmonicity_mhz: get_f64(rec, "anharmonicity_mhz", &who, false)?,
                t1_us: get_f64(rec, "t1_us", &who, true)?.unwrap_or_default(),
                t2star_us: get_f64(rec, "t2star_us", &who, true)?.unwrap_or_default(),
                f00: get_f64(rec, "f00", &who, true)?.unwrap_or_default(),
                f11: get_f64(rec, "f11", &who, true)?.unwrap_or_default(),
                y2_fidelity: get_f64(rec, "y2_fidelity", &who, false)?,
                name,
            };
            q.validate(&who)?;
            qubits.push(q);
        }
        let mut cz_fidelity = vec![None; qubits.len().saturating_sub(1)];
        for (i, rec) in doc.pair.iter().enumerate() {
            let who = format!("pair record {}", i + 1);
            let names: Vec<String> = match rec.get("qubits") {
                Some(toml::Value::Array(a)) => a
                    .iter()
                    .map(|v| v.as_str().map(str::to_owned))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Parse(format!("{who}: 'qubits' must list names")))?,
                _ => return Err(Error::Parse(format!("{who}: missing required field 'qubits'"))),
            };
            let idx: Vec<usize> = names
                .iter()
                .map(|nm| {
                    qubits
                        .iter()
                        .position(|q| &q.name == nm)
                        .ok_or_else(|| Error::Parse(format!("{who}: unknown qubit '{nm}'")))
                })
                .collect::<Result<_>>()?;
            let lo = match idx.as_slice() {
                [a, b] if a.abs_diff(*b) == 1 => (*a).min(*b),
                _ => return Err(Error::Parse(format!("{who}: qubits must be two chain neighbours"))),
            };
            let f = get_f64(rec, "cz_fidelity", &who, true)?;
            if let Some(v) = f {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::Parse(format!("{who}: cz_fidelity {v} outside (0, 1]")));
                }
            }
            cz_fidelity[lo] = f;
        }
        Ok(Self { qubits, cz_fidelity })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubit(&self, name: &str) -> Option<&QubitParams> {
        self.qubits.iter().find(|q| q.name == name)
    }

    /// Confusion matrices for qubits `[offset, offset + len)`.
    pub fn transition_matrices(&self, offset: usize, len: usize) -> Result<Vec<TransitionMatrix>> {
        if offset + len > self.qubits.len() {
            return Err(Error::Index(format!(
                "qubits [{offset}, {}) requested from a {}-qubit table",
                offset + len,
                self.qubits.len()
            )));
        }
        self.qubits[offset..offset + len].iter().map(|q| TransitionMatrix::new(q.f00, q.f11)).collect()
    }
}

impl QubitParams {
    fn validate(&self, who: &str) -> Result<()> {
        if !(self.t1_us > 0.0) {
            return Err(Error::Parse(format!("{who}: t1_us must be positive")));
        }
        if !(self.t2star_us > 0.0) {
            return Err(Error::Parse(format!("{who}: t2star_us must be positive")));
        }
        for (key, v) in [("f00", Some(self.f00)), ("f11", Some(self.f11)), ("y2_fidelity", self.y2_fidelity)] {
            if let Some(v) = v {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::Parse(format!("{who}: {key} = {v} outside (0, 1]")));
                }
            }
        }
        if self.t2star_us > 2.0 * self.t1_us * 1.05 {
            log::warn!("{who}: t2star_us = {} exceeds 2 * t1_us = {}", self.t2star_us, 2.0 * self.t1_us);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_confusion_is_noop() {
        let d = ProbDist::new(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let t = vec![TransitionMatrix::perfect(); 2];
        assert_eq!(apply_readout_noise(&d, &t).unwrap(), d);
        assert_eq!(mitigate(&d, &t).unwrap(), d);
    }

    #[test]
    fn single_qubit_forward() {
        let d = ProbDist::new(1, vec![1.0, 0.0]).unwrap();
        let t = [TransitionMatrix::new(0.828, 0.800).unwrap()];
        let out = apply_readout_noise(&d, &t).unwrap();
        assert!((out.as_slice()[0] - 0.828).abs() < 1e-15);
        assert!((out.as_slice()[1] - 0.172).abs() < 1e-15);
    }

    #[test]
    fn uniform_stays_uniform_iff_doubly_stochastic() {
        let u = ProbDist::uniform(2).unwrap();
        let sym = [TransitionMatrix::new(0.9, 0.9).unwrap(), TransitionMatrix::new(0.7, 0.7).unwrap()];
        let out = apply_readout_noise(&u, &sym).unwrap();
        assert!(out.as_slice().iter().all(|v| (v - 0.25).abs() < 1e-15));
        let asym = [TransitionMatrix::new(0.9, 0.8).unwrap(), TransitionMatrix::new(0.7, 0.7).unwrap()];
        let out = apply_readout_noise(&u, &asym).unwrap();
        assert!(out.as_slice().iter().any(|v| (v - 0.25).abs() > 1e-3));
    }

    #[test]
    fn singular_matrix_rejected() {
        let d = ProbDist::uniform(1).unwrap();
        let t = [TransitionMatrix::new(0.5, 0.5).unwrap()];
        assert!(matches!(mitigate(&d, &t), Err(Error::Conditioning(_))));
    }

    #[test]
    fn length_mismatch() {
        let d = ProbDist::uniform(2).unwrap();
        let t = [TransitionMatrix::perfect()];
        assert!(matches!(apply_readout_noise(&d, &t), Err(Error::Shape(_))));
    }

    #[test]
    fn weights_reproduce_mitigated_dot_product() {
        let t = [TransitionMatrix::new(0.9, 0.8).unwrap(), TransitionMatrix::new(0.95, 0.85).unwrap()];
        let p = ProbDist::new(2, vec![0.4, 0.1, 0.2, 0.3]).unwrap();
        let alpha = [1.0, 0.0, 0.0, 1.0];
        let w = mitigated_weights(&alpha, &t).unwrap();
        let direct: f64 = mitigate(&p, &t).unwrap().as_slice().iter().zip(alpha).map(|(a, b)| a * b).sum();
        let via_w: f64 = p.as_slice().iter().zip(&w).map(|(a, b)| a * b).sum();
        assert!((direct - via_w).abs() < 1e-14);
    }

    #[test]
    fn missing_t2star_names_qubit() {
        let text = r#"
            [[qubit]]
            name = "Q1"
            t1_us = 40.1
            t2star_us = 7.9
            f00 = 0.828
            f11 = 0.800

            [[qubit]]
            name = "Q2"
            t1_us = 34.7
            f00 = 0.944
            f11 = 0.838
        "#;
        let err = DeviceParams::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("Q2") && err.contains("t2star_us"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = "[[qubit]]\nname = \"Q1\"\nt1_us = 1\nt2star_us = 1\nf00 = 0.9\nf11 = 0.9\nt3_us = 4\n";
        let err = DeviceParams::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("t3_us"), "{err}");
    }
}
