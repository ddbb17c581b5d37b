// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Pulse-level CZ gate between two transmons.
//!
//! [`hamiltonian`] holds the three-level model and the exact piecewise-constant
//! propagator, [`waveform`] the eight-coefficient fast-adiabatic trajectory,
//! [`metrics`] the gate figures of merit, [`optimize`] Nelder-Mead and [`qpt`]
//! process tomography.

pub mod hamiltonian;
pub mod metrics;
pub mod optimize;
pub mod qpt;
pub mod waveform;

use serde::{Deserialize, Serialize};

pub use hamiltonian::{evolve, FrequencyTrajectory, Propagator, StaticPoint, TransmonPair, DEFAULT_DT_NS};
pub use metrics::{gate_metrics, objective, objective_of, GateMetrics};
pub use optimize::{nelder_mead, optimize, NelderMeadOptions, NelderMeadResult};
pub use qpt::{qpt_two_qubit, ProcessMatrix, QptMode, QptReport};
pub use waveform::Waveform;

use crate::error::{Error, Result};

/// `[pulse]` config section. Defaults describe the Q11-Q12 pair; `g_mhz` is not a
/// measured value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    pub f1_idle_ghz: f64,
    pub f1_op_ghz: f64,
    pub f2_idle_ghz: f64,
    pub f2_hold_ghz: f64,
    pub eta1_mhz: f64,
    pub eta2_mhz: f64,
    pub g_mhz: f64,
    pub edge_ns: f64,
    pub window_ns: f64,
    pub dt_ns: f64,
    /// Starting coefficients; the flat-top fit is used when absent.
    pub lambdas: Option<Vec<f64>>,
    pub optimizer: NelderMeadOptions,
    /// Shots per Pauli expectation for tomography; exact expectations when absent.
    pub qpt_shots: Option<u64>,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            f1_idle_ghz: 4.996,
            f1_op_ghz: 4.599,
            f2_idle_ghz: 4.258,
            f2_hold_ghz: 4.343,
            eta1_mhz: -246.0,
            eta2_mhz: -201.0,
            g_mhz: 12.0,
            edge_ns: 5.0,
            window_ns: 54.0,
            dt_ns: DEFAULT_DT_NS,
            lambdas: None,
            optimizer: NelderMeadOptions::default(),
            qpt_shots: None,
        }
    }
}

impl PulseConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            pulse: Option<toml::Value>,
        }
        let doc: Doc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match doc.pulse {
            None => Ok(Self::default()),
            Some(v) => v.try_into().map_err(|e: toml::de::Error| Error::Parse(format!("[pulse]: {e}"))),
        }
    }

    pub fn pair(&self) -> Result<TransmonPair> {
        TransmonPair::new(self.f1_idle_ghz, self.f2_idle_ghz, self.eta1_mhz, self.eta2_mhz, self.g_mhz)
    }

    pub fn initial_waveform(&self) -> Result<Waveform> {
        let pair = self.pair()?;
        match &self.lambdas {
            Some(l) => {
                if l.len() != waveform::N_PARAMS {
                    return Err(Error::Validity(format!(
                        "lambdas needs {} values, got {}",
                        waveform::N_PARAMS,
                        l.len()
                    )));
                }
                let mut arr = [0.0; waveform::N_PARAMS];
                arr.copy_from_slice(l);
                Waveform::new(arr, self.f2_hold_ghz, self.edge_ns, self.window_ns)
            }
            None => Waveform::initial_guess(&pair, self.f1_op_ghz, self.f2_hold_ghz, self.edge_ns, self.window_ns),
        }
    }
}

/// Result of optimizing and characterizing one gate.
#[derive(Clone, Debug, Serialize)]
pub struct PulseReport {
    pub waveform: Waveform,
    pub optimizer: NelderMeadResult,
    pub metrics: GateMetrics,
    pub qpt: QptReport,
}

/// Optimizes the waveform, then characterizes the resulting gate (with single-qubit Z
/// corrections applied) by tomography.
pub fn optimize_and_characterize(cfg: &PulseConfig) -> Result<PulseReport> {
    let pair = cfg.pair()?;
    let initial = cfg.initial_waveform()?;
    let (waveform, optimizer) = optimize(&pair, &initial, cfg.dt_ns, &cfg.optimizer)?;
    let u = evolve(&pair, &waveform, cfg.dt_ns)?;
    let metrics = gate_metrics(&u);
    let a = metrics::virtual_z_corrected(&u);
    let mode = match cfg.qpt_shots {
        Some(shots) => QptMode::Shots { shots, seed: 0 },
        None => QptMode::Exact,
    };
    let qpt = qpt_two_qubit(qpt::kraus_executor(a), &qpt::cz_matrix(), mode)?;
    Ok(PulseReport { waveform, optimizer, metrics, qpt })
}
