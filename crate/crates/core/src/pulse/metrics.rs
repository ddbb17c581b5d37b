// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Gate metrics and the optimization objective.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

use super::hamiltonian::{evolve, level_index, Propagator, TransmonPair};
use super::waveform::Waveform;
use crate::error::Result;

/// Computational states `|00>, |01>, |10>, |11>` as 9-level indices.
pub const COMPUTATIONAL: [usize; 4] = [level_index(0, 0), level_index(0, 1), level_index(1, 0), level_index(1, 1)];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateMetrics {
    /// In `[0, 2 pi)`.
    pub conditional_phase: f64,
    pub leakage: f64,
    /// Computational block with each column normalized.
    #[serde(skip)]
    pub computational: Matrix4<Complex64>,
    /// Largest population lost from a computational input.
    pub deficit: f64,
    /// `|Tr(CZ^dag A)|^2 / 16` for the block `A` after single-qubit Z correction.
    pub process_fidelity: f64,
    pub state_fidelity_pp: f64,
    pub state_fidelity_11: f64,
}

fn block(u: &Propagator) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| u[(COMPUTATIONAL[i], COMPUTATIONAL[j])])
}

fn cz_diag() -> [f64; 4] {
    [1.0, 1.0, 1.0, -1.0]
}

/// Block multiplied by the local Z rotations that zero the phases of `|00>`, `|01>`, `|10>`.
pub fn virtual_z_corrected(u: &Propagator) -> Matrix4<Complex64> {
    let b = block(u);
    let ph = |k: usize| b[(k, k)].arg();
    let corr = [ph(0), ph(1), ph(2), ph(1) + ph(2) - ph(0)];
    Matrix4::from_fn(|i, j| Complex64::from_polar(1.0, -corr[i]) * b[(i, j)])
}

pub fn gate_metrics(u: &Propagator) -> GateMetrics {
    let b = block(u);
    let ph = |k: usize| b[(k, k)].arg();
    let cond = (ph(3) - ph(1) - ph(2) + ph(0)).rem_euclid(TAU);
    let leakage = (1.0 - (0..4).map(|k| b[(k, 3)].norm_sqr()).sum::<f64>()).max(0.0);
    let mut deficit: f64 = 0.0;
    let mut computational = b;
    for j in 0..4 {
        let norm2: f64 = (0..4).map(|i| b[(i, j)].norm_sqr()).sum();
        deficit = deficit.max(1.0 - norm2);
        if norm2 > 0.0 {
            let s = 1.0 / norm2.sqrt();
            for i in 0..4 {
                computational[(i, j)] *= s;
            }
        }
    }
    let a = virtual_z_corrected(u);
    let cz = cz_diag();
    let tr: Complex64 = (0..4).map(|k| a[(k, k)] * cz[k]).sum();
    let (fpp, f11) = state_fidelities(&a);
    GateMetrics {
        conditional_phase: cond,
        leakage,
        computational,
        deficit,
        process_fidelity: tr.norm_sqr() / 16.0,
        state_fidelity_pp: fpp,
        state_fidelity_11: f11,
    }
}

/// Fidelities of `A|++>` and `A|11>` against the CZ outputs.
fn state_fidelities(a: &Matrix4<Complex64>) -> (f64, f64) {
    let cz = cz_diag();
    let mut amp = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            amp += cz[i] * a[(i, j)] * 0.25;
        }
    }
    (amp.norm_sqr(), a[(3, 3)].norm_sqr())
}

/// `1 - (2 F_++ + F_11) / 3` after single-qubit Z correction.
pub fn objective_of(u: &Propagator) -> f64 {
    let (fpp, f11) = state_fidelities(&virtual_z_corrected(u));
    1.0 - (2.0 * fpp + f11) / 3.0
}

pub fn objective(pair: &TransmonPair, wf: &Waveform, dt_ns: f64) -> Result<f64> {
    Ok(objective_of(&evolve(pair, wf, dt_ns)?))
}

/// Signed distance of a phase from pi, in `(-pi, pi]`.
pub fn phase_error(conditional_phase: f64) -> f64 {
    (conditional_phase - PI + PI).rem_euclid(TAU) - PI
}

/// CZ embedded in the 9-level space (identity outside the computational block).
pub fn embedded_cz() -> Propagator {
    let mut u = Propagator::identity();
    u[(level_index(1, 1), level_index(1, 1))] = Complex64::new(-1.0, 0.0);
    u
}
