// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Simulation and analysis toolkit for linear-cluster-state entanglement experiments.
//!
//! The crate is organised bottom-up:
//!
//! - [`statevec`]: dense statevector engine with bit-masked gate kernels and shot sampling.
//! - [`cluster`]: stabilizers, LC circuits (CZ and CX gate sets), witness coefficients.
//! - [`readout`]: per-qubit confusion matrices, forward noise, streaming mitigation,
//!   device parameter files.
//! - [`witness`]: fidelity lower bound, GME certification and its error bars.
//! - [`densmat`]: exact density-matrix oracles for small registers.
//! - [`noise`]: trajectory simulation of decoherence, coherent CZ errors and ZZ idling.
//! - [`pulse`]: two-transmon three-level CZ simulation, Nelder-Mead waveform optimization
//!   and two-qubit process tomography.
//! - [`experiment`]: config-driven batch runs used by the `lcsim` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod densmat;
pub mod error;
pub mod experiment;
pub mod io;
pub mod noise;
pub mod numeric;
pub mod pulse;
pub mod readout;
pub mod statevec;
pub mod witness;

pub use error::{Error, Result};
