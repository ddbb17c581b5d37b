// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Two coupled three-level transmons.
//!
//! Basis index is `3 * n1 + n2` with `n1` the tuned (higher-frequency) transmon.
//! The coupling conserves total excitation, so the 9x9 Hamiltonian splits into blocks of
//! size 1, 2, 3, 2, 1 that are exponentiated exactly at every step.

use nalgebra::{Matrix2, Matrix3, SMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

pub type Propagator = SMatrix<Complex64, 9, 9>;

pub const DEFAULT_DT_NS: f64 = 0.01;
const UNITARITY_LIMIT: f64 = 1e-6;

/// Index of `|n1 n2>`.
pub const fn level_index(n1: usize, n2: usize) -> usize {
    3 * n1 + n2
}

/// Static parameters of the pair. Frequencies are in GHz, `eta` and `g` in MHz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmonPair {
    pub f1_idle_ghz: f64,
    pub f2_idle_ghz: f64,
    pub eta1_mhz: f64,
    pub eta2_mhz: f64,
    pub g_mhz: f64,
}

impl TransmonPair {
    pub fn new(f1_idle_ghz: f64, f2_idle_ghz: f64, eta1_mhz: f64, eta2_mhz: f64, g_mhz: f64) -> Result<Self> {
        let p = Self { f1_idle_ghz, f2_idle_ghz, eta1_mhz, eta2_mhz, g_mhz };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta1_mhz < 0.0 && self.eta2_mhz < 0.0) {
            return Err(Error::Validity("anharmonicities must be negative".into()));
        }
        if !(self.g_mhz >= 0.0) || !self.g_mhz.is_finite() {
            return Err(Error::Validity(format!("coupling {} MHz must be non-negative", self.g_mhz)));
        }
        for f in [self.f1_idle_ghz, self.f2_idle_ghz] {
            check_band(f)?;
        }
        Ok(())
    }

    fn eta1(&self) -> f64 {
        self.eta1_mhz * 1e-3
    }

    fn eta2(&self) -> f64 {
        self.eta2_mhz * 1e-3
    }

    pub(crate) fn g(&self) -> f64 {
        self.g_mhz * 1e-3
    }
}

fn check_band(f: f64) -> Result<()> {
    if !(3.0..=6.0).contains(&f) {
        return Err(Error::Validity(format!("frequency {f} GHz outside the 3-6 GHz band")));
    }
    Ok(())
}

/// Time-dependent transition frequencies `(f1, f2)` in GHz.
pub trait FrequencyTrajectory {
    fn duration_ns(&self) -> f64;
    fn frequencies(&self, pair: &TransmonPair, t_ns: f64) -> (f64, f64);
}

/// Both transmons parked at fixed frequencies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticPoint {
    pub f1_ghz: f64,
    pub f2_ghz: f64,
    pub duration_ns: f64,
}

impl FrequencyTrajectory for StaticPoint {
    fn duration_ns(&self) -> f64 {
        self.duration_ns
    }

    fn frequencies(&self, _: &TransmonPair, _: f64) -> (f64, f64) {
        (self.f1_ghz, self.f2_ghz)
    }
}

fn expi(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// `exp(-i tau [[a, b], [b, d]])`.
fn exp_2x2(a: f64, b: f64, d: f64, tau: f64) -> Matrix2<Complex64> {
    let m = 0.5 * (a + d);
    let hz = 0.5 * (a - d);
    let r = hz.hypot(b);
    let (s, c) = (tau * r).sin_cos();
    let sr = if r > 0.0 { s / r } else { tau };
    let ph = expi(-tau * m);
    let i = Complex64::new(0.0, 1.0);
    Matrix2::new(ph * (c - i * sr * hz), ph * (-i * sr * b), ph * (-i * sr * b), ph * (c + i * sr * hz))
}

/// `exp(-i tau H)` for real symmetric 3x3 `H`.
fn exp_3x3(h: Matrix3<f64>, tau: f64) -> Matrix3<Complex64> {
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors;
    let mut out = Matrix3::zeros();
    for k in 0..3 {
        let ph = expi(-tau * eig.eigenvalues[k]);
        for i in 0..3 {
            for j in 0..3 {
                out[(i, j)] += ph * (v[(i, k)] * v[(j, k)]);
            }
        }
    }
    out
}

/// Excitation-number blocks of the Hamiltonian (GHz) at detunings `w1`, `w2` from the
/// frame frequency: `|00>`, `{|01>, |10>}`, `{|02>, |11>, |20>}`, `{|12>, |21>}`, `|22>`.
struct Blocks {
    h0: f64,
    h1: Matrix2<f64>,
    h2: Matrix3<f64>,
    h3: Matrix2<f64>,
    h4: f64,
}

const BLOCK1: [usize; 2] = [level_index(0, 1), level_index(1, 0)];
const BLOCK2: [usize; 3] = [level_index(0, 2), level_index(1, 1), level_index(2, 0)];
const BLOCK3: [usize; 2] = [level_index(1, 2), level_index(2, 1)];

fn blocks(pair: &TransmonPair, w1: f64, w2: f64) -> Blocks {
    let (e1, e2, g) = (pair.eta1(), pair.eta2(), pair.g());
    let energy = |n1: usize, n2: usize| {
        let (a, b) = (n1 as f64, n2 as f64);
        a * w1 + b * w2 + 0.5 * e1 * a * (a - 1.0) + 0.5 * e2 * b * (b - 1.0)
    };
    let sg = SQRT_2 * g;
    Blocks {
        h0: energy(0, 0),
        h1: Matrix2::new(energy(0, 1), g, g, energy(1, 0)),
        h2: Matrix3::new(energy(0, 2), sg, 0.0, sg, energy(1, 1), sg, 0.0, sg, energy(2, 0)),
        h3: Matrix2::new(energy(1, 2), 2.0 * g, 2.0 * g, energy(2, 1)),
        h4: energy(2, 2),
    }
}

/// Eigenvectors of the idle Hamiltonian, column `k` being the dressed state that
/// continues bare state `k` (sign chosen so that overlap is positive), and their energies.
fn dressed_idle(pair: &TransmonPair, w1: f64, w2: f64) -> (SMatrix<f64, 9, 9>, [f64; 9]) {
    let b = blocks(pair, w1, w2);
    let mut v = SMatrix::<f64, 9, 9>::zeros();
    let mut e = [0.0; 9];
    v[(0, 0)] = 1.0;
    e[0] = b.h0;
    v[(8, 8)] = 1.0;
    e[8] = b.h4;
    let mut place = |idx: &[usize], h: nalgebra::DMatrix<f64>| {
        let eig = SymmetricEigen::new(h);
        let mut used = vec![false; idx.len()];
        for (row, &bare) in idx.iter().enumerate() {
            let k = (0..idx.len())
                .filter(|&k| !used[k])
                .max_by(|&a, &c| eig.eigenvectors[(row, a)].abs().total_cmp(&eig.eigenvectors[(row, c)].abs()))
                .expect("one eigenvector per bare state");
            used[k] = true;
            let sign = eig.eigenvectors[(row, k)].signum();
            for (r, &i) in idx.iter().enumerate() {
                v[(i, bare)] = sign * eig.eigenvectors[(r, k)];
            }
            e[bare] = eig.eigenvalues[k];
        }
    };
    place(&BLOCK1, nalgebra::DMatrix::from_iterator(2, 2, b.h1.iter().copied()));
    place(&BLOCK2, nalgebra::DMatrix::from_iterator(3, 3, b.h2.iter().copied()));
    place(&BLOCK3, nalgebra::DMatrix::from_iterator(2, 2, b.h3.iter().copied()));
    (v, e)
}

/// Propagator of the pair over `traj`, in the eigenbasis of the idle Hamiltonian and the
/// frame rotating with it, so that idling is the identity. Basis labels follow the bare
/// states each dressed state connects to.
///
/// The Hamiltonian is piecewise constant on steps of at most `dt_ns`, sampled at the
/// step midpoints. Internally the evolution runs in a frame rotating at the mean idle
/// frequency (which keeps the coupling static) and is converted at the end.
pub fn evolve<T: FrequencyTrajectory + ?Sized>(pair: &TransmonPair, traj: &T, dt_ns: f64) -> Result<Propagator> {
    pair.validate()?;
    let total = traj.duration_ns();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Domain(format!("duration {total} ns must be positive")));
    }
    if !(dt_ns > 0.0) || dt_ns > total {
        return Err(Error::Domain(format!("step {dt_ns} ns must lie in (0, {total}]")));
    }
    let steps = (total / dt_ns).ceil() as usize;
    let dt = total / steps as f64;
    let tau = 2.0 * PI * dt;
    let f_ref = 0.5 * (pair.f1_idle_ghz + pair.f2_idle_ghz);

    let mut b0 = Complex64::new(1.0, 0.0);
    let mut b1 = Matrix2::<Complex64>::identity();
    let mut b2 = Matrix3::<Complex64>::identity();
    let mut b3 = Matrix2::<Complex64>::identity();
    let mut b4 = Complex64::new(1.0, 0.0);
    for k in 0..steps {
        let (f1, f2) = traj.frequencies(pair, (k as f64 + 0.5) * dt);
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::Integration(format!("non-finite frequency at t = {} ns", (k as f64 + 0.5) * dt)));
        }
        let h = blocks(pair, f1 - f_ref, f2 - f_ref);
        b0 *= expi(-tau * h.h0);
        b1 = exp_2x2(h.h1[(0, 0)], h.h1[(0, 1)], h.h1[(1, 1)], tau) * b1;
        b2 = exp_3x3(h.h2, tau) * b2;
        b3 = exp_2x2(h.h3[(0, 0)], h.h3[(0, 1)], h.h3[(1, 1)], tau) * b3;
        b4 *= expi(-tau * h.h4);
    }

    let mut u = Propagator::zeros();
    u[(0, 0)] = b0;
    u[(8, 8)] = b4;
    let blocks: [(&[usize], Vec<Complex64>); 3] = [
        (&BLOCK1, b1.iter().copied().collect()),
        (&BLOCK2, b2.iter().copied().collect()),
        (&BLOCK3, b3.iter().copied().collect()),
    ];
    for (idx, vals) in blocks {
        let d = idx.len();
        for j in 0..d {
            for i in 0..d {
                // nalgebra iterates column-major
                u[(idx[i], idx[j])] = vals[j * d + i];
            }
        }
    }
    let (v, e) = dressed_idle(pair, pair.f1_idle_ghz - f_ref, pair.f2_idle_ghz - f_ref);
    let v = v.map(|x| Complex64::new(x, 0.0));
    let mut u = v.transpose() * u * v;
    for (r, er) in e.iter().enumerate() {
        let ph = expi(2.0 * PI * total * er);
        for c in 0..9 {
            u[(r, c)] *= ph;
        }
    }
    let residual = unitarity_residual(&u);
    if residual > UNITARITY_LIMIT {
        return Err(Error::Integration(format!("unitarity residual {residual:.3e} exceeds {UNITARITY_LIMIT:e}")));
    }
    Ok(u)
}

/// `max |U^dag U - I|`.
pub fn unitarity_residual(u: &Propagator) -> f64 {
    (u.adjoint() * u - Propagator::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
