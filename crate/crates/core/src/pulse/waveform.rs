// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Fast-adiabatic CZ waveform.
//!
//! The tuned transmon follows a trajectory in the mixing angle of the `|11>`-`|20>`
//! avoided crossing, `tan theta = 2 sqrt(2) g / Delta` with `Delta = f1 + eta1 - f2`:
//!
//! ```text
//! theta(u) = theta_s + sum_{k=1..8} lambda_k (1 - cos(2 pi k u)),   u in [0, 1]
//! ```
//!
//! over the central window; every term vanishes at both ends, so the trajectory starts and
//! ends at the idle point. The partner transmon is lifted to its hold frequency with
//! raised-cosine edges of length `edge_ns` on either side of the window.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::hamiltonian::{FrequencyTrajectory, TransmonPair};
use crate::error::{Error, Result};

pub const N_PARAMS: usize = 8;

const THETA_MIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub lambdas: [f64; N_PARAMS],
    /// Hold frequency of the partner transmon during the window (GHz).
    pub f2_hold_ghz: f64,
    pub edge_ns: f64,
    pub window_ns: f64,
}

/// Mixing angle for detuning `delta` (GHz) and coupling `g` (GHz).
pub fn theta_of_detuning(delta: f64, g: f64) -> f64 {
    (2.0 * std::f64::consts::SQRT_2 * g).atan2(delta)
}

impl Waveform {
    pub fn new(lambdas: [f64; N_PARAMS], f2_hold_ghz: f64, edge_ns: f64, window_ns: f64) -> Result<Self> {
        let wf = Self { lambdas, f2_hold_ghz, edge_ns, window_ns };
        wf.validate()?;
        Ok(wf)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window_ns > 0.0) || !(self.edge_ns >= 0.0) {
            return Err(Error::Validity("window must be positive and edges non-negative".into()));
        }
        if self.lambdas.iter().any(|l| !l.is_finite()) {
            return Err(Error::Validity(format!("non-finite waveform parameters {:?}", self.lambdas)));
        }
        if !(3.0..=6.0).contains(&self.f2_hold_ghz) {
            return Err(Error::Validity(format!("hold frequency {} GHz outside 3-6 GHz", self.f2_hold_ghz)));
        }
        Ok(())
    }

    /// Flat-top starting point: least-squares fit of the series to a plateau at the mixing
    /// angle reached when the tuned transmon sits at `f1_op_ghz`.
    pub fn initial_guess(
        pair: &TransmonPair,
        f1_op_ghz: f64,
        f2_hold_ghz: f64,
        edge_ns: f64,
        window_ns: f64,
    ) -> Result<Self> {
        let g = pair.g();
        let eta1 = pair.eta1_mhz * 1e-3;
        let theta_s = theta_of_detuning(pair.f1_idle_ghz + eta1 - f2_hold_ghz, g);
        let theta_op = theta_of_detuning(f1_op_ghz + eta1 - f2_hold_ghz, g);
        let rise = 0.2;
        let shape = |u: f64| {
            let r = if u < rise {
                (0.5 * PI * u / rise).sin().powi(2)
            } else if u > 1.0 - rise {
                (0.5 * PI * (1.0 - u) / rise).sin().powi(2)
            } else {
                1.0
            };
            (theta_op - theta_s) * r
        };
        let m = 400;
        let a = DMatrix::from_fn(m, N_PARAMS, |i, k| basis(k, (i as f64 + 0.5) / m as f64));
        let b = DVector::from_fn(m, |i, _| shape((i as f64 + 0.5) / m as f64));
        let x =
            a.svd(true, true).solve(&b, 1e-12).map_err(|e| Error::Optimization(format!("initial fit failed: {e}")))?;
        let mut lambdas = [0.0; N_PARAMS];
        lambdas.copy_from_slice(x.as_slice());
        Self::new(lambdas, f2_hold_ghz, edge_ns, window_ns)
    }

    pub fn total_ns(&self) -> f64 {
        self.window_ns + 2.0 * self.edge_ns
    }

    /// Same shape stretched in time by `factor`.
    pub fn stretched(&self, factor: f64) -> Self {
        Self { window_ns: self.window_ns * factor, edge_ns: self.edge_ns * factor, ..self.clone() }
    }

    pub fn with_lambdas(&self, lambdas: &[f64]) -> Self {
        let mut wf = self.clone();
        wf.lambdas.copy_from_slice(lambdas);
        wf
    }

    fn theta_s(&self, pair: &TransmonPair) -> f64 {
        theta_of_detuning(pair.f1_idle_ghz + pair.eta1_mhz * 1e-3 - self.f2_hold_ghz, pair.g())
    }

    /// Mixing angle at window fraction `u`.
    pub fn theta(&self, pair: &TransmonPair, u: f64) -> f64 {
        let th = self.theta_s(pair) + self.lambdas.iter().enumerate().map(|(k, l)| l * basis(k, u)).sum::<f64>();
        th.clamp(THETA_MIN, PI - THETA_MIN)
    }

    /// `(t_ns, f1, f2)` rows sampled every `dt_ns`, with a header.
    pub fn trajectory_csv(&self, pair: &TransmonPair, dt_ns: f64) -> Result<String> {
        if !(dt_ns > 0.0) {
            return Err(Error::Domain("sampling step must be positive".into()));
        }
        let mut s = String::from("t_ns,omega1_ghz,omega2_ghz\n");
        let steps = (self.total_ns() / dt_ns).round() as usize;
        for k in 0..=steps {
            let t = (k as f64 * dt_ns).min(self.total_ns());
            let (f1, f2) = self.frequencies(pair, t);
            let _ = writeln!(s, "{t:.4},{f1:.9},{f2:.9}");
        }
        Ok(s)
    }

    pub fn write_trajectory_csv(&self, pair: &TransmonPair, dt_ns: f64, path: &Path) -> Result<()> {
        std::fs::write(path, self.trajectory_csv(pair, dt_ns)?)?;
        Ok(())
    }
}

/// `1 - cos(2 pi (k+1) u)`.
fn basis(k: usize, u: f64) -> f64 {
    1.0 - (2.0 * PI * (k + 1) as f64 * u).cos()
}

impl FrequencyTrajectory for Waveform {
    fn duration_ns(&self) -> f64 {
        self.total_ns()
    }

    fn frequencies(&self, pair: &TransmonPair, t: f64) -> (f64, f64) {
        let (e, w) = (self.edge_ns, self.window_ns);
        let lift = self.f2_hold_ghz - pair.f2_idle_ghz;
        let f2 = if t < e {
            pair.f2_idle_ghz + lift * 0.5 * (1.0 - (PI * t / e).cos())
        } else if t > e + w {
            pair.f2_idle_ghz + lift * 0.5 * (1.0 - (PI * (self.total_ns() - t) / e).cos())
        } else {
            self.f2_hold_ghz
        };
        let f1 = if t <= e || t >= e + w {
            pair.f1_idle_ghz
        } else {
            let th = self.theta(pair, (t - e) / w);
            let delta = 2.0 * std::f64::consts::SQRT_2 * pair.g() / th.tan();
            self.f2_hold_ghz - pair.eta1_mhz * 1e-3 + delta
        };
        (f1, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> TransmonPair {
        TransmonPair::new(4.996, 4.258, -246.0, -201.0, 12.0).unwrap()
    }

    #[test]
    fn initial_guess_hits_anchors() {
        let p = pair();
        let wf = Waveform::initial_guess(&p, 4.599, 4.343, 5.0, 54.0).unwrap();
        assert_eq!(wf.total_ns(), 64.0);
        let (f1a, f2a) = wf.frequencies(&p, 0.0);
        assert!((f1a - 4.996).abs() < 1e-12 && (f2a - 4.258).abs() < 1e-12);
        let (f1m, f2m) = wf.frequencies(&p, 32.0);
        assert!((f2m - 4.343).abs() < 1e-12);
        assert!((f1m - 4.599).abs() < 0.02, "{f1m}");
        let (f1z, f2z) = wf.frequencies(&p, 64.0);
        assert!((f1z - 4.996).abs() < 1e-9 && (f2z - 4.258).abs() < 1e-9);
    }

    #[test]
    fn trajectory_is_continuous() {
        let p = pair();
        let wf = Waveform::initial_guess(&p, 4.599, 4.343, 5.0, 54.0).unwrap();
        let mut prev = wf.frequencies(&p, 0.0);
        let mut t = 0.0;
        while t < 64.0 {
            t += 0.001;
            let cur = wf.frequencies(&p, t);
            assert!((cur.0 - prev.0).abs() < 2e-3 && (cur.1 - prev.1).abs() < 1e-3, "jump at {t}");
            prev = cur;
        }
    }
}
