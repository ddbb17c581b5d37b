// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Two-setting fidelity bound, GME certification and the three error-bar estimators
//! (analytic shot noise, transition-matrix fluctuation Monte Carlo, bootstrap).

use std::fmt::Write as _;
use std::path::Path;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::WitnessCoefficients;
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, mean_std, sample_std, task_rng};
use crate::readout::{apply_per_qubit, mitigated_weights, TransitionMatrix};
use crate::statevec::{sample_with, Counts, ProbDist};

const DOMAIN_FLUCTUATION: u64 = 0xf1c7;
const DOMAIN_BOOTSTRAP: u64 = 0xb007;
const MIN_TRIALS: usize = 100;
pub const MIN_RESAMPLES: usize = 100;
/// Rejected perturbations per trial before giving up.
const MAX_REJECTIONS: usize = 1000;
pub const DEFAULT_BINS: usize = 50;
const Z95: f64 = 1.959_963_984_540_054;

fn check_shapes(n: usize, what: &[(&str, usize)]) -> Result<()> {
    for (name, m) in what {
        if *m != n {
            return Err(Error::Shape(format!("{name} has {m} qubits, coefficients have {n}")));
        }
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// `alpha_xz . p_xz + alpha_zx . p_zx - 1`.
pub fn fidelity_bound(p_xz: &ProbDist, p_zx: &ProbDist, coeffs: &WitnessCoefficients) -> Result<f64> {
    check_shapes(coeffs.n_qubits(), &[("p_xz", p_xz.n_qubits()), ("p_zx", p_zx.n_qubits())])?;
    Ok(dot(&coeffs.alpha_xz, p_xz.as_slice()) + dot(&coeffs.alpha_zx, p_zx.as_slice()) - 1.0)
}

/// Bound evaluated directly on raw measured distributions through the mitigation weights.
pub fn mitigated_bound(
    raw_xz: &ProbDist,
    raw_zx: &ProbDist,
    t: &[TransitionMatrix],
    coeffs: &WitnessCoefficients,
) -> Result<f64> {
    check_shapes(coeffs.n_qubits(), &[("raw_xz", raw_xz.n_qubits()), ("raw_zx", raw_zx.n_qubits()), ("t", t.len())])?;
    let wx = mitigated_weights(&coeffs.alpha_xz, t)?;
    let wz = mitigated_weights(&coeffs.alpha_zx, t)?;
    Ok(dot(&wx, raw_xz.as_slice()) + dot(&wz, raw_zx.as_slice()) - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub n_qubits: usize,
    pub fidelity_bound: f64,
    pub sigma_shot: f64,
    pub sigma_transition: f64,
    pub sigma_total: f64,
    pub n_sigma_above_half: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub z: f64,
    pub gme_certified: bool,
}

/// Certifies genuine multipartite entanglement when `bound - z * sigma_total > 0.5`.
///
/// The two sigma components add linearly.
pub fn certify_gme(
    n_qubits: usize,
    bound: f64,
    sigma_shot: f64,
    sigma_transition: f64,
    z: f64,
) -> Result<WitnessResult> {
    let sigma_total = sigma_shot + sigma_transition;
    if !(sigma_total > 0.0) || !sigma_total.is_finite() {
        return Err(Error::Domain(format!("sigma_total must be positive, got {sigma_total}")));
    }
    if !bound.is_finite() || !z.is_finite() || z < 0.0 {
        return Err(Error::Domain(format!("invalid bound {bound} or z {z}")));
    }
    Ok(WitnessResult {
        n_qubits,
        fidelity_bound: bound,
        sigma_shot,
        sigma_transition,
        sigma_total,
        n_sigma_above_half: (bound - 0.5) / sigma_total,
        ci95_low: bound - Z95 * sigma_total,
        ci95_high: bound + Z95 * sigma_total,
        z,
        gme_certified: bound - z * sigma_total > 0.5,
    })
}

impl WitnessResult {
    /// `key = value` lines.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n_qubits = {}", self.n_qubits);
        let _ = writeln!(s, "fidelity_bound = {:.6}", self.fidelity_bound);
        let _ = writeln!(s, "sigma_shot = {:.6}", self.sigma_shot);
        let _ = writeln!(s, "sigma_transition = {:.6}", self.sigma_transition);
        let _ = writeln!(s, "sigma_total = {:.6}", self.sigma_total);
        let _ = writeln!(s, "n_sigma_above_half = {:.2}", self.n_sigma_above_half);
        let _ = writeln!(s, "ci95 = [{:.6}, {:.6}]", self.ci95_low, self.ci95_high);
        let _ = writeln!(s, "z = {}", self.z);
        let _ = writeln!(s, "gme_certified = {}", self.gme_certified);
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }
}

/// Shot-noise standard deviation of the mitigated bound.
///
/// Per basis the estimator is `w . p_hat` with `w = alpha^T T^-1`; its multinomial variance is
/// `(sum w^2 p0 - (sum w p0)^2) / shots`. The two bases add in variance.
pub fn shot_noise_sigma(
    p0_xz: &ProbDist,
    p0_zx: &ProbDist,
    t: &[TransitionMatrix],
    coeffs: &WitnessCoefficients,
    shots: u64,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::Domain("shots must be at least 1".into()));
    }
    check_shapes(coeffs.n_qubits(), &[("p0_xz", p0_xz.n_qubits()), ("p0_zx", p0_zx.n_qubits()), ("t", t.len())])?;
    let var = |alpha: &[f64], p: &ProbDist| -> Result<f64> {
        let w = mitigated_weights(alpha, t)?;
        let p = p.as_slice();
        let m1 = dot(&w, p);
        let m2 = compensated_sum(w.iter().zip(p).map(|(wi, pi)| wi * wi * pi));
        Ok(((m2 - m1 * m1) / shots as f64).max(0.0))
    };
    Ok((var(&coeffs.alpha_xz, p0_xz)? + var(&coeffs.alpha_zx, p0_zx)?).sqrt())
}

/// Histogram with `counts.len() + 1` edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 || values.is_empty() {
            return Err(Error::Domain("histogram needs values and at least one bin".into()));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            return Ok(Self { edges: vec![lo, hi], counts: vec![values.len() as u64] });
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect();
        let mut counts = vec![0u64; bins];
        for v in values {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `bin_low,bin_high,count` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_low,bin_high,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            let _ = writeln!(s, "{:e},{:e},{}", self.edges[k], self.edges[k + 1], c);
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut edges = Vec::new();
        let mut counts = Vec::new();
        for (row, rec) in rdr.deserialize::<(f64, f64, u64)>().enumerate() {
            let (lo, hi, c) = rec.map_err(|e| Error::Parse(format!("histogram row {}: {e}", row + 1)))?;
            if edges.is_empty() {
                edges.push(lo);
            } else if *edges.last().unwrap() != lo {
                return Err(Error::Parse(format!("histogram row {} does not continue previous bin", row + 1)));
            }
            edges.push(hi);
            counts.push(c);
        }
        if counts.is_empty() {
            return Err(Error::Parse("empty histogram".into()));
        }
        Ok(Self { edges, counts })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluctuationStudy {
    pub n_qubits: usize,
    pub trials: usize,
    pub mean_distortion: f64,
    pub std_distortion: f64,
    pub rejected: usize,
    pub histogram: Histogram,
    #[serde(skip)]
    pub distortions: Vec<f64>,
}

/// Per-qubit Gaussian widths for `(f00, f11)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluctuationWidth {
    pub df00: f64,
    pub df11: f64,
}

impl FluctuationWidth {
    pub fn uniform(delta: f64) -> Self {
        Self { df00: delta, df11: delta }
    }
}

fn check_delta(delta: &[FluctuationWidth], n: usize) -> Result<()> {
    if delta.len() != n {
        return Err(Error::Shape(format!("{} fluctuation widths for {n} qubits", delta.len())));
    }
    if delta.iter().any(|d| !(d.df00 >= 0.0 && d.df11 >= 0.0) || !d.df00.is_finite() || !d.df11.is_finite()) {
        return Err(Error::Domain("fluctuation widths must be finite and non-negative".into()));
    }
    Ok(())
}

/// Monte Carlo of the bound distortion caused by drifting transition matrices.
///
/// Each trial draws `f' = f + N(0, delta)` per qubit, measures the true distributions
/// `p_xz`, `p_zx` through `T'`, mitigates with the nominal `T` and records
/// `F(T') - F(T)`. Perturbations that make a `T'` singular are redrawn and counted.
#[allow(clippy::too_many_arguments)]
pub fn transition_fluctuation_sigma(
    p_xz: &ProbDist,
    p_zx: &ProbDist,
    coeffs: &WitnessCoefficients,
    t: &[TransitionMatrix],
    delta: &[FluctuationWidth],
    trials: usize,
    seed: u64,
    bins: usize,
) -> Result<FluctuationStudy> {
    let n = coeffs.n_qubits();
    check_shapes(n, &[("p_xz", p_xz.n_qubits()), ("p_zx", p_zx.n_qubits()), ("t", t.len())])?;
    check_delta(delta, n)?;
    if trials < MIN_TRIALS {
        return Err(Error::Domain(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    let wx = mitigated_weights(&coeffs.alpha_xz, t)?;
    let wz = mitigated_weights(&coeffs.alpha_zx, t)?;
    let nominal = fidelity_bound(p_xz, p_zx, coeffs)?;
    let normals: Vec<(Normal<f64>, Normal<f64>)> =
        delta.iter().map(|d| (Normal::new(0.0, d.df00).unwrap(), Normal::new(0.0, d.df11).unwrap())).collect();

    let outcomes: Vec<Result<(f64, usize)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = task_rng(seed, DOMAIN_FLUCTUATION, trial as u64);
            let mut rejected = 0usize;
            let mats = loop {
                let mats: Vec<[[f64; 2]; 2]> = t
                    .iter()
                    .zip(&normals)
                    .map(|(tm, (n0, n1))| {
                        let f00 = tm.f00 + n0.sample(&mut rng);
                        let f11 = tm.f11 + n1.sample(&mut rng);
                        [[f00, 1.0 - f11], [1.0 - f00, f11]]
                    })
                    .collect();
                if mats.iter().all(|m| m[0][0] + m[1][1] - 1.0 > 1e-12) {
                    break mats;
                }
                rejected += 1;
                if rejected > MAX_REJECTIONS {
                    return Err(Error::Conditioning(format!(
                        "trial {trial}: {MAX_REJECTIONS} consecutive singular perturbations"
                    )));
                }
            };
            let mut vx = p_xz.as_slice().to_vec();
            let mut vz = p_zx.as_slice().to_vec();
            apply_per_qubit(&mut vx, &mats);
            apply_per_qubit(&mut vz, &mats);
            Ok((dot(&wx, &vx) + dot(&wz, &vz) - 1.0 - nominal, rejected))
        })
        .collect();

    let mut distortions = Vec::with_capacity(trials);
    let mut rejected = 0;
    for o in outcomes {
        let (d, r) = o?;
        distortions.push(d);
        rejected += r;
    }
    let (mean, std) = mean_std(&distortions);
    Ok(FluctuationStudy {
        n_qubits: n,
        trials,
        mean_distortion: mean,
        std_distortion: std,
        rejected,
        histogram: Histogram::from_values(&distortions, bins)?,
        distortions,
    })
}

/// First-order standard deviation of the fluctuation distortion.
///
/// The bound is multilinear in the per-qubit matrices, so the derivative with respect to
/// `f00_q` is `alpha . (T_q^-1 D00 on qubit q) p` with `D00 = [[1,0],[-1,0]]`, likewise for `f11`.
pub fn transition_fluctuation_sigma_analytic(
    p_xz: &ProbDist,
    p_zx: &ProbDist,
    coeffs: &WitnessCoefficients,
    t: &[TransitionMatrix],
    delta: &[FluctuationWidth],
) -> Result<f64> {
    let n = coeffs.n_qubits();
    check_shapes(n, &[("p_xz", p_xz.n_qubits()), ("p_zx", p_zx.n_qubits()), ("t", t.len())])?;
    check_delta(delta, n)?;
    let d00 = [[1.0, 0.0], [-1.0, 0.0]];
    let d11 = [[0.0, -1.0], [0.0, 1.0]];
    let identity = [[1.0, 0.0], [0.0, 1.0]];
    let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
        let mut c = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        c
    };
    let mut var = 0.0;
    for q in 0..n {
        let inv = t[q].inverse()?;
        for (d, width) in [(d00, delta[q].df00), (d11, delta[q].df11)] {
            let mut mats = vec![identity; n];
            mats[q] = mul(inv, d);
            let mut vx = p_xz.as_slice().to_vec();
            let mut vz = p_zx.as_slice().to_vec();
            apply_per_qubit(&mut vx, &mats);
            apply_per_qubit(&mut vz, &mats);
            let grad = dot(&coeffs.alpha_xz, &vx) + dot(&coeffs.alpha_zx, &vz);
            var += width * width * grad * grad;
        }
    }
    Ok(var.sqrt())
}

/// Bootstrap standard deviation of the mitigated bound.
///
/// Each resample redraws both count vectors multinomially from their empirical
/// frequencies; the bound is linear in counts, so only the weighted sums are recomputed.
pub fn bootstrap_sigma(
    counts_xz: &Counts,
    counts_zx: &Counts,
    t: &[TransitionMatrix],
    coeffs: &WitnessCoefficients,
    resamples: usize,
    seed: u64,
) -> Result<f64> {
    check_shapes(
        coeffs.n_qubits(),
        &[("counts_xz", counts_xz.n_qubits()), ("counts_zx", counts_zx.n_qubits()), ("t", t.len())],
    )?;
    if counts_xz.shots() == 0 || counts_zx.shots() == 0 {
        return Err(Error::Domain("bootstrap needs non-empty counts".into()));
    }
    if resamples < MIN_RESAMPLES {
        return Err(Error::Domain(format!("need at least {MIN_RESAMPLES} resamples, got {resamples}")));
    }
    let wx = mitigated_weights(&coeffs.alpha_xz, t)?;
    let wz = mitigated_weights(&coeffs.alpha_zx, t)?;
    let px = ProbDist::from_counts(counts_xz)?;
    let pz = ProbDist::from_counts(counts_zx)?;
    let (nx, nz) = (counts_xz.shots(), counts_zx.shots());
    let weighted =
        |w: &[f64], c: &Counts| compensated_sum(c.iter_nonzero().map(|(i, k)| w[i] * k as f64)) / c.shots() as f64;
    let bounds = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = task_rng(seed, DOMAIN_BOOTSTRAP, r as u64);
            let cx = sample_with(&px, nx, &mut rng)?;
            let cz = sample_with(&pz, nz, &mut rng)?;
            Ok(weighted(&wx, &cx) + weighted(&wz, &cz) - 1.0)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(sample_std(&bounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{ideal_distributions, measured_distribution, witness_coefficients};
    use crate::readout::apply_readout_noise;
    use crate::statevec::{Gate1, StateVector};

    #[test]
    fn ideal_lc12_saturates() {
        let (px, pz) = ideal_distributions(12).unwrap();
        let c = witness_coefficients(12).unwrap();
        assert!((fidelity_bound(&px, &pz, &c).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn plus_product_state_gives_minus_half() {
        let mut s = StateVector::zero_state(4).unwrap();
        for q in 0..4 {
            s.apply_gate1(&Gate1::hadamard(q)).unwrap();
        }
        let c = witness_coefficients(4).unwrap();
        let px = measured_distribution(&s, &c.basis_xz).unwrap();
        let pz = measured_distribution(&s, &c.basis_zx).unwrap();
        assert!((fidelity_bound(&px, &pz, &c).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let (px, _) = ideal_distributions(4).unwrap();
        let (_, pz) = ideal_distributions(3).unwrap();
        let c = witness_coefficients(4).unwrap();
        assert!(matches!(fidelity_bound(&px, &pz, &c), Err(Error::Shape(_))));
    }

    #[test]
    fn certification_examples() {
        let r = certify_gme(12, 0.5544, 0.0025, 0.0, 0.0).unwrap();
        assert!((r.n_sigma_above_half - 21.76).abs() < 1e-9 && r.gme_certified);
        let r = certify_gme(12, 0.5, 0.001, 0.001, 0.0).unwrap();
        assert!(!r.gme_certified);
        let r = certify_gme(10, 0.7136, 0.0026, 0.0, 0.0).unwrap();
        assert!((r.n_sigma_above_half - 82.15).abs() < 0.01);
        assert!(matches!(certify_gme(4, 0.9, 0.0, 0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn ideal_shot_noise_is_zero() {
        let (px, pz) = ideal_distributions(6).unwrap();
        let c = witness_coefficients(6).unwrap();
        let t = vec![TransitionMatrix::perfect(); 6];
        assert!(shot_noise_sigma(&px, &pz, &t, &c, 1000).unwrap() < 1e-12);
    }

    #[test]
    fn zero_delta_gives_zero_std() {
        let (px, pz) = ideal_distributions(4).unwrap();
        let c = witness_coefficients(4).unwrap();
        let t = vec![TransitionMatrix::new(0.96, 0.87).unwrap(); 4];
        let d = vec![FluctuationWidth::uniform(0.0); 4];
        let s = transition_fluctuation_sigma(&px, &pz, &c, &t, &d, 200, 1, 10).unwrap();
        assert!(s.std_distortion < 1e-15);
        assert_eq!(s.histogram.total(), 200);
        assert!(transition_fluctuation_sigma(&px, &pz, &c, &t, &d, 99, 1, 10).is_err());
    }

    #[test]
    fn analytic_matches_monte_carlo_at_small_delta() {
        let (px, pz) = ideal_distributions(4).unwrap();
        let c = witness_coefficients(4).unwrap();
        let t = vec![TransitionMatrix::new(0.96, 0.87).unwrap(); 4];
        let d = vec![FluctuationWidth::uniform(0.002); 4];
        let mc = transition_fluctuation_sigma(&px, &pz, &c, &t, &d, 4000, 3, 20).unwrap();
        let an = transition_fluctuation_sigma_analytic(&px, &pz, &c, &t, &d).unwrap();
        assert!((mc.std_distortion / an - 1.0).abs() < 0.05, "{} vs {an}", mc.std_distortion);
    }

    #[test]
    fn fluctuation_is_schedule_independent() {
        let (px, pz) = ideal_distributions(4).unwrap();
        let c = witness_coefficients(4).unwrap();
        let t = vec![TransitionMatrix::new(0.96, 0.87).unwrap(); 4];
        let d = vec![FluctuationWidth::uniform(0.01); 4];
        let a = transition_fluctuation_sigma(&px, &pz, &c, &t, &d, 300, 8, 10).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| transition_fluctuation_sigma(&px, &pz, &c, &t, &d, 300, 8, 10).unwrap());
        assert_eq!(a.mean_distortion.to_bits(), b.mean_distortion.to_bits());
        assert_eq!(a.distortions, b.distortions);
    }

    #[test]
    fn bootstrap_degenerate_and_empty() {
        let c = witness_coefficients(2).unwrap();
        let t = vec![TransitionMatrix::perfect(); 2];
        let one = Counts::new(2, vec![0, 500, 0, 0]).unwrap();
        assert_eq!(bootstrap_sigma(&one, &one, &t, &c, 100, 1).unwrap(), 0.0);
        let empty = Counts::zeros(2);
        assert!(matches!(bootstrap_sigma(&empty, &one, &t, &c, 100, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn mitigated_bound_equals_bound_of_mitigated() {
        let (px, pz) = ideal_distributions(5).unwrap();
        let c = witness_coefficients(5).unwrap();
        let t: Vec<_> = (0..5).map(|q| TransitionMatrix::new(0.9 + 0.01 * q as f64, 0.85).unwrap()).collect();
        let rx = apply_readout_noise(&px, &t).unwrap();
        let rz = apply_readout_noise(&pz, &t).unwrap();
        let direct = mitigated_bound(&rx, &rz, &t, &c).unwrap();
        assert!((direct - 1.0).abs() < 1e-10);
    }

    #[test]
    fn histogram_csv_round_trip() {
        let h = Histogram::from_values(&[0.1, 0.2, 0.25, -0.3, 0.0], 4).unwrap();
        assert_eq!(Histogram::from_csv(&h.to_csv()).unwrap(), h);
    }
}
