// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Circuit-level noise: amplitude damping, pure dephasing, Gaussian CZ phase error,
//! ZZ phase on idle neighbours and readout flips.
//!
//! Shots are simulated as quantum trajectories. After every layer, each qubit gets an
//! amplitude-damping step (jump probability `p P1` with `p = 1 - exp(-t/T1)`) and then a
//! phase flip with probability `(1 - exp(-t/T_phi)) / 2`. Layer duration depends on
//! whether the layer holds a two-qubit gate. The measurement-basis rotation is ideal.
//!
//! For `n <= 8` the same channel sequence is also available as an exact Kraus evolution.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{lc_circuit, witness_coefficients, Circuit, GateSet, Op};
use crate::densmat::DensityMatrix;
use crate::error::{Error, Result};
use crate::numeric::task_rng;
use crate::readout::{apply_readout_noise, DeviceParams, TransitionMatrix};
use crate::statevec::{gates, BasisWord, Counts, ProbDist, StateVector, MAX_QUBITS};

pub const DEFAULT_CZ_LAYER_NS: f64 = 64.0;
pub const DEFAULT_SINGLE_LAYER_NS: f64 = 30.0;
pub const DEFAULT_TPHI_CEILING_US: f64 = 1.0e6;

const DOMAIN_SHOT: u64 = 0x5407;
const DOMAIN_TRAJ: u64 = 0x7a1e;
/// Shots handled per parallel task.
const SHOT_CHUNK: usize = 4096;

/// `1 - exp(-t/T1)` with `t` in ns and `T1` in us.
pub fn channel_amplitude_damping(t_ns: f64, t1_us: f64) -> Result<f64> {
    if !(t_ns > 0.0) || !(t1_us > 0.0) {
        return Err(Error::Domain(format!("need t > 0 and T1 > 0, got t = {t_ns} ns, T1 = {t1_us} us")));
    }
    Ok(-(-t_ns * 1e-3 / t1_us).exp_m1())
}

/// Pure-dephasing time from `1/T_phi = 1/T2* - 1/(2 T1)`, clamped to `ceiling_us`.
///
/// Returns the value and whether it was clamped.
pub fn derive_tphi_with_ceiling(t1_us: f64, t2star_us: f64, ceiling_us: f64) -> Result<(f64, bool)> {
    if !(t1_us > 0.0) || !(t2star_us > 0.0) {
        return Err(Error::Domain(format!("need T1 > 0 and T2* > 0, got {t1_us}, {t2star_us}")));
    }
    let rate = 1.0 / t2star_us - 0.5 / t1_us;
    if rate <= 1.0 / ceiling_us {
        log::warn!("T1 = {t1_us} us, T2* = {t2star_us} us leave no pure dephasing; T_phi clamped to {ceiling_us} us");
        return Ok((ceiling_us, true));
    }
    Ok((1.0 / rate, false))
}

pub fn derive_tphi(t1_us: f64, t2star_us: f64) -> Result<f64> {
    derive_tphi_with_ceiling(t1_us, t2star_us, DEFAULT_TPHI_CEILING_US).map(|r| r.0)
}

/// Scalar knobs of the `[noise]` config section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSettings {
    pub cz_layer_ns: f64,
    pub single_layer_ns: f64,
    pub cz_phase_mean_rad: f64,
    pub cz_phase_std_rad: f64,
    /// Residual ZZ rate applied to every adjacent pair.
    pub zz_mhz: f64,
    /// Per-pair override of `zz_mhz`.
    pub zz_pair_mhz: Option<Vec<f64>>,
    /// Multiplies every `1/T1`.
    pub t1_rate_scale: f64,
    /// Multiplies every `1/T_phi`.
    pub tphi_rate_scale: f64,
    pub tphi_ceiling_us: f64,
    pub decoherence: bool,
    pub readout: bool,
}

impl Default for NoiseSettings {
    fn default() -> Self {
        Self {
            cz_layer_ns: DEFAULT_CZ_LAYER_NS,
            single_layer_ns: DEFAULT_SINGLE_LAYER_NS,
            cz_phase_mean_rad: 0.0,
            cz_phase_std_rad: 0.0,
            zz_mhz: 0.0,
            zz_pair_mhz: None,
            t1_rate_scale: 1.0,
            tphi_rate_scale: 1.0,
            tphi_ceiling_us: DEFAULT_TPHI_CEILING_US,
            decoherence: true,
            readout: true,
        }
    }
}

impl NoiseSettings {
    /// Reads the `[noise]` table of a config document; absent table means defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            noise: Option<toml::Value>,
        }
        let doc: Doc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match doc.noise {
            None => Ok(Self::default()),
            Some(v) => v.try_into().map_err(|e: toml::de::Error| Error::Parse(format!("[noise]: {e}"))),
        }
    }
}

/// Fully resolved per-qubit noise parameters for an `n`-qubit register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Energy relaxation time per qubit (us); `f64::INFINITY` disables damping.
    pub t1_us: Vec<f64>,
    /// Pure dephasing time per qubit (us); `f64::INFINITY` disables dephasing.
    pub tphi_us: Vec<f64>,
    pub cz_layer_ns: f64,
    pub single_layer_ns: f64,
    pub cz_phase_mean_rad: f64,
    pub cz_phase_std_rad: f64,
    /// ZZ rate of pair `(q, q+1)` (MHz).
    pub zz_mhz: Vec<f64>,
    pub readout: Vec<TransitionMatrix>,
}

impl NoiseModel {
    /// No errors of any kind.
    pub fn ideal(n: usize) -> Self {
        Self {
            t1_us: vec![f64::INFINITY; n],
            tphi_us: vec![f64::INFINITY; n],
            cz_layer_ns: DEFAULT_CZ_LAYER_NS,
            single_layer_ns: DEFAULT_SINGLE_LAYER_NS,
            cz_phase_mean_rad: 0.0,
            cz_phase_std_rad: 0.0,
            zz_mhz: vec![0.0; n.saturating_sub(1)],
            readout: vec![TransitionMatrix::perfect(); n],
        }
    }

    /// Model for the chain `[offset, offset + len)` of a calibrated device.
    pub fn from_device(device: &DeviceParams, offset: usize, len: usize, s: &NoiseSettings) -> Result<Self> {
        let readout =
            if s.readout { device.transition_matrices(offset, len)? } else { vec![TransitionMatrix::perfect(); len] };
        let mut model = Self::ideal(len);
        model.readout = readout;
        model.cz_layer_ns = s.cz_layer_ns;
        model.single_layer_ns = s.single_layer_ns;
        model.cz_phase_mean_rad = s.cz_phase_mean_rad;
        model.cz_phase_std_rad = s.cz_phase_std_rad;
        model.zz_mhz = match &s.zz_pair_mhz {
            Some(v) => {
                if v.len() < offset + len - 1 {
                    return Err(Error::Validity(format!(
                        "zz_pair_mhz has {} entries, need {}",
                        v.len(),
                        offset + len - 1
                    )));
                }
                v[offset..offset + len - 1].to_vec()
            }
            None => vec![s.zz_mhz; len - 1],
        };
        if s.decoherence {
            for (k, q) in device.qubits[offset..offset + len].iter().enumerate() {
                let (tphi, _) = derive_tphi_with_ceiling(q.t1_us, q.t2star_us, s.tphi_ceiling_us)?;
                model.t1_us[k] = q.t1_us / s.t1_rate_scale;
                model.tphi_us[k] = tphi / s.tphi_rate_scale;
            }
        }
        Ok(model)
    }

    pub fn n_qubits(&self) -> usize {
        self.t1_us.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        if self.tphi_us.len() != n || self.readout.len() != n || self.zz_mhz.len() != n.saturating_sub(1) {
            return Err(Error::Validity("noise model vectors disagree on the qubit count".into()));
        }
        if let Some(q) = (0..n).find(|&q| !(self.t1_us[q] > 0.0) || !(self.tphi_us[q] > 0.0)) {
            return Err(Error::Validity(format!("qubit {q}: T1 and T_phi must be positive")));
        }
        if !(self.cz_layer_ns > 0.0 && self.single_layer_ns > 0.0) {
            return Err(Error::Validity("layer durations must be positive".into()));
        }
        if !(self.cz_phase_std_rad >= 0.0) || !self.cz_phase_mean_rad.is_finite() || !self.cz_phase_std_rad.is_finite()
        {
            return Err(Error::Validity("CZ phase error mean must be finite and std non-negative".into()));
        }
        if self.zz_mhz.iter().any(|z| !z.is_finite()) {
            return Err(Error::Validity("ZZ rates must be finite".into()));
        }
        Ok(())
    }

    /// True when no step of a shot consumes randomness except readout.
    pub fn is_coherent(&self) -> bool {
        self.t1_us.iter().all(|t| t.is_infinite())
            && self.tphi_us.iter().all(|t| t.is_infinite())
            && self.cz_phase_std_rad == 0.0
    }

    fn layer_ns(&self, layer: &[Op]) -> f64 {
        if layer.iter().any(Op::is_two_qubit) {
            self.cz_layer_ns
        } else {
            self.single_layer_ns
        }
    }

    fn damping_p(&self, q: usize, t_ns: f64) -> f64 {
        -(-t_ns * 1e-3 / self.t1_us[q]).exp_m1()
    }

    fn flip_p(&self, q: usize, t_ns: f64) -> f64 {
        -0.5 * (-t_ns * 1e-3 / self.tphi_us[q]).exp_m1()
    }

    /// Conditional phase accumulated on `|11>` of pair `(q, q+1)` while idle.
    fn zz_phase(&self, q: usize, t_ns: f64) -> f64 {
        -2.0 * std::f64::consts::PI * self.zz_mhz[q] * t_ns * 1e-3
    }

    /// Pairs `(q, q+1)` that carry no two-qubit gate between them in this layer.
    fn idle_pairs<'a>(&'a self, layer: &'a [Op]) -> impl Iterator<Item = usize> + 'a {
        (0..self.zz_mhz.len()).filter(move |&q| {
            self.zz_mhz[q] != 0.0
                && !layer.iter().any(|op| match *op {
                    Op::Cz(a, b) | Op::Cx(a, b) => a.min(b) == q && a.max(b) == q + 1,
                    _ => false,
                })
        })
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn cz_diag(eps: f64) -> [Complex64; 4] {
    [c(1.0), c(1.0), c(1.0), -Complex64::from_polar(1.0, eps)]
}

fn phase_diag(phi: f64) -> [Complex64; 4] {
    [c(1.0), c(1.0), c(1.0), Complex64::from_polar(1.0, phi)]
}

/// One trajectory through `circuit`, drawing noise from `rng`.
fn run_trajectory<R: Rng + ?Sized>(circuit: &Circuit, model: &NoiseModel, rng: &mut R) -> Result<StateVector> {
    let n = circuit.n_qubits();
    let mut state = StateVector::zero_state(n)?;
    let cz_noise = if model.cz_phase_std_rad > 0.0 {
        Some(Normal::new(model.cz_phase_mean_rad, model.cz_phase_std_rad).map_err(|e| Error::Validity(e.to_string()))?)
    } else {
        None
    };
    for layer in circuit.layers() {
        for op in layer {
            match *op {
                Op::Cz(a, b) => {
                    let eps = match &cz_noise {
                        Some(d) => d.sample(rng),
                        None => model.cz_phase_mean_rad,
                    };
                    state.apply_diagonal2(cz_diag(eps), a, b);
                }
                _ => op.apply(&mut state)?,
            }
        }
        let t = model.layer_ns(layer);
        for q in model.idle_pairs(layer) {
            state.apply_diagonal2(phase_diag(model.zz_phase(q, t)), q, q + 1);
        }
        for q in 0..n {
            let p = model.damping_p(q, t);
            if p > 0.0 {
                let p1 = state.excited_population(q);
                let jump = rng.random::<f64>() < p * p1;
                let m = if jump {
                    [[c(0.0), c(1.0)], [c(0.0), c(0.0)]]
                } else {
                    [[c(1.0), c(0.0)], [c(0.0), c((1.0 - p).sqrt())]]
                };
                state.apply_matrix1(&m, q);
                state.renormalize();
            }
            let pz = model.flip_p(q, t);
            if pz > 0.0 && rng.random::<f64>() < pz {
                state.apply_matrix1(&gates::pauli_z(), q);
            }
        }
    }
    Ok(state)
}

fn cumulative(p: &ProbDist) -> Vec<f64> {
    let mut acc = 0.0;
    p.as_slice()
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

fn draw_outcome<R: Rng + ?Sized>(cdf: &[f64], readout: &[TransitionMatrix], rng: &mut R) -> usize {
    let total = *cdf.last().expect("non-empty distribution");
    let u = rng.random::<f64>() * total;
    let ideal = cdf.partition_point(|&x| x <= u).min(cdf.len() - 1);
    readout
        .iter()
        .enumerate()
        .fold(0usize, |acc, (q, tm)| acc | (usize::from(tm.flip((ideal >> q) & 1 == 1, rng)) << q))
}

/// Shots of one measurement setting.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisRun {
    pub basis: BasisWord,
    /// Reported outcome of every shot, in shot order.
    pub outcomes: Vec<u32>,
    pub counts: Counts,
}

/// Raw (unmitigated) output of a noisy two-setting experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRun {
    pub shots: u64,
    pub xz: BasisRun,
    pub zx: BasisRun,
}

/// Execution switches for [`noisy_lc_experiment_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Simulate every shot as a full trajectory even when the model is coherent.
    pub force_trajectories: bool,
    pub gate_set: Option<GateSet>,
}

pub fn noisy_lc_experiment(n: usize, model: &NoiseModel, shots: u64, seed: u64) -> Result<TrajectoryRun> {
    noisy_lc_experiment_with(n, model, shots, seed, RunOptions::default())
}

/// Runs the LC circuit under `model` for both witness settings.
///
/// Shot `k` of setting `b` draws all its randomness from its own stream, so counts do
/// not depend on the worker count. With a coherent model the state is computed once and
/// only the measurement is sampled per shot; the stream use is the same as on the full
/// path, so both give identical outcomes.
pub fn noisy_lc_experiment_with(
    n: usize,
    model: &NoiseModel,
    shots: u64,
    seed: u64,
    opts: RunOptions,
) -> Result<TrajectoryRun> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(Error::Size(format!("qubit count {n} outside 2..={MAX_QUBITS}")));
    }
    if shots == 0 {
        return Err(Error::Domain("shots must be at least 1".into()));
    }
    if model.n_qubits() != n {
        return Err(Error::Validity(format!("noise model covers {} qubits, run has {n}", model.n_qubits())));
    }
    model.validate()?;
    let circuit = lc_circuit(n, opts.gate_set.unwrap_or(GateSet::Cz))?;
    let coeffs = witness_coefficients(n)?;
    let run = |basis: &BasisWord, b: u64| -> Result<BasisRun> {
        let domain = DOMAIN_SHOT ^ (b << 32);
        let shortcut = if model.is_coherent() && !opts.force_trajectories {
            let mut unused = task_rng(seed, domain, u64::MAX);
            let mut s = run_trajectory(&circuit, model, &mut unused)?;
            s.basis_rotate(basis)?;
            Some(cumulative(&s.probabilities()))
        } else {
            None
        };
        let n_chunks = (shots as usize).div_ceil(SHOT_CHUNK);
        let chunks = (0..n_chunks)
            .into_par_iter()
            .map(|ci| {
                let lo = ci * SHOT_CHUNK;
                let hi = ((ci + 1) * SHOT_CHUNK).min(shots as usize);
                let mut out = Vec::with_capacity(hi - lo);
                for k in lo..hi {
                    let mut rng: ChaCha8Rng = task_rng(seed, domain, k as u64);
                    let outcome = match &shortcut {
                        Some(cdf) => draw_outcome(cdf, &model.readout, &mut rng),
                        None => {
                            let mut s = run_trajectory(&circuit, model, &mut rng)?;
                            s.basis_rotate(basis)?;
                            draw_outcome(&cumulative(&s.probabilities()), &model.readout, &mut rng)
                        }
                    };
                    out.push(outcome as u32);
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        let outcomes: Vec<u32> = chunks.into_iter().flatten().collect();
        let mut counts = Counts::zeros(n);
        for &o in &outcomes {
            counts.record(o as usize);
        }
        Ok(BasisRun { basis: basis.clone(), outcomes, counts })
    };
    Ok(TrajectoryRun { shots, xz: run(&coeffs.basis_xz, 0)?, zx: run(&coeffs.basis_zx, 1)? })
}

/// Trajectory-averaged measured distributions (readout noise applied exactly).
///
/// Averages `|psi|^2` over `trajectories` noise draws per setting; cheaper than shots
/// for expectation-level studies.
pub fn noisy_lc_distributions(
    n: usize,
    model: &NoiseModel,
    trajectories: usize,
    seed: u64,
) -> Result<(ProbDist, ProbDist)> {
    if trajectories == 0 {
        return Err(Error::Domain("need at least one trajectory".into()));
    }
    if model.n_qubits() != n {
        return Err(Error::Validity(format!("noise model covers {} qubits, run has {n}", model.n_qubits())));
    }
    model.validate()?;
    let circuit = lc_circuit(n, GateSet::Cz)?;
    let coeffs = witness_coefficients(n)?;
    let traj = if model.is_coherent() { 1 } else { trajectories };
    let avg = |basis: &BasisWord, b: u64| -> Result<ProbDist> {
        let domain = DOMAIN_TRAJ ^ (b << 32);
        let per: Vec<Vec<f64>> = (0..traj)
            .into_par_iter()
            .map(|k| {
                let mut rng = task_rng(seed, domain, k as u64);
                let mut s = run_trajectory(&circuit, model, &mut rng)?;
                s.basis_rotate(basis)?;
                Ok(s.probabilities().into_vec())
            })
            .collect::<Result<_>>()?;
        let mut p = vec![0.0; 1 << n];
        for v in &per {
            for (a, x) in p.iter_mut().zip(v) {
                *a += x;
            }
        }
        p.iter_mut().for_each(|x| *x /= traj as f64);
        apply_readout_noise(&ProbDist::from_raw(n, p), &model.readout)
    };
    Ok((avg(&coeffs.basis_xz, 0)?, avg(&coeffs.basis_zx, 1)?))
}

/// Mean of `|psi><psi|` over trajectories, with entrywise standard errors.
#[derive(Clone, Debug)]
pub struct TrajectoryAverage {
    pub mean: DMatrix<Complex64>,
    pub stderr_re: DMatrix<f64>,
    pub stderr_im: DMatrix<f64>,
}

/// Averages the pre-measurement state of `circuit` over `trajectories` draws (`n <= 8`).
pub fn trajectory_density_matrix(
    circuit: &Circuit,
    model: &NoiseModel,
    trajectories: usize,
    seed: u64,
) -> Result<TrajectoryAverage> {
    let n = circuit.n_qubits();
    if n > crate::densmat::MAX_DM_QUBITS || model.n_qubits() != n {
        return Err(Error::Size(format!("trajectory density matrix needs n <= 8 and a matching model, got {n}")));
    }
    if trajectories < 2 {
        return Err(Error::Domain("need at least two trajectories".into()));
    }
    model.validate()?;
    let dim = 1usize << n;
    let chunk = 1024;
    let partial = (0..trajectories.div_ceil(chunk))
        .into_par_iter()
        .map(|ci| {
            let mut s1 = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
            let mut s2re = DMatrix::from_element(dim, dim, 0.0);
            let mut s2im = DMatrix::from_element(dim, dim, 0.0);
            for k in ci * chunk..((ci + 1) * chunk).min(trajectories) {
                let mut rng = task_rng(seed, DOMAIN_TRAJ, k as u64);
                let s = run_trajectory(circuit, model, &mut rng)?;
                let a = s.amplitudes();
                for i in 0..dim {
                    for j in 0..dim {
                        let v = a[i] * a[j].conj();
                        s1[(i, j)] += v;
                        s2re[(i, j)] += v.re * v.re;
                        s2im[(i, j)] += v.im * v.im;
                    }
                }
            }
            Ok((s1, s2re, s2im))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut s1 = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let mut s2re = DMatrix::from_element(dim, dim, 0.0);
    let mut s2im = DMatrix::from_element(dim, dim, 0.0);
    for (a, b, c) in partial {
        s1 += a;
        s2re += b;
        s2im += c;
    }
    let m = trajectories as f64;
    let mean = s1 / Complex64::new(m, 0.0);
    let se = |s2: &DMatrix<f64>, pick: fn(&Complex64) -> f64| {
        DMatrix::from_fn(dim, dim, |i, j| {
            let mu = pick(&mean[(i, j)]);
            ((s2[(i, j)] / m - mu * mu).max(0.0) * m / (m - 1.0) / m).sqrt()
        })
    };
    let stderr_re = se(&s2re, |z| z.re);
    let stderr_im = se(&s2im, |z| z.im);
    Ok(TrajectoryAverage { mean, stderr_re, stderr_im })
}

/// Exact Kraus evolution of the pre-measurement state (`n <= 8`).
///
/// Applies the same channels in the same order as a trajectory. The Gaussian CZ phase
/// is averaged in closed form: element `(i, j)` picks up `exp(i k mu - k^2 sigma^2 / 2)`
/// with `k = b_i - b_j`, `b` the `|11>` indicator of the pair.
pub fn exact_noisy_density_matrix(circuit: &Circuit, model: &NoiseModel) -> Result<DensityMatrix> {
    let n = circuit.n_qubits();
    if model.n_qubits() != n {
        return Err(Error::Validity(format!("noise model covers {} qubits, circuit has {n}", model.n_qubits())));
    }
    model.validate()?;
    let mut rho = DensityMatrix::from_pure(&StateVector::zero_state(n)?)?;
    let (mu, sigma) = (model.cz_phase_mean_rad, model.cz_phase_std_rad);
    for layer in circuit.layers() {
        for op in layer {
            match *op {
                Op::Y2(q) => rho.apply_matrix1(&gates::y_half(), q),
                Op::H(q) => rho.apply_matrix1(&gates::hadamard(), q),
                Op::Cz(a, b) => {
                    rho.apply_diagonal2(cz_diag(0.0), a, b);
                    let both = move |i: usize| ((i >> a) & (i >> b) & 1) as f64;
                    rho.scale_elements(|i, j| {
                        let k = both(i) - both(j);
                        Complex64::from_polar((-0.5 * k * k * sigma * sigma).exp(), k * mu)
                    });
                }
                Op::Cx(a, b) => {
                    // CX = (I (x) H) CZ (I (x) H)
                    rho.apply_matrix1(&gates::hadamard(), b);
                    rho.apply_diagonal2(cz_diag(0.0), a, b);
                    rho.apply_matrix1(&gates::hadamard(), b);
                }
            }
        }
        let t = model.layer_ns(layer);
        for q in model.idle_pairs(layer) {
            rho.apply_diagonal2(phase_diag(model.zz_phase(q, t)), q, q + 1);
        }
        for q in 0..n {
            let p = model.damping_p(q, t);
            if p > 0.0 {
                rho.amplitude_damping(q, p);
            }
            let pz = model.flip_p(q, t);
            if pz > 0.0 {
                rho.dephase(q, pz);
            }
        }
    }
    Ok(rho)
}

/// Exact measured distributions of the noisy LC circuit, readout included (`n <= 8`).
pub fn exact_noisy_distributions(n: usize, model: &NoiseModel) -> Result<(ProbDist, ProbDist)> {
    let circuit = lc_circuit(n, GateSet::Cz)?;
    let rho = exact_noisy_density_matrix(&circuit, model)?;
    let coeffs = witness_coefficients(n)?;
    Ok((
        apply_readout_noise(&rho.basis_probabilities(&coeffs.basis_xz)?, &model.readout)?,
        apply_readout_noise(&rho.basis_probabilities(&coeffs.basis_zx)?, &model.readout)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ideal_distributions;

    #[test]
    fn damping_probability_examples() {
        assert!(channel_amplitude_damping(1e-9, 30.0).unwrap() < 1e-12);
        let p = channel_amplitude_damping(30_000.0, 30.0).unwrap();
        assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let p = channel_amplitude_damping(192.0, 29.6).unwrap();
        assert!((p - 6.465e-3).abs() < 1e-5, "{p}");
        assert!(matches!(channel_amplitude_damping(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(channel_amplitude_damping(1.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn tphi_examples() {
        assert!((derive_tphi(40.1, 7.9).unwrap() - 8.763).abs() < 2e-3);
        assert!((derive_tphi(34.7, 1.5).unwrap() - 1.5333).abs() < 1e-3);
        let (t, clamped) = derive_tphi_with_ceiling(20.0, 40.0, 500.0).unwrap();
        assert!(clamped && t == 500.0);
        assert!(derive_tphi(0.0, 1.0).is_err());
    }

    #[test]
    fn settings_from_toml() {
        let s = NoiseSettings::from_toml_str("[noise]\ncz_phase_std_rad = 0.02\nzz_mhz = 0.1\n").unwrap();
        assert_eq!(s.cz_phase_std_rad, 0.02);
        assert_eq!(s.cz_layer_ns, DEFAULT_CZ_LAYER_NS);
        assert!(NoiseSettings::from_toml_str("[noise]\nbogus = 1\n").is_err());
        assert_eq!(NoiseSettings::from_toml_str("[run]\nn = 3\n").unwrap(), NoiseSettings::default());
    }

    #[test]
    fn coherent_model_reproduces_ideal_distributions_exactly() {
        let (px, pz) = ideal_distributions(5).unwrap();
        let (nx, nz) = noisy_lc_distributions(5, &NoiseModel::ideal(5), 10, 1).unwrap();
        assert_eq!(px, nx);
        assert_eq!(pz, nz);
    }

    #[test]
    fn shortcut_matches_forced_trajectories() {
        let mut model = NoiseModel::ideal(4);
        model.readout = vec![TransitionMatrix::new(0.95, 0.9).unwrap(); 4];
        model.zz_mhz = vec![0.3; 3];
        model.cz_phase_mean_rad = 0.05;
        let a = noisy_lc_experiment(4, &model, 3000, 17).unwrap();
        let b = noisy_lc_experiment_with(4, &model, 3000, 17, RunOptions { force_trajectories: true, gate_set: None })
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_model_rejected() {
        let mut model = NoiseModel::ideal(3);
        model.t1_us[1] = -1.0;
        assert!(matches!(noisy_lc_experiment(3, &model, 10, 1), Err(Error::Validity(_))));
        assert!(matches!(noisy_lc_experiment(4, &NoiseModel::ideal(3), 10, 1), Err(Error::Validity(_))));
    }

    #[test]
    fn kraus_matches_trajectories_for_two_qubits() {
        let mut model = NoiseModel::ideal(2);
        model.t1_us = vec![0.5, 0.8];
        model.tphi_us = vec![0.7, 0.4];
        model.cz_phase_std_rad = 0.3;
        model.cz_phase_mean_rad = 0.1;
        model.zz_mhz = vec![0.5];
        let circuit = lc_circuit(2, GateSet::Cz).unwrap();
        let exact = exact_noisy_density_matrix(&circuit, &model).unwrap();
        let avg = trajectory_density_matrix(&circuit, &model, 20_000, 5).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let d = avg.mean[(i, j)] - exact.matrix()[(i, j)];
                assert!(d.re.abs() <= 4.0 * avg.stderr_re[(i, j)] + 1e-12, "({i},{j}) re {d}");
                assert!(d.im.abs() <= 4.0 * avg.stderr_im[(i, j)] + 1e-12, "({i},{j}) im {d}");
            }
        }
    }
}
