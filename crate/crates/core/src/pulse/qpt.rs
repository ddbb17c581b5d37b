// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Two-qubit process tomography by linear inversion.
//!
//! The process is written as `E(rho) = sum_mn chi_mn P_m rho P_n` over the 16 unnormalized
//! two-qubit Paulis `P_m = s_a (x) s_b`, `m = 4a + b`, so a trace-preserving map has
//! `Tr chi = 1`. Inputs are the 16 products of `|0>, |1>, |+>, |+i>`; outputs are
//! characterized by their 16 Pauli expectations.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::densmat::{hermitian_eigenvalues, DensityMatrix};
use crate::error::{Error, Result};
use crate::numeric::task_rng;
use crate::statevec::gates;

type C = Complex64;
pub type Mat4 = Matrix4<C>;

const DOMAIN_QPT: u64 = 0x9e7;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn to_m2(m: [[C; 2]; 2]) -> Matrix2<C> {
    Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn kron(a: &Matrix2<C>, b: &Matrix2<C>) -> Mat4 {
    Mat4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// `[I, X, Y, Z] (x) [I, X, Y, Z]`.
pub fn pauli_basis() -> Vec<Mat4> {
    let single = [gates::identity(), gates::pauli_x(), gates::pauli_y(), gates::pauli_z()].map(to_m2);
    (0..16).map(|m| kron(&single[m / 4], &single[m % 4])).collect()
}

/// `|0><0|, |1><1|, |+><+|, |+i><+i|` tensor products, first factor on the high bit.
pub fn input_states() -> Vec<Mat4> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let kets = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)], [c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(0.0, h)]];
    let proj = |k: &[C; 2]| Matrix2::from_fn(|i, j| k[i] * k[j].conj());
    (0..16).map(|j| kron(&proj(&kets[j / 4]), &proj(&kets[j % 4]))).collect()
}

/// Pauli coefficients `u_m = Tr(P_m U) / 4`, so that `chi_U = u u^dag`.
pub fn pauli_coefficients(u: &Mat4) -> Vec<C> {
    pauli_basis().iter().map(|p| (p * u).trace() / c(4.0, 0.0)).collect()
}

pub fn apply_chi(chi: &DMatrix<C>, rho: &Mat4) -> Mat4 {
    let ps = pauli_basis();
    let mut out = Mat4::zeros();
    for m in 0..16 {
        let left = ps[m] * rho;
        for n in 0..16 {
            let v = chi[(m, n)];
            if v != c(0.0, 0.0) {
                out += left * ps[n] * v;
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ProcessMatrix {
    #[serde(skip)]
    pub chi: DMatrix<C>,
    #[serde(skip)]
    pub chi_raw: DMatrix<C>,
    /// Sum of the magnitudes of the clipped negative eigenvalues.
    pub clipped_mass: f64,
    pub trace: f64,
    /// `max |sum_mn chi_mn P_n P_m - I|`.
    pub tp_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QptReport {
    pub process: ProcessMatrix,
    pub process_fidelity: f64,
    /// `(d F_pro + Tr chi) / (d + 1)` with `d = 4`.
    pub average_fidelity: f64,
    pub pp_fidelity: f64,
}

/// Hermitizes, clips negative eigenvalues and rescales to `min(Tr chi, 1)`.
///
/// Returns the projected matrix and the clipped mass.
pub fn project_chi(chi: &DMatrix<C>) -> (DMatrix<C>, f64) {
    let h = (chi + chi.adjoint()) * c(0.5, 0.0);
    let target = h.trace().re.min(1.0);
    let eig = nalgebra::SymmetricEigen::new(h);
    let mut clipped = 0.0;
    let dim = chi.nrows();
    let mut out = DMatrix::from_element(dim, dim, c(0.0, 0.0));
    for k in 0..dim {
        let lam = eig.eigenvalues[k];
        if lam < 0.0 {
            clipped -= lam;
            continue;
        }
        let v = eig.eigenvectors.column(k);
        out += v * v.adjoint() * c(lam, 0.0);
    }
    let tr = out.trace().re;
    if tr > 0.0 && clipped > 0.0 {
        out *= c(target.max(0.0) / tr, 0.0);
    }
    (out, clipped)
}

fn tp_residual(chi: &DMatrix<C>) -> f64 {
    let ps = pauli_basis();
    let mut s = Mat4::zeros();
    for m in 0..16 {
        for n in 0..16 {
            s += ps[n] * ps[m] * chi[(m, n)];
        }
    }
    (s - Mat4::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// How Pauli expectations are obtained from the executor outputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QptMode {
    Exact,
    /// Each non-identity expectation estimated from `shots` single-shot outcomes.
    Shots {
        shots: u64,
        seed: u64,
    },
}

/// Reconstructs the process of `executor` and scores it against `target`.
pub fn qpt_two_qubit<E>(executor: E, target: &Mat4, mode: QptMode) -> Result<QptReport>
where
    E: Fn(&Mat4) -> Result<Mat4> + Sync,
{
    let ps = pauli_basis();
    let inputs = input_states();
    let outputs: Vec<Mat4> = inputs.par_iter().map(&executor).collect::<Result<_>>()?;

    // lambda_jk = Tr(P_k E(rho_j))
    let mut lambda = Vec::with_capacity(256);
    for (j, out) in outputs.iter().enumerate() {
        let exact: Vec<f64> = ps.iter().map(|p| (p * out).trace().re).collect();
        match mode {
            QptMode::Exact => lambda.extend(exact.iter().map(|&v| c(v, 0.0))),
            QptMode::Shots { shots, seed } => {
                if shots == 0 {
                    return Err(Error::Domain("shots must be at least 1".into()));
                }
                let mut rng = task_rng(seed, DOMAIN_QPT, j as u64);
                let tr = exact[0];
                lambda.push(c(tr, 0.0));
                for &v in &exact[1..] {
                    let p = if tr > 0.0 { (0.5 * (1.0 + v / tr)).clamp(0.0, 1.0) } else { 0.5 };
                    let k = Binomial::new(shots, p).map_err(|e| Error::Tomography(e.to_string()))?.sample(&mut rng);
                    lambda.push(c(tr * (2.0 * k as f64 / shots as f64 - 1.0), 0.0));
                }
            }
        }
    }
    // beta[(16 j + k), (16 m + n)] = Tr(P_k P_m rho_j P_n)
    let mut beta = DMatrix::from_element(256, 256, c(0.0, 0.0));
    for (j, rho) in inputs.iter().enumerate() {
        for m in 0..16 {
            let prm = ps[m] * rho;
            for n in 0..16 {
                let t = prm * ps[n];
                for k in 0..16 {
                    beta[(16 * j + k, 16 * m + n)] = (ps[k] * t).trace();
                }
            }
        }
    }
    let rhs = nalgebra::DVector::from_vec(lambda);
    let sol = beta.lu().solve(&rhs).ok_or_else(|| Error::Tomography("reconstruction system is singular".into()))?;
    let chi_raw = DMatrix::from_fn(16, 16, |m, n| sol[16 * m + n]);
    let (chi, clipped_mass) = project_chi(&chi_raw);

    let u = pauli_coefficients(target);
    let mut fid = c(0.0, 0.0);
    for m in 0..16 {
        for n in 0..16 {
            fid += u[m].conj() * chi[(m, n)] * u[n];
        }
    }
    let trace = chi.trace().re;
    let process_fidelity = fid.re;
    let plus = Matrix2::from_element(c(0.5, 0.0));
    let pp = kron(&plus, &plus);
    let want = target * pp * target.adjoint();
    let got = apply_chi(&chi, &pp);
    let pp_fidelity = (want * got).trace().re;
    Ok(QptReport {
        process: ProcessMatrix { tp_residual: tp_residual(&chi), chi, chi_raw, clipped_mass, trace },
        process_fidelity,
        average_fidelity: (4.0 * process_fidelity + trace) / 5.0,
        pp_fidelity,
    })
}

pub fn cz_matrix() -> Mat4 {
    Mat4::from_diagonal(&nalgebra::Vector4::new(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)))
}

/// Executor applying `A rho A^dag` for a fixed (possibly non-unitary) 4x4 `A`.
pub fn kraus_executor(a: Mat4) -> impl Fn(&Mat4) -> Result<Mat4> + Sync {
    move |rho| Ok(a * rho * a.adjoint())
}

/// Ideal CZ followed by amplitude damping and pure dephasing on both qubits for
/// `duration_ns`. `t1_us[0]`, `tphi_us[0]` belong to the high-bit qubit.
pub fn noisy_cz_executor(
    t1_us: [f64; 2],
    tphi_us: [f64; 2],
    duration_ns: f64,
) -> Result<impl Fn(&Mat4) -> Result<Mat4> + Sync> {
    if t1_us.iter().chain(&tphi_us).any(|t| !(*t > 0.0)) || !(duration_ns > 0.0) {
        return Err(Error::Domain("coherence times and duration must be positive".into()));
    }
    let damp = t1_us.map(|t| -(-duration_ns * 1e-3 / t).exp_m1());
    let flip = tphi_us.map(|t| -0.5 * (-duration_ns * 1e-3 / t).exp_m1());
    let cz = cz_matrix();
    Ok(move |rho: &Mat4| {
        let mut dm = DensityMatrix::from_raw(2, DMatrix::from_fn(4, 4, |i, j| (cz * rho * cz)[(i, j)]));
        // high-bit qubit of the 4x4 index is register qubit 1
        for (slot, q) in [(0usize, 1usize), (1, 0)] {
            dm.amplitude_damping(q, damp[slot]);
            dm.dephase(q, flip[slot]);
        }
        let m = dm.matrix();
        Ok(Mat4::from_fn(|i, j| m[(i, j)]))
    })
}

/// Smallest eigenvalue of a Hermitian 16x16 chi.
pub fn min_eigenvalue(chi: &DMatrix<C>) -> f64 {
    hermitian_eigenvalues(chi)[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cz_has_unit_fidelity() {
        let r = qpt_two_qubit(kraus_executor(cz_matrix()), &cz_matrix(), QptMode::Exact).unwrap();
        assert!((r.process_fidelity - 1.0).abs() < 1e-8);
        assert!(r.process.tp_residual < 1e-8);
        assert!((r.pp_fidelity - 1.0).abs() < 1e-8);
    }

    #[test]
    fn phase_error_matches_closed_form() {
        let eps: f64 = 0.1;
        let mut a = cz_matrix();
        a[(3, 3)] = -C::from_polar(1.0, eps);
        let r = qpt_two_qubit(kraus_executor(a), &cz_matrix(), QptMode::Exact).unwrap();
        // |Tr(CZ^dag A)|^2 / 16 = |3 + e^{i eps}|^2 / 16
        let want = (C::new(3.0, 0.0) + C::from_polar(1.0, eps)).norm_sqr() / 16.0;
        assert!((r.process_fidelity - want).abs() < 1e-10);
    }

    #[test]
    fn round_trip_reproduces_outputs() {
        let exec = noisy_cz_executor([20.0, 30.0], [5.0, 8.0], 192.0).unwrap();
        let r = qpt_two_qubit(&exec, &cz_matrix(), QptMode::Exact).unwrap();
        for rho in input_states() {
            let d = apply_chi(&r.process.chi, &rho) - exec(&rho).unwrap();
            assert!(d.iter().all(|z| z.norm() < 1e-6));
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let mut chi = DMatrix::from_element(16, 16, c(0.0, 0.0));
        chi[(0, 0)] = c(1.05, 0.0);
        chi[(1, 1)] = c(-0.05, 0.0);
        chi[(0, 1)] = c(0.02, 0.01);
        chi[(1, 0)] = c(0.02, -0.01);
        let (p1, clipped) = project_chi(&chi);
        assert!(clipped > 0.0);
        assert!(p1.trace().re <= chi.trace().re + 1e-12);
        assert!(min_eigenvalue(&p1) > -1e-12);
        let (p2, clipped2) = project_chi(&p1);
        assert!(clipped2 < 1e-12);
        assert!((p2 - &p1).norm() < 1e-10);
    }

    #[test]
    fn shots_mode_converges() {
        let r = qpt_two_qubit(kraus_executor(cz_matrix()), &cz_matrix(), QptMode::Shots { shots: 200_000, seed: 3 })
            .unwrap();
        assert!((r.process_fidelity - 1.0).abs() < 2e-2, "{}", r.process_fidelity);
    }
}
