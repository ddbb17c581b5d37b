// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Exact density-matrix toolkit for small registers (n <= 8).
//!
//! Used as the oracle layer: true LC fidelities, partial traces, negativity and the
//! biseparable ensembles against which the two-setting witness is checked.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cluster::lc_state;
use crate::error::{Error, Result};
use crate::numeric::task_rng;
use crate::statevec::{gates, BasisWord, Matrix2, MeasBasis, ProbDist, StateVector};

pub const MAX_DM_QUBITS: usize = 8;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues down to this value count as non-negative.
pub const PSD_TOL: f64 = 1e-9;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    rho: DMatrix<Complex64>,
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DM_QUBITS {
        return Err(Error::Size(format!("density matrices support 1..={MAX_DM_QUBITS} qubits, got {n}")));
    }
    Ok(())
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: DMatrix<Complex64>) -> Result<Self> {
        let dim = rho.nrows();
        if dim != rho.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Shape(format!("{}x{} is not a qubit density matrix", rho.nrows(), rho.ncols())));
        }
        let n = dim.trailing_zeros() as usize;
        check_size(n)?;
        let herm_err = (&rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > HERMITIAN_TOL {
            return Err(Error::Validity(format!("matrix is not Hermitian (max deviation {herm_err:.3e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Normalization(format!("trace is {tr}")));
        }
        let min_ev = hermitian_eigenvalues(&rho)[0];
        if min_ev < -PSD_TOL {
            return Err(Error::Validity(format!("matrix has eigenvalue {min_ev:.3e} < 0")));
        }
        Ok(Self { n_qubits: n, rho })
    }

    pub(crate) fn from_raw(n_qubits: usize, rho: DMatrix<Complex64>) -> Self {
        Self { n_qubits, rho }
    }

    /// `|psi><psi|`.
    pub fn from_pure(state: &StateVector) -> Result<Self> {
        let n = state.n_qubits();
        check_size(n)?;
        let a = state.amplitudes();
        let dim = a.len();
        let rho = DMatrix::from_fn(dim, dim, |i, j| a[i] * a[j].conj());
        Ok(Self { n_qubits: n, rho })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_size(n)?;
        let dim = 1usize << n;
        let v = Complex64::new(1.0 / dim as f64, 0.0);
        Ok(Self { n_qubits: n, rho: DMatrix::from_diagonal_element(dim, dim, v) })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.rho)
    }

    /// `<psi|rho|psi>`.
    pub fn overlap(&self, state: &StateVector) -> Result<f64> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit state against a {}-qubit density matrix",
                state.n_qubits(),
                self.n_qubits
            )));
        }
        let a = state.amplitudes();
        let mut acc = zero();
        for i in 0..a.len() {
            let mut row = zero();
            for (j, aj) in a.iter().enumerate() {
                row += self.rho[(i, j)] * aj;
            }
            acc += a[i].conj() * row;
        }
        Ok(acc.re)
    }

    /// `rho -> M rho M^dag` for a 2x2 operator on qubit `q`.
    pub fn apply_matrix1(&mut self, m: &Matrix2, q: usize) {
        let dim = self.dim();
        let bit = 1usize << q;
        // left multiply on rows
        for col in 0..dim {
            for i0 in (0..dim).filter(|i| i & bit == 0) {
                let i1 = i0 | bit;
                let (x, y) = (self.rho[(i0, col)], self.rho[(i1, col)]);
                self.rho[(i0, col)] = m[0][0] * x + m[0][1] * y;
                self.rho[(i1, col)] = m[1][0] * x + m[1][1] * y;
            }
        }
        // right multiply by M^dag on columns
        for row in 0..dim {
            for j0 in (0..dim).filter(|j| j & bit == 0) {
                let j1 = j0 | bit;
                let (x, y) = (self.rho[(row, j0)], self.rho[(row, j1)]);
                self.rho[(row, j0)] = x * m[0][0].conj() + y * m[0][1].conj();
                self.rho[(row, j1)] = x * m[1][0].conj() + y * m[1][1].conj();
            }
        }
    }

    /// `rho -> D rho D^dag` for a diagonal two-qubit operator, `d[2*bit(a) + bit(b)]`.
    pub fn apply_diagonal2(&mut self, d: [Complex64; 4], a: usize, b: usize) {
        let k = |i: usize| (((i >> a) & 1) << 1) | ((i >> b) & 1);
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                self.rho[(i, j)] *= d[k(i)] * d[k(j)].conj();
            }
        }
    }

    /// Amplitude damping with decay probability `p` on qubit `q`.
    pub fn amplitude_damping(&mut self, q: usize, p: f64) {
        let k0 = [[Complex64::new(1.0, 0.0), zero()], [zero(), Complex64::new((1.0 - p).sqrt(), 0.0)]];
        let k1 = [[zero(), Complex64::new(p.sqrt(), 0.0)], [zero(), zero()]];
        let mut jumped = self.clone();
        jumped.apply_matrix1(&k1, q);
        self.apply_matrix1(&k0, q);
        self.rho += jumped.rho;
    }

    /// Phase flip with probability `p` on qubit `q`.
    pub fn dephase(&mut self, q: usize, p: f64) {
        let mut flipped = self.clone();
        flipped.apply_matrix1(&gates::pauli_z(), q);
        self.rho = &self.rho * Complex64::new(1.0 - p, 0.0) + flipped.rho * Complex64::new(p, 0.0);
    }

    /// Multiplies each element `(i, j)` by `f(i, j)`; used for classically averaged phases.
    pub(crate) fn scale_elements(&mut self, f: impl Fn(usize, usize) -> Complex64) {
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                self.rho[(i, j)] *= f(i, j);
            }
        }
    }

    /// Outcome distribution for a measurement setting.
    pub fn basis_probabilities(&self, basis: &BasisWord) -> Result<ProbDist> {
        if basis.len() != self.n_qubits {
            return Err(Error::Shape(format!("basis word has {} letters for {} qubits", basis.len(), self.n_qubits)));
        }
        let mut r = self.clone();
        let h = gates::hadamard();
        for (q, b) in basis.letters().iter().enumerate() {
            if *b == MeasBasis::X {
                r.apply_matrix1(&h, q);
            }
        }
        let p = (0..r.dim()).map(|i| r.rho[(i, i)].re).collect();
        Ok(ProbDist::from_raw(self.n_qubits, p))
    }

    /// Reduced state on `keep` (kept qubits are renumbered in ascending order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = self.check_subset(keep)?;
        if keep.is_empty() {
            return Err(Error::Domain("partial trace must keep at least one qubit".into()));
        }
        let traced: Vec<usize> = (0..self.n_qubits).filter(|q| !keep.contains(q)).collect();
        let expand = |bits: usize, positions: &[usize]| {
            positions.iter().enumerate().fold(0usize, |acc, (k, &q)| acc | (((bits >> k) & 1) << q))
        };
        let dk = 1usize << keep.len();
        let dt = 1usize << traced.len();
        let mut out = DMatrix::from_element(dk, dk, zero());
        for i in 0..dk {
            let ei = expand(i, &keep);
            for j in 0..dk {
                let ej = expand(j, &keep);
                let mut acc = zero();
                for t in 0..dt {
                    let et = expand(t, &traced);
                    acc += self.rho[(ei | et, ej | et)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix { n_qubits: keep.len(), rho: out })
    }

    /// Partial transpose on the qubits in `subsystem`.
    pub fn partial_transpose(&self, subsystem: &[usize]) -> Result<DMatrix<Complex64>> {
        let sub = self.check_subset(subsystem)?;
        let mask = sub.iter().fold(0usize, |m, q| m | (1 << q));
        let dim = self.dim();
        Ok(DMatrix::from_fn(dim, dim, |i, j| {
            // swap the subsystem bits of row and column
            let i2 = (i & !mask) | (j & mask);
            let j2 = (j & !mask) | (i & mask);
            self.rho[(i2, j2)]
        }))
    }

    fn check_subset(&self, qs: &[usize]) -> Result<Vec<usize>> {
        let mut v = qs.to_vec();
        v.sort_unstable();
        v.dedup();
        if v.len() != qs.len() {
            return Err(Error::Domain("qubit subset has duplicates".into()));
        }
        if let Some(q) = v.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::Index(format!("qubit {q} out of range for {} qubits", self.n_qubits)));
        }
        Ok(v)
    }
}

/// Convex combination of density matrices.
pub fn mix(terms: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
    let first = terms.first().ok_or_else(|| Error::Domain("empty mixture".into()))?;
    let n = first.1.n_qubits;
    if let Some(w) = terms.iter().map(|t| t.0).find(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::Domain(format!("mixture weight {w} is negative or non-finite")));
    }
    let total: f64 = terms.iter().map(|t| t.0).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Normalization(format!("mixture weights sum to {total}")));
    }
    if terms.iter().any(|t| t.1.n_qubits != n) {
        return Err(Error::Shape("mixture of different register sizes".into()));
    }
    let dim = first.1.dim();
    let mut rho = DMatrix::from_element(dim, dim, zero());
    for (w, dm) in terms {
        rho += &dm.rho * Complex64::new(*w, 0.0);
    }
    Ok(DensityMatrix { n_qubits: n, rho })
}

/// Logarithm-free negativity `(||rho^{T_A}||_1 - 1) / 2` for the bipartition `A | rest`.
pub fn negativity(rho: &DensityMatrix, subsystem_a: &[usize]) -> Result<f64> {
    let pt = rho.partial_transpose(subsystem_a)?;
    let trace_norm: f64 = hermitian_eigenvalues(&pt).iter().map(|e| e.abs()).sum();
    Ok(((trace_norm - 1.0) / 2.0).max(0.0))
}

/// `Tr(rho |LC_n><LC_n|)`.
pub fn true_fidelity(rho: &DensityMatrix, n: usize) -> Result<f64> {
    if rho.n_qubits != n {
        return Err(Error::Shape(format!("{}-qubit density matrix against LC_{n}", rho.n_qubits)));
    }
    check_size(n)?;
    rho.overlap(&lc_state(n)?)
}

/// Haar-random pure state: i.i.d. standard complex Gaussian amplitudes, normalized.
pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    let amps =
        (0..1usize << n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    StateVector::from_amplitudes(amps)
}

/// Random weights on the simplex (normalized exponentials).
fn random_weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Mixture of `components` random pure states with random weights.
pub fn random_mixed(n: usize, components: usize, seed: u64) -> Result<DensityMatrix> {
    check_size(n)?;
    if components == 0 {
        return Err(Error::Domain("need at least one mixture component".into()));
    }
    let mut rng = task_rng(seed, 0xd3_0001, 0);
    let weights = random_weights(components, &mut rng);
    let terms = weights
        .into_iter()
        .map(|w| Ok((w, DensityMatrix::from_pure(&random_pure(n, &mut rng)?)?)))
        .collect::<Result<Vec<_>>>()?;
    mix(&terms)
}

/// Mixture of `components` random states, each a product across the cut
/// `{0..cut} | {cut..n}`.
pub fn random_biseparable(n: usize, cut: usize, components: usize, seed: u64) -> Result<DensityMatrix> {
    check_size(n)?;
    if cut == 0 || cut >= n {
        return Err(Error::Domain(format!("cut {cut} must satisfy 1 <= cut < {n}")));
    }
    if components == 0 {
        return Err(Error::Domain("need at least one mixture component".into()));
    }
    let mut rng = task_rng(seed, 0xd3_0002, 0);
    let weights = random_weights(components, &mut rng);
    let terms = weights
        .into_iter()
        .map(|w| {
            let a = random_pure(cut, &mut rng)?;
            let b = random_pure(n - cut, &mut rng)?;
            Ok((w, DensityMatrix::from_pure(&product_state(&a, &b)?)?))
        })
        .collect::<Result<Vec<_>>>()?;
    mix(&terms)
}

/// `|a> (x) |b>` with `a` on the low qubits.
pub fn product_state(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let na = a.n_qubits();
    let amps = b.amplitudes().iter().flat_map(|bb| a.amplitudes().iter().map(move |aa| aa * bb)).collect::<Vec<_>>();
    debug_assert_eq!(amps.len(), 1 << (na + b.n_qubits()));
    StateVector::from_amplitudes(amps)
}

/// `(|00> + |11>)/sqrt 2`.
pub fn epr() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| Complex64::new(x, 0.0);
    StateVector::from_amplitudes(vec![c(h), c(0.0), c(0.0), c(h)]).expect("valid EPR amplitudes")
}

/// Three-qubit mixture `1/2 |EPR_12><EPR_12| (x) |0_3><0_3| + 1/2 |0_1><0_1| (x) |EPR_23><EPR_23|`,
/// returned with its two components. Qubits 1, 2, 3 are indices 0, 1, 2.
pub fn counterexample_rho123() -> Result<(DensityMatrix, [DensityMatrix; 2])> {
    let zero1 = StateVector::zero_state(1)?;
    let comp_a = DensityMatrix::from_pure(&product_state(&epr(), &zero1)?)?;
    let comp_b = DensityMatrix::from_pure(&product_state(&zero1, &epr())?)?;
    let rho = mix(&[(0.5, comp_a.clone()), (0.5, comp_b.clone())])?;
    Ok((rho, [comp_a, comp_b]))
}
