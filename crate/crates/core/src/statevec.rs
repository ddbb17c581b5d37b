// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Dense statevector engine.
//!
//! Qubit `q` (zero-based) is bit `q` of the basis index, so Q1 is the least-significant
//! bit. Bitstrings shown to users are printed most-significant qubit first (see
//! [`format_outcome`]).

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, task_rng};

pub const MAX_QUBITS: usize = 20;

/// Registers at least this large are updated with rayon.
const PAR_LEN: usize = 1 << 14;

const UNITARY_TOL: f64 = 1e-8;

pub type Matrix2 = [[Complex64; 2]; 2];
pub type Matrix4 = [[Complex64; 4]; 4];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pure state of `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// Single-qubit gate: 2x2 unitary on one target.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate1 {
    matrix: Matrix2,
    target: usize,
}

/// Two-qubit gate. The matrix acts on `|a b>` with row index `2*bit(a) + bit(b)`
/// for `targets = (a, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate2 {
    matrix: Matrix4,
    targets: (usize, usize),
}

/// Outcome probabilities over the computational basis.
///
/// Mitigated distributions may carry small negative entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbDist {
    n_qubits: usize,
    p: Vec<f64>,
}

/// Histogram of measured outcomes, dense over all `2^n` outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counts {
    n_qubits: usize,
    counts: Vec<u64>,
}

/// Per-qubit measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasBasis {
    X,
    Z,
}

/// A measurement setting: one basis letter per qubit, written Q1 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisWord(Vec<MeasBasis>);

fn check_unitary<const D: usize>(m: &[[Complex64; D]; D]) -> Result<()> {
    let mut worst = 0.0f64;
    for i in 0..D {
        for j in 0..D {
            let acc: Complex64 = m.iter().map(|row| row[i].conj() * row[j]).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - expect).norm());
        }
    }
    if worst > UNITARY_TOL {
        return Err(Error::Validity(format!("matrix is not unitary (max |U^dag U - I| = {worst:.3e})")));
    }
    Ok(())
}

pub mod gates {
    //! Standard gate matrices.
    use super::{c, Matrix2, Matrix4};
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn identity() -> Matrix2 {
        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
    }

    pub fn pauli_x() -> Matrix2 {
        [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
    }

    pub fn pauli_y() -> Matrix2 {
        [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]
    }

    pub fn pauli_z() -> Matrix2 {
        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]
    }

    pub fn hadamard() -> Matrix2 {
        let h = FRAC_1_SQRT_2;
        [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]
    }

    /// Y/2 = exp(-i pi Y / 4); maps |0> to |+> with no phase.
    pub fn y_half() -> Matrix2 {
        let h = FRAC_1_SQRT_2;
        [[c(h, 0.0), c(-h, 0.0)], [c(h, 0.0), c(h, 0.0)]]
    }

    /// S^dag followed by H: rotates the Y eigenbasis onto Z.
    pub fn y_to_z() -> Matrix2 {
        let h = FRAC_1_SQRT_2;
        [[c(h, 0.0), c(0.0, -h)], [c(h, 0.0), c(0.0, h)]]
    }

    /// Diagonal phase gate diag(1, e^{i phi}).
    pub fn phase(phi: f64) -> Matrix2 {
        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, phi)]]
    }

    /// Controlled phase diag(1, 1, 1, e^{i phi}); CZ is `cphase(pi)`.
    pub fn cphase(phi: f64) -> Matrix4 {
        let mut m = [[c(0.0, 0.0); 4]; 4];
        m[0][0] = c(1.0, 0.0);
        m[1][1] = c(1.0, 0.0);
        m[2][2] = c(1.0, 0.0);
        m[3][3] = Complex64::from_polar(1.0, phi);
        m
    }

    pub fn cz() -> Matrix4 {
        let mut m = cphase(0.0);
        m[3][3] = c(-1.0, 0.0);
        m
    }

    /// CNOT with the first target as control.
    pub fn cx() -> Matrix4 {
        let mut m = [[c(0.0, 0.0); 4]; 4];
        m[0][0] = c(1.0, 0.0);
        m[1][1] = c(1.0, 0.0);
        m[2][3] = c(1.0, 0.0);
        m[3][2] = c(1.0, 0.0);
        m
    }
}

impl Gate1 {
    pub fn new(matrix: Matrix2, target: usize) -> Result<Self> {
        check_unitary(&matrix)?;
        Ok(Self { matrix, target })
    }

    pub fn y_half(target: usize) -> Self {
        Self { matrix: gates::y_half(), target }
    }

    pub fn hadamard(target: usize) -> Self {
        Self { matrix: gates::hadamard(), target }
    }

    pub fn x(target: usize) -> Self {
        Self { matrix: gates::pauli_x(), target }
    }

    pub fn z(target: usize) -> Self {
        Self { matrix: gates::pauli_z(), target }
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.matrix
    }

    pub fn target(&self) -> usize {
        self.target
    }
}

impl Gate2 {
    pub fn new(matrix: Matrix4, targets: (usize, usize)) -> Result<Self> {
        if targets.0 == targets.1 {
            return Err(Error::Validity(format!(
                "two-qubit gate needs distinct targets, got ({}, {})",
                targets.0, targets.1
            )));
        }
        check_unitary(&matrix)?;
        Ok(Self { matrix, targets })
    }

    pub fn cz(a: usize, b: usize) -> Result<Self> {
        Self::new(gates::cz(), (a, b))
    }

    pub fn cx(control: usize, target: usize) -> Result<Self> {
        Self::new(gates::cx(), (control, target))
    }

    pub fn cphase(a: usize, b: usize, phi: f64) -> Result<Self> {
        Self::new(gates::cphase(phi), (a, b))
    }

    pub fn matrix(&self) -> &Matrix4 {
        &self.matrix
    }

    pub fn targets(&self) -> (usize, usize) {
        self.targets
    }

    fn is_diagonal(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| i == j || self.matrix[i][j] == c(0.0, 0.0)))
    }
}

impl StateVector {
    /// |0...0> on `n` qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Size(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
        }
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[0] = c(1.0, 0.0);
        Ok(Self { n_qubits: n, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two; the vector is normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Shape(format!("amplitude count {len} is not 2^n with n >= 1")));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::Size(format!("qubit count {n} exceeds {MAX_QUBITS}")));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Domain("amplitudes have zero or non-finite norm".into()));
        }
        Ok(Self { n_qubits: n, amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        compensated_sum(self.amps.iter().map(|a| a.norm_sqr()))
    }

    pub(crate) fn renormalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::Index(format!("qubit {q} out of range for a {}-qubit register", self.n_qubits)));
        }
        Ok(())
    }

    pub fn apply_gate1(&mut self, gate: &Gate1) -> Result<()> {
        self.check_qubit(gate.target)?;
        self.apply_matrix1(&gate.matrix, gate.target);
        Ok(())
    }

    /// Applies a 2x2 matrix (not necessarily unitary) to qubit `t`.
    pub(crate) fn apply_matrix1(&mut self, m: &Matrix2, t: usize) {
        let half = 1usize << t;
        let [[m00, m01], [m10, m11]] = *m;
        let kernel = |lo: &mut [Complex64], hi: &mut [Complex64]| {
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = m00 * x + m01 * y;
                *b = m10 * x + m11 * y;
            }
        };
        let len = self.amps.len();
        if len >= PAR_LEN && len / (2 * half) >= 64 {
            self.amps.par_chunks_exact_mut(2 * half).for_each(|chunk| {
                let (lo, hi) = chunk.split_at_mut(half);
                kernel(lo, hi);
            });
        } else if len >= PAR_LEN {
            for chunk in self.amps.chunks_exact_mut(2 * half) {
                let (lo, hi) = chunk.split_at_mut(half);
                lo.par_chunks_mut(4096).zip(hi.par_chunks_mut(4096)).for_each(|(l, h)| kernel(l, h));
            }
        } else {
            for chunk in self.amps.chunks_exact_mut(2 * half) {
                let (lo, hi) = chunk.split_at_mut(half);
                kernel(lo, hi);
            }
        }
    }

    pub fn apply_gate2(&mut self, gate: &Gate2) -> Result<()> {
        let (a, b) = gate.targets;
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::Validity(format!("duplicate targets ({a}, {b})")));
        }
        if gate.is_diagonal() {
            let d = [gate.matrix[0][0], gate.matrix[1][1], gate.matrix[2][2], gate.matrix[3][3]];
            self.apply_diagonal2(d, a, b);
            return Ok(());
        }
        let m = &gate.matrix;
        let (ma, mb) = (1usize << a, 1usize << b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let quarter = self.amps.len() >> 2;
        for k in 0..quarter {
            let base = insert_zero_bit(insert_zero_bit(k, lo), hi);
            let idx = [base, base | mb, base | ma, base | ma | mb];
            let v = idx.map(|i| self.amps[i]);
            for (row, &i) in idx.iter().enumerate() {
                self.amps[i] = m[row][0] * v[0] + m[row][1] * v[1] + m[row][2] * v[2] + m[row][3] * v[3];
            }
        }
        Ok(())
    }

    /// Multiplies each amplitude by `d[2*bit(a) + bit(b)]`.
    pub(crate) fn apply_diagonal2(&mut self, d: [Complex64; 4], a: usize, b: usize) {
        let kernel = |(i, amp): (usize, &mut Complex64)| {
            let k = (((i >> a) & 1) << 1) | ((i >> b) & 1);
            *amp *= d[k];
        };
        if self.amps.len() >= PAR_LEN {
            self.amps.par_iter_mut().enumerate().for_each(kernel);
        } else {
            self.amps.iter_mut().enumerate().for_each(kernel);
        }
    }

    /// Rotates each qubit whose letter is X with a Hadamard so that a computational
    /// measurement afterwards realizes the requested setting.
    pub fn basis_rotate(&mut self, basis: &BasisWord) -> Result<()> {
        if basis.len() != self.n_qubits {
            return Err(Error::Shape(format!("basis word has {} letters for {} qubits", basis.len(), self.n_qubits)));
        }
        let h = gates::hadamard();
        for (q, b) in basis.0.iter().enumerate() {
            if *b == MeasBasis::X {
                self.apply_matrix1(&h, q);
            }
        }
        Ok(())
    }

    pub fn probabilities(&self) -> ProbDist {
        ProbDist { n_qubits: self.n_qubits, p: self.amps.iter().map(|a| a.norm_sqr()).collect() }
    }

    /// Probability that qubit `q` reads 1.
    pub(crate) fn excited_population(&self, q: usize) -> f64 {
        let mask = 1usize << q;
        self.amps.iter().enumerate().filter(|(i, _)| i & mask != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Shape(format!(
                "inner product of {}- and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }
}

#[inline]
fn insert_zero_bit(k: usize, pos: usize) -> usize {
    let low = k & ((1usize << pos) - 1);
    ((k >> pos) << (pos + 1)) | low
}

/// `|0...0>` on `n` qubits.
pub fn zero_state(n: usize) -> Result<StateVector> {
    StateVector::zero_state(n)
}

impl BasisWord {
    pub fn new(letters: Vec<MeasBasis>) -> Self {
        Self(letters)
    }

    /// Parses a word such as `"XZXZ"`, first letter = first qubit.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                'X' | 'x' => Ok(MeasBasis::X),
                'Z' | 'z' => Ok(MeasBasis::Z),
                other => Err(Error::Parse(format!("basis letter '{other}' is not X or Z"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn all_z(n: usize) -> Self {
        Self(vec![MeasBasis::Z; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[MeasBasis] {
        &self.0
    }
}

impl fmt::Display for BasisWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(match b {
                MeasBasis::X => "X",
                MeasBasis::Z => "Z",
            })?;
        }
        Ok(())
    }
}

impl ProbDist {
    /// Validates length `2^n` and unit total within 1e-9.
    pub fn new(n_qubits: usize, p: Vec<f64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS || p.len() != 1 << n_qubits {
            return Err(Error::Shape(format!("distribution of length {} does not match {n_qubits} qubits", p.len())));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("distribution has non-finite entries".into()));
        }
        let total = compensated_sum(p.iter().copied());
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Normalization(format!("distribution sums to {total}")));
        }
        Ok(Self { n_qubits, p })
    }

    /// Skips the normalization check; used for intermediate linear images.
    pub(crate) fn from_raw(n_qubits: usize, p: Vec<f64>) -> Self {
        debug_assert_eq!(p.len(), 1 << n_qubits);
        Self { n_qubits, p }
    }

    /// Uniform distribution over all outcomes.
    pub fn uniform(n_qubits: usize) -> Result<Self> {
        let len = 1usize << n_qubits;
        Self::new(n_qubits, vec![1.0 / len as f64; len])
    }

    /// Empirical frequencies.
    pub fn from_counts(counts: &Counts) -> Result<Self> {
        let shots = counts.shots();
        if shots == 0 {
            return Err(Error::Domain("empty counts".into()));
        }
        let p = counts.counts.iter().map(|&k| k as f64 / shots as f64).collect();
        Ok(Self { n_qubits: counts.n_qubits, p })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.p.iter().copied())
    }

    /// Sum of the absolute values of negative entries.
    pub fn negative_mass(&self) -> f64 {
        self.p.iter().filter(|v| **v < 0.0).map(|v| -v).sum()
    }

    /// Distribution over the qubits `[offset, offset + len)`, summing out the rest.
    pub fn marginal(&self, offset: usize, len: usize) -> Result<ProbDist> {
        if len == 0 || offset + len > self.n_qubits {
            return Err(Error::Index(format!("window [{offset}, {}) outside {} qubits", offset + len, self.n_qubits)));
        }
        let mut out = vec![0.0; 1 << len];
        let mask = (1usize << len) - 1;
        for (i, v) in self.p.iter().enumerate() {
            out[(i >> offset) & mask] += v;
        }
        Ok(ProbDist { n_qubits: len, p: out })
    }
}

impl Counts {
    pub fn new(n_qubits: usize, counts: Vec<u64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS || counts.len() != 1 << n_qubits {
            return Err(Error::Shape(format!("{} count bins do not match {n_qubits} qubits", counts.len())));
        }
        Ok(Self { n_qubits, counts })
    }

    pub fn zeros(n_qubits: usize) -> Self {
        Self { n_qubits, counts: vec![0; 1 << n_qubits] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn get(&self, outcome: usize) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub(crate) fn record(&mut self, outcome: usize) {
        self.counts[outcome] += 1;
    }

    /// Non-zero bins in outcome order.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k))
    }
}

/// Draws `shots` outcomes from `dist` as one multinomial sample.
///
/// Uses sequential conditional binomials, so the cost is O(2^n) regardless of `shots`.
pub fn sample(dist: &ProbDist, shots: u64, seed: u64) -> Result<Counts> {
    let mut rng = task_rng(seed, 0x5a4d_706c, 0);
    sample_with(dist, shots, &mut rng)
}

pub(crate) fn sample_with<R: Rng + ?Sized>(dist: &ProbDist, shots: u64, rng: &mut R) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::Domain("shots must be at least 1".into()));
    }
    if let Some((i, v)) = dist.p.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::Domain(format!("cannot sample a distribution with negative entry p[{i}] = {v}")));
    }
    let mut counts = vec![0u64; dist.p.len()];
    let mut remaining = shots;
    let mut mass_left = compensated_sum(dist.p.iter().copied());
    for (i, &p) in dist.p.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == dist.p.len() || p >= mass_left {
            counts[i] = remaining;
            break;
        }
        let q = (p / mass_left).clamp(0.0, 1.0);
        let k = if q == 0.0 {
            0
        } else {
            Binomial::new(remaining, q).map_err(|e| Error::Domain(format!("binomial draw failed: {e}")))?.sample(rng)
        };
        counts[i] = k;
        remaining -= k;
        mass_left -= p;
    }
    Counts::new(dist.n_qubits, counts)
}

/// Formats an outcome index as a bitstring, highest qubit first.
pub fn format_outcome(outcome: usize, n_qubits: usize) -> String {
    (0..n_qubits).rev().map(|q| if (outcome >> q) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Inverse of [`format_outcome`].
pub fn parse_outcome(s: &str) -> Result<(usize, usize)> {
    let n = s.len();
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Parse(format!("bitstring '{s}' has unsupported length")));
    }
    let mut idx = 0usize;
    for ch in s.chars() {
        idx <<= 1;
        match ch {
            '0' => {}
            '1' => idx |= 1,
            other => return Err(Error::Parse(format!("bitstring '{s}' contains '{other}'"))),
        }
    }
    Ok((idx, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn zero_state_shapes() {
        let s = zero_state(1).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = zero_state(3).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| *a == c(0.0, 0.0)));
        assert!(matches!(zero_state(21), Err(Error::Size(_))));
        assert!(matches!(zero_state(0), Err(Error::Size(_))));
    }

    #[test]
    fn y_half_makes_plus() {
        let mut s = zero_state(1).unwrap();
        s.apply_gate1(&Gate1::y_half(0)).unwrap();
        assert!(close(s.amplitudes()[0], c(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(close(s.amplitudes()[1], c(FRAC_1_SQRT_2, 0.0), 1e-15));
    }

    #[test]
    fn x_flips() {
        let mut s = zero_state(1).unwrap();
        s.apply_gate1(&Gate1::x(0)).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn non_unitary_rejected() {
        let m = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]];
        assert!(matches!(Gate1::new(m, 0), Err(Error::Validity(_))));
    }

    #[test]
    fn cz_on_plus_plus() {
        let mut s = zero_state(2).unwrap();
        s.apply_gate1(&Gate1::y_half(0)).unwrap();
        s.apply_gate1(&Gate1::y_half(1)).unwrap();
        s.apply_gate2(&Gate2::cz(0, 1).unwrap()).unwrap();
        let want = [0.5, 0.5, 0.5, -0.5];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!(close(*a, c(w, 0.0), 1e-15));
        }
    }

    #[test]
    fn cz_trivial_on_zero() {
        let mut s = zero_state(2).unwrap();
        s.apply_gate2(&Gate2::cz(0, 1).unwrap()).unwrap();
        assert_eq!(s, zero_state(2).unwrap());
    }

    #[test]
    fn duplicate_targets_rejected() {
        assert!(matches!(Gate2::cz(1, 1), Err(Error::Validity(_))));
    }

    #[test]
    fn out_of_range_target() {
        let mut s = zero_state(2).unwrap();
        assert!(matches!(s.apply_gate1(&Gate1::x(2)), Err(Error::Index(_))));
    }

    #[test]
    fn cx_truth_table() {
        // control qubit 1, target qubit 0; start |q1=1, q0=0> = index 2
        let mut amps = vec![c(0.0, 0.0); 4];
        amps[2] = c(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.apply_gate2(&Gate2::cx(1, 0).unwrap()).unwrap();
        assert!(close(s.amplitudes()[3], c(1.0, 0.0), 1e-15));
    }

    #[test]
    fn basis_rotation() {
        let mut s = zero_state(1).unwrap();
        s.apply_gate1(&Gate1::hadamard(0)).unwrap();
        s.basis_rotate(&BasisWord::parse("X").unwrap()).unwrap();
        assert!(close(s.amplitudes()[0], c(1.0, 0.0), 1e-15));

        let mut s = zero_state(3).unwrap();
        s.apply_gate1(&Gate1::y_half(1)).unwrap();
        let before = s.clone();
        s.basis_rotate(&BasisWord::all_z(3)).unwrap();
        assert_eq!(s, before);

        assert!(matches!(s.basis_rotate(&BasisWord::parse("XZ").unwrap()), Err(Error::Shape(_))));
    }

    #[test]
    fn probabilities_simple() {
        assert_eq!(zero_state(1).unwrap().probabilities().as_slice(), &[1.0, 0.0]);
        let mut s = zero_state(1).unwrap();
        s.apply_gate1(&Gate1::hadamard(0)).unwrap();
        let p = s.probabilities();
        assert!((p.as_slice()[0] - 0.5).abs() < 1e-15 && (p.as_slice()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sample_deterministic_and_errors() {
        let d = ProbDist::new(1, vec![1.0, 0.0]).unwrap();
        let k = sample(&d, 100, 7).unwrap();
        assert_eq!(k.as_slice(), &[100, 0]);

        let bad = ProbDist::from_raw(1, vec![1.01, -0.01]);
        assert!(matches!(sample(&bad, 10, 1), Err(Error::Domain(_))));
        assert!(matches!(sample(&d, 0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn sample_fair_coin_within_five_sigma() {
        let d = ProbDist::new(1, vec![0.5, 0.5]).unwrap();
        let k = sample(&d, 1_000_000, 2024).unwrap();
        assert_eq!(k.shots(), 1_000_000);
        assert!((k.get(0) as f64 - 500_000.0).abs() < 5.0 * 500.0);
    }

    #[test]
    fn outcome_formatting_is_high_qubit_first() {
        assert_eq!(format_outcome(1, 4), "0001");
        assert_eq!(format_outcome(8, 4), "1000");
        assert_eq!(parse_outcome("1000").unwrap(), (8, 4));
    }

    #[test]
    fn marginal_sums_out() {
        let d = ProbDist::new(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let m = d.marginal(1, 1).unwrap();
        assert!((m.as_slice()[0] - 0.3).abs() < 1e-15);
        assert!((m.as_slice()[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn sample_with_rng_conserves_shots() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let d = ProbDist::new(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let k = sample_with(&d, 12345, &mut rng).unwrap();
        assert_eq!(k.shots(), 12345);
    }
}
