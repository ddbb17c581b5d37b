// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Linear-cluster circuits, stabilizers and witness coefficients.
//!
//! Stabilizer indices are one-based (`s_1 .. s_n`) to match the usual chain labelling;
//! qubit indices inside circuits and states are zero-based.

use std::fmt;

use num_complex::Complex64;

use crate::densmat::DensityMatrix;
use crate::error::{Error, Result};
use crate::statevec::{BasisWord, Gate1, Gate2, MeasBasis, ProbDist, StateVector, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Signed Pauli word; `letters[q]` acts on qubit `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    negative: bool,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, negative: bool) -> Self {
        Self { letters, negative }
    }

    pub fn identity(n: usize) -> Self {
        Self { letters: vec![Pauli::I; n], negative: false }
    }

    /// Parses `"XZII"` or `"-ZXZ"`; the first letter is the first qubit.
    pub fn parse(s: &str) -> Result<Self> {
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let letters = body
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("'{other}' is not a Pauli letter"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { letters, negative })
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    fn masks(&self) -> (usize, usize, u32) {
        let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
        for (q, p) in self.letters.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x |= 1 << q,
                Pauli::Z => z |= 1 << q,
                Pauli::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }

    /// Symplectic commutation test.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let (x1, z1, _) = self.masks();
        let (x2, z2, _) = other.masks();
        ((x1 & z2).count_ones() + (z1 & x2).count_ones()) % 2 == 0
    }

    /// Product `self * other` for commuting words (the result is Hermitian).
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::Shape("Pauli words of different length".into()));
        }
        if !self.commutes_with(other) {
            return Err(Error::Validity("product of anticommuting Pauli words is not Hermitian".into()));
        }
        // phase tracked as a power of i
        let mut phase = 0u32;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(a, b)| {
                use Pauli::*;
                let (p, k) = match (a, b) {
                    (I, q) | (q, I) => (*q, 0),
                    (X, X) | (Y, Y) | (Z, Z) => (I, 0),
                    (X, Y) => (Z, 1),
                    (Y, X) => (Z, 3),
                    (Y, Z) => (X, 1),
                    (Z, Y) => (X, 3),
                    (Z, X) => (Y, 1),
                    (X, Z) => (Y, 3),
                };
                phase += k;
                p
            })
            .collect();
        debug_assert_eq!(phase % 2, 0);
        let negative = self.negative ^ other.negative ^ (phase % 4 == 2);
        Ok(PauliString { letters, negative })
    }

    /// Image of basis state `i`: `P|i> = phase * |i ^ x_mask>`.
    pub(crate) fn action(&self) -> PauliAction {
        let (x, z, ny) = self.masks();
        let mut base = match ny % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        if self.negative {
            base = -base;
        }
        PauliAction { x_mask: x, z_mask: z, base }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PauliAction {
    pub x_mask: usize,
    pub z_mask: usize,
    pub base: Complex64,
}

impl PauliAction {
    #[inline]
    pub fn phase(&self, i: usize) -> Complex64 {
        if (i & self.z_mask).count_ones() % 2 == 1 {
            -self.base
        } else {
            self.base
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        for p in &self.letters {
            f.write_str(match p {
                Pauli::I => "I",
                Pauli::X => "X",
                Pauli::Y => "Y",
                Pauli::Z => "Z",
            })?;
        }
        Ok(())
    }
}

/// `s_i = Z_{i-1} X_i Z_{i+1}` on an open chain of `n` qubits, `1 <= i <= n`.
pub fn stabilizer(i: usize, n: usize) -> Result<PauliString> {
    if n == 0 || i == 0 || i > n {
        return Err(Error::Index(format!("stabilizer index {i} outside 1..={n}")));
    }
    let mut letters = vec![Pauli::I; n];
    letters[i - 1] = Pauli::X;
    if i >= 2 {
        letters[i - 2] = Pauli::Z;
    }
    if i < n {
        letters[i] = Pauli::Z;
    }
    Ok(PauliString::new(letters, false))
}

/// Anything a Pauli expectation value can be taken on.
pub trait PauliTarget {
    fn n_qubits(&self) -> usize;
    fn expectation_unchecked(&self, p: &PauliString) -> f64;
}

impl PauliTarget for StateVector {
    fn n_qubits(&self) -> usize {
        StateVector::n_qubits(self)
    }

    fn expectation_unchecked(&self, p: &PauliString) -> f64 {
        let act = p.action();
        let amps = self.amplitudes();
        amps.iter().enumerate().map(|(i, a)| (amps[i ^ act.x_mask].conj() * act.phase(i) * a).re).sum()
    }
}

impl PauliTarget for DensityMatrix {
    fn n_qubits(&self) -> usize {
        DensityMatrix::n_qubits(self)
    }

    fn expectation_unchecked(&self, p: &PauliString) -> f64 {
        let act = p.action();
        let rho = self.matrix();
        (0..rho.nrows()).map(|a| (rho[(a, a ^ act.x_mask)] * act.phase(a)).re).sum()
    }
}

/// `<psi|P|psi>` or `Tr(rho P)`.
pub fn pauli_expectation<T: PauliTarget + ?Sized>(target: &T, p: &PauliString) -> Result<f64> {
    if target.n_qubits() != p.n_qubits() {
        return Err(Error::Shape(format!("{}-qubit Pauli word on a {}-qubit state", p.n_qubits(), target.n_qubits())));
    }
    Ok(target.expectation_unchecked(p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateSet {
    Cz,
    Cx,
}

/// A named circuit operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Y2(usize),
    H(usize),
    Cz(usize, usize),
    Cx(usize, usize),
}

impl Op {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Op::Y2(q) | Op::H(q) => vec![q],
            Op::Cz(a, b) | Op::Cx(a, b) => vec![a, b],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Op::Y2(_) => "Y2",
            Op::H(_) => "H",
            Op::Cz(..) => "CZ",
            Op::Cx(..) => "CX",
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Op::Cz(..) | Op::Cx(..))
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        match *self {
            Op::Y2(q) => state.apply_gate1(&Gate1::y_half(q)),
            Op::H(q) => state.apply_gate1(&Gate1::hadamard(q)),
            Op::Cz(a, b) => state.apply_gate2(&Gate2::cz(a, b)?),
            Op::Cx(a, b) => state.apply_gate2(&Gate2::cx(a, b)?),
        }
    }
}

/// Layered circuit; operations within a layer act on disjoint qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    n_qubits: usize,
    layers: Vec<Vec<Op>>,
}

impl Circuit {
    pub fn new(n_qubits: usize, layers: Vec<Vec<Op>>) -> Result<Self> {
        for (li, layer) in layers.iter().enumerate() {
            let mut used = vec![false; n_qubits];
            for op in layer {
                let qs = op.qubits();
                if qs.len() == 2 && qs[0] == qs[1] {
                    return Err(Error::Validity(format!("layer {li}: {} with duplicate target", op.name())));
                }
                for q in qs {
                    if q >= n_qubits {
                        return Err(Error::Index(format!("layer {li}: qubit {q} out of range")));
                    }
                    if std::mem::replace(&mut used[q], true) {
                        return Err(Error::Validity(format!("layer {li}: qubit {q} used twice")));
                    }
                }
            }
        }
        Ok(Self { n_qubits, layers })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> &[Vec<Op>] {
        &self.layers
    }

    pub fn two_qubit_count(&self) -> usize {
        self.layers.iter().flatten().filter(|op| op.is_two_qubit()).count()
    }

    /// Layers that contain at least one two-qubit gate.
    pub fn entangling_layers(&self) -> usize {
        self.layers.iter().filter(|l| l.iter().any(Op::is_two_qubit)).count()
    }

    pub fn run(&self, state: &mut StateVector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Shape(format!("{}-qubit circuit on a {}-qubit state", self.n_qubits, state.n_qubits())));
        }
        for op in self.layers.iter().flatten() {
            op.apply(state)?;
        }
        Ok(())
    }

    /// Line format: `<name> <q...> <layer>` with zero-based qubits, preceded by a
    /// `qubits <n>` header.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for (li, layer) in self.layers.iter().enumerate() {
            for op in layer {
                let qs: Vec<String> = op.qubits().iter().map(|q| q.to_string()).collect();
                out.push_str(&format!("{} {} {}\n", op.name(), qs.join(" "), li));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n_qubits = None;
        let mut layers: Vec<Vec<Op>> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse(format!("line {}: '{s}' is not an index", ln + 1)))
            };
            if fields[0] == "qubits" && fields.len() == 2 {
                n_qubits = Some(num(fields[1])?);
                continue;
            }
            let (op, layer) = match (fields[0], fields.len()) {
                ("Y2", 3) => (Op::Y2(num(fields[1])?), num(fields[2])?),
                ("H", 3) => (Op::H(num(fields[1])?), num(fields[2])?),
                ("CZ", 4) => (Op::Cz(num(fields[1])?, num(fields[2])?), num(fields[3])?),
                ("CX", 4) => (Op::Cx(num(fields[1])?, num(fields[2])?), num(fields[3])?),
                _ => return Err(Error::Parse(format!("line {}: cannot parse '{line}'", ln + 1))),
            };
            if layers.len() <= layer {
                layers.resize_with(layer + 1, Vec::new);
            }
            layers[layer].push(op);
        }
        let n = n_qubits.ok_or_else(|| Error::Parse("missing 'qubits <n>' header".into()))?;
        Circuit::new(n, layers)
    }
}

/// LC preparation circuit on `n` qubits.
pub fn lc_circuit(n: usize, gate_set: GateSet) -> Result<Circuit> {
    lc_circuit_embedded(n, 0, n, gate_set)
}

/// LC circuit on the chain `[offset, offset + len)` of a `total`-qubit register; the
/// remaining qubits stay in |0>.
///
/// CZ gate set: one Y/2 layer, then CZ(i, i+1) grouped by `i mod 3` into at most three
/// layers (chain position 1-based). On 12 qubits this gives
/// {12-11, 9-8, 6-5, 3-2}, {11-10, 8-7, 5-4, 2-1}, {10-9, 7-6, 4-3}.
///
/// CX gate set: H on the first chain qubit, then CX(i, i+1) followed by H(i+1) down the
/// chain, which yields the LC state exactly.
pub fn lc_circuit_embedded(total: usize, offset: usize, len: usize, gate_set: GateSet) -> Result<Circuit> {
    if !(2..=MAX_QUBITS).contains(&len) {
        return Err(Error::Size(format!("chain length {len} outside 2..={MAX_QUBITS}")));
    }
    if total > MAX_QUBITS || offset + len > total {
        return Err(Error::Size(format!("chain [{offset}, {}) does not fit a {total}-qubit register", offset + len)));
    }
    let q = |pos: usize| offset + pos - 1; // chain position (1-based) to register index
    let layers = match gate_set {
        GateSet::Cz => {
            let mut layers = vec![(1..=len).map(|p| Op::Y2(q(p))).collect::<Vec<_>>()];
            for class in [2usize, 1, 0] {
                let layer: Vec<Op> =
                    (1..len).rev().filter(|i| i % 3 == class).map(|i| Op::Cz(q(i + 1), q(i))).collect();
                if !layer.is_empty() {
                    layers.push(layer);
                }
            }
            layers
        }
        GateSet::Cx => {
            let mut layers = vec![vec![Op::H(q(1))]];
            for i in 1..len {
                layers.push(vec![Op::Cx(q(i), q(i + 1))]);
                layers.push(vec![Op::H(q(i + 1))]);
            }
            layers
        }
    };
    Circuit::new(total, layers)
}

/// `|LC_n> = prod CZ(i, i+1) |+>^n`.
pub fn lc_state(n: usize) -> Result<StateVector> {
    let circuit = lc_circuit(n, GateSet::Cz)?;
    let mut s = StateVector::zero_state(n)?;
    circuit.run(&mut s)?;
    Ok(s)
}

/// Stabilizer-parity indicators for the two measurement settings.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessCoefficients {
    n_qubits: usize,
    pub alpha_xz: Vec<f64>,
    pub alpha_zx: Vec<f64>,
    pub basis_xz: BasisWord,
    pub basis_zx: BasisWord,
}

impl WitnessCoefficients {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
}

/// Measurement setting with X on chain positions of the given parity (1 = odd).
fn parity_basis(n: usize, x_parity: usize) -> BasisWord {
    BasisWord::new((1..=n).map(|pos| if pos % 2 == x_parity { MeasBasis::X } else { MeasBasis::Z }).collect())
}

/// Indicator of outcomes that satisfy every stabilizer `s_i` with `i % 2 == parity`.
fn parity_indicator(n: usize, parity: usize) -> Vec<f64> {
    // support mask of s_i in the rotated basis: bits i-2, i-1, i (0-based, clipped)
    let masks: Vec<usize> = (1..=n)
        .filter(|i| i % 2 == parity)
        .map(|i| {
            let mut m = 1usize << (i - 1);
            if i >= 2 {
                m |= 1 << (i - 2);
            }
            if i < n {
                m |= 1 << i;
            }
            m
        })
        .collect();
    (0..1usize << n).map(|k| if masks.iter().all(|m| (k & m).count_ones() % 2 == 0) { 1.0 } else { 0.0 }).collect()
}

/// Coefficients of the two-setting fidelity bound.
///
/// `alpha_xz` marks the outcomes of the `XZXZ...` setting consistent with all odd
/// stabilizers (2^floor(n/2) of them); `alpha_zx` does the same for even stabilizers in
/// `ZXZX...` (2^ceil(n/2) of them).
pub fn witness_coefficients(n: usize) -> Result<WitnessCoefficients> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(Error::Size(format!("qubit count {n} outside 2..={MAX_QUBITS}")));
    }
    Ok(WitnessCoefficients {
        n_qubits: n,
        alpha_xz: parity_indicator(n, 1),
        alpha_zx: parity_indicator(n, 0),
        basis_xz: parity_basis(n, 1),
        basis_zx: parity_basis(n, 0),
    })
}

/// Exact outcome distribution of `state` measured in `basis`.
pub fn measured_distribution(state: &StateVector, basis: &BasisWord) -> Result<ProbDist> {
    let mut s = state.clone();
    s.basis_rotate(basis)?;
    Ok(s.probabilities())
}

/// Ideal LC distributions in the XZ and ZX settings.
pub fn ideal_distributions(n: usize) -> Result<(ProbDist, ProbDist)> {
    let state = lc_state(n)?;
    let coeffs = witness_coefficients(n)?;
    Ok((measured_distribution(&state, &coeffs.basis_xz)?, measured_distribution(&state, &coeffs.basis_zx)?))
}
