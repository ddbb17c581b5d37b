// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Dense Kronecker-product reference for the statevector engine.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use lcsim::statevec::{Gate1, Gate2, Matrix2, Matrix4, StateVector};

pub type C = Complex64;

pub fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<C> {
    let g = DMatrix::from_fn(dim, dim, |_, _| C::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution is Haar
    let d = DMatrix::from_diagonal(&DVector::from_fn(dim, |i, _| {
        let x = r[(i, i)];
        x / x.norm()
    }));
    q * d
}

pub fn kron(a: &DMatrix<C>, b: &DMatrix<C>) -> DMatrix<C> {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> DMatrix<C> {
    DMatrix::identity(dim, dim)
}

/// Basis permutation sending logical qubit `k` to physical qubit `slots[k]`.
pub fn relabel(n: usize, slots: &[usize]) -> DMatrix<C> {
    let dim = 1 << n;
    let mut p = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let j: usize = (0..n).map(|k| ((i >> k) & 1) << slots[k]).sum();
        p[(j, i)] = C::new(1.0, 0.0);
    }
    p
}

/// `I (x) ... (x) m (x) I...` with qubit n-1 as the leftmost factor.
pub fn embed1(n: usize, q: usize, m: &DMatrix<C>) -> DMatrix<C> {
    kron(&kron(&identity(1 << (n - 1 - q)), m), &identity(1 << q))
}

/// Acts with `m` on `|a b>`: placed on qubits (1, 0) by a Kronecker product, then
/// relabelled onto `(a, b)`.
pub fn embed2(n: usize, a: usize, b: usize, m: &DMatrix<C>) -> DMatrix<C> {
    let base = kron(&identity(1 << (n - 2)), m);
    let rest = (0..n).filter(|&q| q != a && q != b);
    let slots: Vec<usize> = [b, a].into_iter().chain(rest).collect();
    let perm = relabel(n, &slots);
    &perm * base * perm.adjoint()
}

pub fn to_m2(m: &DMatrix<C>) -> Matrix2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

pub fn to_m4(m: &DMatrix<C>) -> Matrix4 {
    let mut out = [[C::new(0.0, 0.0); 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    out
}

/// Largest amplitude deviation between engine and dense product over `circuits`
/// random circuits of the given depth on `n = 1..=4` qubits.
pub fn random_circuit_deviation(circuits: usize, depth: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for circuit in 0..circuits {
        let n = 1 + circuit % 4;
        let mut state = StateVector::zero_state(n).unwrap();
        let mut dense = DVector::from_element(1 << n, C::new(0.0, 0.0));
        dense[0] = C::new(1.0, 0.0);
        for _ in 0..depth {
            if n >= 2 && rng.random_bool(0.5) {
                let a = rng.random_range(0..n);
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                let u = random_unitary(4, &mut rng);
                state.apply_gate2(&Gate2::new(to_m4(&u), (a, b)).unwrap()).unwrap();
                dense = embed2(n, a, b, &u) * dense;
            } else {
                let q = rng.random_range(0..n);
                let u = random_unitary(2, &mut rng);
                state.apply_gate1(&Gate1::new(to_m2(&u), q).unwrap()).unwrap();
                dense = embed1(n, q, &u) * dense;
            }
        }
        for (x, y) in state.amplitudes().iter().zip(dense.iter()) {
            worst = worst.max((x - y).norm());
        }
    }
    worst
}
