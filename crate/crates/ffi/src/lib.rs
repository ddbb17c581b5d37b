// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! C ABI for lcsim.
//!
//! Every fallible call returns an [`LcsimStatus`]; on failure a message is stored per
//! thread and can be read with [`lcsim_last_error`]. Objects cross the boundary as
//! opaque handles that the caller releases with the matching `_free` function.
//! Outcome index bit `k` is qubit `k`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lcsim::cluster::{ideal_distributions, lc_circuit, measured_distribution, witness_coefficients, GateSet};
use lcsim::readout::{apply_readout_noise, mitigate, DeviceParams, TransitionMatrix};
use lcsim::statevec::{sample, BasisWord, ProbDist, StateVector};
use lcsim::witness::{certify_gme, fidelity_bound, shot_noise_sigma};
use lcsim::Error;

/// Status codes. Values 1 to 12 match the library error kinds.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LcsimStatus {
    Ok = 0,
    Size = 1,
    Validity = 2,
    Shape = 3,
    Domain = 4,
    Index = 5,
    Conditioning = 6,
    Normalization = 7,
    Parse = 8,
    Integration = 9,
    Optimization = 10,
    Tomography = 11,
    Io = 12,
    NullPointer = 13,
    InvalidString = 14,
    Panic = 15,
}

impl From<&Error> for LcsimStatus {
    fn from(e: &Error) -> Self {
        match e.code() {
            1 => Self::Size,
            2 => Self::Validity,
            3 => Self::Shape,
            4 => Self::Domain,
            5 => Self::Index,
            6 => Self::Conditioning,
            7 => Self::Normalization,
            8 => Self::Parse,
            9 => Self::Integration,
            10 => Self::Optimization,
            11 => Self::Tomography,
            _ => Self::Io,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LcsimGateSet {
    Cz = 0,
    Cx = 1,
}

/// Opaque statevector.
pub struct LcsimState(StateVector);

/// Opaque outcome distribution.
pub struct LcsimDist(ProbDist);

/// Opaque per-qubit readout model.
pub struct LcsimReadout(Vec<TransitionMatrix>);

/// Certification summary.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LcsimWitnessResult {
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

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(LcsimStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(LcsimStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LcsimStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LcsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LcsimStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LcsimStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(LcsimStatus::InvalidString, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn lcsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn lcsim_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn lcsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Prepares the ideal linear cluster state on `n_qubits` qubits.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn lcsim_state_new_lc(
    n_qubits: usize,
    gate_set: LcsimGateSet,
    out: *mut *mut LcsimState,
) -> LcsimStatus {
    guard(|| {
        let gs = match gate_set {
            LcsimGateSet::Cz => GateSet::Cz,
            LcsimGateSet::Cx => GateSet::Cx,
        };
        let mut s = StateVector::zero_state(n_qubits)?;
        lc_circuit(n_qubits, gs)?.run(&mut s)?;
        put(out, LcsimState(s), "out")
    })
}

/// # Safety
/// `state` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn lcsim_state_free(state: *mut LcsimState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcsim_state_n_qubits(state: *const LcsimState, out: *mut usize) -> LcsimStatus {
    guard(|| {
        let s = deref(state, "state")?;
        *out.as_mut().ok_or_else(|| null("out"))? = s.0.n_qubits();
        Ok(())
    })
}

/// Outcome distribution after rotating each qubit into the basis named by `basis`, a
/// word over `X` and `Z` written for qubit 0 first.
///
/// # Safety
/// `state` must be a live handle, `basis` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lcsim_state_measure(
    state: *const LcsimState,
    basis: *const c_char,
    out: *mut *mut LcsimDist,
) -> LcsimStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let word = BasisWord::parse(string(basis, "basis")?)?;
        put(out, LcsimDist(measured_distribution(&s.0, &word)?), "out")
    })
}

/// Distribution over `2^n_qubits` outcomes; `probs` must sum to one.
///
/// # Safety
/// `probs` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcsim_dist_new(
    n_qubits: usize,
    probs: *const f64,
    len: usize,
    out: *mut *mut LcsimDist,
) -> LcsimStatus {
    guard(|| {
        let p = slice(probs, len, "probs")?.to_vec();
        put(out, LcsimDist(ProbDist::new(n_qubits, p)?), "out")
    })
}

/// Ideal distributions of the two witness settings.
///
/// # Safety
/// `out_xz` and `out_zx` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcsim_ideal_distributions(
    n_qubits: usize,
    out_xz: *mut *mut LcsimDist,
    out_zx: *mut *mut LcsimDist,
) -> LcsimStatus {
    guard(|| {
        if out_xz.is_null() || out_zx.is_null() {
            return Err(null("output handle"));
        }
        let (px, pz) = ideal_distributions(n_qubits)?;
        put(out_xz, LcsimDist(px), "out_xz")?;
        put(out_zx, LcsimDist(pz), "out_zx")
    })
}

/// # Safety
/// `dist` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcsim_dist_free(dist: *mut LcsimDist) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Number of outcomes, `2^n`.
///
/// # Safety
/// `dist` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lcsim_dist_len(dist: *const LcsimDist, out: *mut usize) -> LcsimStatus {
    guard(|| {
        let d = deref(dist, "dist")?;
        *out.as_mut().ok_or_else(|| null("out"))? = d.0.as_slice().len();
        Ok(())
    })
}

/// Copies the probabilities into `buf`, which must hold exactly `2^n` entries.
///
/// # Safety
/// `dist` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lcsim_dist_copy(dist: *const LcsimDist, buf: *mut f64, len: usize) -> LcsimStatus {
    guard(|| {
        let d = deref(dist, "dist")?.0.as_slice();
        if len != d.len() {
            return Err(Failure(LcsimStatus::Shape, format!("buffer holds {len} entries, distribution {}", d.len())));
        }
        out_slice(buf, len, "buf")?.copy_from_slice(d);
        Ok(())
    })
}

/// Draws `shots` outcomes; `counts` receives `2^n` tallies.
///
/// # Safety
/// `dist` must be a live handle; `counts` must point to `len` writable integers.
#[no_mangle]
pub unsafe extern "C" fn lcsim_dist_sample(
    dist: *const LcsimDist,
    shots: u64,
    seed: u64,
    counts: *mut u64,
    len: usize,
) -> LcsimStatus {
    guard(|| {
        let d = deref(dist, "dist")?;
        let c = sample(&d.0, shots, seed)?;
        if len != c.as_slice().len() {
            return Err(Failure(
                LcsimStatus::Shape,
                format!("buffer holds {len} entries, need {}", c.as_slice().len()),
            ));
        }
        out_slice(counts, len, "counts")?.copy_from_slice(c.as_slice());
        Ok(())
    })
}

/// Readout model from per-qubit assignment fidelities.
///
/// # Safety
/// `f00` and `f11` must each point to `n_qubits` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lcsim_readout_new(
    n_qubits: usize,
    f00: *const f64,
    f11: *const f64,
    out: *mut *mut LcsimReadout,
) -> LcsimStatus {
    guard(|| {
        let a = slice(f00, n_qubits, "f00")?;
        let b = slice(f11, n_qubits, "f11")?;
        let t = a.iter().zip(b).map(|(&x, &y)| TransitionMatrix::new(x, y)).collect::<lcsim::Result<Vec<_>>>()?;
        put(out, LcsimReadout(t), "out")
    })
}

/// Readout model for device qubits `[offset, offset + n_qubits)` of a calibration TOML.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lcsim_readout_from_device(
    path: *const c_char,
    offset: usize,
    n_qubits: usize,
    out: *mut *mut LcsimReadout,
) -> LcsimStatus {
    guard(|| {
        let d = DeviceParams::from_path(Path::new(string(path, "path")?))?;
        put(out, LcsimReadout(d.transition_matrices(offset, n_qubits)?), "out")
    })
}

/// # Safety
/// `readout` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcsim_readout_free(readout: *mut LcsimReadout) {
    if !readout.is_null() {
        drop(Box::from_raw(readout));
    }
}

/// Distribution reported by the noisy detector.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lcsim_apply_readout_noise(
    dist: *const LcsimDist,
    readout: *const LcsimReadout,
    out: *mut *mut LcsimDist,
) -> LcsimStatus {
    guard(|| {
        let d = deref(dist, "dist")?;
        let r = deref(readout, "readout")?;
        put(out, LcsimDist(apply_readout_noise(&d.0, &r.0)?), "out")
    })
}

/// Inverse readout; entries may come out negative.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lcsim_mitigate(
    dist: *const LcsimDist,
    readout: *const LcsimReadout,
    out: *mut *mut LcsimDist,
) -> LcsimStatus {
    guard(|| {
        let d = deref(dist, "dist")?;
        let r = deref(readout, "readout")?;
        put(out, LcsimDist(mitigate(&d.0, &r.0)?), "out")
    })
}

/// Fidelity lower bound from the (mitigated) XZ and ZX distributions.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lcsim_fidelity_bound(
    xz: *const LcsimDist,
    zx: *const LcsimDist,
    out: *mut f64,
) -> LcsimStatus {
    guard(|| {
        let (x, z) = (deref(xz, "xz")?, deref(zx, "zx")?);
        let c = witness_coefficients(x.0.n_qubits())?;
        let b = fidelity_bound(&x.0, &z.0, &c)?;
        *out.as_mut().ok_or_else(|| null("out"))? = b;
        Ok(())
    })
}

/// Shot-noise sigma of the mitigated bound, from the raw measured distributions.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lcsim_shot_noise_sigma(
    raw_xz: *const LcsimDist,
    raw_zx: *const LcsimDist,
    readout: *const LcsimReadout,
    shots: u64,
    out: *mut f64,
) -> LcsimStatus {
    guard(|| {
        let (x, z) = (deref(raw_xz, "raw_xz")?, deref(raw_zx, "raw_zx")?);
        let r = deref(readout, "readout")?;
        let c = witness_coefficients(x.0.n_qubits())?;
        let s = shot_noise_sigma(&x.0, &z.0, &r.0, &c, shots)?;
        *out.as_mut().ok_or_else(|| null("out"))? = s;
        Ok(())
    })
}

/// Certifies genuine multipartite entanglement when `bound - z * sigma_total > 0.5`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcsim_certify(
    n_qubits: usize,
    bound: f64,
    sigma_shot: f64,
    sigma_transition: f64,
    z: f64,
    out: *mut LcsimWitnessResult,
) -> LcsimStatus {
    guard(|| {
        let r = certify_gme(n_qubits, bound, sigma_shot, sigma_transition, z)?;
        *out.as_mut().ok_or_else(|| null("out"))? = LcsimWitnessResult {
            n_qubits: r.n_qubits,
            fidelity_bound: r.fidelity_bound,
            sigma_shot: r.sigma_shot,
            sigma_transition: r.sigma_transition,
            sigma_total: r.sigma_total,
            n_sigma_above_half: r.n_sigma_above_half,
            ci95_low: r.ci95_low,
            ci95_high: r.ci95_high,
            z: r.z,
            gme_certified: r.gme_certified,
        };
        Ok(())
    })
}
