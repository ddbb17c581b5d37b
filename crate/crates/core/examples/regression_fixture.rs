// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Regenerates the 12-qubit regression fixture.
//!
//! Each "measured" distribution mixes two sets of 250 000-shot frequencies taken through
//! the device readout: one from a noisy LC_12 state (trajectory-averaged decoherence
//! from the device table), one from white noise. The bound is linear in the mixing
//! weight, which is solved for a mitigated bound of 0.5544.
//!
//! Usage: `cargo run --release --example regression_fixture [-- <out_dir>]`

use std::path::PathBuf;

use lcsim::cluster::witness_coefficients;
use lcsim::experiment::{analyze, AnalysisSettings};
use lcsim::io;
use lcsim::noise::{noisy_lc_distributions, NoiseModel, NoiseSettings};
use lcsim::readout::{apply_readout_noise, DeviceParams};
use lcsim::statevec::{sample, ProbDist};
use lcsim::witness::fidelity_bound;

const N: usize = 12;
const SHOTS: u64 = 250_000;
const TARGET: f64 = 0.5544;
const SEED: u64 = 20_190_412;

fn main() -> lcsim::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| root.clone());
    let device = DeviceParams::from_path(&root.join("device12.toml"))?;
    let settings = NoiseSettings { readout: false, ..Default::default() };
    let model = NoiseModel::from_device(&device, 0, N, &settings)?;
    let t = device.transition_matrices(0, N)?;
    let coeffs = witness_coefficients(N)?;
    let (nx, nz) = noisy_lc_distributions(N, &model, 2000, SEED)?;
    let white = ProbDist::uniform(N)?;

    let freq = |p: &ProbDist, seed: u64| -> lcsim::Result<ProbDist> {
        ProbDist::from_counts(&sample(&apply_readout_noise(p, &t)?, SHOTS, seed)?)
    };
    let (ax, az) = (freq(&nx, SEED)?, freq(&nz, SEED + 1)?);
    let (bx, bz) = (freq(&white, SEED + 2)?, freq(&white, SEED + 3)?);
    let bound = |px: &ProbDist, pz: &ProbDist| -> lcsim::Result<f64> {
        let m = |p: &ProbDist| lcsim::readout::mitigate(p, &t);
        fidelity_bound(&m(px)?, &m(pz)?, &coeffs)
    };
    let (ba, bb) = (bound(&ax, &az)?, bound(&bx, &bz)?);
    let w = (TARGET - bb) / (ba - bb);
    let mix = |a: &ProbDist, b: &ProbDist| {
        let v = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| w * x + (1.0 - w) * y).collect();
        ProbDist::new(N, v)
    };
    let (px, pz) = (mix(&ax, &bx)?, mix(&az, &bz)?);
    std::fs::create_dir_all(&out)?;
    io::write_dist(&out.join("lc12_xz.csv"), &px)?;
    io::write_dist(&out.join("lc12_zx.csv"), &pz)?;

    // read back what was written so the printed values match the stored files
    let (px, pz) = (io::read_dist(&out.join("lc12_xz.csv"))?, io::read_dist(&out.join("lc12_zx.csv"))?);
    let s = AnalysisSettings { shots: SHOTS, delta: 0.0, trials: 10_000, resamples: 0, seed: 7, z: 0.0 };
    let a = analyze(&px, &pz, None, &t, &s)?;
    println!("white-noise weight = {:.6}", 1.0 - w);
    print!("{}", a.result.to_key_value());
    Ok(())
}
