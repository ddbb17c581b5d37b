// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use lcsim::cluster::{lc_circuit, witness_coefficients, GateSet};
use lcsim::noise::{
    exact_noisy_density_matrix, exact_noisy_distributions, noisy_lc_distributions, trajectory_density_matrix,
    NoiseModel, NoiseSettings,
};
use lcsim::readout::{mitigate, DeviceParams};
use lcsim::witness::fidelity_bound;

fn device() -> DeviceParams {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/device12.toml");
    DeviceParams::from_path(&p).unwrap()
}

fn exact_bound(n: usize, model: &NoiseModel) -> f64 {
    let (px, pz) = exact_noisy_distributions(n, model).unwrap();
    let (mx, mz) = (mitigate(&px, &model.readout).unwrap(), mitigate(&pz, &model.readout).unwrap());
    fidelity_bound(&mx, &mz, &witness_coefficients(n).unwrap()).unwrap()
}

fn sampled_bound(n: usize, model: &NoiseModel, trajectories: usize, seed: u64) -> f64 {
    let (px, pz) = noisy_lc_distributions(n, model, trajectories, seed).unwrap();
    let (mx, mz) = (mitigate(&px, &model.readout).unwrap(), mitigate(&pz, &model.readout).unwrap());
    fidelity_bound(&mx, &mz, &witness_coefficients(n).unwrap()).unwrap()
}

#[test]
fn bound_is_monotone_in_each_noise_knob() {
    let d = device();
    let n = 4;
    let base = NoiseSettings { cz_phase_std_rad: 0.05, zz_mhz: 0.05, ..Default::default() };
    type Knob = fn(&mut NoiseSettings, f64);
    let knobs: [(&str, Knob, [f64; 4]); 4] = [
        ("t1 rate", |s, v| s.t1_rate_scale = v, [0.5, 1.0, 2.0, 4.0]),
        ("tphi rate", |s, v| s.tphi_rate_scale = v, [0.5, 1.0, 2.0, 4.0]),
        ("cz phase std", |s, v| s.cz_phase_std_rad = v, [0.0, 0.05, 0.1, 0.2]),
        ("zz rate", |s, v| s.zz_mhz = v, [0.0, 0.1, 0.3, 0.6]),
    ];
    for (name, set, values) in knobs {
        let bounds: Vec<f64> = values
            .iter()
            .map(|&v| {
                let mut s = base.clone();
                set(&mut s, v);
                exact_bound(n, &NoiseModel::from_device(&d, 0, n, &s).unwrap())
            })
            .collect();
        assert!(bounds.windows(2).all(|w| w[1] < w[0]), "{name}: {bounds:?}");
    }
}

#[test]
fn sampled_bound_tracks_exact_bound() {
    let d = device();
    let n = 4;
    let model = NoiseModel::from_device(&d, 0, n, &NoiseSettings::default()).unwrap();
    let exact = exact_bound(n, &model);
    let sampled: Vec<f64> = (0..20).map(|seed| sampled_bound(n, &model, 500, seed)).collect();
    let (mean, std) = lcsim::numeric::mean_std(&sampled);
    assert!((mean - exact).abs() < 3.0 * std / (sampled.len() as f64).sqrt() + 1e-3, "{mean} vs {exact}");
}

#[test]
fn exact_bound_decreases_with_chain_length() {
    let d = device();
    let b: Vec<f64> = (4..=8)
        .map(|n| exact_bound(n, &NoiseModel::from_device(&d, 0, n, &NoiseSettings::default()).unwrap()))
        .collect();
    assert!(b.windows(2).all(|w| w[1] < w[0]), "{b:?}");
}

#[test]
fn bound_decreases_with_chain_length() {
    let d = device();
    let mut means = Vec::new();
    for n in 4..=12 {
        let model = NoiseModel::from_device(&d, 0, n, &NoiseSettings::default()).unwrap();
        let b: Vec<f64> = (0..20).map(|seed| sampled_bound(n, &model, 300, 1000 * n as u64 + seed)).collect();
        means.push(lcsim::numeric::mean_std(&b).0);
    }
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}

#[test]
fn dephasing_decay_recovered_from_leakage() {
    let n = 2;
    let tphi = [0.6, 0.9];
    let mut model = NoiseModel::ideal(n);
    model.tphi_us = tphi.to_vec();
    let circuit = lc_circuit(n, GateSet::Cz).unwrap();
    let t_us = (model.single_layer_ns + model.cz_layer_ns * circuit.entangling_layers() as f64) * 1e-3;
    let c = witness_coefficients(n).unwrap();
    let (px, pz) = noisy_lc_distributions(n, &model, 200_000, 17).unwrap();
    // a Z error on the X-measured qubit flips its stabilizer; the other qubit is read in Z
    let leak = |alpha: &[f64], p: &lcsim::statevec::ProbDist| {
        1.0 - alpha.iter().zip(p.as_slice()).map(|(a, x)| a * x).sum::<f64>()
    };
    let coherence = [1.0 - 2.0 * leak(&c.alpha_xz, &px), 1.0 - 2.0 * leak(&c.alpha_zx, &pz)];
    for q in 0..2 {
        let expected = (-t_us / tphi[q]).exp();
        let fitted_tphi = -t_us / coherence[q].ln();
        assert!((fitted_tphi / tphi[q] - 1.0).abs() < 0.05, "qubit {q}: {fitted_tphi} vs {}", tphi[q]);
        assert!((coherence[q] - expected).abs() < 0.01);
    }
}

#[test]
fn trajectory_average_matches_kraus_evolution() {
    let d = device();
    let n = 2;
    let s = NoiseSettings {
        cz_phase_std_rad: 0.3,
        cz_phase_mean_rad: 0.1,
        zz_mhz: 0.5,
        t1_rate_scale: 20.0,
        tphi_rate_scale: 5.0,
        ..Default::default()
    };
    let model = NoiseModel::from_device(&d, 0, n, &s).unwrap();
    let circuit = lc_circuit(n, GateSet::Cz).unwrap();
    let exact = exact_noisy_density_matrix(&circuit, &model).unwrap();
    let avg = trajectory_density_matrix(&circuit, &model, 100_000, 99).unwrap();
    let e = exact.matrix();
    for i in 0..4 {
        for j in 0..4 {
            let d = avg.mean[(i, j)] - e[(i, j)];
            assert!(d.re.abs() <= 3.0 * avg.stderr_re[(i, j)] + 1e-12, "({i},{j}) re: {d}");
            assert!(d.im.abs() <= 3.0 * avg.stderr_im[(i, j)] + 1e-12, "({i},{j}) im: {d}");
        }
    }
}
