// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero when any
//! criterion fails. Runs without the libtest harness so every line is always shown.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use lcsim::cluster::{ideal_distributions, lc_state, witness_coefficients};
use lcsim::densmat::{
    counterexample_rho123, mix, negativity, random_biseparable, random_mixed, true_fidelity, DensityMatrix,
};
use lcsim::experiment::{analyze_files, fluctuation_study, run_lc, summarize, ExperimentConfig};
use lcsim::noise::{noisy_lc_experiment, NoiseModel, NoiseSettings};
use lcsim::numeric::sample_std;
use lcsim::pulse::metrics::phase_error;
use lcsim::pulse::{optimize_and_characterize, PulseConfig};
use lcsim::readout::{apply_readout_noise, mitigate, DeviceParams};
use lcsim::statevec::{Counts, ProbDist};
use lcsim::witness::{bootstrap_sigma, fidelity_bound, shot_noise_sigma};

const REGRESSION_BOUND: f64 = 0.5544;
const REGRESSION_SIGMA_SHOT: f64 = 0.004768623488527773;
const REGRESSION_N_SIGMA: f64 = 11.407904216148342;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn device() -> DeviceParams {
    DeviceParams::from_path(&fixtures().join("device12.toml")).unwrap()
}

fn bound_of(rho: &DensityMatrix, n: usize) -> f64 {
    let c = witness_coefficients(n).unwrap();
    let px = rho.basis_probabilities(&c.basis_xz).unwrap();
    let pz = rho.basis_probabilities(&c.basis_zx).unwrap();
    fidelity_bound(&px, &pz, &c).unwrap()
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.min(b)
}

fn saturation() -> (bool, String) {
    let worst = (2..=12)
        .map(|n| {
            let (px, pz) = ideal_distributions(n).unwrap();
            (fidelity_bound(&px, &pz, &witness_coefficients(n).unwrap()).unwrap() - 1.0).abs()
        })
        .fold(0.0, f64::max);
    (worst < 1e-9, format!("max |bound - 1| = {worst:.1e} over n = 2..12"))
}

fn bound_validity() -> (bool, String) {
    let mut worst = f64::NEG_INFINITY;
    for n in [3usize, 4] {
        let lc = DensityMatrix::from_pure(&lc_state(n).unwrap()).unwrap();
        for seed in 0..1000u64 {
            let noise = random_mixed(n, 1 + (seed as usize % 6), seed).unwrap();
            // half the states sit near the LC state, where the bound is tight
            let w = if seed % 2 == 0 { (seed % 101) as f64 / 100.0 } else { 0.0 };
            let rho = mix(&[(w, lc.clone()), (1.0 - w, noise)]).unwrap();
            worst = worst.max(bound_of(&rho, n) - true_fidelity(&rho, n).unwrap());
        }
    }
    (worst <= 1e-9, format!("max (bound - fidelity) = {worst:.3e} over 2000 states"))
}

fn biseparable_ceiling() -> (bool, String) {
    let (mut max_f, mut max_b, mut certified) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0usize);
    for n in 3..=6 {
        for cut in 1..n {
            for seed in 0..1000u64 {
                let rho = random_biseparable(n, cut, 1 + (seed as usize % 3), seed).unwrap();
                let f = true_fidelity(&rho, n).unwrap();
                let b = bound_of(&rho, n);
                max_f = max_f.max(f);
                max_b = max_b.max(b);
                if summarize(n, b, 0.0, 0.0, 0.0).unwrap().gme_certified {
                    certified += 1;
                }
            }
        }
    }
    let pass = max_f <= 0.5 + 1e-9 && certified == 0;
    (pass, format!("max fidelity {max_f:.6}, max bound {max_b:.6}, certified {certified}"))
}

fn counterexample() -> (bool, String) {
    let (rho, [a, b]) = counterexample_rho123().unwrap();
    let n12 = negativity(&rho.partial_trace(&[0, 1]).unwrap(), &[0]).unwrap();
    let n23 = negativity(&rho.partial_trace(&[1, 2]).unwrap(), &[0]).unwrap();
    // component a is a product across {1,2}|{3}, component b across {1}|{2,3}
    let cross_a = negativity(&a, &[2]).unwrap();
    let cross_b = negativity(&b, &[0]).unwrap();
    let third = 1.0 / 3.0;
    let pass = (n12 - third).abs() < 1e-10 && (n23 - third).abs() < 1e-10 && cross_a < 1e-12 && cross_b < 1e-12;
    (pass, format!("N(rho_12) = {n12:.6}, N(rho_23) = {n23:.6} (target 1/3); cross-cut {cross_a:.1e}, {cross_b:.1e}"))
}

fn mitigation_round_trip() -> (bool, String) {
    let t = device().transition_matrices(0, 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut worst, mut slowest) = (0.0f64, Duration::ZERO);
    for _ in 0..5 {
        let w: Vec<f64> = (0..4096).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = w.iter().sum();
        let p = ProbDist::new(12, w.iter().map(|x| x / total).collect()).unwrap();
        let start = Instant::now();
        let back = mitigate(&apply_readout_noise(&p, &t).unwrap(), &t).unwrap();
        slowest = slowest.max(start.elapsed());
        worst = p.as_slice().iter().zip(back.as_slice()).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    let pass = worst < 1e-10 && slowest < Duration::from_secs(1);
    (pass, format!("max deviation {worst:.1e}, slowest round trip {:.3} s", slowest.as_secs_f64()))
}

fn error_bar_consistency() -> (bool, String) {
    let n = 4;
    let shots = 100_000;
    let settings = NoiseSettings { decoherence: false, ..Default::default() };
    let model = NoiseModel::from_device(&device(), 0, n, &settings).unwrap();
    let t = &model.readout;
    let c = witness_coefficients(n).unwrap();
    let (ix, iz) = ideal_distributions(n).unwrap();
    let analytic =
        shot_noise_sigma(&apply_readout_noise(&ix, t).unwrap(), &apply_readout_noise(&iz, t).unwrap(), t, &c, shots)
            .unwrap();
    let bound = |cx: &Counts, cz: &Counts| {
        let m = |k: &Counts| mitigate(&ProbDist::from_counts(k).unwrap(), t).unwrap();
        fidelity_bound(&m(cx), &m(cz), &c).unwrap()
    };
    let first = noisy_lc_experiment(n, &model, shots, 0).unwrap();
    let boot = bootstrap_sigma(&first.xz.counts, &first.zx.counts, t, &c, 1000, 1).unwrap();
    let reps: Vec<f64> = (1..=500u64)
        .map(|seed| {
            let r = noisy_lc_experiment(n, &model, shots, seed).unwrap();
            bound(&r.xz.counts, &r.zx.counts)
        })
        .collect();
    let empirical = sample_std(&reps);
    let worst = rel_diff(analytic, boot).max(rel_diff(analytic, empirical)).max(rel_diff(boot, empirical));
    (
        worst < 0.25,
        format!(
            "shot {analytic:.5}, bootstrap {boot:.5}, empirical {empirical:.5}; max relative gap {:.1}%",
            100.0 * worst
        ),
    )
}

fn fig_s2() -> (bool, String) {
    let mut stds = Vec::new();
    let mut unbiased = true;
    let mut parts = Vec::new();
    for (k, n) in [4usize, 8, 12].into_iter().enumerate() {
        let s = fluctuation_study(n, 0.96, 0.87, 0.01, 10_000, 100 + k as u64, 50).unwrap();
        let limit = 3.0 * s.std_distortion / (s.trials as f64).sqrt();
        unbiased &= s.mean_distortion.abs() < limit;
        parts.push(format!("n={n}: mean {:+.2e} std {:.4e}", s.mean_distortion, s.std_distortion));
        stds.push(s.std_distortion);
    }
    let increasing = stds.windows(2).all(|w| w[1] > w[0]);
    (unbiased && increasing, parts.join(", "))
}

fn regression_fixture() -> (bool, String) {
    let cfg = ExperimentConfig::from_path(&fixtures().join("lc12_regression.toml")).unwrap();
    let run = &cfg.run;
    let (xz, zx) = (run.input_xz.clone().unwrap(), run.input_zx.clone().unwrap());
    let a = analyze_files(&cfg, &cfg.base_dir.join(xz), &cfg.base_dir.join(zx)).unwrap();
    let r = a.result;
    let frozen = (r.fidelity_bound - REGRESSION_BOUND).abs() < 1e-9
        && (r.sigma_shot - REGRESSION_SIGMA_SHOT).abs() < 1e-12
        && (r.n_sigma_above_half - REGRESSION_N_SIGMA).abs() < 1e-6;
    let anchored = (21.0..=22.0).contains(&r.n_sigma_above_half);
    (
        frozen && anchored,
        format!(
            "bound {:.6}, sigma {:.6}, n_sigma {:.2} (frozen match: {frozen}; target n_sigma 21-22: {anchored})",
            r.fidelity_bound, r.sigma_total, r.n_sigma_above_half
        ),
    )
}

fn pulse_targets() -> (bool, String) {
    let cfg = PulseConfig::default();
    let r = optimize_and_characterize(&cfg).unwrap();
    let dphi = phase_error(r.metrics.conditional_phase).abs();
    let gap = (r.qpt.process_fidelity - r.metrics.process_fidelity).abs();
    let pass = dphi < 1e-2 && r.metrics.leakage < 1e-3 && gap < 1e-3;
    (
        pass,
        format!(
            "|phase - pi| = {dphi:.1e}, leakage {:.1e}, QPT process fidelity {:.6} vs {:.6} ({} iterations)",
            r.metrics.leakage, r.qpt.process_fidelity, r.metrics.process_fidelity, r.optimizer.iterations
        ),
    )
}

fn performance() -> (bool, String) {
    let out = tempfile::tempdir().unwrap();
    let text = format!(
        "[run]\nn_qubits = 12\nshots = 250000\nseed = 1\nresamples = 1000\ndevice = {:?}\noutput_dir = {:?}\n\n[noise]\ndecoherence = false\n",
        fixtures().join("device12.toml"),
        out.path()
    );
    let cfg = ExperimentConfig::from_toml_str(&text, out.path()).unwrap();
    let start = Instant::now();
    let a = run_lc(&cfg).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let r = &a[0].result;
    (
        elapsed < 60.0 && a[0].sigma_bootstrap.is_some(),
        format!(
            "{elapsed:.1} s on {} thread(s); bound {:.4}, n_sigma {:.1}",
            rayon::current_num_threads(),
            r.fidelity_bound,
            r.n_sigma_above_half
        ),
    )
}

fn statevec_oracle() -> (bool, String) {
    let worst = common::oracle::random_circuit_deviation(100, 20, 7);
    (worst < 1e-12, format!("max amplitude deviation {worst:.1e} over 100 circuits of depth 20"))
}

type Check = fn() -> (bool, String);

fn main() {
    let criteria: [(&str, Duration, Check); 11] = [
        ("witness saturation", Duration::from_secs(5), saturation),
        ("bound validity oracle", Duration::from_secs(60), bound_validity),
        ("biseparable ceiling", Duration::from_secs(300), biseparable_ceiling),
        ("counterexample negativities", Duration::MAX, counterexample),
        ("mitigation round trip", Duration::MAX, mitigation_round_trip),
        ("error-bar consistency", Duration::from_secs(600), error_bar_consistency),
        ("transition fluctuation study", Duration::from_secs(600), fig_s2),
        ("regression fixture", Duration::MAX, regression_fixture),
        ("pulse targets", Duration::from_secs(300), pulse_targets),
        ("performance budget", Duration::MAX, performance),
        ("statevector oracle", Duration::MAX, statevec_oracle),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let (ok, detail) = check();
        let elapsed = start.elapsed();
        let ok = ok && elapsed < budget;
        if !ok {
            failed += 1;
        }
        println!("{} {name}: {detail} [{:.1} s]", if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
