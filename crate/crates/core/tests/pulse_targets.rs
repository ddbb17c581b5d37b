// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::sync::OnceLock;

use lcsim::noise::derive_tphi;
use lcsim::pulse::metrics::{phase_error, virtual_z_corrected};
use lcsim::pulse::qpt::{cz_matrix, kraus_executor, noisy_cz_executor};
use lcsim::pulse::{
    evolve, gate_metrics, nelder_mead, objective, optimize, qpt_two_qubit, NelderMeadOptions, PulseConfig, QptMode,
    Waveform,
};

const LEAKAGE_MAX: f64 = 1e-3;

fn optimized() -> &'static Waveform {
    static WF: OnceLock<Waveform> = OnceLock::new();
    WF.get_or_init(|| {
        let cfg = PulseConfig::default();
        let (wf, res) =
            optimize(&cfg.pair().unwrap(), &cfg.initial_waveform().unwrap(), cfg.dt_ns, &cfg.optimizer).unwrap();
        assert!(res.f < 1e-6, "objective {}", res.f);
        wf
    })
}

#[test]
fn optimized_gate_meets_phase_and_leakage_targets() {
    let cfg = PulseConfig::default();
    let pair = cfg.pair().unwrap();
    let u = evolve(&pair, optimized(), cfg.dt_ns).unwrap();
    let m = gate_metrics(&u);
    assert!(phase_error(m.conditional_phase).abs() < 1e-2, "phase {}", m.conditional_phase);
    assert!(m.leakage < LEAKAGE_MAX, "leakage {}", m.leakage);
    let q = qpt_two_qubit(kraus_executor(virtual_z_corrected(&u)), &cz_matrix(), QptMode::Exact).unwrap();
    assert!((q.process_fidelity - m.process_fidelity).abs() < 1e-3);
}

#[test]
fn initial_guess_is_a_poor_gate() {
    let cfg = PulseConfig::default();
    let pair = cfg.pair().unwrap();
    let m = gate_metrics(&evolve(&pair, &cfg.initial_waveform().unwrap(), cfg.dt_ns).unwrap());
    assert!(phase_error(m.conditional_phase).abs() > 0.05 || m.leakage > LEAKAGE_MAX);
}

#[test]
fn slowed_waveform_stays_adiabatic() {
    let cfg = PulseConfig::default();
    let pair = cfg.pair().unwrap();
    let fast = gate_metrics(&evolve(&pair, optimized(), cfg.dt_ns).unwrap()).leakage;
    let slow = gate_metrics(&evolve(&pair, &optimized().stretched(4.0), cfg.dt_ns).unwrap()).leakage;
    // relative change below 50%, with a floor for leakage at the numerical noise level
    assert!(slow <= 1.5 * fast + 1e-6, "fast {fast:e} slow {slow:e}");
    assert!(slow < LEAKAGE_MAX);
}

#[test]
fn halving_the_step_barely_moves_the_phase() {
    let cfg = PulseConfig::default();
    let pair = cfg.pair().unwrap();
    let a = gate_metrics(&evolve(&pair, optimized(), 0.01).unwrap()).conditional_phase;
    let b = gate_metrics(&evolve(&pair, optimized(), 0.005).unwrap()).conditional_phase;
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
}

#[test]
fn optimizer_recovers_from_perturbed_start() {
    let cfg = PulseConfig::default();
    let pair = cfg.pair().unwrap();
    let best = optimized();
    let start: Vec<f64> = best.lambdas.iter().map(|x| x * 1.05).collect();
    let opts = NelderMeadOptions { max_iters: 500, ..Default::default() };
    let r = nelder_mead(|x| objective(&pair, &best.with_lambdas(x), cfg.dt_ns), &start, &opts).unwrap();
    assert!(r.iterations <= 500);
    assert!(r.f < 1e-3, "objective {}", r.f);
}

#[test]
fn optimal_start_is_not_made_worse() {
    let cfg = PulseConfig::default();
    let pair = cfg.pair().unwrap();
    let best = optimized();
    let f0 = objective(&pair, best, cfg.dt_ns).unwrap();
    let opts = NelderMeadOptions { max_iters: 50, ..Default::default() };
    let (_, r) = optimize(&pair, best, cfg.dt_ns, &opts).unwrap();
    assert!(r.f <= f0);
}

#[test]
fn noisy_gate_pp_fidelity_exceeds_process_fidelity() {
    // Q2/Q3 calibration
    let t1 = [34.7, 30.8];
    let tphi = [derive_tphi(34.7, 1.5).unwrap(), derive_tphi(30.8, 6.3).unwrap()];
    let exec = noisy_cz_executor(t1, tphi, 64.0).unwrap();
    let q = qpt_two_qubit(exec, &cz_matrix(), QptMode::Exact).unwrap();
    assert!(q.process_fidelity < 1.0 - 1e-3);
    assert!(q.pp_fidelity >= q.process_fidelity, "{} vs {}", q.pp_fidelity, q.process_fidelity);
    assert!(q.average_fidelity >= q.process_fidelity);
}

#[test]
fn exact_cz_phase_is_pi() {
    let m = gate_metrics(&lcsim::pulse::metrics::embedded_cz());
    assert!((m.conditional_phase - PI).abs() < 1e-15);
}
