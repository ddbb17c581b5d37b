// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Config-driven batch runs.
//!
//! One TOML file carries every section: `[run]`, `[fluctuation]`, `[noise]`, `[pulse]`
//! and optionally the `[[qubit]]`/`[[pair]]` calibration records. Paths are resolved
//! relative to the config file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::{witness_coefficients, GateSet};
use crate::error::{Error, Result};
use crate::io;
use crate::noise::{noisy_lc_experiment_with, NoiseModel, NoiseSettings, RunOptions};
use crate::pulse::{optimize_and_characterize, PulseConfig, PulseReport};
use crate::readout::{mitigate, DeviceParams, TransitionMatrix};
use crate::statevec::{Counts, ProbDist};
use crate::witness::{
    bootstrap_sigma, fidelity_bound, shot_noise_sigma, transition_fluctuation_sigma, FluctuationStudy,
    FluctuationWidth, WitnessResult, DEFAULT_BINS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GateSetName {
    #[default]
    Cz,
    Cx,
}

impl From<GateSetName> for GateSet {
    fn from(g: GateSetName) -> Self {
        match g {
            GateSetName::Cz => GateSet::Cz,
            GateSetName::Cx => GateSet::Cx,
        }
    }
}

/// `[run]` section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Single register size, or the upper end of a sweep when `n_min` is set.
    pub n_qubits: usize,
    pub n_min: Option<usize>,
    #[serde(default)]
    pub gate_set: GateSetName,
    pub shots: u64,
    pub seed: u64,
    /// Calibration file; when absent, `[[qubit]]` records in this file are used if present.
    pub device: Option<PathBuf>,
    /// First device qubit of the chain.
    #[serde(default)]
    pub offset: usize,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: ReportFormat,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    /// Width of the per-qubit transition-matrix drift; 0 disables that error term.
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub z: f64,
    /// Measured `XZ...`/`ZX...` files (probabilities or counts) that replace simulation.
    pub input_xz: Option<PathBuf>,
    pub input_zx: Option<PathBuf>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_resamples() -> usize {
    1000
}

fn default_trials() -> usize {
    10_000
}

/// `[fluctuation]` section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluctuationSection {
    pub n_values: Vec<usize>,
    pub f00: f64,
    pub f11: f64,
    pub delta: f64,
    pub trials: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub fluctuation: Option<FluctuationSection>,
    pub noise: NoiseSettings,
    pub pulse: PulseConfig,
    pub device: Option<DeviceParams>,
    pub base_dir: PathBuf,
}

#[derive(Deserialize)]
struct Doc {
    run: RunSection,
    fluctuation: Option<FluctuationSection>,
    #[serde(default)]
    qubit: Vec<toml::Value>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base)
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let doc: Doc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let device = match &doc.run.device {
            Some(p) => {
                let full = base_dir.join(p);
                if !full.exists() {
                    return Err(Error::Parse(format!("run.device: {} does not exist", full.display())));
                }
                Some(DeviceParams::from_path(&full)?)
            }
            None if !doc.qubit.is_empty() => Some(DeviceParams::from_toml_str(text)?),
            None => None,
        };
        let cfg = Self {
            run: doc.run,
            fluctuation: doc.fluctuation,
            noise: NoiseSettings::from_toml_str(text)?,
            pulse: PulseConfig::from_toml_str(text)?,
            device,
            base_dir: base_dir.to_path_buf(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.run;
        let lo = r.n_min.unwrap_or(r.n_qubits);
        if lo < 2 || lo > r.n_qubits || r.n_qubits > crate::statevec::MAX_QUBITS {
            return Err(Error::Validity(format!("run: qubit range {lo}..={} invalid", r.n_qubits)));
        }
        if r.shots == 0 {
            return Err(Error::Validity("run.shots must be at least 1".into()));
        }
        if let Some(d) = &self.device {
            if r.offset + r.n_qubits > d.n_qubits() {
                return Err(Error::Validity(format!(
                    "run: chain of {} qubits at offset {} exceeds the {}-qubit device",
                    r.n_qubits,
                    r.offset,
                    d.n_qubits()
                )));
            }
        }
        match (&r.input_xz, &r.input_zx) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                for p in [a, b] {
                    if !self.base_dir.join(p).exists() {
                        return Err(Error::Validity(format!("run.input: {} does not exist", p.display())));
                    }
                }
            }
            _ => return Err(Error::Validity("run.input_xz and run.input_zx must be given together".into())),
        }
        if r.resamples > 0 && r.resamples < crate::witness::MIN_RESAMPLES {
            return Err(Error::Validity(format!(
                "run.resamples must be 0 (no bootstrap) or at least {}",
                crate::witness::MIN_RESAMPLES
            )));
        }
        if !(r.delta >= 0.0) || !(r.z >= 0.0) {
            return Err(Error::Validity("run.delta and run.z must be non-negative".into()));
        }
        if let Some(f) = &self.fluctuation {
            if f.n_values.is_empty() || f.n_values.iter().any(|&n| !(2..=crate::statevec::MAX_QUBITS).contains(&n)) {
                return Err(Error::Validity("fluctuation.n_values must list sizes in 2..=20".into()));
            }
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.base_dir.join(&self.run.output_dir)
    }

    fn sizes(&self) -> Vec<usize> {
        (self.run.n_min.unwrap_or(self.run.n_qubits)..=self.run.n_qubits).collect()
    }

    pub fn noise_model(&self, n: usize) -> Result<NoiseModel> {
        match &self.device {
            Some(d) => NoiseModel::from_device(d, self.run.offset, n, &self.noise),
            None => {
                let mut m = NoiseModel::ideal(n);
                m.cz_layer_ns = self.noise.cz_layer_ns;
                m.single_layer_ns = self.noise.single_layer_ns;
                m.cz_phase_mean_rad = self.noise.cz_phase_mean_rad;
                m.cz_phase_std_rad = self.noise.cz_phase_std_rad;
                m.zz_mhz = vec![self.noise.zz_mhz; n - 1];
                Ok(m)
            }
        }
    }
}

/// Builds a [`WitnessResult`]; a zero total sigma gives an infinite (or NaN at the
/// threshold) significance instead of an error.
pub fn summarize(n: usize, bound: f64, sigma_shot: f64, sigma_transition: f64, z: f64) -> Result<WitnessResult> {
    if sigma_shot + sigma_transition > 0.0 {
        return crate::witness::certify_gme(n, bound, sigma_shot, sigma_transition, z);
    }
    Ok(WitnessResult {
        n_qubits: n,
        fidelity_bound: bound,
        sigma_shot,
        sigma_transition,
        sigma_total: 0.0,
        n_sigma_above_half: if bound == 0.5 { f64::NAN } else { (bound - 0.5) * f64::INFINITY },
        ci95_low: bound,
        ci95_high: bound,
        z,
        gme_certified: bound > 0.5,
    })
}

/// Witness analysis of one pair of raw measured distributions.
#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub result: WitnessResult,
    pub sigma_bootstrap: Option<f64>,
    #[serde(skip)]
    pub mitigated_xz: ProbDist,
    #[serde(skip)]
    pub mitigated_zx: ProbDist,
}

/// Settings shared by every analysis path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisSettings {
    pub shots: u64,
    pub delta: f64,
    pub trials: usize,
    pub resamples: usize,
    pub seed: u64,
    pub z: f64,
}

/// Mitigates, bounds and attaches all error bars. Bootstrap runs when counts are given.
pub fn analyze(
    raw_xz: &ProbDist,
    raw_zx: &ProbDist,
    counts: Option<(&Counts, &Counts)>,
    t: &[TransitionMatrix],
    s: &AnalysisSettings,
) -> Result<Analysis> {
    let n = raw_xz.n_qubits();
    let coeffs = witness_coefficients(n)?;
    let mx = mitigate(raw_xz, t)?;
    let mz = mitigate(raw_zx, t)?;
    let bound = fidelity_bound(&mx, &mz, &coeffs)?;
    let sigma_shot = shot_noise_sigma(raw_xz, raw_zx, t, &coeffs, s.shots)?;
    let sigma_transition = if s.delta > 0.0 {
        let widths = vec![FluctuationWidth::uniform(s.delta); n];
        transition_fluctuation_sigma(&mx, &mz, &coeffs, t, &widths, s.trials, s.seed, DEFAULT_BINS)?.std_distortion
    } else {
        0.0
    };
    let sigma_bootstrap = match counts {
        Some((cx, cz)) if s.resamples > 0 => Some(bootstrap_sigma(cx, cz, t, &coeffs, s.resamples, s.seed)?),
        _ => None,
    };
    Ok(Analysis {
        result: summarize(n, bound, sigma_shot, sigma_transition, s.z)?,
        sigma_bootstrap,
        mitigated_xz: mx,
        mitigated_zx: mz,
    })
}

fn report_text(a: &Analysis, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => {
            let mut s = a.result.to_key_value();
            if let Some(b) = a.sigma_bootstrap {
                let _ = writeln!(s, "sigma_bootstrap = {b:.6}");
            }
            s
        }
        ReportFormat::Json => serde_json::to_string_pretty(a).expect("plain struct serializes") + "\n",
    }
}

/// Simulates, mitigates and reports each size of the configured sweep.
///
/// Writes `n<N>_counts_{xz,zx}.csv`, `n<N>_mitigated_{xz,zx}.csv`, `n<N>_report.{txt,json}`
/// and `summary.csv` to the output directory.
pub fn run_lc(cfg: &ExperimentConfig) -> Result<Vec<Analysis>> {
    let out = cfg.output_dir();
    std::fs::create_dir_all(&out)?;
    let mut summary = String::from("n_qubits,fidelity_bound,sigma_shot,sigma_transition,sigma_total,sigma_bootstrap,n_sigma_above_half,gme_certified\n");
    let mut results = Vec::new();
    if let (Some(a), Some(b)) = (&cfg.run.input_xz, &cfg.run.input_zx) {
        let a = analyze_files(cfg, &cfg.base_dir.join(a), &cfg.base_dir.join(b))?;
        let n = a.result.n_qubits;
        write_outputs(cfg, &out, n, None, &a, &mut summary)?;
        std::fs::write(out.join("summary.csv"), summary)?;
        return Ok(vec![a]);
    }
    for n in cfg.sizes() {
        let model = cfg.noise_model(n)?;
        let seed = cfg.run.seed.wrapping_add(n as u64);
        let opts = RunOptions { force_trajectories: false, gate_set: Some(cfg.run.gate_set.into()) };
        let run = noisy_lc_experiment_with(n, &model, cfg.run.shots, seed, opts)?;
        let (cx, cz) = (&run.xz.counts, &run.zx.counts);
        let settings = AnalysisSettings {
            shots: cfg.run.shots,
            delta: cfg.run.delta,
            trials: cfg.run.trials,
            resamples: cfg.run.resamples,
            seed,
            z: cfg.run.z,
        };
        let a = analyze(
            &ProbDist::from_counts(cx)?,
            &ProbDist::from_counts(cz)?,
            Some((cx, cz)),
            &model.readout,
            &settings,
        )?;
        write_outputs(cfg, &out, n, Some((cx, cz)), &a, &mut summary)?;
        results.push(a);
    }
    std::fs::write(out.join("summary.csv"), summary)?;
    Ok(results)
}

fn write_outputs(
    cfg: &ExperimentConfig,
    out: &Path,
    n: usize,
    counts: Option<(&Counts, &Counts)>,
    a: &Analysis,
    summary: &mut String,
) -> Result<()> {
    if let Some((cx, cz)) = counts {
        io::write_counts(&out.join(format!("n{n}_counts_xz.csv")), cx)?;
        io::write_counts(&out.join(format!("n{n}_counts_zx.csv")), cz)?;
    }
    io::write_dist(&out.join(format!("n{n}_mitigated_xz.csv")), &a.mitigated_xz)?;
    io::write_dist(&out.join(format!("n{n}_mitigated_zx.csv")), &a.mitigated_zx)?;
    let ext = if cfg.run.format == ReportFormat::Json { "json" } else { "txt" };
    std::fs::write(out.join(format!("n{n}_report.{ext}")), report_text(a, cfg.run.format))?;
    let r = &a.result;
    let _ = writeln!(
        summary,
        "{},{:e},{:e},{:e},{:e},{},{:e},{}",
        n,
        r.fidelity_bound,
        r.sigma_shot,
        r.sigma_transition,
        r.sigma_total,
        a.sigma_bootstrap.map(|b| format!("{b:e}")).unwrap_or_default(),
        r.n_sigma_above_half,
        r.gme_certified
    );
    Ok(())
}

/// Analyzes stored raw distributions with the configured device readout (perfect
/// readout when no device is given). `run.shots` sets the shot-noise scale unless the
/// files hold counts.
pub fn analyze_files(cfg: &ExperimentConfig, xz: &Path, zx: &Path) -> Result<Analysis> {
    let (px, cx) = load_measurement(xz)?;
    let (pz, cz) = load_measurement(zx)?;
    let n = px.n_qubits();
    if pz.n_qubits() != n {
        return Err(Error::Shape(format!("input files hold {n} and {} qubits", pz.n_qubits())));
    }
    let t = match &cfg.device {
        Some(d) => d.transition_matrices(cfg.run.offset, n)?,
        None => vec![TransitionMatrix::perfect(); n],
    };
    let shots = cx.as_ref().map(Counts::shots).unwrap_or(cfg.run.shots);
    let settings = AnalysisSettings {
        shots,
        delta: cfg.run.delta,
        trials: cfg.run.trials,
        resamples: cfg.run.resamples,
        seed: cfg.run.seed,
        z: cfg.run.z,
    };
    let counts = match (&cx, &cz) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    analyze(&px, &pz, counts, &t, &settings)
}

/// Transition-matrix drift study on the ideal LC distributions for each listed size.
///
/// Writes `fluctuation_n<N>.csv` histograms and `fluctuation_summary.csv`.
pub fn run_fluctuation(cfg: &ExperimentConfig) -> Result<Vec<FluctuationStudy>> {
    let f = cfg.fluctuation.as_ref().ok_or_else(|| Error::Validity("config has no [fluctuation] section".into()))?;
    let out = cfg.output_dir();
    std::fs::create_dir_all(&out)?;
    let mut summary = String::from("n_qubits,trials,mean_distortion,std_distortion,rejected\n");
    let mut studies = Vec::new();
    for &n in &f.n_values {
        let study = fluctuation_study(n, f.f00, f.f11, f.delta, f.trials, cfg.run.seed, f.bins)?;
        study.histogram.write_csv(&out.join(format!("fluctuation_n{n}.csv")))?;
        let _ = writeln!(
            summary,
            "{},{},{:e},{:e},{}",
            n, study.trials, study.mean_distortion, study.std_distortion, study.rejected
        );
        studies.push(study);
    }
    std::fs::write(out.join("fluctuation_summary.csv"), summary)?;
    Ok(studies)
}

/// Drift study with identical `(f00, f11)` on every qubit of an ideal LC state.
pub fn fluctuation_study(
    n: usize,
    f00: f64,
    f11: f64,
    delta: f64,
    trials: usize,
    seed: u64,
    bins: usize,
) -> Result<FluctuationStudy> {
    let (px, pz) = crate::cluster::ideal_distributions(n)?;
    let coeffs = witness_coefficients(n)?;
    let t = vec![TransitionMatrix::new(f00, f11)?; n];
    let widths = vec![FluctuationWidth::uniform(delta); n];
    transition_fluctuation_sigma(&px, &pz, &coeffs, &t, &widths, trials, seed, bins)
}

/// Optimizes the CZ waveform and writes `pulse_trace.csv`, `pulse_trajectory.csv` and
/// `pulse_report.json`.
pub fn run_pulse_opt(cfg: &ExperimentConfig) -> Result<PulseReport> {
    let out = cfg.output_dir();
    std::fs::create_dir_all(&out)?;
    let report = optimize_and_characterize(&cfg.pulse)?;
    report.optimizer.write_trace_csv(&out.join("pulse_trace.csv"))?;
    report.waveform.write_trajectory_csv(&cfg.pulse.pair()?, 0.1, &out.join("pulse_trajectory.csv"))?;
    std::fs::write(
        out.join("pulse_report.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "conditional_phase": report.metrics.conditional_phase,
            "leakage": report.metrics.leakage,
            "gate_process_fidelity": report.metrics.process_fidelity,
            "qpt_process_fidelity": report.qpt.process_fidelity,
            "qpt_average_fidelity": report.qpt.average_fidelity,
            "qpt_pp_fidelity": report.qpt.pp_fidelity,
            "objective": report.optimizer.f,
            "iterations": report.optimizer.iterations,
            "lambdas": report.waveform.lambdas,
        }))
        .expect("json value serializes")
            + "\n",
    )?;
    Ok(report)
}

/// Loads a distribution from either an `outcome,probability` or an `outcome,count` file.
/// Counts are returned alongside when present.
pub fn load_measurement(path: &Path) -> Result<(ProbDist, Option<Counts>)> {
    let text = std::fs::read_to_string(path)?;
    let header = text.lines().next().unwrap_or_default().trim();
    if header == "outcome,count" {
        let c = io::counts_from_csv(&text)?;
        Ok((ProbDist::from_counts(&c)?, Some(c)))
    } else {
        Ok((io::dist_from_csv(&text)?, None))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "[run]\nn_qubits = 4\nshots = 2000\nseed = 3\nresamples = 100\n";

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_toml_str(BASIC, Path::new(".")).unwrap();
        assert_eq!(cfg.run.n_qubits, 4);
        assert!(cfg.device.is_none());
        assert_eq!(cfg.noise, NoiseSettings::default());
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(matches!(
            ExperimentConfig::from_toml_str("[run]\nn_qubits = 4\nshots = 10\n", Path::new(".")),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_toml_str("[run]\nn_qubits = 1\nshots = 10\nseed = 1\n", Path::new(".")),
            Err(Error::Validity(_))
        ));
        assert!(ExperimentConfig::from_toml_str(
            "[run]\nn_qubits = 4\nshots = 10\nseed = 1\ndevice = \"missing.toml\"\n",
            Path::new(".")
        )
        .is_err());
    }

    #[test]
    fn ideal_run_saturates() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::from_toml_str(BASIC, dir.path()).unwrap();
        let res = run_lc(&cfg).unwrap();
        assert!((res[0].result.fidelity_bound - 1.0).abs() < 1e-12);
        assert!(dir.path().join("out/n4_counts_xz.csv").exists());
        assert!(dir.path().join("out/summary.csv").exists());
    }

    #[test]
    fn summarize_handles_zero_sigma() {
        let r = summarize(3, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(r.n_sigma_above_half.is_infinite() && r.gme_certified);
    }
}
