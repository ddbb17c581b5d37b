// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lcsim::experiment::{self, ExperimentConfig, ReportFormat};
use lcsim::readout::{mitigate, DeviceParams, TransitionMatrix};
use lcsim::{io, Error};

/// Linear-cluster-state experiment simulator.
#[derive(Parser)]
#[command(name = "lcsim", version)]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate, mitigate and certify LC states for each configured size.
    RunLc(ConfigArgs),
    /// Confusion-matrix drift study; one histogram per size plus a summary.
    RunFluctuation(ConfigArgs),
    /// Optimize the CZ waveform and characterize the gate by tomography.
    RunPulseOpt(ConfigArgs),
    /// Apply inverse readout to a distribution file.
    Mitigate(MitigateArgs),
    /// Witness report from measured XZ/ZX files.
    Witness(WitnessArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML experiment config.
    config: PathBuf,
    #[arg(long)]
    n_qubits: Option<usize>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<ReportFormat>,
    #[arg(long)]
    resamples: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    z: Option<f64>,
}

#[derive(Args)]
struct Readout {
    /// Device calibration TOML; perfect readout when absent.
    #[arg(long)]
    device: Option<PathBuf>,
    /// First device qubit of the chain.
    #[arg(long, default_value_t = 0)]
    offset: usize,
}

#[derive(Args)]
struct MitigateArgs {
    /// `outcome,probability` or `outcome,count` CSV.
    input: PathBuf,
    #[command(flatten)]
    readout: Readout,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct WitnessArgs {
    xz: PathBuf,
    zx: PathBuf,
    #[command(flatten)]
    readout: Readout,
    /// Shots per basis; taken from the files when they hold counts.
    #[arg(long, default_value_t = 1)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    #[arg(long, default_value_t = 0.0)]
    z: f64,
    #[arg(long, value_parser = parse_format, default_value = "text")]
    format: ReportFormat,
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    match s {
        "text" => Ok(ReportFormat::Text),
        "json" => Ok(ReportFormat::Json),
        _ => Err(format!("unknown format {s:?} (text or json)")),
    }
}

fn load_config(a: &ConfigArgs) -> lcsim::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(&a.config)?;
    let r = &mut cfg.run;
    if let Some(n) = a.n_qubits {
        r.n_qubits = n;
        r.n_min = None;
    }
    if let Some(v) = a.shots {
        r.shots = v;
    }
    if let Some(v) = a.seed {
        r.seed = v;
    }
    if let Some(v) = &a.output_dir {
        r.output_dir = std::env::current_dir()?.join(v);
    }
    if let Some(v) = a.format {
        r.format = v;
    }
    if let Some(v) = a.resamples {
        r.resamples = v;
    }
    if let Some(v) = a.delta {
        r.delta = v;
    }
    if let Some(v) = a.trials {
        r.trials = v;
    }
    if let Some(v) = a.z {
        r.z = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn transition(readout: &Readout, n: usize) -> lcsim::Result<Vec<TransitionMatrix>> {
    match &readout.device {
        Some(p) => DeviceParams::from_path(p)?.transition_matrices(readout.offset, n),
        None => Ok(vec![TransitionMatrix::perfect(); n]),
    }
}

fn run(cli: Cli) -> lcsim::Result<()> {
    match cli.command {
        Command::RunLc(a) => {
            let cfg = load_config(&a)?;
            for r in experiment::run_lc(&cfg)? {
                print!("{}", r.result.to_key_value());
            }
        }
        Command::RunFluctuation(a) => {
            let cfg = load_config(&a)?;
            for s in experiment::run_fluctuation(&cfg)? {
                println!("n = {}  mean = {:.3e}  std = {:.3e}", s.n_qubits, s.mean_distortion, s.std_distortion);
            }
        }
        Command::RunPulseOpt(a) => {
            let cfg = load_config(&a)?;
            let r = experiment::run_pulse_opt(&cfg)?;
            println!("conditional_phase = {:.6}", r.metrics.conditional_phase);
            println!("leakage = {:.3e}", r.metrics.leakage);
            println!("process_fidelity = {:.6}", r.qpt.process_fidelity);
        }
        Command::Mitigate(a) => {
            let (p, _) = experiment::load_measurement(&a.input)?;
            let t = transition(&a.readout, p.n_qubits())?;
            io::write_dist(&a.output, &mitigate(&p, &t)?)?;
        }
        Command::Witness(a) => {
            let (px, cx) = experiment::load_measurement(&a.xz)?;
            let (pz, cz) = experiment::load_measurement(&a.zx)?;
            if px.n_qubits() != pz.n_qubits() {
                return Err(Error::Shape("XZ and ZX files differ in qubit count".into()));
            }
            let t = transition(&a.readout, px.n_qubits())?;
            let settings = experiment::AnalysisSettings {
                shots: cx.as_ref().map(|c| c.shots()).unwrap_or(a.shots),
                delta: a.delta,
                trials: a.trials,
                resamples: a.resamples,
                seed: a.seed,
                z: a.z,
            };
            let counts = cx.as_ref().zip(cz.as_ref());
            let res = experiment::analyze(&px, &pz, counts, &t, &settings)?;
            match a.format {
                ReportFormat::Text => {
                    print!("{}", res.result.to_key_value());
                    if let Some(b) = res.sigma_bootstrap {
                        println!("sigma_bootstrap = {b:.6}");
                    }
                }
                ReportFormat::Json => {
                    println!("{}", serde_json::to_string_pretty(&res).expect("plain struct serializes"))
                }
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::Validity(_)
        | Error::Shape(_)
        | Error::Domain(_)
        | Error::Size(_)
        | Error::Index(_)
        | Error::Normalization(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot size worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
