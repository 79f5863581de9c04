use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use dosctrl::commands::{self, ErrorReport, EXIT_OK, EXIT_UNSTABLE, EXIT_USAGE};
use dosctrl::config::{Experiment, ExperimentConfig, Overrides};
use dosctrl::dos::{generate, DosSignal, GeneratorSpec};
use dosctrl::error::{Error, Result};
use dosctrl::repro;
use dosctrl::sim::Architecture;

/// Networked control under denial-of-service: bounds, DoS signals,
/// closed-loop simulation.
#[derive(Parser)]
#[command(name = "dosctrl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print derived constants and stability bounds as JSON.
    Bounds {
        config: PathBuf,
        #[arg(long)]
        h: Option<usize>,
        #[arg(long)]
        mode: Option<Architecture>,
    },
    /// Generate or verify DoS signals.
    Dos {
        #[command(subcommand)]
        action: DosAction,
    },
    /// Run a closed-loop simulation; exits 3 on an unstable verdict.
    Sim {
        config: PathBuf,
        /// Trace CSV output.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Metrics JSON output (printed to stdout when omitted).
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long)]
        h: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mode: Option<Architecture>,
    },
    /// Reproduce the reference example: constants table and three scenarios.
    Repro {
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum DosAction {
    /// Alternating off/on signal with uniformly drawn durations.
    Gen {
        /// Off-duration range `lo,hi` in seconds.
        #[arg(long, value_parser = parse_range)]
        off: [f64; 2],
        /// On-duration range `lo,hi` in seconds.
        #[arg(long, value_parser = parse_range)]
        on: [f64; 2],
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        horizon: f64,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit class constants and check the success-time bounds.
    Verify {
        signal: PathBuf,
        /// Transmission period Δ.
        #[arg(long)]
        delta: f64,
        /// Dwell-time parameter; average rate when omitted.
        #[arg(long = "tau-d")]
        tau_d: Option<f64>,
        /// Duration parameter; average rate when omitted.
        #[arg(long = "T")]
        t_ratio: Option<f64>,
    },
}

fn parse_range(s: &str) -> std::result::Result<[f64; 2], String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok([parse(lo)?, parse(hi)?])
}

fn load(path: &Path, overrides: &Overrides) -> Result<Experiment> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply(overrides);
    cfg.resolve(path.parent())
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Bounds { config, h, mode } => {
            let exp = load(&config, &Overrides { h, seed: None, mode })?;
            print_json(&commands::bounds(&exp)?);
            Ok(EXIT_OK)
        }
        Command::Dos { action } => match action {
            DosAction::Gen {
                off,
                on,
                seed,
                horizon,
                out,
            } => {
                let signal = generate(seed, &GeneratorSpec { off, on }, horizon)?;
                match out {
                    Some(path) => commands::write_json(&signal, &path)?,
                    None => print_json(&signal),
                }
                Ok(EXIT_OK)
            }
            DosAction::Verify {
                signal,
                delta,
                tau_d,
                t_ratio,
            } => {
                let text = std::fs::read_to_string(&signal).map_err(|e| Error::Io {
                    path: signal.display().to_string(),
                    message: e.to_string(),
                })?;
                let sig: DosSignal = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", signal.display())))?;
                print_json(&commands::verify_signal(&sig, delta, tau_d, t_ratio)?);
                Ok(EXIT_OK)
            }
        },
        Command::Sim {
            config,
            trace,
            metrics,
            h,
            seed,
            mode,
        } => {
            let exp = load(&config, &Overrides { h, seed, mode })?;
            let (tr, met) = commands::run(&exp)?;
            if let Some(path) = trace {
                commands::write_trace(&tr, &path)?;
            }
            match metrics {
                Some(path) => commands::write_json(&met, &path)?,
                None => print_json(&met),
            }
            Ok(if met.stable_verdict { EXIT_OK } else { EXIT_UNSTABLE })
        }
        Command::Repro { json } => {
            let report = repro::run_repro()?;
            if json {
                print_json(&report);
            } else {
                println!("{report}");
            }
            Ok(if report.all_ok() { EXIT_OK } else { EXIT_UNSTABLE })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!(
                "{}",
                serde_json::to_string(&ErrorReport::from(&err)).expect("error report serializes")
            );
            commands::exit_code(&err)
        }
    };
    ExitCode::from(code as u8)
}
