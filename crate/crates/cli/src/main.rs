//! Command-line front end: scenario simulation, design-condition checking,
//! one-shot prediction, parameter sweeps, config round-tripping and
//! truncation-constant estimation.

// NaN-rejecting comparisons, as in the library.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Overrides;

#[derive(Parser)]
#[command(
    name = "predictorlab",
    version,
    about = "Predictor-based sampled-data output feedback for delayed systems: simulate, certify, sweep"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOverrides {
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the integrator step.
    #[arg(long, value_name = "STEP")]
    h: Option<f64>,
    /// Override the horizon.
    #[arg(long, value_name = "SECONDS")]
    t_end: Option<f64>,
}

impl CommonOverrides {
    fn into_overrides(self) -> Overrides {
        Overrides {
            seed: self.seed,
            h: self.h,
            t_end: self.t_end,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a closed-loop scenario and write the trace CSV.
    Simulate {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Output CSV path (default trace.csv).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
    /// Evaluate the certificate and small-period design inequalities.
    Check {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Exit with status 3 if any margin fails.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
    /// Predict the future state from a delayed estimate and the configured
    /// input history; prints one component per line.
    Predict {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Comma-separated state estimate, e.g. "1.0,1.0".
        #[arg(long)]
        state: String,
        /// Use the exact matrix-exponential predictor (LTI plants only).
        #[arg(long)]
        exact: bool,
        /// Use the successive-approximation predictor.
        #[arg(long)]
        approx: bool,
    },
    /// Run a parameter sweep and write the result CSV.
    Sweep {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Output CSV path (default sweep.csv).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
    /// Parse a scenario file and emit it back as canonical TOML.
    ConfigDump {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Estimate the predictor truncation constant empirically.
    EstimateK {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Number of seeded random draws.
        #[arg(long, default_value_t = 48)]
        trials: usize,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("PREDICTORLAB_THREADS") {
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring invalid PREDICTORLAB_THREADS={value:?}"),
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate {
            config,
            out,
            overrides,
        } => commands::cmd_simulate(&config, out, overrides.into_overrides()),
        Command::Check {
            config,
            strict,
            overrides,
        } => commands::cmd_check(&config, strict, overrides.into_overrides()),
        Command::Predict {
            config,
            state,
            exact,
            approx,
        } => commands::cmd_predict(&config, &state, exact, approx),
        Command::Sweep {
            config,
            out,
            overrides,
        } => commands::cmd_sweep(&config, out, overrides.into_overrides()),
        Command::ConfigDump { config, out } => commands::cmd_config_dump(&config, out),
        Command::EstimateK {
            config,
            trials,
            overrides,
        } => commands::cmd_estimate_k(&config, trials, overrides.into_overrides()),
    };
    ExitCode::from(code as u8)
}
