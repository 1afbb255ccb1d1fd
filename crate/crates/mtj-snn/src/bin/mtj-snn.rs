//! Thin command-line front end over the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mtj_snn::cli::{self, Context, Overrides};
use mtj_snn::snn::{Fidelity, Mode};

#[derive(Parser)]
#[command(
    name = "mtj-snn",
    about = "Stochastic spiking neural networks built from spin-Hall MTJs: \
             device characterization, inference, sweeps and energy reports",
    version
)]
struct Args {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "mtj-snn.toml")]
    config: PathBuf,

    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker thread count override (0 = machine parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<String>,

    /// Network fidelity override.
    #[arg(long, global = true, value_enum)]
    fidelity: Option<FidelityArg>,

    /// Network mode override.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sync,
    Async,
}

#[derive(Clone, Copy, ValueEnum)]
enum FidelityArg {
    Device,
    Behavioral,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo switching-probability curves for every configured device.
    Characterize,
    /// Fit the logistic to an existing characterization CSV.
    Fit {
        /// Input CSV (`current_A,p_switch,n_trials`).
        input: PathBuf,
    },
    /// Closed-form retention failure probabilities.
    Retention,
    /// Telegraphic dwell-time analysis.
    Dwell,
    /// Run stochastic inference and write accuracy and energy outputs.
    Simulate,
    /// Monte Carlo variation sweeps.
    Sweep,
    /// Energy comparison across devices and modes.
    EnergyReport,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        seed: args.seed,
        out: args.out.clone(),
        workers: args.workers,
        mode: args.mode.map(|m| match m {
            ModeArg::Sync => Mode::Sync,
            ModeArg::Async => Mode::Async,
        }),
        fidelity: args.fidelity.map(|f| match f {
            FidelityArg::Device => Fidelity::Device,
            FidelityArg::Behavioral => Fidelity::Behavioral,
        }),
    };
    let ctx = match Context::load(&args.config, overrides) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match &args.command {
        Command::Characterize => cli::cmd_characterize(&ctx),
        Command::Fit { input } => cli::cmd_fit(&ctx, input),
        Command::Retention => cli::cmd_retention(&ctx),
        Command::Dwell => cli::cmd_dwell(&ctx),
        Command::Simulate => cli::cmd_simulate(&ctx),
        Command::Sweep => cli::cmd_sweep(&ctx),
        Command::EnergyReport => cli::cmd_energy_report(&ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
