use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qsd::runner::{load_config, run_path, scales_report};
use qsd::sweep::sweep_path;

/// Quantum Smoluchowski dynamics: dispersion and drift-diffusion scenarios.
#[derive(Parser)]
#[command(name = "qsd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write CSV trajectories plus meta.txt.
    Run {
        /// Path to the config file.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scenario per value of a numeric config key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dot-path of the numeric field to sweep, e.g. params.hbar.
        #[arg(long)]
        key: String,
        /// Comma-separated values, e.g. 0.01,0.1,1.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the derived scales (D, lambda_T, t_cross, ...) and exit.
    Scales {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => run_path(&config, out.as_deref()).map(|dir| {
            println!("wrote outputs to {}", dir.display());
        }),
        Command::Sweep {
            config,
            key,
            values,
            out,
        } => sweep_path(&config, &key, &values, out.as_deref()).map(|dir| {
            println!("wrote sweep outputs to {}", dir.display());
        }),
        Command::Scales { config } => load_config(&config)
            .and_then(|cfg| scales_report(&cfg))
            .map(|report| {
                print!("{report}");
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
