use clap::{Parser, Subcommand};
use rfl_cli::commands;
use rfl_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical laboratory for Ricci flow, entropy functionals, Fisher
/// information and Weyl geometry.
#[derive(Parser)]
#[command(name = "rfl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a Ricci flow and store the trajectory.
    Flow {
        /// torus | sphere
        #[arg(long)]
        geometry: String,
        /// Plain-text `key = value` config file.
        #[arg(long)]
        config: PathBuf,
        /// Output root (default: $RFL_OUTPUT_DIR or ./rfl-out).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Backward conjugate-heat solve over a stored trajectory.
    Entropy {
        /// Directory written by `flow`.
        #[arg(long)]
        trajectory: PathBuf,
        /// vonmises | uniform | path to a field CSV (torus), constant (sphere).
        #[arg(long = "f-end", default_value = "vonmises")]
        f_end: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Madelung / Fisher identity checks on closed-form states.
    Quantum {
        /// gaussian | ho-ground | coherent | free-packet
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 512)]
        n: usize,
        /// Where to write quantum_report.json.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Weyl-geometry identity checks.
    Weyl {
        /// uniform | bump1 | bump2 | random-smooth
        #[arg(long)]
        density: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        n: usize,
        /// Where to write weyl_report.json.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run every preset experiment; exit 1 if any assertion fails.
    VerifyAll {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reprint stored reports from an output directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Flow { geometry, config, output } => {
            let out = commands::output_root(output);
            commands::flow(&geometry, &config, &out)?;
            Ok(true)
        }
        Command::Entropy { trajectory, f_end, output } => {
            let out = commands::output_root(output);
            commands::entropy_cmd(&trajectory, &f_end, &out)?;
            Ok(true)
        }
        Command::Quantum { case, n, report, output } => {
            let out = commands::output_root(output);
            let report = report.unwrap_or_else(|| out.join("quantum_report.json"));
            commands::quantum_cmd(&case, n, &report, &out)
        }
        Command::Weyl { density, seed, n, report, output } => {
            let out = commands::output_root(output);
            let report = report.unwrap_or_else(|| out.join("weyl_report.json"));
            commands::weyl_cmd(&density, seed, n, &report, &out)
        }
        Command::VerifyAll { output } => {
            let out = commands::output_root(output);
            commands::verify_all_cmd(&out)
        }
        Command::Report { dir } => commands::report_cmd(&dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::ConfigInvalid { .. }) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
