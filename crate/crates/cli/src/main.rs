use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bigiso_cli::{emit_json, emit_text, exit_code, parse_session, run_checks, RunnerConfig};

#[derive(Parser)]
#[command(name = "bigiso", version, about = "Exact checker for big-isotropic geometry sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a session file and run its checks.
    Check {
        /// Path to the session file.
        session: PathBuf,
        /// Output format.
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Run only checks with this name (e.g. `gp-condition`).
        #[arg(long)]
        only: Option<String>,
        /// Number of random sample points / sampled tuples per check.
        #[arg(long, default_value_t = 5)]
        sample_points: usize,
        /// Seed for the sample-point generator.
        #[arg(long, default_value_t = 2026)]
        seed: u64,
    },
    /// Parse a session file and print it back in canonical form.
    Print {
        /// Path to the session file.
        session: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { session, format, only, sample_points, seed } => {
            let text = match std::fs::read_to_string(&session) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", session.display());
                    return ExitCode::from(2);
                }
            };
            let model = match parse_session(&text) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let cfg = RunnerConfig { seed, sample_points };
            let reports = run_checks(&model, &cfg, only.as_deref());
            match format {
                Format::Text => print!("{}", emit_text(&reports)),
                Format::Json => print!("{}", emit_json(&reports)),
            }
            ExitCode::from(exit_code(&reports) as u8)
        }
        Command::Print { session } => {
            let text = match std::fs::read_to_string(&session) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", session.display());
                    return ExitCode::from(2);
                }
            };
            match parse_session(&text) {
                Ok(m) => {
                    print!("{m}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
