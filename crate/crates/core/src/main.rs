use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ljet::cli::{run_json, Command, Options, Report};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    Check,
    Cover,
    Chi,
    Reconstruct,
    Reduce,
    VerifySolution,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Check => Command::Check,
            CommandArg::Cover => Command::Cover,
            CommandArg::Chi => Command::Chi,
            CommandArg::Reconstruct => Command::Reconstruct,
            CommandArg::Reduce => Command::Reduce,
            CommandArg::VerifySolution => Command::VerifySolution,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// λ-symmetries, nonlocal reconstruction and order reduction for scalar ODEs.
#[derive(Debug, Parser)]
#[command(name = "ljet", version)]
struct Args {
    command: CommandArg,
    /// Problem file (JSON).
    file: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Seed for numeric sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative tolerance for numeric checks.
    #[arg(long)]
    tol: Option<f64>,
    /// Degree bound for the invariant search in `reduce`.
    #[arg(long)]
    degree_bound: Option<u32>,
    /// Candidate solution for `verify-solution`, overriding the file.
    #[arg(long)]
    solution: Option<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = Command::from(args.command);
    let opts = Options {
        seed: args.seed,
        tolerance: args.tol,
        degree_bound: args.degree_bound,
        solution: args.solution,
    };
    let report = match std::fs::read_to_string(&args.file) {
        Ok(text) => run_json(command, &text, &opts),
        Err(e) => Report::input_error(
            command.name(),
            &format!("cannot read {}: {e}", args.file.display()),
        ),
    };
    match args.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report.to_json()).expect("reports serialize")
        ),
        Format::Text if report.status() == "input-error" => eprint!("{}", report.to_text()),
        Format::Text => print!("{}", report.to_text()),
    }
    ExitCode::from(report.exit_code as u8)
}
