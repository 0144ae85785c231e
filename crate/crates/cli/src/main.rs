mod classical;
mod gen;
mod report;
mod run;
mod transform;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dqc1_core::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "dqc1", version, about = "Simulate and transform one-clean-qubit communication protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a built-in or described protocol on one or more inputs.
    Run(run::RunArgs),
    /// Apply transformation passes left to right.
    Transform(transform::TransformArgs),
    /// Classical baselines.
    #[command(subcommand)]
    Classical(classical::ClassicalCommand),
    /// Run the quick invariant suite.
    Verify(VerifyArgs),
    /// Instance generators.
    #[command(subcommand)]
    Gen(gen::GenCommand),
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Root seed; defaults to $DQC1_SEED, then 0.
    #[arg(long, env = "DQC1_SEED", default_value_t = 0)]
    pub seed: u64,
    /// CSV instead of JSON.
    #[arg(long)]
    pub csv: bool,
    /// Record wall-clock times (reports are otherwise reproducible byte for byte).
    #[arg(long)]
    pub timing: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
}

fn verify(args: &VerifyArgs) -> Result<ExitCode, Error> {
    let checks = dqc1_core::verify::verify_all(args.common.seed);
    let failed = checks.iter().filter(|c| !c.pass).count();
    let body = if args.common.csv {
        let mut out = String::from("check,pass,detail\n");
        for c in &checks {
            out.push_str(&format!("{},{},{}\n", report::csv_field(&c.name), c.pass, report::csv_field(&c.detail)));
        }
        report::csv_preamble("verify", args, args.common.seed) + &out
    } else {
        report::json("verify", args, args.common.seed, serde_json::json!({ "checks": checks, "failed": failed }))
    };
    report::emit(&args.common, &body)?;
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BackendLimit(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run::run(a),
        Command::Transform(a) => transform::transform(a),
        Command::Classical(c) => classical::classical(c),
        Command::Verify(a) => verify(a),
        Command::Gen(g) => gen::gen(g),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
