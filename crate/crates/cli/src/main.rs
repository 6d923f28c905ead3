use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use simop_cli::{load, run, write_outputs, CliError, Command, RunOptions};

#[derive(Parser)]
#[command(name = "simop", version, about = "Spectra of perturbed operators by similarity transforms")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured pipeline and check its invariants.
    Analyze(CommonArgs),
    /// Isolate one simple eigenvalue and certify the perturbed eigenpair.
    Split(CommonArgs),
    /// Run every property gate and the oracle suite on the configured instance.
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Directory for report.json and CSV output.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Seed for randomized property gates and random model data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    quiet: bool,
    /// Record wall-clock timings in the report.
    #[arg(long)]
    timings: bool,
    #[arg(long, hide = true, value_name = "EPS")]
    corrupt_v: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (cmd, args) = match cli.command {
        Cmd::Analyze(a) => (Command::Analyze, a),
        Cmd::Split(a) => (Command::Split, a),
        Cmd::Verify(a) => (Command::Verify, a),
    };
    let code = match execute(cmd, &args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(cmd: Command, args: &CommonArgs) -> Result<i32, CliError> {
    let loaded = load(&args.config)?;
    let opts = RunOptions { seed: args.seed, timings: args.timings, corrupt_v: args.corrupt_v };
    let outcome = run(cmd, &loaded, &opts);
    write_outputs(&outcome, &loaded.config, &args.out)?;
    let p = &outcome.report.pipeline;
    if let Some(e) = &p.error {
        eprintln!("error ({}): {}", e.kind, e.message);
    }
    if !args.quiet {
        let selected = p.selected.as_deref().unwrap_or("-");
        let failed = outcome.report.failed_gates();
        println!(
            "{} {}: pipeline {selected}, {} gates, {} failed, exit {}",
            cmd.name(),
            args.config.display(),
            outcome.report.invariant_gates.len(),
            failed.len(),
            outcome.exit_code
        );
        for g in outcome.report.invariant_gates.iter().filter(|g| !g.pass) {
            println!("  FAIL {}: {:e} > {:e}", g.name, g.value, g.threshold);
        }
    }
    Ok(outcome.exit_code)
}
