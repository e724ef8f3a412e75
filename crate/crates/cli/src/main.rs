use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cmv_cli::config::OUT_DIR_ENV;
use cmv_cli::{run, Invocation, Overrides, Task};

/// Run one task of the CMV toolkit from a JSON config.
#[derive(Debug, Parser)]
#[command(name = "cmv", version)]
struct Args {
    /// Task to run.
    #[arg(value_enum)]
    task: Task,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config and the environment.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let invocation = Invocation {
        task: args.task,
        config: args.config,
        overrides: Overrides {
            out: args.out,
            env_out: std::env::var_os(OUT_DIR_ENV).map(PathBuf::from),
            seed: args.seed,
        },
        threads: args.threads,
    };
    match run(&invocation) {
        Ok(done) => {
            let verdict = match &done.output.report {
                Some(r) if r.vacuous => " (vacuous)",
                Some(r) if r.passed => " (passed)",
                Some(_) => " (not passed)",
                None => "",
            };
            println!("{} written to {}{verdict}", args.task.name(), done.output_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{record}");
            ExitCode::from(e.exit_code())
        }
    }
}
