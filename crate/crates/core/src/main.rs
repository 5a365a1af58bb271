use clap::Parser;
use rotopump::cli::{execute, verify_table, Command, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Spin-to-rotation angular momentum transfer toolkit.
#[derive(Debug, Parser)]
#[command(name = "rotopump", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` parameter file.
    #[arg(long)]
    params: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "ROTOPUMP_THREADS")]
    threads: Option<usize>,
    /// Override one parameter; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = RunConfig {
        command: args.command,
        params: args.params,
        out: args.out,
        seed: args.seed,
        threads: args.threads,
        overrides: args.overrides,
    };
    let result = execute(&cfg);
    if cfg.command == Command::Verify {
        if let Ok(table) = verify_table(&cfg.out) {
            print!("{table}");
        }
    }
    match result {
        Ok(m) => {
            eprintln!("{}: wrote {} files to {} in {:.2} s", m.command, m.outputs.len() + 1, cfg.out.display(), m.wall_time_s);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rotopump: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
