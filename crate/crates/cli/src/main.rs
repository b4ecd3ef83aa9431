use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use mbt_cli::args::{Cli, Command};
use mbt_cli::{bench, commands};

fn run(cli: &Cli) -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match &cli.command {
        Command::Bounds(a) => commands::cmd_bounds(a, &mut out)?,
        Command::Solve(a) => {
            commands::cmd_solve(a, &mut out)?;
        }
        Command::Heuristic(a) => {
            commands::cmd_heuristic(a, &mut out)?;
        }
        Command::Bench(a) => {
            bench::cmd_bench(a, &mut out)?;
        }
        Command::Generate(a) => commands::cmd_generate(a, &mut out)?,
        Command::ExportLp(a) => commands::cmd_export_lp(a, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
