use std::process::ExitCode;

use amdc_cli::commands;
use amdc_cli::config::{load_config, merge_command, usage, Cli, ConfigFile, UsageError};
use anyhow::{Context, Result};
use clap::Parser;

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => load_config(path)?,
        None => ConfigFile::default(),
    };
    if let Some(recorded) = &file.replay_of {
        if recorded != cli.command.name() {
            return Err(usage(format!(
                "manifest records a `{recorded}` run, not `{}`",
                cli.command.name()
            )));
        }
    }
    let threads = cli.threads.or(file.threads);
    if let Some(n) = threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let command = merge_command(cli.command, file);
    commands::run(&command)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
