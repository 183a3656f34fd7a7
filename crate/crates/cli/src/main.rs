use std::process::ExitCode;

use anyhow::{Context, Result};
use cgseq_cli::args::{Cli, Command};
use cgseq_cli::commands;
use clap::Parser;

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("CGSEQ_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("CGSEQ_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let cfg = cli.command.flags().resolve()?;
    let outcome = match cli.command {
        Command::Simulate(_) => commands::simulate(&cfg)?,
        Command::Estimate(_) => commands::estimate(&cfg)?,
        Command::Benchmark(_) => commands::benchmark(&cfg)?,
        Command::Biasmap(_) => commands::biasmap(&cfg)?,
    };
    for n in &outcome.notes {
        println!("{n}");
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
