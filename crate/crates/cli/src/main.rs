mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::OutDir;

#[derive(Parser)]
#[command(name = "natanzon-pdm", version)]
#[command(about = "Confluent Natanzon potentials with position-dependent mass")]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,

    /// Exit with code 4 when a verification threshold is violated
    #[arg(long)]
    strict: bool,

    /// Output directory; overrides `output_dir` in the config
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    Potential,
    Spectrum,
    Wavefunctions,
    Verify,
    AlgebraCheck,
    Sweep,
}

fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let cfg = RunConfig::load(&cli.config)?;
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut out = OutDir::create(&dir)?;
    let result = match cli.command {
        Command::Potential => commands::potential(&cfg, &mut out),
        Command::Spectrum => commands::spectrum(&cfg, &mut out),
        Command::Wavefunctions => commands::wavefunctions(&cfg, &mut out),
        Command::Verify => commands::verify(&cfg, &mut out, cli.strict),
        Command::AlgebraCheck => commands::algebra_check(&cfg, &mut out, cli.strict),
        Command::Sweep => commands::sweep(&cfg, &mut out),
    };
    for p in out.written() {
        println!("wrote {}", p.display());
    }
    result.map(|()| out.written().to_vec())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("natanzon-pdm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
