use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use randiso_cli::{run, CliError, Command, Config, Format};

#[derive(Debug, Parser)]
#[command(name = "randiso", version, about = "Exact experiments on isometry groups of randomizations")]
struct Args {
    /// Flat `key = value` experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report destination; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

fn execute(args: &Args) -> Result<bool, CliError> {
    let (mut config, base_dir) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            (Config::parse(&text)?, path.parent().map_or_else(PathBuf::new, Path::to_path_buf))
        }
        None => (Config::default(), PathBuf::new()),
    };
    if let Some(seed) = args.seed {
        config.set("seed", seed.to_string());
    }
    let report = run(args.command, &config, &base_dir)?;
    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match report.write(args.format, &mut out).and_then(|()| out.flush().map_err(CliError::from)) {
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => {}
        other => other?,
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("randiso: some checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("randiso: {e}");
            ExitCode::from(2)
        }
    }
}
