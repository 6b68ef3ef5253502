//! Command-line front end: configuration, CSV input/output and the
//! subcommands behind the `trapcorr` binary.

pub mod commands;
pub mod config;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{Backend, Grid, RunConfig};

use crate::error::{Error, Result};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "TRAPCORR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "trapcorr", version, about = "Phase shifts from integrated correlation functions of a trapped two-fermion system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of the box Hamiltonian as `index,energy`.
    Spectrum {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// C(t), C0(t) and their difference on the dense time grid.
    Correlate {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Segment averages of a `correlate` CSV next to the infinite-volume curve.
    Average {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit the contact coupling to an `average` CSV; JSON report on stdout.
    Fit {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Numerical weighted integral against the closed form.
    Oracle {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// correlate, average and fit in one go.
    Pipeline {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn source(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        // fails only if the pool was already initialized
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Spectrum { config, output } => {
            let cfg = RunConfig::load(&config)?;
            commands::spectrum(&cfg, sink(output.as_deref())?)
        }
        Command::Correlate { config, output } => {
            let cfg = RunConfig::load(&config)?;
            commands::correlate(&cfg, sink(output.as_deref())?)
        }
        Command::Average {
            config,
            input,
            output,
        } => {
            let cfg = RunConfig::load(&config)?;
            commands::average(&cfg, source(&input)?, sink(output.as_deref())?)
        }
        Command::Fit {
            config,
            input,
            output,
        } => {
            let cfg = RunConfig::load(&config)?;
            let report = commands::fit(&cfg, source(&input)?)?;
            let json = commands::fit_report_json(&report);
            if let Some(path) = output {
                std::fs::write(path, &json)?;
            }
            io::stdout().write_all(json.as_bytes())?;
            Ok(())
        }
        Command::Oracle { config, output } => {
            let cfg = RunConfig::load(&config)?;
            commands::oracle(&cfg, sink(output.as_deref())?)
        }
        Command::Pipeline { config, out_dir } => {
            let cfg = RunConfig::load(&config)?;
            if let Some(report) = commands::pipeline(&cfg, &out_dir)? {
                io::stdout().write_all(commands::fit_report_json(&report).as_bytes())?;
            }
            Ok(())
        }
    }
}
