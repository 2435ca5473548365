use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use chordal_bgw::chordal::{Deroot, SampleMode};
use chordal_cli::{Format, Result};
use chordal_experiments::{Config, EXPERIMENTS};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chordal", version, about = "Enumerate, sample and analyse random k-connected chordal graphs of bounded tree-width")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact counts as CSV.
    Enumerate {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n_max: usize,
        /// Count graphs rooted at an ordered k-clique by non-root vertices.
        #[arg(long)]
        rooted: bool,
        /// Compare with brute force up to this size.
        #[arg(long, value_name = "N0")]
        oracle_check: Option<usize>,
    },
    /// Singularity, offspring-law moments and tree constants as JSON.
    Constants {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        order: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Uniform random graphs with `n` non-root vertices.
    Sample {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::BlowupRejection)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Forget the root clique, or reweight to the unrooted uniform law.
        #[arg(long, value_enum)]
        deroot: Option<DerootArg>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Run a verification experiment from a key-value config file.
    Experiment {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(EXPERIMENTS))]
        name: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    BlowupRejection,
    RecursiveExact,
}

#[derive(Clone, Copy, ValueEnum)]
enum DerootArg {
    Forget,
    Reweight,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Dot,
}

fn writer(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Whether every check passed.
fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Enumerate { t, k, n_max, rooted, oracle_check } => chordal_cli::enumerate(t, k, n_max, rooted, oracle_check, io::stdout().lock()),
        Command::Constants { t, k, order, tol } => {
            let c = chordal_cli::constants(t, k, order, tol)?;
            println!("{}", serde_json::to_string_pretty(&c)?);
            Ok(true)
        }
        Command::Sample { t, k, n, mode, count, seed, deroot, out, format } => {
            let mode = match mode {
                ModeArg::BlowupRejection => SampleMode::BlowupRejection,
                ModeArg::RecursiveExact => SampleMode::RecursiveExact,
            };
            let deroot = deroot.map(|d| match d {
                DerootArg::Forget => Deroot::Forget,
                DerootArg::Reweight => Deroot::Reweight,
            });
            let format = match format {
                FormatArg::Json => Format::Json,
                FormatArg::Dot => Format::Dot,
            };
            chordal_cli::sample(t, k, n, mode, count, seed, deroot, format, writer(out.as_ref())?)?;
            Ok(true)
        }
        Command::Experiment { name, config, seed, out } => {
            let mut cfg = Config::load(&config)?;
            if let Some(s) = seed {
                cfg.set("seed", s);
            }
            let report = chordal_experiments::run(&name, &cfg, out.as_deref())?;
            if out.is_none() {
                print!("{}", report.to_json()?);
            }
            for c in report.failures() {
                eprintln!("FAIL {}: value {} (reference {:?}, tolerance {:?})", c.name, c.value.value, c.reference, c.tolerance);
            }
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
