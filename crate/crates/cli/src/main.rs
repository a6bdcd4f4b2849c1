mod args;
mod commands;
mod report;
mod reproduce;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use thermo_spectrum::pressure::DEFAULT_BUDGET;
use thermo_spectrum::{Error, Exec, PartitionOptions};

use crate::report::Report;

pub const THREADS_ENV: &str = "THERMO_SPECTRUM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "thermo-spectrum", version, about = "Certified pressure, dimension and spectrum bounds for conformal IFS")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// ccf, rcf, lccf or file:<path>
    #[arg(long, global = true, default_value = "ccf")]
    pub system: String,
    /// I:k, T:k, box:R, file:<path> or a comma-separated letter list
    #[arg(long, global = true)]
    pub subset: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; THERMO_SPECTRUM_THREADS takes precedence
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Use the full-size certification boxes
    #[arg(long, global = true)]
    pub paper_box: bool,
    /// Cap on n * |F|^n for partition sums
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget_words: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the first letters in natural order
    Enumerate(commands::EnumerateArgs),
    /// Bracket the pressure of the subset
    Pressure(commands::PressureArgs),
    /// Bracket the Hausdorff dimension of the subset
    Dimension(commands::DimensionArgs),
    /// Certify an interval of the dimension spectrum
    CertifySpectrum(commands::CertifyArgs),
    /// Greedily build a subsystem of dimension close to a target
    Construct(commands::ConstructArgs),
    /// Bound the dimension gap between the system and a finite block
    GapBound(commands::GapArgs),
    /// Transfer-operator lower bound for the dimension
    LowerBound(commands::LowerBoundArgs),
    /// Run the full certification pipeline
    ReproducePaper(reproduce::ReproduceArgs),
}

/// Settings shared by every command after parsing.
pub struct RunConfig {
    pub global: Global,
    pub exec: Exec,
}

impl RunConfig {
    pub fn partition(&self) -> PartitionOptions {
        PartitionOptions { budget: self.global.budget_words, exec: self.exec, ..PartitionOptions::default() }
    }
}

/// A finished command: its report, an optional CSV table and the exit status.
pub struct Outcome {
    pub report: Report,
    pub csv: Option<Vec<Vec<String>>>,
    /// Certification was requested and not obtained.
    pub unresolved: bool,
}

impl Outcome {
    pub fn new(report: Report) -> Self {
        let unresolved = !report.all_certified();
        Self { report, csv: None, unresolved }
    }

    pub fn informational(report: Report) -> Self {
        Self { report, csv: None, unresolved: false }
    }
}

fn threads(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => {
            let n = v.trim().parse().with_context(|| format!("{THREADS_ENV}={v:?} is not a thread count"))?;
            Ok(Some(n))
        }
        _ => Ok(flag),
    }
}

fn setup(global: Global) -> Result<RunConfig> {
    let threads = threads(global.threads)?;
    if threads == Some(0) {
        bail!("thread count must be positive");
    }
    if global.budget_words == 0 {
        bail!("--budget-words must be positive");
    }
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("building the thread pool")?;
    }
    let exec = if threads == Some(1) { Exec::Sequential } else { Exec::Parallel };
    Ok(RunConfig { global, exec })
}

fn write_output(ctx: &RunConfig, outcome: &Outcome) -> Result<()> {
    let mut sink: Box<dyn Write> = match &ctx.global.out {
        Some(path) => Box::new(std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    match (ctx.global.format, &outcome.csv) {
        (Format::Json, _) => {
            serde_json::to_writer_pretty(&mut sink, &outcome.report)?;
            writeln!(sink)?;
        }
        (Format::Csv, Some(rows)) => {
            let mut w = csv::Writer::from_writer(sink);
            for row in rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        (Format::Csv, None) => unreachable!("checked before running"),
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. }) => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if cli.global.format == Format::Csv && !matches!(cli.command, Command::CertifySpectrum(_)) {
        bail!("--format csv is only available for certify-spectrum margin tables");
    }
    let ctx = setup(cli.global)?;
    let start = Instant::now();
    let mut outcome = match &cli.command {
        Command::Enumerate(a) => commands::enumerate(&ctx, a)?,
        Command::Pressure(a) => commands::pressure(&ctx, a)?,
        Command::Dimension(a) => commands::dimension(&ctx, a)?,
        Command::CertifySpectrum(a) => commands::certify(&ctx, a)?,
        Command::Construct(a) => commands::construct(&ctx, a)?,
        Command::GapBound(a) => commands::gap_bound(&ctx, a)?,
        Command::LowerBound(a) => commands::lower_bound(&ctx, a)?,
        Command::ReproducePaper(a) => reproduce::run(&ctx, a)?,
    };
    outcome.report.wall_time_ms = start.elapsed().as_millis();
    write_output(&ctx, &outcome)?;
    Ok(ExitCode::from(if outcome.unresolved { 2 } else { 0 }))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
