//! Command-line front end: `generate`, `estimate`, `report`, `optimize`.
//!
//! Exit status is 0 on success, 1 when the data or a computation fails, and
//! 2 for usage errors. Warnings go to stderr and never change the status.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::aggregate::StdevMode;
use crate::domain::{ModelConfig, ModelId, StayCoefficients, Violation};
use crate::error::Error;
use crate::ingest::{load_dataset_dir, write_dataset, Dataset};
use crate::optimize::{grid_search, GridSpec, Range, SearchOptions, DEFAULT_GRID_CAP};
use crate::pipeline::run_model_with;
use crate::report::{
    emit, write_best, write_cmg_stats, write_estimates, write_ground_truth, write_trace, Format, PerformanceReport,
};
use crate::synthetic::{generate_synthetic, CostProcess, SyntheticSpec};

const MAX_WARNINGS_SHOWN: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "casecost", version, about = "Patient-level hospital case-cost estimation")]
pub struct Cli {
    /// Output format for report files.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,

    /// Worker threads for grid search (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    /// Suppress warnings and summaries.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessArg {
    Riw,
    Los,
    Stay,
    Mixed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic dataset with ground truth.
    Generate(GenerateArgs),
    /// Per-case estimates for one model.
    Estimate(EstimateArgs),
    /// Side-by-side performance table for several models.
    Report(ReportArgs),
    /// Grid search for the stay-type coefficients.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct Coefficients {
    #[arg(long, default_value_t = 1.3)]
    pub k1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub k2: f64,
    #[arg(long, default_value_t = 2.85)]
    pub k3: f64,
}

impl Coefficients {
    fn get(&self) -> Result<StayCoefficients, Error> {
        StayCoefficients::new(self.k1, self.k2, self.k3)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of CMGs.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub cmgs: u32,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub min_cases: usize,
    #[arg(long, default_value_t = 80)]
    pub max_cases: usize,
    /// How true costs are produced.
    #[arg(long, value_enum, default_value_t = ProcessArg::Mixed)]
    pub process: ProcessArg,
    /// Fraction of CMGs with one shared PAC weight.
    #[arg(long, default_value_t = 0.025)]
    pub degenerate_pac: f64,
    /// Fraction of CMGs with one shared PAC and one shared RIW weight.
    #[arg(long, default_value_t = 0.045)]
    pub degenerate_both: f64,
    #[arg(long, default_value_t = 6000.0)]
    pub cpwc: f64,
    #[arg(long, default_value_t = 1600.0)]
    pub cpd: f64,
    /// Stay-type ratios for `--process stay`.
    #[command(flatten)]
    pub k: Coefficients,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub k: Coefficients,
    /// Directory with cases.csv, params.csv and benchmark.csv.
    pub data: PathBuf,
    /// Output directory (default: the data directory).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Comma-separated per-case models.
    #[arg(long, default_value = "m1,m2,m3,m4,m5")]
    pub models: String,
    /// Add the M3 + M5 hybrid column.
    #[arg(long)]
    pub hybrid: bool,
    /// Add the averaged stdev error row (not part of the standard table).
    #[arg(long)]
    pub with_stdev: bool,
    /// Population instead of sample standard deviation for estimates.
    #[arg(long)]
    pub population_stdev: bool,
    #[command(flatten)]
    pub k: Coefficients,
    pub data: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// m5 or hybrid.
    #[arg(long, default_value = "m5")]
    pub model: String,
    /// k1 range as lo:hi:step or a single value.
    #[arg(long, default_value = "1.0:2.0:0.1")]
    pub k1: String,
    #[arg(long, default_value = "0.3:0.7:0.1")]
    pub k2: String,
    #[arg(long, default_value = "2.0:3.0:0.05")]
    pub k3: String,
    /// Refuse grids larger than this.
    #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
    pub max_points: u64,
    /// Criterion differences up to this many percentage points are ties.
    #[arg(long, default_value_t = 0.0)]
    pub tolerance: f64,
    /// Also write every evaluated point.
    #[arg(long)]
    pub trace: bool,
    pub data: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::HybridPerCase
            | Error::GridTooLarge { .. }
            | Error::EmptyGrid
            | Error::InfeasibleSpec(_) => Failure::Usage(e.to_string()),
            e => Failure::Run(e),
        }
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    quiet: bool,
}

impl Io<'_> {
    fn say(&mut self, line: impl AsRef<str>) {
        if !self.quiet {
            let _ = writeln!(self.out, "{}", line.as_ref());
        }
    }

    fn warn(&mut self, warnings: &[Violation]) {
        if self.quiet {
            return;
        }
        for w in warnings.iter().take(MAX_WARNINGS_SHOWN) {
            let _ = writeln!(self.err, "{w}");
        }
        if warnings.len() > MAX_WARNINGS_SHOWN {
            let _ = writeln!(
                self.err,
                "... and {} more warnings",
                warnings.len() - MAX_WARNINGS_SHOWN
            );
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let mut io = Io {
        out,
        err,
        quiet: cli.quiet,
    };
    let format = Format::from(cli.format);
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a, format, &mut io),
        Command::Estimate(a) => cmd_estimate(a, format, &mut io),
        Command::Report(a) => cmd_report(a, format, &mut io),
        Command::Optimize(a) => cmd_optimize(a, format, cli.threads.map(usize::from), &mut io),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(io.err, "usage error: {m}");
            2
        }
        Err(Failure::Run(e)) => {
            let _ = writeln!(io.err, "error: {e}");
            1
        }
    }
}

/// Entry point for the binary.
pub fn main() -> std::process::ExitCode {
    let code = run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::ExitCode::from(code as u8)
}

fn load(dir: &Path, io: &mut Io) -> Result<Dataset, Failure> {
    let ds = load_dataset_dir(dir)?;
    io.warn(ds.warnings());
    Ok(ds)
}

fn cmd_generate(a: &GenerateArgs, format: Format, io: &mut Io) -> Result<(), Failure> {
    let cost_process = match a.process {
        ProcessArg::Riw => CostProcess::ProportionalToRiw,
        ProcessArg::Los => CostProcess::ProportionalToLos,
        ProcessArg::Stay => CostProcess::StayType(a.k.get()?),
        ProcessArg::Mixed => CostProcess::Mixed,
    };
    let spec = SyntheticSpec {
        n_cmgs: a.cmgs as usize,
        cases_per_cmg: (a.min_cases, a.max_cases),
        cost_process,
        degenerate_pac_fraction: a.degenerate_pac,
        degenerate_both_fraction: a.degenerate_both,
        cpwc: a.cpwc,
        cpd_total: a.cpd,
        seed: a.seed,
    };
    let data = generate_synthetic(&spec)?;
    write_dataset(&data.dataset, &a.output)?;
    emit(&a.output, "ground_truth", format, |w| {
        write_ground_truth(&data.ground_truth, format, w)
    })?;
    io.say(format!(
        "generated {} cases in {} CMGs into {}",
        data.dataset.cases().len(),
        data.dataset.groups().len(),
        a.output.display()
    ));
    Ok(())
}

fn cmd_estimate(a: &EstimateArgs, format: Format, io: &mut Io) -> Result<(), Failure> {
    let model: ModelId = a.model.parse()?;
    if model == ModelId::Hybrid {
        return Err(Failure::Usage(
            "the hybrid model has no per-case estimates; run `report --hybrid` instead".into(),
        ));
    }
    let k = a.k.get()?;
    let ds = load(&a.data, io)?;
    let est = crate::models::estimate(model, &ds, &ModelConfig::new(model).with_coefficients(k))?;
    io.warn(&est.warnings);
    let out_dir = a.output.as_deref().unwrap_or(&a.data);
    let path = emit(out_dir, "estimates", format, |w| {
        write_estimates(model, &est.estimates, format, w)
    })?;
    io.say(format!(
        "model={model} cases={} estimate_total={:.2} benchmark_total={:.2} -> {}",
        est.estimates.len(),
        est.total(),
        ds.benchmark_total(),
        path.display()
    ));
    Ok(())
}

fn parse_models(list: &str) -> Result<Vec<ModelId>, Failure> {
    let mut models = Vec::new();
    for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let m: ModelId = tok.parse()?;
        if !models.contains(&m) {
            models.push(m);
        }
    }
    Ok(models)
}

fn cmd_report(a: &ReportArgs, format: Format, io: &mut Io) -> Result<(), Failure> {
    let mut models = parse_models(&a.models)?;
    models.retain(|m| *m != ModelId::Hybrid);
    if a.hybrid || parse_models(&a.models)?.contains(&ModelId::Hybrid) {
        models.push(ModelId::Hybrid);
    }
    if models.is_empty() {
        return Err(Failure::Usage("no models requested".into()));
    }
    let k = a.k.get()?;
    let mode = if a.population_stdev {
        StdevMode::Population
    } else {
        StdevMode::Sample
    };
    let ds = load(&a.data, io)?;

    let mut runs = Vec::new();
    for &m in &models {
        let run = run_model_with(&ds, &ModelConfig::new(m).with_coefficients(k), mode)?;
        io.warn(&run.warnings);
        runs.push(run);
    }
    let tables: Vec<_> = runs.iter().map(|r| r.table.clone()).collect();
    let report = PerformanceReport::new(&tables, a.with_stdev)?;

    let out_dir = a.output.as_deref().unwrap_or(&a.data);
    let perf = emit(out_dir, "performance", format, |w| report.write(format, w))?;
    let stats: Vec<_> = runs.iter().map(|r| (r.model, &r.stats)).collect();
    let cmg = emit(out_dir, "cmg_stats", format, |w| write_cmg_stats(&stats, format, w))?;
    if !io.quiet {
        report.write(Format::Csv, &mut *io.out)?;
    }
    io.say(format!("wrote {} and {}", perf.display(), cmg.display()));
    Ok(())
}

fn cmd_optimize(a: &OptimizeArgs, format: Format, threads: Option<usize>, io: &mut Io) -> Result<(), Failure> {
    let model: ModelId = a.model.parse()?;
    if !matches!(model, ModelId::M5 | ModelId::Hybrid) {
        return Err(Failure::Usage(format!("optimize supports m5 or hybrid, not {model}")));
    }
    let mut grid = GridSpec::new(a.k1.parse::<Range>()?, a.k2.parse::<Range>()?, a.k3.parse::<Range>()?);
    grid.cap = a.max_points;
    grid.validate()?;
    if a.tolerance.is_nan() || a.tolerance < 0.0 {
        return Err(Failure::Usage("tolerance must be nonnegative".into()));
    }
    let ds = load(&a.data, io)?;
    let opts = SearchOptions {
        model,
        tolerance: a.tolerance,
        threads,
    };
    let result = grid_search(&ds, &grid, &opts)?;

    let out_dir = a.output.as_deref().unwrap_or(&a.data);
    emit(out_dir, "optimize", format, |w| write_best(&result, format, w))?;
    if a.trace {
        emit(out_dir, "trace", format, |w| write_trace(&result, format, w))?;
    }
    let (b, c) = (result.best, result.criterion);
    io.say(format!(
        "points={} best k1={} k2={} k3={} large={:.2} very_large={:.2} small={:.2}",
        result.trace.len(),
        b.k1,
        b.k2,
        b.k3,
        c.large_err_pct,
        c.very_large_err_pct,
        c.small_err_pct
    ));
    Ok(())
}
