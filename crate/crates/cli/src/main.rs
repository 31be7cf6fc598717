use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lipsplit::baselines::{grid_search, random_search};
use lipsplit::export::{write_report_csv, write_trace_csv, write_trace_json};
use lipsplit::objectives::FAMILIES;
use lipsplit::optimizer::ScoreRule;
use lipsplit::regret::fit_rate;
use lipsplit::validation::{validate_suite, ValidationConfig};
use lipsplit::{
    run, Benchmark, Budget, Error, Objective, ObjectiveSpec, RegretReport, RunTrace, Settings,
};
use rayon::prelude::*;
use serde_json::{json, Value};

const THREADS_VAR: &str = "LIPSPLIT_THREADS";

#[derive(Parser)]
#[command(
    name = "lipsplit",
    version,
    about = "Predetermined-query Lipschitz optimizer and regret harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one objective and write its trace
    Run(RunArgs),
    /// Optimizer regret over a grid of dimensions and horizons, with fitted slopes
    Sweep(SweepArgs),
    /// Audit the optimizer on the objective suite
    Validate(ValidateArgs),
    /// List objective families and their parameters
    ListObjectives,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Lipsplit,
    Grid,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Objective address, e.g. cone:dim=2,L=1,center=0.3;0.7
    #[arg(long)]
    objective: String,
    #[arg(long = "T", value_name = "T")]
    horizon: Option<usize>,
    #[arg(long, value_enum, default_value = "lipsplit")]
    algo: Algo,
    /// Lipschitz constant used by the optimizer [default: the objective's exact L]
    #[arg(long = "L", value_name = "L")]
    lipschitz: Option<f64>,
    #[arg(long)]
    prune: bool,
    /// Grid half-width; 1/(2·eps) must be an integer
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trace output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the regret report as JSON here
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    /// Objective family and parameters; `dim` is taken from --dims
    #[arg(long, default_value = "sine:k=1")]
    objective: String,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    horizons: Vec<usize>,
    #[arg(long = "L", value_name = "L")]
    lipschitz: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    dims: Vec<usize>,
    #[arg(long = "T", value_name = "T", default_value_t = 50)]
    horizon: usize,
    /// Lattice points per axis for the region-minimum oracle
    #[arg(long, default_value_t = 101)]
    resolution: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<Fault>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    Score,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ZeroDimension
            | Error::DimensionMismatch { .. }
            | Error::InvalidLipschitz(_)
            | Error::EmptyHorizon
            | Error::InvalidParameter { .. }
            | Error::UnknownObjective(_)
            | Error::BadObjectiveSpec { .. }
            | Error::OracleBudget { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
        Command::ListObjectives => list_objectives(),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn parse_objective(spec: &str, dim: Option<usize>) -> Result<Benchmark, Failure> {
    let parsed: ObjectiveSpec = spec.parse()?;
    Ok(parsed.build(dim)?)
}

fn lipschitz_for(f: &Benchmark, given: Option<f64>) -> Result<f64, Failure> {
    let l = given.unwrap_or(f.lipschitz());
    if l.is_finite() && l > 0.0 {
        Ok(l)
    } else {
        Err(Failure::Usage(format!(
            "Lipschitz constant must be positive and finite, got {l} (set --L)"
        )))
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| {
                Failure::Runtime(format!("{}: {e}", p.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, Failure> {
    let f = parse_objective(&args.objective, None)?;
    let trace: RunTrace = match args.algo {
        Algo::Lipsplit => {
            let horizon = args
                .horizon
                .ok_or_else(|| Failure::Usage("--T is required for --algo lipsplit".into()))?;
            let settings = Settings::new(lipschitz_for(&f, args.lipschitz)?).with_prune(args.prune);
            run(&f, settings, Budget::horizon(horizon))?
        }
        Algo::Grid => {
            let eps = args
                .eps
                .ok_or_else(|| Failure::Usage("--eps is required for --algo grid".into()))?;
            grid_search(&f, eps)?
        }
        Algo::Random => {
            let horizon = args
                .horizon
                .ok_or_else(|| Failure::Usage("--T is required for --algo random".into()))?;
            let seed = args
                .seed
                .ok_or_else(|| Failure::Usage("--seed is required for --algo random".into()))?;
            random_search(&f, horizon, seed)?
        }
    };
    let report = RegretReport::from_trace(&trace, f.f_min())?;

    let mut out = sink(args.out.as_deref())?;
    match args.format {
        Format::Csv => write_trace_csv(&mut out, &trace, f.f_min())
            .map_err(|e| Failure::Runtime(e.to_string()))?,
        Format::Json => {
            write_trace_json(&mut out, &trace, &report)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    drop(out);

    if let Some(path) = &args.report {
        let file =
            File::create(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        serde_json::to_writer_pretty(file, &report).map_err(|e| Failure::Runtime(e.to_string()))?;
    }

    let summary = format!(
        "{} on {}: T={} simple={} average={} cumulative={}",
        trace.algorithm.as_str(),
        f.id(),
        report.horizon,
        report.simple,
        report.average,
        report.cumulative
    );
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(ExitCode::SUCCESS)
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_VAR) {
        let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
            Failure::Usage(format!(
                "{THREADS_VAR} must be a positive integer, got `{raw}`"
            ))
        })?;
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(|e| Failure::Runtime(e.to_string()))
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, Failure> {
    if args.dims.is_empty() {
        return Err(Failure::Usage(
            "--dims must list at least one dimension".into(),
        ));
    }
    if args.horizons.is_empty() {
        return Err(Failure::Usage(
            "--horizons must list at least one horizon".into(),
        ));
    }
    if args.horizons.contains(&0) {
        return Err(Failure::Usage("horizons must be positive".into()));
    }
    let spec: ObjectiveSpec = args.objective.parse()?;
    let objectives = args
        .dims
        .iter()
        .map(|&n| spec.build(Some(n)).map_err(Failure::from))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cells = Vec::new();
    for (i, f) in objectives.iter().enumerate() {
        let l = lipschitz_for(f, args.lipschitz)?;
        cells.extend(args.horizons.iter().map(|&t| (i, l, t)));
    }

    let pool = thread_pool()?;
    let reports: Vec<RegretReport> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, l, t)| {
                let f = &objectives[i];
                let trace = run(f, Settings::new(l), Budget::horizon(t))?;
                RegretReport::from_trace(&trace, f.f_min())
            })
            .collect::<Result<_, _>>()
    })?;

    let mut rows: Vec<(usize, String, RegretReport)> = Vec::with_capacity(reports.len());
    for (i, f) in objectives.iter().enumerate() {
        let mut group: Vec<_> = cells
            .iter()
            .zip(&reports)
            .filter(|((j, ..), _)| *j == i)
            .map(|(_, r)| r.clone())
            .collect();
        group.sort_by_key(|r| r.horizon);
        let points: Vec<(usize, f64)> = group.iter().map(|r| (r.horizon, r.average)).collect();
        let slope = match fit_rate(&points) {
            Ok(s) => Some(s),
            Err(e) => {
                eprintln!("note: no slope for n={}: {e}", f.dim());
                None
            }
        };
        for mut r in group {
            r.slope = slope;
            rows.push((f.dim(), f.id().to_string(), r));
        }
    }

    let mut out = sink(args.out.as_deref())?;
    match args.format {
        Format::Csv => {
            let mut body = Vec::new();
            write_report_csv(
                &mut body,
                &rows.iter().map(|(.., r)| r.clone()).collect::<Vec<_>>(),
            )?;
            let text = String::from_utf8(body).expect("report rows are utf-8");
            let mut lines = text.lines();
            writeln!(out, "n,{}", lines.next().unwrap_or_default())?;
            for ((n, ..), line) in rows.iter().zip(lines) {
                writeln!(out, "{n},{line}")?;
            }
        }
        Format::Json => {
            let doc: Vec<Value> = rows
                .iter()
                .map(|(n, id, r)| {
                    let mut v = serde_json::to_value(r).expect("reports serialize");
                    v["n"] = json!(n);
                    v["objective"] = json!(id);
                    v
                })
                .collect();
            serde_json::to_writer_pretty(&mut out, &doc)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode, Failure> {
    if args.dims.is_empty() || args.dims.contains(&0) {
        return Err(Failure::Usage(
            "--dims must list positive dimensions".into(),
        ));
    }
    if args.resolution < 2 {
        return Err(Failure::Usage("--resolution must be at least 2".into()));
    }
    let config = ValidationConfig {
        dims: args.dims,
        horizon: args.horizon,
        resolution: args.resolution,
        score_rule: match args.inject_fault {
            Some(Fault::Score) => ScoreRule::ChildEdge,
            None => ScoreRule::ParentEdge,
        },
    };
    let report = validate_suite(&config)?;
    let mut out = sink(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Failure::Runtime(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;

    let failed = report.failures().count();
    eprintln!("validate: {} checks, {failed} failed", report.checks.len());
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn list_objectives() -> Result<ExitCode, Failure> {
    let mut out = io::stdout().lock();
    for fam in FAMILIES {
        writeln!(out, "{:<10} {:<40} {}", fam.name, fam.params, fam.summary)?;
    }
    writeln!(
        out,
        "\nalgorithms: lipsplit (needs --T), grid (needs --eps), random (needs --T, --seed)"
    )?;
    Ok(ExitCode::SUCCESS)
}
