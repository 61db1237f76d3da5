//! `landscape`: calibrate, evaluate, query and sweep pulse landscapes.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 domain error, 4 I/O or format error.
//! `LANDSCAPE_THREADS` caps the worker thread count.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use landscape_core::calib::{calibrate, CalibConfig, Landscape};
use landscape_core::eval::{evaluate_grid, evaluate_point, interpolate_located, sweep, EvalRecord};
use landscape_core::format;
use landscape_core::gatefam::{GateFamily, Granularity, ParamPoint};
use landscape_core::pulsemodel::ControlAnsatz;
use landscape_core::Error;
use serde::Serialize;

const THREADS_VAR: &str = "LANDSCAPE_THREADS";

#[derive(Parser)]
#[command(name = "landscape", version, about = "Calibrate and query interpolated control-pulse landscapes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize reference pulses and re-optimize them toward their neighbours.
    Calibrate(CalibrateArgs),
    /// Interpolate on a test lattice and report infidelities.
    Evaluate(EvaluateArgs),
    /// Interpolated pulse for one gate.
    Interpolate(InterpolateArgs),
    /// Calibrate at several granularities and evaluate after every round.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CalibOptions {
    /// weyl-chamber, cartan-box or single-qubit.
    #[arg(long, value_parser = parse_family)]
    family: GateFamily,
    #[arg(long, default_value_t = landscape_core::calib::DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap per optimization.
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
}

impl CalibOptions {
    fn config(&self, granularity: Granularity, rounds: usize) -> CalibConfig {
        let mut cfg = CalibConfig::new(self.family, granularity);
        cfg.rounds = rounds;
        cfg.lambda = self.lambda;
        cfg.seed = self.seed;
        cfg.opt.max_iter = self.max_iter;
        cfg
    }
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    calib: CalibOptions,
    /// Reference lattice spacing, e.g. 1/4.
    #[arg(long)]
    granularity: Granularity,
    #[arg(long, default_value_t = 0)]
    rounds: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    landscape: PathBuf,
    /// Test lattice spacing, e.g. 1/24.
    #[arg(long)]
    granularity: Granularity,
    /// Per-point CSV: tx,ty,tz,infidelity,simplex.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Summary JSON; printed to stdout when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct InterpolateArgs {
    #[arg(long)]
    landscape: PathBuf,
    /// Comma-separated coordinates, e.g. 0.5,0.125,0.125.
    #[arg(long, value_parser = parse_point)]
    point: ParamPoint,
    /// Pulse JSON; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    calib: CalibOptions,
    /// Comma-separated reference granularities, e.g. 1/2,1/3,1/4.
    #[arg(long, value_delimiter = ',', required = true)]
    granularities: Vec<Granularity>,
    #[arg(long, default_value_t = 10)]
    max_rounds: usize,
    #[arg(long)]
    test_granularity: Granularity,
    #[arg(long)]
    csv: PathBuf,
}

fn parse_family(s: &str) -> Result<GateFamily, String> {
    GateFamily::from_name(s).map_err(|e| e.to_string())
}

fn parse_point(s: &str) -> Result<ParamPoint, String> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| format!("bad coordinate `{c}`: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(ParamPoint::new)
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OutOfDomain { .. } | Error::OutsideHull(_) => 3,
            Error::Io(_) | Error::Format(_) => 4,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure { code: 4, message: format!("{}: {e}", path.display()) }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    let result = match cli.command {
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Interpolate(a) => cmd_interpolate(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> CliResult {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure { code: 2, message: format!("{THREADS_VAR} must be a positive integer, got `{value}`") })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure { code: 2, message: e.to_string() })
}

fn load(path: &Path) -> CliResult<Landscape> {
    format::load(path).map_err(|e| match e {
        Error::Io(e) => io_failure(path, e),
        e => e.into(),
    })
}

fn write_text(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn cmd_calibrate(a: CalibrateArgs) -> CliResult {
    let cfg = a.calib.config(a.granularity, a.rounds);
    cfg.validate()?;
    // Fail on an unwritable path before spending minutes calibrating.
    File::create(&a.out).map_err(|e| io_failure(&a.out, e))?;
    let landscape = calibrate(&cfg)?;
    format::save(&landscape, &a.out).map_err(|e| match e {
        Error::Io(e) => io_failure(&a.out, e),
        e => e.into(),
    })?;

    let mut out = io::stdout().lock();
    let _ = writeln!(
        out,
        "{} references, family {}, granularity {}",
        landscape.references.len(),
        landscape.family,
        landscape.granularity
    );
    let _ = writeln!(out, "{:>5} {:>10} {:>12} {:>12} {:>12}", "round", "iterations", "mean_infid", "max_infid", "mean_penalty");
    for r in &landscape.log {
        let _ = writeln!(
            out,
            "{:>5} {:>10} {:>12.3e} {:>12.3e} {:>12.3e}",
            r.round, r.cumulative_iterations, r.mean_infidelity, r.max_infidelity, r.mean_penalty
        );
    }
    Ok(())
}

fn write_records(path: &Path, records: &[EvalRecord]) -> CliResult {
    let fail = |e: csv::Error| io_failure(path, e);
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(["tx", "ty", "tz", "infidelity", "simplex"]).map_err(fail)?;
    for r in records {
        let mut row: Vec<String> = r.point.coords().iter().map(|c| c.to_string()).collect();
        row.push(r.infidelity.to_string());
        row.push(r.simplex.to_string());
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| io_failure(path, e))
}

fn cmd_evaluate(a: EvaluateArgs) -> CliResult {
    let landscape = load(&a.landscape)?;
    let (records, summary) = evaluate_grid(&landscape, a.granularity)?;
    if let Some(path) = &a.csv {
        write_records(path, &records)?;
    }
    let text = to_json(&summary);
    match &a.summary {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct PulseReport<'a> {
    family: GateFamily,
    point: &'a ParamPoint,
    ansatz: ControlAnsatz,
    alpha: &'a [f64],
    infidelity: f64,
    simplex: usize,
    barycentric: &'a [f64],
}

fn cmd_interpolate(a: InterpolateArgs) -> CliResult {
    let landscape = load(&a.landscape)?;
    let (alpha, loc) = interpolate_located(&landscape, &a.point)?;
    let record = evaluate_point(&landscape, &a.point)?;
    let report = PulseReport {
        family: landscape.family,
        point: &a.point,
        ansatz: landscape.ansatz,
        alpha: &alpha.0,
        infidelity: record.infidelity,
        simplex: loc.simplex,
        barycentric: &loc.coords,
    };
    let text = to_json(&report);
    match &a.out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_sweep(a: SweepArgs) -> CliResult {
    let cfg = a.calib.config(a.granularities[0], 0);
    cfg.validate()?;
    let fail = |e: csv::Error| io_failure(&a.csv, e);
    let mut w = csv::Writer::from_path(&a.csv).map_err(fail)?;
    let rows = sweep(&cfg, &a.granularities, a.max_rounds, a.test_granularity)?;
    w.write_record(["granularity", "round", "cumulative_iterations", "mean_infidelity", "std_infidelity", "max_infidelity", "count"])
        .map_err(fail)?;
    for r in &rows {
        let s = &r.summary;
        w.write_record([
            r.granularity.to_string(),
            r.round.to_string(),
            s.cumulative_iterations.to_string(),
            s.mean.to_string(),
            s.std.to_string(),
            s.max.to_string(),
            s.count.to_string(),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| io_failure(&a.csv, e))?;
    Ok(())
}
