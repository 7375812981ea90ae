//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 model error,
//! 4 numeric failure during integration.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    analyze, sweep_report, AnalysisError, Metric, MotionMetrics, Pattern, Window,
};
use crate::config::{Config, ConfigError};
use crate::dynamics::{simulate, DynamicsError, SimulationFailure, Trajectory};
use crate::estimation::{
    estimate_damping, EstimationError, EstimationProblem, Series, DEFAULT_BOUNDS,
    DEFAULT_MAX_EVALUATIONS,
};
use crate::hydro::coefficients::{read_table_dir, DEFAULT_DEGREE};
use crate::hydro::{Basis, CoefficientError, CoefficientSet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MODEL: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "fishsim",
    version,
    about = "Robotic fish dynamics, analysis and damping identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario, write its log and print the pattern metrics.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Trajectory log (CSV).
        #[arg(long)]
        out: PathBuf,
        /// Also write the metrics as JSON.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Append per-term force and torque columns to the log.
        #[arg(long)]
        diagnostics: bool,
    },
    /// Vary one numeric config key and report a metric per value.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted key path, e.g. `scenario.gait.frequency_hz`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Metric to classify: speed, yaw_rate, turn_rate, radius, climb or pitch.
        #[arg(long)]
        metric: Option<String>,
        /// One metrics record per value (CSV).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Fit polynomial models to a directory of coefficient tables.
    FitCoeffs {
        #[arg(long)]
        tables: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DEGREE)]
        degree: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Identify the damping coefficients from a measured speed trace.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        /// CSV with `t` and `speed` columns.
        #[arg(long)]
        trace: PathBuf,
        /// `lo,hi` for all axes or six values `lo,hi` per axis (roll, pitch, yaw).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        bounds: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_MAX_EVALUATIONS)]
        max_evaluations: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compute pattern metrics from an existing log.
    Analyze {
        log: PathBuf,
        /// Supplies the pattern, gait and window when given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        pattern: Option<String>,
        /// `start,end` in seconds.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        window: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure carrying the exit code and message.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn model(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_MODEL,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::config(format!("config error: {e}"))
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        Self::model(format!("analysis error: {e}"))
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        let code = if e.is_numeric() {
            EXIT_NUMERIC
        } else {
            EXIT_MODEL
        };
        Self {
            code,
            message: format!("model error: {e}"),
        }
    }
}

impl From<EstimationError> for CliError {
    fn from(e: EstimationError) -> Self {
        match e {
            EstimationError::Simulation(d) => d.into(),
            EstimationError::Trace { .. }
            | EstimationError::Io(_)
            | EstimationError::InvalidBounds(_) => {
                Self::config(format!("estimation input error: {e}"))
            }
            other => Self::model(format!("estimation error: {other}")),
        }
    }
}

impl From<CoefficientError> for CliError {
    fn from(e: CoefficientError) -> Self {
        match e {
            CoefficientError::RankDeficient { .. } => Self::model(format!("coefficient fit: {e}")),
            _ => Self::config(format!("coefficient tables: {e}")),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(report) => {
            print!("{report}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Simulate {
            config,
            out,
            metrics,
            diagnostics,
        } => cmd_simulate(&config, &out, metrics.as_deref(), diagnostics),
        Command::Sweep {
            config,
            param,
            values,
            metric,
            out,
            workers,
        } => cmd_sweep(
            &config,
            &param,
            &values,
            metric.as_deref(),
            out.as_deref(),
            workers,
        ),
        Command::FitCoeffs {
            tables,
            degree,
            out,
        } => cmd_fit_coeffs(&tables, degree, &out),
        Command::Estimate {
            config,
            trace,
            bounds,
            max_evaluations,
            out,
            workers,
        } => with_workers(workers, || {
            cmd_estimate(&config, &trace, bounds.as_deref(), max_evaluations, &out)
        }),
        Command::Analyze {
            log,
            config,
            pattern,
            window,
            out,
        } => cmd_analyze(
            &log,
            config.as_deref(),
            pattern.as_deref(),
            window.as_deref(),
            out.as_deref(),
        ),
    }
}

fn with_workers<R: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<R, CliError> + Send,
) -> Result<R, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::config("--workers must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    pool.install(f)
}

fn run_simulation(config: &Config) -> Result<Trajectory, CliError> {
    simulate(&config.scenario).map_err(|SimulationFailure { partial, cause }| {
        let mut err = CliError::from(cause);
        err.message = format!(
            "{} (after {} samples, t = {:.4} s)",
            err.message,
            partial.len(),
            partial.last().map_or(0.0, |s| s.t)
        );
        err
    })
}

fn cmd_simulate(
    config_path: &Path,
    out: &Path,
    metrics_path: Option<&Path>,
    diagnostics: bool,
) -> Result<String, CliError> {
    let config = Config::load(config_path)?;
    let traj = run_simulation(&config)?;
    traj.save(out, diagnostics)
        .map_err(|e| CliError::config(format!("{}: {e}", out.display())))?;
    let metrics = analyze(&traj, config.pattern, config.window)?;
    if let Some(path) = metrics_path {
        write_file(path, &to_json(&metrics))?;
    }
    Ok(format!(
        "wrote {} samples to {}\n{metrics}",
        traj.len(),
        out.display()
    ))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn default_metric(pattern: Pattern) -> Metric {
    match pattern {
        Pattern::Rectilinear | Pattern::Gliding => Metric::Speed,
        Pattern::Turning | Pattern::Spiral => Metric::Radius,
    }
}

fn cmd_sweep(
    config_path: &Path,
    param: &str,
    values: &[f64],
    metric: Option<&str>,
    out: Option<&Path>,
    workers: Option<usize>,
) -> Result<String, CliError> {
    let base = Config::load(config_path)?;
    if values.is_empty() {
        return Err(CliError::config(format!(
            "sweep over `{param}` needs at least one value in --values"
        )));
    }
    let metric = match metric {
        Some(name) => Metric::parse(name)
            .ok_or_else(|| CliError::config(format!("unknown metric `{name}`")))?,
        None => default_metric(base.pattern),
    };
    let mut values = values.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let configs = values
        .iter()
        .map(|&v| base.with_parameter(param, v))
        .collect::<Result<Vec<_>, _>>()?;

    let results: Vec<MotionMetrics> = with_workers(workers, || {
        configs
            .par_iter()
            .map(|c| {
                let traj = run_simulation(c)?;
                analyze(&traj, c.pattern, c.window).map_err(CliError::from)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    // Acceleration-phase glide averages are reported but kept out of the trend.
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (v, m) in values.iter().zip(&results) {
        let value = m.get(metric).ok_or_else(|| {
            CliError::config(format!(
                "metric `{}` is not defined for {} runs",
                metric.name(),
                m.pattern
            ))
        })?;
        if m.steady == Some(false) {
            excluded.push(*v);
        } else {
            rows.push((*v, value));
        }
    }
    let report = sweep_report(param, metric.name(), &rows);

    if let Some(path) = out {
        let mut csv = format!("{param},{}\n", MotionMetrics::CSV_HEADER);
        for (v, m) in values.iter().zip(&results) {
            let _ = writeln!(csv, "{v:?},{}", m.csv_row());
        }
        write_file(path, &csv)?;
    }
    let mut text = format!("{report}\n");
    if !excluded.is_empty() {
        let _ = writeln!(text, "not steady, excluded from trend: {excluded:?}");
    }
    Ok(text)
}

#[derive(Serialize)]
struct FitReport<'a> {
    degree: usize,
    models: &'a [crate::hydro::CoefficientModel],
}

fn cmd_fit_coeffs(tables: &Path, degree: usize, out: &Path) -> Result<String, CliError> {
    let tables = read_table_dir(tables)?;
    let set = CoefficientSet::fit(&tables, degree, Basis::Parity)?;
    write_file(
        out,
        &to_json(&FitReport {
            degree,
            models: set.models(),
        }),
    )?;
    let mut text = format!("{:<8} {:>6} {:>12}\n", "family", "degree", "rms");
    for m in set.models() {
        let _ = writeln!(
            text,
            "{:<8} {:>6} {:>12.3e}",
            m.family.id(),
            m.degree(),
            m.rms
        );
    }
    let _ = writeln!(text, "wrote {}", out.display());
    Ok(text)
}

fn parse_bounds(bounds: Option<&[f64]>) -> Result<([f64; 3], [f64; 3]), CliError> {
    match bounds {
        None => Ok(DEFAULT_BOUNDS),
        Some([lo, hi]) => Ok(([*lo; 3], [*hi; 3])),
        Some(b) if b.len() == 6 => Ok(([b[0], b[2], b[4]], [b[1], b[3], b[5]])),
        Some(b) => Err(CliError::config(format!(
            "--bounds takes 2 or 6 values, got {}",
            b.len()
        ))),
    }
}

fn cmd_estimate(
    config_path: &Path,
    trace: &Path,
    bounds: Option<&[f64]>,
    max_evaluations: usize,
    out: &Path,
) -> Result<String, CliError> {
    let config = Config::load(config_path)?;
    let measured = Series::load(trace)?;
    let (lower, upper) = parse_bounds(bounds)?;
    let problem = EstimationProblem {
        lower,
        upper,
        max_evaluations,
        ..EstimationProblem::new(measured, config.scenario)
    };
    let result = estimate_damping(&problem)?;
    write_file(out, &result.to_json())?;
    Ok(format!(
        "damping (roll, pitch, yaw) = ({:.6}, {:.6}, {:.6}) N*m*s/rad\n\
         fit = {:.2}%\nevaluations = {} of {}{}\nwrote {}\n",
        result.damping[0],
        result.damping[1],
        result.damping[2],
        result.fit_percent,
        result.evaluations,
        result.max_evaluations,
        if result.converged {
            ""
        } else {
            " (budget exhausted)"
        },
        out.display()
    ))
}

fn cmd_analyze(
    log: &Path,
    config_path: Option<&Path>,
    pattern: Option<&str>,
    window: Option<&[f64]>,
    out: Option<&Path>,
) -> Result<String, CliError> {
    let config = config_path.map(Config::load).transpose()?;
    let pattern = match (pattern, &config) {
        (Some(name), _) => Pattern::parse(name)
            .ok_or_else(|| CliError::config(format!("unknown pattern `{name}`")))?,
        (None, Some(c)) => c.pattern,
        (None, None) => return Err(CliError::config("analyze needs --pattern or --config")),
    };
    let window = match window {
        Some([a, b]) => Some(Window::new(*a, *b)),
        Some(_) => return Err(CliError::config("--window takes `start,end`")),
        None => config.as_ref().and_then(|c| c.window),
    };
    let traj = Trajectory::load(log)
        .map_err(|e| CliError::config(format!("{}: {e}", log.display())))?
        .with_gait(config.as_ref().map(|c| c.scenario.gait));
    let metrics = analyze(&traj, pattern, window)?;
    if let Some(path) = out {
        write_file(path, &to_json(&metrics))?;
    }
    Ok(metrics.to_string())
}
