//! Grey-box identification of the three damping-torque coefficients.
//!
//! The measured quantity is the horizontal speed `√(V_Ix² + V_Iy²)`. A
//! candidate `diag(C_ω)` is scored by simulating the template scenario and
//! comparing speeds on the simulation grid, with the measured trace linearly
//! interpolated onto that grid. The score is the normalized-residual fit
//! `100·(1 − ‖y − ŷ‖₂ / ‖y − ȳ‖₂)`, which is 100 for a perfect match and 0
//! for a prediction no better than the mean of the measurement.

pub mod simplex;

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{simulate, DynamicsError, Scenario};
pub use simplex::{minimize_in_box, SimplexOptions, SimplexResult};

pub const DEFAULT_BOUNDS: ([f64; 3], [f64; 3]) = ([-0.1; 3], [0.0; 3]);
pub const DEFAULT_MAX_EVALUATIONS: usize = 2000;

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("measured series is constant; fit percentage is undefined")]
    DegenerateSeries,
    #[error("series lengths differ ({measured} measured vs {simulated} simulated)")]
    LengthMismatch { measured: usize, simulated: usize },
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("measured series lasts {series} s but the template only {template} s")]
    SeriesTooLong { series: f64, template: f64 },
    #[error("template simulation failed: {0}")]
    Simulation(#[from] DynamicsError),
    #[error("trace file {path}: {message}")]
    Trace { path: String, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// `100·(1 − ‖y − ŷ‖₂ / ‖y − ȳ‖₂)` for co-sampled series.
pub fn fit_percentage(measured: &[f64], simulated: &[f64]) -> Result<f64, EstimationError> {
    if measured.len() != simulated.len() {
        return Err(EstimationError::LengthMismatch {
            measured: measured.len(),
            simulated: simulated.len(),
        });
    }
    if measured.is_empty() {
        return Err(EstimationError::DegenerateSeries);
    }
    let mean = measured.iter().sum::<f64>() / measured.len() as f64;
    let spread = measured
        .iter()
        .map(|y| (y - mean).powi(2))
        .sum::<f64>()
        .sqrt();
    // Rounding in the mean leaves a constant trace with a tiny spread.
    let scale = measured.iter().map(|y| y * y).sum::<f64>().sqrt();
    if !(spread > 1e-12 * scale) {
        return Err(EstimationError::DegenerateSeries);
    }
    let residual = measured
        .iter()
        .zip(simulated)
        .map(|(y, yh)| (y - yh).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(100.0 * (1.0 - residual / spread))
}

/// Time-stamped scalar trace, e.g. a measured speed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(t: Vec<f64>, values: Vec<f64>) -> Result<Self, EstimationError> {
        let s = Self { t, values };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), EstimationError> {
        let bad = |m: String| Err(EstimationError::InvalidSeries(m));
        if self.t.len() != self.values.len() {
            return bad(format!(
                "{} times but {} values",
                self.t.len(),
                self.values.len()
            ));
        }
        if self.t.len() < 2 {
            return bad("need at least two samples".into());
        }
        if let Some(i) = self
            .t
            .iter()
            .chain(&self.values)
            .position(|v| !v.is_finite())
        {
            return bad(format!("non-finite entry at position {i}"));
        }
        if let Some(i) = self.t.windows(2).position(|w| !(w[1] > w[0])) {
            return bad(format!("time stamps not increasing at sample {}", i + 1));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.t.last().copied().unwrap_or(0.0) - self.t.first().copied().unwrap_or(0.0)
    }

    /// Linear interpolation at `t`, clamped to the end values.
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.values[0];
        }
        if t >= self.t[n - 1] {
            return self.values[n - 1];
        }
        let k = self.t.partition_point(|&ti| ti <= t) - 1;
        let (t0, t1) = (self.t[k], self.t[k + 1]);
        let w = (t - t0) / (t1 - t0);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    /// `t,speed` table.
    pub fn read_csv<R: Read>(input: R, origin: &str) -> Result<Self, EstimationError> {
        let trace_err = |message: String| EstimationError::Trace {
            path: origin.to_owned(),
            message,
        };
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(input);
        let headers = r.headers().map_err(|e| trace_err(e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| trace_err(format!("missing column `{name}`")))
        };
        let (ct, cv) = (col("t")?, col("speed")?);
        let mut s = Series::default();
        for record in r.records() {
            let record = record.map_err(|e| trace_err(e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            let parse = |c: usize| {
                let field = record.get(c).unwrap_or("");
                field
                    .parse::<f64>()
                    .map_err(|_| trace_err(format!("line {line}: bad number `{field}`")))
            };
            s.t.push(parse(ct)?);
            s.values.push(parse(cv)?);
        }
        s.validate().map_err(|e| trace_err(e.to_string()))?;
        Ok(s)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), EstimationError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| EstimationError::Io(e.into());
        w.write_record(["t", "speed"]).map_err(io)?;
        for (t, v) in self.t.iter().zip(&self.values) {
            w.write_record([format!("{t:?}"), format!("{v:?}")])
                .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, EstimationError> {
        let file = std::fs::File::open(path).map_err(|e| EstimationError::Trace {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::read_csv(file, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<(), EstimationError> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Horizontal-speed trace of a scenario.
pub fn simulate_speed(scenario: &Scenario) -> Result<Series, DynamicsError> {
    let traj = simulate(scenario).map_err(|f| f.cause)?;
    let (t, values) = traj
        .samples()
        .iter()
        .map(|s| (s.t, s.horizontal_speed()))
        .unzip();
    Ok(Series { t, values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationProblem {
    pub measured: Series,
    /// Everything except the damping diagonal is held fixed.
    pub template: Scenario,
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub max_evaluations: usize,
}

impl EstimationProblem {
    pub fn new(measured: Series, template: Scenario) -> Self {
        Self {
            measured,
            template,
            lower: DEFAULT_BOUNDS.0,
            upper: DEFAULT_BOUNDS.1,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        }
    }

    pub fn validate(&self) -> Result<(), EstimationError> {
        self.measured.validate()?;
        for i in 0..3 {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(EstimationError::InvalidBounds(format!(
                    "axis {i}: non-finite bound"
                )));
            }
            if lo > hi {
                return Err(EstimationError::InvalidBounds(format!(
                    "axis {i}: lower {lo} exceeds upper {hi}"
                )));
            }
            if hi > 0.0 {
                return Err(EstimationError::InvalidBounds(format!(
                    "axis {i}: upper {hi} must be <= 0 (damping opposes rotation)"
                )));
            }
        }
        if self.max_evaluations < 4 {
            return Err(EstimationError::InvalidBounds(
                "evaluation budget must allow the initial simplex (>= 4)".into(),
            ));
        }
        let template_end = self.template.steps() as f64 * self.template.dt;
        let series_end = *self.measured.t.last().unwrap_or(&0.0);
        if self.measured.t[0] < 0.0 || series_end > template_end * (1.0 + 1e-12) {
            return Err(EstimationError::SeriesTooLong {
                series: series_end,
                template: template_end,
            });
        }
        Ok(())
    }

    /// Simulation grid points covered by the measurement, and the measured
    /// trace interpolated onto them.
    fn comparison_grid(&self) -> (std::ops::RangeInclusive<usize>, Vec<f64>) {
        let dt = self.template.dt;
        let t0 = self.measured.t[0];
        let t1 = *self.measured.t.last().unwrap();
        let first = (t0 / dt - 1e-9).ceil().max(0.0) as usize;
        let last = ((t1 / dt + 1e-9).floor() as usize).min(self.template.steps());
        let y = (first..=last)
            .map(|k| self.measured.interpolate(k as f64 * dt))
            .collect();
        (first..=last, y)
    }

    /// Fit percentage of the template simulated with `damping`.
    pub fn fit(&self, damping: &[f64; 3]) -> Result<f64, EstimationError> {
        let (range, y) = self.comparison_grid();
        self.fit_on(damping, range, &y)
    }

    fn fit_on(
        &self,
        damping: &[f64; 3],
        range: std::ops::RangeInclusive<usize>,
        y: &[f64],
    ) -> Result<f64, EstimationError> {
        let mut scenario = self.template.clone();
        scenario.vehicle.hydro.damping = Vector3::from(*damping);
        let sim = simulate_speed(&scenario)?;
        fit_percentage(y, &sim.values[range])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    /// `(C_ωx, C_ωy, C_ωz)`, N·m·s/rad.
    pub damping: [f64; 3],
    pub fit_percent: f64,
    pub evaluations: usize,
    pub max_evaluations: usize,
    pub converged: bool,
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl EstimationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Box-constrained simplex search for the damping diagonal maximizing the
/// fit percentage. When the budget runs out the best point found so far is
/// returned with `converged = false`.
pub fn estimate_damping(problem: &EstimationProblem) -> Result<EstimationResult, EstimationError> {
    problem.validate()?;
    problem.template.validate()?;
    let (range, y) = problem.comparison_grid();
    if range.is_empty() || y.len() < 2 {
        return Err(EstimationError::InvalidSeries(
            "measured trace covers fewer than two simulation steps".into(),
        ));
    }
    // Fails early on a constant measurement or an unusable template.
    problem.fit_on(&problem.upper.map(|u| u.min(0.0)), range.clone(), &y)?;

    let objective = |c: &[f64; 3]| match problem.fit_on(c, range.clone(), &y) {
        Ok(fit) => -fit,
        Err(_) => f64::INFINITY,
    };
    let options = SimplexOptions {
        max_evaluations: problem.max_evaluations,
        ..SimplexOptions::default()
    };
    let best = minimize_in_box(&objective, problem.lower, problem.upper, &options);
    Ok(EstimationResult {
        damping: best.point,
        fit_percent: -best.value,
        evaluations: best.evaluations,
        max_evaluations: problem.max_evaluations,
        converged: best.converged,
        lower: problem.lower,
        upper: problem.upper,
    })
}
