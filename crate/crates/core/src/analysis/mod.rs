//! Motion metrics extracted from trajectories: speeds, turning circles,
//! gliding averages, spiral geometry and trend reports over sweeps.

mod circle;

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use circle::{fit_circle, CircleFit};

use crate::dynamics::{Sample, Trajectory};

/// Leading gait periods always excluded from an automatic window.
pub const TRANSIENT_PERIODS: f64 = 2.0;
/// Minimum window length, in gait periods.
pub const MIN_WINDOW_PERIODS: f64 = 2.0;
/// Fraction of the run covered by the automatic window.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;
/// A window is steady when its mean acceleration is below this fraction of
/// the run's peak.
pub const STEADY_THRESHOLD: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("trajectory has fewer than two samples")]
    EmptyTrajectory,
    #[error("window [{start}, {end}] s lies outside the trajectory [{first}, {last}] s")]
    WindowOutside {
        start: f64,
        end: f64,
        first: f64,
        last: f64,
    },
    #[error("window of {length} s is shorter than the required {required} s")]
    WindowTooShort { length: f64, required: f64 },
    #[error("yaw changes by only {yaw_change} rad over the window (need {required})")]
    NotTurning { yaw_change: f64, required: f64 },
    #[error("path points are nearly collinear; no circle fits")]
    DegenerateCircle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Rectilinear,
    Turning,
    Gliding,
    Spiral,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [
        Pattern::Rectilinear,
        Pattern::Turning,
        Pattern::Gliding,
        Pattern::Spiral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Rectilinear => "rectilinear",
            Pattern::Turning => "turning",
            Pattern::Gliding => "gliding",
            Pattern::Spiral => "spiral",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed time interval `[start, end]` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    /// Last half of the run, pushed later if needed so it never includes the
    /// first two gait periods.
    pub fn auto(traj: &Trajectory) -> Result<Self, AnalysisError> {
        let (first, last) = bounds(traj)?;
        let mut start = last - DEFAULT_WINDOW_FRACTION * (last - first);
        if let Some(p) = period(traj) {
            start = start.max(first + TRANSIENT_PERIODS * p);
        }
        let w = Window::new(start.min(last), last);
        check_window(traj, &w)?;
        Ok(w)
    }
}

fn bounds(traj: &Trajectory) -> Result<(f64, f64), AnalysisError> {
    match traj.samples() {
        [first, .., last] => Ok((first.t, last.t)),
        _ => Err(AnalysisError::EmptyTrajectory),
    }
}

fn period(traj: &Trajectory) -> Option<f64> {
    traj.gait().and_then(|g| g.period())
}

/// Minimum window length: two gait periods when the gait is known.
fn required_length(traj: &Trajectory) -> f64 {
    period(traj).map_or(0.0, |p| MIN_WINDOW_PERIODS * p)
}

fn check_window(traj: &Trajectory, w: &Window) -> Result<(), AnalysisError> {
    let (first, last) = bounds(traj)?;
    let slack = 1e-9 * (1.0 + last.abs());
    if !(w.start >= first - slack && w.end <= last + slack && w.start <= w.end) {
        return Err(AnalysisError::WindowOutside {
            start: w.start,
            end: w.end,
            first,
            last,
        });
    }
    let required = required_length(traj);
    if w.length() < required - slack || window_samples(traj, w).len() < 2 {
        return Err(AnalysisError::WindowTooShort {
            length: w.length(),
            required,
        });
    }
    Ok(())
}

/// Samples with `start ≤ t ≤ end`, with a tolerance of a millionth of a step.
pub fn window_samples<'a>(traj: &'a Trajectory, w: &Window) -> &'a [Sample] {
    let s = traj.samples();
    let tol = if traj.dt().is_finite() {
        1e-6 * traj.dt()
    } else {
        0.0
    };
    let lo = s.partition_point(|x| x.t < w.start - tol);
    let hi = s.partition_point(|x| x.t <= w.end + tol);
    &s[lo..hi.max(lo)]
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Mean horizontal speed `√(V_Ix² + V_Iy²)` over the window.
pub fn rectilinear_speed(traj: &Trajectory, window: &Window) -> Result<f64, AnalysisError> {
    check_window(traj, window)?;
    Ok(mean(
        window_samples(traj, window)
            .iter()
            .map(Sample::horizontal_speed),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurnMetrics {
    /// Mean yaw rate, rad/s. Negative means turning clockwise seen from above.
    pub yaw_rate: f64,
    pub radius: f64,
    pub center: (f64, f64),
    pub fit_rms: f64,
    /// Mean horizontal speed.
    pub speed: f64,
}

/// Yaw sequence with jumps larger than π removed.
pub fn unwrapped_yaw(samples: &[Sample]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(samples.len());
    for s in samples {
        let y = s.state.attitude.yaw;
        match out.last() {
            Some(&prev) => {
                let d = y - prev;
                out.push(prev + (d + PI).rem_euclid(2.0 * PI) - PI);
            }
            None => out.push(y),
        }
    }
    out
}

fn circle_on(samples: &[Sample], required_turn: f64) -> Result<(f64, CircleFit), AnalysisError> {
    let yaw = unwrapped_yaw(samples);
    let (first, last) = (samples[0], samples[samples.len() - 1]);
    let change = yaw[yaw.len() - 1] - yaw[0];
    if change.abs() < required_turn {
        return Err(AnalysisError::NotTurning {
            yaw_change: change,
            required: required_turn,
        });
    }
    let rate = change / (last.t - first.t);
    let points: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.state.position.x(), s.state.position.y()))
        .collect();
    let fit = fit_circle(&points).ok_or(AnalysisError::DegenerateCircle)?;
    Ok((rate, fit))
}

/// Mean yaw rate and Kåsa circle fit of the horizontal path. Needs at least
/// half a revolution inside the window.
pub fn turning_metrics(traj: &Trajectory, window: &Window) -> Result<TurnMetrics, AnalysisError> {
    check_window(traj, window)?;
    let samples = window_samples(traj, window);
    let (yaw_rate, fit) = circle_on(samples, PI)?;
    Ok(TurnMetrics {
        yaw_rate,
        radius: fit.radius,
        center: fit.center,
        fit_rms: fit.rms,
        speed: mean(samples.iter().map(Sample::horizontal_speed)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlideMetrics {
    /// Mean `√(V_Ix² + V_Iz²)` over the window.
    pub speed: f64,
    /// Mean pitch over the window, rad.
    pub pitch: f64,
    /// Whether the window counts as steady rather than an acceleration phase.
    pub steady: bool,
    /// Mean acceleration magnitude across the window, m/s².
    pub window_acceleration: f64,
    /// Largest block-averaged acceleration over the run, m/s².
    pub peak_acceleration: f64,
}

/// Mean inertial velocity over consecutive blocks of `len` seconds.
fn block_means(samples: &[Sample], len: f64) -> Vec<(f64, [f64; 3])> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut acc = ([0.0; 3], 0usize, 0.0);
    let mut edge = first.t + len;
    for s in samples {
        if s.t >= edge - 1e-9 * len && acc.1 > 0 {
            let n = acc.1 as f64;
            out.push((acc.2 / n, acc.0.map(|v| v / n)));
            acc = ([0.0; 3], 0, 0.0);
            edge += len;
        }
        let v = s.inertial_velocity;
        acc.0[0] += v.x();
        acc.0[1] += v.y();
        acc.0[2] += v.z();
        acc.1 += 1;
        acc.2 += s.t;
    }
    // Only complete blocks are kept; a ragged tail would bias the estimate.
    out
}

fn acceleration_between(a: &(f64, [f64; 3]), b: &(f64, [f64; 3])) -> f64 {
    let dv = (0..3)
        .map(|i| (b.1[i] - a.1[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    dv / (b.0 - a.0)
}

/// Mean `√(V_Ix² + V_Iz²)` over the window, with the steady-state verdict.
/// Velocity is averaged over whole gait periods (a tenth of the window when
/// the gait is unknown) so the tail beat does not count as acceleration.
pub fn gliding_speed(traj: &Trajectory, window: &Window) -> Result<GlideMetrics, AnalysisError> {
    check_window(traj, window)?;
    let samples = window_samples(traj, window);
    // Along-track horizontal and vertical components together, so the
    // heading of the glide plane does not matter.
    let speed = mean(samples.iter().map(Sample::speed));
    let pitch = mean(samples.iter().map(|s| s.state.attitude.pitch));

    let block = period(traj).unwrap_or(window.length() / 10.0);
    let run = block_means(traj.samples(), block);
    let peak = run
        .windows(2)
        .map(|w| acceleration_between(&w[0], &w[1]))
        .fold(0.0, f64::max);
    let inside = block_means(samples, block);
    let window_acceleration = match (inside.first(), inside.last()) {
        (Some(a), Some(b)) if b.0 > a.0 => acceleration_between(a, b),
        _ => 0.0,
    };
    let steady = window_acceleration <= STEADY_THRESHOLD * peak || peak == 0.0;
    Ok(GlideMetrics {
        speed,
        pitch,
        steady,
        window_acceleration,
        peak_acceleration: peak,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpiralMetrics {
    pub yaw_rate: f64,
    /// Mean 3-D speed.
    pub speed: f64,
    pub radius: f64,
    pub center: (f64, f64),
    pub fit_rms: f64,
    /// Mean `V_Iz`; positive is rising since inertial z points up.
    pub climb: f64,
}

/// Helix metrics. Needs at least a full revolution inside the window.
pub fn spiral_metrics(traj: &Trajectory, window: &Window) -> Result<SpiralMetrics, AnalysisError> {
    check_window(traj, window)?;
    let samples = window_samples(traj, window);
    let (yaw_rate, fit) = circle_on(samples, 2.0 * PI)?;
    Ok(SpiralMetrics {
        yaw_rate,
        speed: mean(samples.iter().map(Sample::speed)),
        radius: fit.radius,
        center: fit.center,
        fit_rms: fit.rms,
        climb: mean(samples.iter().map(|s| s.inertial_velocity.z())),
    })
}

/// One record of pattern metrics; fields that do not apply are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MotionMetrics {
    pub pattern: Pattern,
    pub speed: f64,
    pub yaw_rate: Option<f64>,
    pub radius: Option<f64>,
    pub climb: Option<f64>,
    pub pitch: Option<f64>,
    pub fit_rms: Option<f64>,
    pub steady: Option<bool>,
    pub window: Window,
}

impl MotionMetrics {
    fn bare(pattern: Pattern, speed: f64, window: Window) -> Self {
        Self {
            pattern,
            speed,
            yaw_rate: None,
            radius: None,
            climb: None,
            pitch: None,
            fit_rms: None,
            steady: None,
            window,
        }
    }

    /// Named scalar used by sweeps.
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Speed => Some(self.speed),
            Metric::YawRate => self.yaw_rate,
            Metric::TurnRate => self.yaw_rate.map(f64::abs),
            Metric::Radius => self.radius,
            Metric::Climb => self.climb,
            Metric::Pitch => self.pitch,
        }
    }

    pub const CSV_HEADER: &'static str =
        "pattern,speed,yaw_rate,radius,climb,pitch,fit_rms,steady,window_start,window_end";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
        format!(
            "{},{:?},{},{},{},{},{},{},{:?},{:?}",
            self.pattern,
            self.speed,
            opt(self.yaw_rate),
            opt(self.radius),
            opt(self.climb),
            opt(self.pitch),
            opt(self.fit_rms),
            self.steady.map_or(String::new(), |b| b.to_string()),
            self.window.start,
            self.window.end
        )
    }
}

impl fmt::Display for MotionMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pattern      {}", self.pattern)?;
        writeln!(
            f,
            "window       [{:.3}, {:.3}] s",
            self.window.start, self.window.end
        )?;
        writeln!(f, "speed        {:.6} m/s", self.speed)?;
        if let Some(w) = self.yaw_rate {
            writeln!(f, "yaw rate     {w:.6} rad/s")?;
        }
        if let Some(r) = self.radius {
            writeln!(f, "radius       {r:.6} m")?;
        }
        if let Some(e) = self.fit_rms {
            writeln!(f, "fit rms      {e:.3e} m")?;
        }
        if let Some(c) = self.climb {
            writeln!(f, "climb        {c:.6} m/s")?;
        }
        if let Some(p) = self.pitch {
            writeln!(f, "pitch        {p:.6} rad")?;
        }
        if let Some(s) = self.steady {
            writeln!(f, "steady       {s}")?;
        }
        Ok(())
    }
}

/// Metrics for `pattern` over `window`, or over the automatic window.
pub fn analyze(
    traj: &Trajectory,
    pattern: Pattern,
    window: Option<Window>,
) -> Result<MotionMetrics, AnalysisError> {
    let w = match window {
        Some(w) => w,
        None => Window::auto(traj)?,
    };
    Ok(match pattern {
        Pattern::Rectilinear => MotionMetrics::bare(pattern, rectilinear_speed(traj, &w)?, w),
        Pattern::Turning => {
            let m = turning_metrics(traj, &w)?;
            MotionMetrics {
                yaw_rate: Some(m.yaw_rate),
                radius: Some(m.radius),
                fit_rms: Some(m.fit_rms),
                ..MotionMetrics::bare(pattern, m.speed, w)
            }
        }
        Pattern::Gliding => {
            let m = gliding_speed(traj, &w)?;
            MotionMetrics {
                pitch: Some(m.pitch),
                steady: Some(m.steady),
                ..MotionMetrics::bare(pattern, m.speed, w)
            }
        }
        Pattern::Spiral => {
            let m = spiral_metrics(traj, &w)?;
            MotionMetrics {
                yaw_rate: Some(m.yaw_rate),
                radius: Some(m.radius),
                fit_rms: Some(m.fit_rms),
                climb: Some(m.climb),
                ..MotionMetrics::bare(pattern, m.speed, w)
            }
        }
    })
}

/// Per-period means of `f` over the window, one value per whole period.
pub fn period_means(samples: &[Sample], period: f64, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let (mut sum, mut n) = (0.0, 0usize);
    let mut edge = first.t + period;
    for s in samples {
        if s.t >= edge - 1e-9 * period && n > 0 {
            out.push(sum / n as f64);
            sum = 0.0;
            n = 0;
            edge += period;
        }
        sum += f(s);
        n += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Speed,
    YawRate,
    /// Magnitude of the yaw rate.
    TurnRate,
    Radius,
    Climb,
    Pitch,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Speed,
        Metric::YawRate,
        Metric::TurnRate,
        Metric::Radius,
        Metric::Climb,
        Metric::Pitch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Speed => "speed",
            Metric::YawRate => "yaw_rate",
            Metric::TurnRate => "turn_rate",
            Metric::Radius => "radius",
            Metric::Climb => "climb",
            Metric::Pitch => "pitch",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Increasing,
    Decreasing,
    NonMonotone,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Increasing => "increasing",
            Trend::Decreasing => "decreasing",
            Trend::NonMonotone => "non-monotone",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub parameter: String,
    pub metric: String,
    pub rows: Vec<SweepRow>,
    pub trend: Trend,
    /// `max − min` of the metric.
    pub spread: f64,
    /// Spread relative to the mean magnitude.
    pub relative_spread: f64,
}

/// Verdict for a metric sequence ordered by the swept value. Strict: any
/// tie or NaN makes it non-monotone.
pub fn trend(metrics: &[f64]) -> Trend {
    if metrics.len() < 2 {
        return Trend::NonMonotone;
    }
    if metrics.windows(2).all(|w| w[1] > w[0]) {
        Trend::Increasing
    } else if metrics.windows(2).all(|w| w[1] < w[0]) {
        Trend::Decreasing
    } else {
        Trend::NonMonotone
    }
}

/// Sorts the rows by swept value and classifies the metric trend.
pub fn sweep_report(parameter: &str, metric: &str, rows: &[(f64, f64)]) -> SweepReport {
    let mut rows: Vec<SweepRow> = rows
        .iter()
        .map(|&(value, metric)| SweepRow { value, metric })
        .collect();
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    let m: Vec<f64> = rows.iter().map(|r| r.metric).collect();
    let max = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = m.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if m.is_empty() { 0.0 } else { max - min };
    let scale = mean(m.iter().map(|v| v.abs()));
    SweepReport {
        parameter: parameter.to_string(),
        metric: metric.to_string(),
        trend: trend(&m),
        spread,
        relative_spread: if scale > 0.0 { spread / scale } else { 0.0 },
        rows,
    }
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{}\n", self.parameter, self.metric);
        for r in &self.rows {
            s.push_str(&format!("{:?},{:?}\n", r.value, r.metric));
        }
        s
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>14}  {:>14}", self.parameter, self.metric)?;
        for r in &self.rows {
            writeln!(f, "{:>14.6}  {:>14.6}", r.value, r.metric)?;
        }
        writeln!(f, "trend: {}", self.trend)?;
        write!(
            f,
            "spread: {:.6} ({:.2}%)",
            self.spread,
            100.0 * self.relative_spread
        )
    }
}
