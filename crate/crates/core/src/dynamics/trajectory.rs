//! Time-stamped state history and its CSV log format.
//!
//! A log is one header row followed by one row per sample. Floats are
//! written with enough digits to round-trip exactly. Reading ignores lines
//! starting with `#`.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::Vector3;
use thiserror::Error;

use super::WrenchBreakdown;
use crate::actuation::TailGait;
use crate::frames::{
    body_rates_to_euler_rates, body_to_inertial, body_velocity_to_inertial, BodyState, InertialVec,
};

pub const STATE_COLUMNS: [&str; 14] = [
    "t", "x", "y", "z", "roll", "pitch", "yaw", "vbx", "vby", "vbz", "wbx", "wby", "wbz", "xi1",
];

#[derive(Debug, Error)]
pub enum LogError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("log line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: BodyState,
    /// `R_bI·V_b`.
    pub inertial_velocity: InertialVec,
    /// `R_bI·ω_b`.
    pub inertial_angular_velocity: InertialVec,
    /// `(φ̇, θ̇, ψ̇)`.
    pub euler_rates: Vector3<f64>,
    pub tail_angle: f64,
    pub diagnostics: Option<WrenchBreakdown>,
}

impl Sample {
    pub fn new(
        t: f64,
        state: BodyState,
        euler_rates: Vector3<f64>,
        tail_angle: f64,
        diagnostics: Option<WrenchBreakdown>,
    ) -> Self {
        Self {
            t,
            state,
            inertial_velocity: body_velocity_to_inertial(&state.attitude, &state.velocity),
            inertial_angular_velocity: body_to_inertial(&state.attitude, &state.angular_velocity),
            euler_rates,
            tail_angle,
            diagnostics,
        }
    }

    /// Horizontal speed `√(V_Ix² + V_Iy²)`.
    pub fn horizontal_speed(&self) -> f64 {
        self.inertial_velocity.x().hypot(self.inertial_velocity.y())
    }

    pub fn speed(&self) -> f64 {
        self.inertial_velocity.norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    gait: Option<TailGait>,
    dt: f64,
    samples: Vec<Sample>,
}

impl Trajectory {
    pub fn new(gait: Option<TailGait>, dt: f64) -> Self {
        Self::with_capacity(gait, dt, 0)
    }

    pub fn with_capacity(gait: Option<TailGait>, dt: f64, capacity: usize) -> Self {
        Self {
            gait,
            dt,
            samples: Vec::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, sample: Sample) {
        self.samples.push(sample);
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn gait(&self) -> Option<&TailGait> {
        self.gait.as_ref()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn has_diagnostics(&self) -> bool {
        self.samples.iter().any(|s| s.diagnostics.is_some())
    }

    pub fn write_csv<W: Write>(&self, out: W, diagnostics: bool) -> Result<(), LogError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = STATE_COLUMNS.iter().map(|s| s.to_string()).collect();
        if diagnostics {
            header.extend(diagnostic_columns());
        }
        w.write_record(&header)?;
        for s in &self.samples {
            let a = s.state.to_array();
            let rep = s.state.attitude.reported();
            let mut row: Vec<f64> = vec![s.t, a[0], a[1], a[2], rep.roll, rep.pitch, rep.yaw];
            row.extend_from_slice(&a[6..12]);
            row.push(s.tail_angle);
            if diagnostics {
                let d = s.diagnostics.unwrap_or_default();
                row.extend([d.alpha_tail, d.alpha_vertical, d.alpha_lateral]);
                for v in d.terms() {
                    row.extend([v.x(), v.y(), v.z()]);
                }
            }
            w.write_record(row.iter().map(|x| format!("{x:?}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a log back. Diagnostic columns, if present, are ignored; the
    /// step is taken from the first two time stamps and the gait is unknown.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, LogError> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(input);
        let headers = r.headers()?.clone();
        let mut index = [0usize; 14];
        for (i, name) in STATE_COLUMNS.iter().enumerate() {
            index[i] = headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| LogError::Format {
                    line: 1,
                    message: format!("missing column `{name}`"),
                })?;
        }

        let mut traj = Trajectory::new(None, f64::NAN);
        for record in r.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let mut v = [0.0; 14];
            for (k, &col) in index.iter().enumerate() {
                let field = record.get(col).unwrap_or("");
                v[k] = field.parse().map_err(|_| LogError::Format {
                    line,
                    message: format!("bad value `{field}` in column `{}`", STATE_COLUMNS[k]),
                })?;
            }
            let state = BodyState::from_array(&[
                v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11], v[12],
            ]);
            let rates = body_rates_to_euler_rates(&state.attitude, &state.angular_velocity)
                .unwrap_or_else(|_| Vector3::from_element(f64::NAN));
            if let Some(prev) = traj.samples.last() {
                if !(v[0] > prev.t) {
                    return Err(LogError::Format {
                        line,
                        message: "time stamps are not strictly increasing".into(),
                    });
                }
            }
            traj.push(Sample::new(v[0], state, rates, v[13], None));
        }
        if traj.len() >= 2 {
            traj.dt = traj.samples[1].t - traj.samples[0].t;
        }
        Ok(traj)
    }

    /// Attaches the gait a log was produced with.
    pub fn with_gait(mut self, gait: Option<TailGait>) -> Self {
        self.gait = gait;
        self
    }

    pub fn save(&self, path: &Path, diagnostics: bool) -> Result<(), LogError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file), diagnostics)
    }

    pub fn load(path: &Path) -> Result<Self, LogError> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn diagnostic_columns() -> Vec<String> {
    let mut cols: Vec<String> = ["alpha_tail", "alpha_vertical", "alpha_lateral"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for name in WrenchBreakdown::TERM_NAMES {
        for axis in ["x", "y", "z"] {
            cols.push(format!("{name}_{axis}"));
        }
    }
    cols
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{Attitude, BodyVec};

    fn sample_traj() -> Trajectory {
        let gait = TailGait::new(0.1, 0.3, 1.5).unwrap();
        let mut t = Trajectory::new(Some(gait), 0.01);
        for k in 0..5 {
            let state = BodyState {
                position: InertialVec::new(0.1 * k as f64, 1.0 / 3.0, -0.2),
                attitude: Attitude::new(0.01, -0.02, 4.0 + k as f64),
                velocity: BodyVec::new(0.2, 1e-17, -0.01),
                angular_velocity: BodyVec::new(0.0, 0.3, -0.7),
            };
            t.push(Sample::new(
                k as f64 * 0.01,
                state,
                Vector3::zeros(),
                0.1,
                Some(WrenchBreakdown::default()),
            ));
        }
        t
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let traj = sample_traj();
        for diag in [false, true] {
            let mut buf = Vec::new();
            traj.write_csv(&mut buf, diag).unwrap();
            let back = Trajectory::read_csv(buf.as_slice()).unwrap();
            assert_eq!(back.len(), traj.len());
            assert_eq!(back.gait(), None);
            assert!((back.dt() - traj.dt()).abs() < 1e-15);
            for (a, b) in back.samples().iter().zip(traj.samples()) {
                assert_eq!(a.t, b.t);
                assert_eq!(a.state, b.state);
                assert_eq!(a.tail_angle, b.tail_angle);
            }
        }
    }

    #[test]
    fn header_names_state_columns() {
        let mut buf = Vec::new();
        sample_traj().write_csv(&mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), STATE_COLUMNS.join(","));
    }

    #[test]
    fn rejects_bad_rows() {
        let text = "t,x,y,z,roll,pitch,yaw,vbx,vby,vbz,wbx,wby,wbz,xi1\n0,0,0,0,0,0,0,0,0,0,0,0,0,0\n0.1,0,0,zz,0,0,0,0,0,0,0,0,0,0\n";
        match Trajectory::read_csv(text.as_bytes()) {
            Err(LogError::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let missing = "t,x,y\n0,0,0\n";
        assert!(Trajectory::read_csv(missing.as_bytes()).is_err());
    }

    #[test]
    fn speeds() {
        let s = Sample::new(
            0.0,
            BodyState {
                velocity: BodyVec::new(3.0, 0.0, 4.0),
                ..BodyState::default()
            },
            Vector3::zeros(),
            0.0,
            None,
        );
        assert_eq!(s.horizontal_speed(), 3.0);
        assert_eq!(s.speed(), 5.0);
    }
}
