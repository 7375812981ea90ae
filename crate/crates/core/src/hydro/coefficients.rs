//! Lift, drag and impact-torque coefficient curves.
//!
//! Each family is tabulated against the attack angle on `[0, α_max]` and
//! fitted by a least-squares polynomial in `|α|`. Evaluation is even in `α`
//! and clamps `|α|` to `α_max`.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper end of the attack-angle grid of the shipped tables, rad.
pub const ALPHA_GRID_MAX: f64 = PI / 6.0;
/// Grid spacing of the shipped tables, rad.
pub const ALPHA_GRID_STEP: f64 = PI / 60.0;
pub const DEFAULT_DEGREE: usize = 9;

#[derive(Debug, Error)]
pub enum CoefficientError {
    #[error("{family}: rank-deficient fit ({samples} samples for {unknowns} unknowns)")]
    RankDeficient {
        family: CoefficientFamily,
        samples: usize,
        unknowns: usize,
    },
    #[error("{family}: sample angle {alpha} rad is negative or non-finite")]
    BadSample {
        family: CoefficientFamily,
        alpha: f64,
    },
    #[error("missing coefficient table for {0}")]
    MissingFamily(CoefficientFamily),
    #[error("unknown coefficient family `{0}`")]
    UnknownFamily(String),
    #[error("{path}: {message}")]
    Table { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// The eight tabulated coefficient families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoefficientFamily {
    #[serde(rename = "C_Dt")]
    TailDrag,
    #[serde(rename = "C_Lt")]
    TailLift,
    #[serde(rename = "C_Db1")]
    BodyDragVertical,
    #[serde(rename = "C_Lb1")]
    BodyLiftVertical,
    #[serde(rename = "C_Db2")]
    BodyDragLateral,
    #[serde(rename = "C_Lb2")]
    BodyLiftLateral,
    #[serde(rename = "C_MIy")]
    ImpactPitch,
    #[serde(rename = "C_MIz")]
    ImpactYaw,
}

impl CoefficientFamily {
    pub const ALL: [CoefficientFamily; 8] = [
        Self::TailDrag,
        Self::TailLift,
        Self::BodyDragVertical,
        Self::BodyLiftVertical,
        Self::BodyDragLateral,
        Self::BodyLiftLateral,
        Self::ImpactPitch,
        Self::ImpactYaw,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Self::TailDrag => "C_Dt",
            Self::TailLift => "C_Lt",
            Self::BodyDragVertical => "C_Db1",
            Self::BodyLiftVertical => "C_Lb1",
            Self::BodyDragLateral => "C_Db2",
            Self::BodyLiftLateral => "C_Lb2",
            Self::ImpactPitch => "C_MIy",
            Self::ImpactYaw => "C_MIz",
        }
    }

    pub fn is_drag(self) -> bool {
        matches!(
            self,
            Self::TailDrag | Self::BodyDragVertical | Self::BodyDragLateral
        )
    }

    /// Lift and impact-torque curves vanish at zero attack angle.
    pub fn vanishes_at_zero(self) -> bool {
        !self.is_drag()
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.id())
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|f| *f == self).unwrap()
    }
}

impl fmt::Display for CoefficientFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for CoefficientFamily {
    type Err = CoefficientError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| CoefficientError::UnknownFamily(s.to_owned()))
    }
}

/// Which powers of `|α|` enter the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// `1, |α|, …, |α|^deg`; the constant is dropped when the fit is anchored at zero.
    Full,
    /// Even powers for drag families, odd powers otherwise. The curve then
    /// extends smoothly through `α = 0` (as an even or odd function).
    Parity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub degree: usize,
    pub basis: Basis,
    /// Force `C(0) = 0`.
    pub zero_intercept: bool,
}

impl FitOptions {
    /// Anchors lift and impact-torque curves at the origin.
    pub fn for_family(family: CoefficientFamily, degree: usize, basis: Basis) -> Self {
        Self {
            degree,
            basis,
            zero_intercept: family.vanishes_at_zero(),
        }
    }

    fn powers(&self, family: CoefficientFamily) -> Vec<usize> {
        (0..=self.degree)
            .filter(|&p| match self.basis {
                Basis::Full => !(p == 0 && self.zero_intercept),
                Basis::Parity if family.is_drag() => p % 2 == 0 && !(p == 0 && self.zero_intercept),
                Basis::Parity => p % 2 == 1,
            })
            .collect()
    }
}

/// A fitted curve `C(|α|) = Σ c_p |α|^p` on `[0, α_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientModel {
    pub family: CoefficientFamily,
    /// `coefficients[p]` multiplies `|α|^p`.
    pub coefficients: Vec<f64>,
    pub alpha_max: f64,
    /// RMS of the fit residuals on the samples.
    pub rms: f64,
}

impl CoefficientModel {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Value at `|α|`, clamped to `α_max`.
    pub fn eval(&self, alpha: f64) -> f64 {
        let a = alpha.abs().min(self.alpha_max);
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * a + c)
    }

    /// Odd extension `sign(α)·C(|α|)`, used where the sign of the attack
    /// angle selects the torque direction.
    pub fn eval_signed(&self, alpha: f64) -> f64 {
        if alpha < 0.0 {
            -self.eval(alpha)
        } else {
            self.eval(alpha)
        }
    }
}

pub fn eval_coefficient(model: &CoefficientModel, alpha: f64) -> f64 {
    model.eval(alpha)
}

/// Least-squares polynomial fit of `(α, C)` samples.
pub fn fit_coefficient_model(
    family: CoefficientFamily,
    samples: &[(f64, f64)],
    options: &FitOptions,
) -> Result<CoefficientModel, CoefficientError> {
    let powers = options.powers(family);
    let rank_deficient = || CoefficientError::RankDeficient {
        family,
        samples: samples.len(),
        unknowns: powers.len(),
    };
    if let Some(&(alpha, _)) = samples
        .iter()
        .find(|(a, c)| !(a.is_finite() && *a >= 0.0 && c.is_finite()))
    {
        return Err(CoefficientError::BadSample { family, alpha });
    }
    if powers.is_empty() || samples.len() < powers.len() {
        return Err(rank_deficient());
    }

    let alpha_max = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let design = DMatrix::from_fn(samples.len(), powers.len(), |i, j| {
        samples[i].0.powi(powers[j] as i32)
    });
    let rhs = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));

    let svd = design.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    if !(s_max > 0.0) || s_min <= s_max * 1e-12 {
        return Err(rank_deficient());
    }
    let solution = svd.solve(&rhs, 0.0).map_err(|_| rank_deficient())?;

    let residual = &design * &solution - &rhs;
    let rms = (residual.norm_squared() / samples.len() as f64).sqrt();

    let mut coefficients = vec![0.0; options.degree + 1];
    for (p, c) in powers.iter().zip(solution.iter()) {
        coefficients[*p] = *c;
    }
    Ok(CoefficientModel {
        family,
        coefficients,
        alpha_max,
        rms,
    })
}

/// Tabulated samples for one family as read from or written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub family: CoefficientFamily,
    /// Free-form provenance tag, e.g. `cfd` or `generated`.
    pub provenance: String,
    pub samples: Vec<(f64, f64)>,
}

impl CoefficientTable {
    /// Text form: a `#` header naming family and provenance, a column header,
    /// then `alpha_rad,value` rows.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# family={} provenance={}\nalpha_rad,value\n",
            self.family, self.provenance
        );
        for (a, c) in &self.samples {
            out.push_str(&format!("{a:?},{c:?}\n"));
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, CoefficientError> {
        let bad = |message: String| CoefficientError::Table {
            path: path.to_owned(),
            message,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| bad("first line must be a `# family=… provenance=…` header".into()))?;
        let mut family = None;
        let mut provenance = String::from("unspecified");
        for token in header.split_whitespace() {
            if let Some(id) = token.strip_prefix("family=") {
                family = Some(id.parse::<CoefficientFamily>()?);
            } else if let Some(p) = token.strip_prefix("provenance=") {
                provenance = p.to_owned();
            }
        }
        let family = family.ok_or_else(|| bad("header lacks `family=`".into()))?;

        let body: String = lines.collect::<Vec<_>>().join("\n");
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(body.as_bytes());
        let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "alpha_rad" || &headers[1] != "value" {
            return Err(bad(format!(
                "expected columns `alpha_rad,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut samples = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let field = |i: usize| -> Result<f64, CoefficientError> {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| bad(format!("row {}: {e}", row + 1)))
            };
            samples.push((field(0)?, field(1)?));
        }
        Ok(Self {
            family,
            provenance,
            samples,
        })
    }

    pub fn read(path: &Path) -> Result<Self, CoefficientError> {
        let text = fs::read_to_string(path).map_err(|source| CoefficientError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text, path)
    }
}

/// Reads `<dir>/<family>.csv` for every family.
pub fn read_table_dir(dir: &Path) -> Result<Vec<CoefficientTable>, CoefficientError> {
    CoefficientFamily::ALL
        .iter()
        .map(|family| {
            let path = dir.join(family.file_name());
            if !path.exists() {
                return Err(CoefficientError::MissingFamily(*family));
            }
            let table = CoefficientTable::read(&path)?;
            if table.family != *family {
                return Err(CoefficientError::Table {
                    path,
                    message: format!("header names {} but file is for {}", table.family, family),
                });
            }
            Ok(table)
        })
        .collect()
}

/// Fitted models for all eight families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    models: Vec<CoefficientModel>,
}

impl CoefficientSet {
    pub fn new(mut models: Vec<CoefficientModel>) -> Result<Self, CoefficientError> {
        models.sort_by_key(|m| m.family);
        for family in CoefficientFamily::ALL {
            if models.iter().filter(|m| m.family == family).count() != 1 {
                return Err(CoefficientError::MissingFamily(family));
            }
        }
        Ok(Self { models })
    }

    pub fn fit(
        tables: &[CoefficientTable],
        degree: usize,
        basis: Basis,
    ) -> Result<Self, CoefficientError> {
        let models = CoefficientFamily::ALL
            .iter()
            .map(|family| {
                let table = tables
                    .iter()
                    .find(|t| t.family == *family)
                    .ok_or(CoefficientError::MissingFamily(*family))?;
                fit_coefficient_model(
                    *family,
                    &table.samples,
                    &FitOptions::for_family(*family, degree, basis),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(models)
    }

    /// Models fitted to [`DefaultTables::default`].
    pub fn nominal() -> Self {
        Self::fit(
            &DefaultTables::default().tables(),
            DEFAULT_DEGREE,
            Basis::Parity,
        )
        .expect("shipped tables fit")
    }

    pub fn get(&self, family: CoefficientFamily) -> &CoefficientModel {
        &self.models[family.index()]
    }

    pub fn models(&self) -> &[CoefficientModel] {
        &self.models
    }
}

/// Curves used to generate the shipped tables. With `x = α / α_max`, drag
/// families are `c₀ + Δc·(1 − (1 − x²)⁴)` and the odd families
/// `c_peak·P(x)` with `P' ∝ (1 − x²)⁴`, `P(1) = 1`. Both level off at
/// `α_max` with their first three derivatives vanishing, so the clamped
/// models stay smooth enough for fourth-order integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefaultTables {
    /// `(c₀, Δc)`.
    pub tail_drag: (f64, f64),
    pub tail_lift: f64,
    pub body_drag_vertical: (f64, f64),
    pub body_lift_vertical: f64,
    pub body_drag_lateral: (f64, f64),
    pub body_lift_lateral: f64,
    pub impact_pitch: f64,
    pub impact_yaw: f64,
}

impl Default for DefaultTables {
    fn default() -> Self {
        Self {
            tail_drag: (0.05, 0.55),
            tail_lift: 1.2,
            body_drag_vertical: (0.1, 0.25),
            body_lift_vertical: 0.45,
            body_drag_lateral: (0.1, 0.25),
            body_lift_lateral: 0.45,
            impact_pitch: -0.009,
            impact_yaw: 0.009,
        }
    }
}

impl DefaultTables {
    pub fn value(&self, family: CoefficientFamily, alpha: f64) -> f64 {
        let x = alpha / ALPHA_GRID_MAX;
        let x2 = x * x;
        let drag = |(c0, dc): (f64, f64)| c0 + dc * (1.0 - (1.0 - x2).powi(4));
        let rise = x * (1.0 + x2 * (-4.0 / 3.0 + x2 * (6.0 / 5.0 + x2 * (-4.0 / 7.0 + x2 / 9.0))));
        let odd = |peak: f64| peak * rise * 315.0 / 128.0;
        match family {
            CoefficientFamily::TailDrag => drag(self.tail_drag),
            CoefficientFamily::TailLift => odd(self.tail_lift),
            CoefficientFamily::BodyDragVertical => drag(self.body_drag_vertical),
            CoefficientFamily::BodyLiftVertical => odd(self.body_lift_vertical),
            CoefficientFamily::BodyDragLateral => drag(self.body_drag_lateral),
            CoefficientFamily::BodyLiftLateral => odd(self.body_lift_lateral),
            CoefficientFamily::ImpactPitch => odd(self.impact_pitch),
            CoefficientFamily::ImpactYaw => odd(self.impact_yaw),
        }
    }

    /// Samples on `α = 0, π/60, …, π/6`.
    pub fn tables(&self) -> Vec<CoefficientTable> {
        CoefficientFamily::ALL
            .iter()
            .map(|&family| CoefficientTable {
                family,
                provenance: "generated".into(),
                samples: alpha_grid().map(|a| (a, self.value(family, a))).collect(),
            })
            .collect()
    }
}

/// The 11-point attack-angle grid `0..=π/6` in steps of `π/60`.
pub fn alpha_grid() -> impl Iterator<Item = f64> {
    (0..=10).map(|k| k as f64 * ALPHA_GRID_STEP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn full(degree: usize) -> FitOptions {
        FitOptions {
            degree,
            basis: Basis::Full,
            zero_intercept: false,
        }
    }

    #[test]
    fn exact_quadratic_is_recovered() {
        let samples: Vec<_> = alpha_grid()
            .map(|a| (a, 0.3 - 0.7 * a + 2.1 * a * a))
            .collect();
        let m = fit_coefficient_model(CoefficientFamily::TailDrag, &samples, &full(2)).unwrap();
        assert_abs_diff_eq!(m.coefficients[0], 0.3, epsilon = 1e-10);
        assert_abs_diff_eq!(m.coefficients[1], -0.7, epsilon = 1e-10);
        assert_abs_diff_eq!(m.coefficients[2], 2.1, epsilon = 1e-10);
        assert!(m.rms < 1e-12);
    }

    #[test]
    fn cfd_grid_gives_valid_domain() {
        let samples: Vec<_> = alpha_grid().map(|a| (a, (2.0 * a).sin())).collect();
        assert_eq!(samples.len(), 11);
        let m = fit_coefficient_model(CoefficientFamily::TailLift, &samples, &full(4)).unwrap();
        assert_abs_diff_eq!(m.alpha_max, PI / 6.0, epsilon = 1e-15);
        for (a, c) in samples {
            assert_abs_diff_eq!(m.eval(a), c, epsilon = 1e-3);
        }
    }

    #[test]
    fn too_few_samples_is_rank_deficient() {
        let samples = [(0.0, 1.0), (0.1, 2.0)];
        let err =
            fit_coefficient_model(CoefficientFamily::TailDrag, &samples, &full(3)).unwrap_err();
        assert!(matches!(err, CoefficientError::RankDeficient { .. }));
    }

    #[test]
    fn repeated_angles_are_rank_deficient() {
        let samples = [(0.2, 1.0), (0.2, 1.1), (0.2, 0.9), (0.2, 1.0)];
        let err =
            fit_coefficient_model(CoefficientFamily::TailDrag, &samples, &full(2)).unwrap_err();
        assert!(matches!(err, CoefficientError::RankDeficient { .. }));
    }

    #[test]
    fn evaluation_is_even_and_clamped() {
        let m = CoefficientSet::nominal()
            .get(CoefficientFamily::TailDrag)
            .clone();
        assert_eq!(m.eval(0.3), m.eval(-0.3));
        assert_eq!(m.eval(m.alpha_max + 0.1), m.eval(m.alpha_max));
        assert_eq!(m.eval(-m.alpha_max - 2.0), m.eval(m.alpha_max));
    }

    #[test]
    fn anchored_families_vanish_at_zero() {
        let set = CoefficientSet::nominal();
        for family in CoefficientFamily::ALL {
            let m = set.get(family);
            if family.vanishes_at_zero() {
                assert_eq!(m.eval(0.0), 0.0, "{family}");
            } else {
                assert!(m.eval(0.0) > 0.0, "{family}");
            }
        }
    }

    #[test]
    fn signed_evaluation_is_odd() {
        let m = CoefficientSet::nominal()
            .get(CoefficientFamily::ImpactYaw)
            .clone();
        assert_eq!(m.eval_signed(-0.2), -m.eval_signed(0.2));
    }

    #[test]
    fn default_models_reproduce_tables_and_level_off() {
        let tables = DefaultTables::default();
        let set = CoefficientSet::nominal();
        for family in CoefficientFamily::ALL {
            let m = set.get(family);
            for a in alpha_grid() {
                assert_abs_diff_eq!(m.eval(a), tables.value(family, a), epsilon = 1e-10);
            }
            let h = 1e-6;
            let slope = (m.eval(ALPHA_GRID_MAX) - m.eval(ALPHA_GRID_MAX - h)) / h;
            assert!(slope.abs() < 1e-5, "{family}: slope {slope}");
        }
    }

    #[test]
    fn table_text_round_trip() {
        let table = &DefaultTables::default().tables()[3];
        let parsed = CoefficientTable::parse(&table.to_text(), Path::new("mem")).unwrap();
        assert_eq!(&parsed, table);
    }

    #[test]
    fn table_header_is_required() {
        let err =
            CoefficientTable::parse("alpha_rad,value\n0,1\n", Path::new("t.csv")).unwrap_err();
        assert!(err.to_string().contains("t.csv"));
        let err = CoefficientTable::parse("# family=C_Xx\nalpha_rad,value\n", Path::new("t.csv"))
            .unwrap_err();
        assert!(matches!(err, CoefficientError::UnknownFamily(_)));
    }

    #[test]
    fn family_ids_parse() {
        for family in CoefficientFamily::ALL {
            assert_eq!(family.id().parse::<CoefficientFamily>().unwrap(), family);
        }
    }
}
