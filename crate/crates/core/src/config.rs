//! Run configuration files.
//!
//! A config is a TOML document with `vehicle`, `vehicle.geometry`, `hydro`
//! and `scenario` sections. Units are spelled out in key names; angles are
//! given in degrees and converted to radians on load. Unknown keys are
//! rejected so a typo cannot silently fall back to a default.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use thiserror::Error;
use toml::{Table, Value};

use crate::actuation::{ActuatorGeometry, BlockCommand, MassModel, TailGait};
use crate::analysis::{Pattern, Window};
use crate::dynamics::{Integrator, Scenario, DEFAULT_DT};
use crate::frames::{Attitude, BodyState, BodyVec, InertialVec};
use crate::hydro::coefficients::{read_table_dir, DEFAULT_DEGREE};
use crate::hydro::{Basis, CoefficientError, CoefficientSet, HydroParams};
use crate::vehicle::VehicleParams;

/// Neutral centre of mass must match the declared one this closely, m.
pub const CENTER_OF_MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("missing required key `{key}`")]
    Missing { key: String },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error(
        "`vehicle.neutral_center_of_mass_m` declares {declared:?} but the neutral block \
         position gives {computed:?}"
    )]
    Inconsistent {
        declared: [f64; 3],
        computed: [f64; 3],
    },
    #[error("`hydro.coefficient_tables`: {0}")]
    Coefficients(#[from] CoefficientError),
    #[error("unknown or non-numeric parameter `{key}`")]
    UnknownParameter { key: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Number,
    Integer,
    Text,
    Vec3,
    Pair,
}

struct Key {
    name: &'static str,
    kind: Kind,
    required: bool,
}

const fn req(name: &'static str, kind: Kind) -> Key {
    Key {
        name,
        kind,
        required: true,
    }
}

const fn opt(name: &'static str, kind: Kind) -> Key {
    Key {
        name,
        kind,
        required: false,
    }
}

struct Section {
    path: &'static str,
    required: bool,
    keys: &'static [Key],
}

use Kind::*;

const SCHEMA: &[Section] = &[
    Section {
        path: "vehicle",
        required: true,
        keys: &[
            req("mass_total_kg", Number),
            req("mass_block_kg", Number),
            req("mass_buoyancy_kg", Number),
            req("static_moment_kgm", Vec3),
            req("inertia_block_kgm2", Vec3),
            req("inertia_body_kgm2", Vec3),
            req("neutral_center_of_mass_m", Vec3),
        ],
    },
    Section {
        path: "vehicle.geometry",
        required: true,
        keys: &[
            req("bracket_origin_m", Vec3),
            req("tail_origin_m", Vec3),
            req("d1_m", Number),
            req("d2_m", Number),
            req("d3_m", Number),
            req("slider_neutral_m", Number),
            req("tail_radius_m", Number),
            req("slider_range_m", Pair),
        ],
    },
    Section {
        path: "hydro",
        required: true,
        keys: &[
            req("rho", Number),
            req("tail_area_m2", Number),
            req("area_m2", Vec3),
            req("damping_nms", Vec3),
            opt("coefficient_tables", Text),
            opt("coefficient_degree", Integer),
        ],
    },
    Section {
        path: "scenario",
        required: true,
        keys: &[
            req("pattern", Text),
            req("duration_s", Number),
            opt("dt_s", Number),
            opt("integrator", Text),
        ],
    },
    Section {
        path: "scenario.gait",
        required: true,
        keys: &[
            req("offset_deg", Number),
            req("amplitude_deg", Number),
            req("frequency_hz", Number),
        ],
    },
    Section {
        path: "scenario.block",
        required: true,
        keys: &[req("delta_d_m", Number), req("bracket_angle_deg", Number)],
    },
    Section {
        path: "scenario.initial",
        required: false,
        keys: &[
            opt("position_m", Vec3),
            opt("attitude_deg", Vec3),
            opt("velocity_mps", Vec3),
            opt("angular_velocity_radps", Vec3),
        ],
    },
    Section {
        path: "scenario.window",
        required: false,
        keys: &[req("start_s", Number), req("end_s", Number)],
    },
];

/// A loaded run: the scenario plus what the analysis needs.
#[derive(Debug, Clone)]
pub struct Config {
    pub scenario: Scenario,
    pub pattern: Pattern,
    /// Explicit analysis window; `None` selects it automatically.
    pub window: Option<Window>,
    document: Table,
    base_dir: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(".")).to_owned();
        Self::parse(&text, path, base)
    }

    /// Parses `text`; relative table paths resolve against `base_dir`.
    pub fn parse(text: &str, origin: &Path, base_dir: PathBuf) -> Result<Self, ConfigError> {
        let document: Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse {
                path: origin.to_owned(),
                message: e.to_string(),
            })?;
        Self::from_document(document, base_dir)
    }

    pub fn from_document(document: Table, base_dir: PathBuf) -> Result<Self, ConfigError> {
        check_schema(&document)?;
        let doc = Doc(&document);

        let vehicle = read_vehicle(&doc, &base_dir)?;
        let gait = TailGait {
            offset: doc.num("scenario.gait", "offset_deg")?.to_radians(),
            amplitude: doc.num("scenario.gait", "amplitude_deg")?.to_radians(),
            frequency: doc.num("scenario.gait", "frequency_hz")?,
            inverted_stroke: false,
        };
        gait.validate().map_err(|e| invalid("scenario.gait", e))?;
        let block = BlockCommand::new(
            doc.num("scenario.block", "delta_d_m")?,
            doc.num("scenario.block", "bracket_angle_deg")?.to_radians(),
        );
        block
            .validate(&vehicle.geometry)
            .map_err(|e| invalid("scenario.block", e))?;

        let pattern_name = doc.text("scenario", "pattern")?.unwrap_or_default();
        let pattern = Pattern::parse(&pattern_name).ok_or_else(|| {
            invalid(
                "scenario.pattern",
                format!("`{pattern_name}` is not one of rectilinear, turning, gliding, spiral"),
            )
        })?;
        let integrator = match doc.text("scenario", "integrator")? {
            Some(s) => s.parse().map_err(|e| invalid("scenario.integrator", e))?,
            None => Integrator::default(),
        };

        let zero = [0.0; 3];
        let init = "scenario.initial";
        let position = doc.opt_vec3(init, "position_m")?.unwrap_or(zero);
        let att = doc.opt_vec3(init, "attitude_deg")?.unwrap_or(zero);
        let vel = doc.opt_vec3(init, "velocity_mps")?.unwrap_or(zero);
        let rate = doc
            .opt_vec3(init, "angular_velocity_radps")?
            .unwrap_or(zero);
        let initial = BodyState {
            position: InertialVec::new(position[0], position[1], position[2]),
            attitude: Attitude::new(
                att[0].to_radians(),
                att[1].to_radians(),
                att[2].to_radians(),
            ),
            velocity: BodyVec::new(vel[0], vel[1], vel[2]),
            angular_velocity: BodyVec::new(rate[0], rate[1], rate[2]),
        };

        let mut scenario = Scenario::new(vehicle, gait, block, doc.num("scenario", "duration_s")?);
        scenario.dt = doc.opt_num("scenario", "dt_s")?.unwrap_or(DEFAULT_DT);
        scenario.integrator = integrator;
        scenario.initial = initial;
        scenario.validate().map_err(|e| invalid("scenario", e))?;

        let window = match doc.table("scenario.window") {
            Some(_) => {
                let w = Window::new(
                    doc.num("scenario.window", "start_s")?,
                    doc.num("scenario.window", "end_s")?,
                );
                if !(0.0 <= w.start && w.start < w.end && w.end <= scenario.duration) {
                    return Err(invalid(
                        "scenario.window",
                        format!("[{}, {}] must lie inside [0, duration_s]", w.start, w.end),
                    ));
                }
                Some(w)
            }
            None => None,
        };

        Ok(Self {
            scenario,
            pattern,
            window,
            document,
            base_dir,
        })
    }

    /// Copy of this config with one numeric key replaced, e.g.
    /// `scenario.gait.frequency_hz`.
    pub fn with_parameter(&self, key: &str, value: f64) -> Result<Self, ConfigError> {
        let unknown = || ConfigError::UnknownParameter {
            key: key.to_owned(),
        };
        let (section, name) = key.rsplit_once('.').ok_or_else(unknown)?;
        let known = SCHEMA
            .iter()
            .find(|s| s.path == section)
            .and_then(|s| s.keys.iter().find(|k| k.name == name))
            .ok_or_else(unknown)?;
        if known.kind != Number {
            return Err(unknown());
        }
        let mut document = self.document.clone();
        let mut table = &mut document;
        for part in section.split('.') {
            table = table
                .entry(part)
                .or_insert_with(|| Value::Table(Table::new()))
                .as_table_mut()
                .ok_or_else(unknown)?;
        }
        table.insert(name.to_owned(), Value::Float(value));
        Self::from_document(document, self.base_dir.clone())
    }

    /// Names of the numeric keys a sweep can vary.
    pub fn parameter_names() -> Vec<String> {
        SCHEMA
            .iter()
            .flat_map(|s| {
                s.keys
                    .iter()
                    .filter(|k| k.kind == Number)
                    .map(move |k| format!("{}.{}", s.path, k.name))
            })
            .collect()
    }

    pub fn document(&self) -> &Table {
        &self.document
    }
}

fn invalid(key: &str, e: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_owned(),
        message: e.to_string(),
    }
}

fn check_schema(root: &Table) -> Result<(), ConfigError> {
    let sections: BTreeSet<&str> = SCHEMA.iter().map(|s| s.path).collect();
    check_unknown(root, "", &sections)?;
    let doc = Doc(root);
    for section in SCHEMA {
        let Some(table) = doc.table(section.path) else {
            if section.required {
                return Err(ConfigError::Missing {
                    key: section.path.to_owned(),
                });
            }
            continue;
        };
        for key in section.keys {
            let full = format!("{}.{}", section.path, key.name);
            match table.get(key.name) {
                None if key.required => return Err(ConfigError::Missing { key: full }),
                None => {}
                Some(v) => check_kind(v, key.kind).map_err(|m| invalid(&full, m))?,
            }
        }
    }
    Ok(())
}

fn check_unknown(
    table: &Table,
    prefix: &str,
    sections: &BTreeSet<&str>,
) -> Result<(), ConfigError> {
    let keys: Vec<&str> = SCHEMA
        .iter()
        .filter(|s| s.path == prefix)
        .flat_map(|s| s.keys.iter().map(|k| k.name))
        .collect();
    for (name, value) in table {
        let full = if prefix.is_empty() {
            name.clone()
        } else {
            format!("{prefix}.{name}")
        };
        if sections.contains(full.as_str()) {
            match value {
                Value::Table(t) => check_unknown(t, &full, sections)?,
                _ => return Err(invalid(&full, "expected a section")),
            }
        } else if !keys.contains(&name.as_str()) {
            return Err(ConfigError::UnknownKey { key: full });
        }
    }
    Ok(())
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn check_kind(v: &Value, kind: Kind) -> Result<(), String> {
    let finite = |x: f64| {
        if x.is_finite() {
            Ok(())
        } else {
            Err(format!("{x} is not finite"))
        }
    };
    match kind {
        Number => as_number(v)
            .ok_or("expected a number".to_string())
            .and_then(finite),
        Integer => match v {
            Value::Integer(i) if *i >= 0 => Ok(()),
            _ => Err("expected a non-negative integer".into()),
        },
        Text => v.as_str().map(|_| ()).ok_or("expected a string".into()),
        Vec3 | Pair => {
            let n = if kind == Vec3 { 3 } else { 2 };
            let arr = v
                .as_array()
                .ok_or(format!("expected an array of {n} numbers"))?;
            if arr.len() != n {
                return Err(format!("expected {n} numbers, found {}", arr.len()));
            }
            for x in arr {
                as_number(x)
                    .ok_or("array entries must be numbers")
                    .and_then(|x| finite(x).map_err(|_| "array entries must be finite"))?;
            }
            Ok(())
        }
    }
}

/// Typed access to a schema-checked document.
struct Doc<'a>(&'a Table);

impl<'a> Doc<'a> {
    fn table(&self, path: &str) -> Option<&'a Table> {
        let mut t = self.0;
        for part in path.split('.') {
            t = t.get(part)?.as_table()?;
        }
        Some(t)
    }

    fn get(&self, section: &str, key: &str) -> Option<&'a Value> {
        self.table(section)?.get(key)
    }

    fn opt_num(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        Ok(self.get(section, key).and_then(as_number))
    }

    fn num(&self, section: &str, key: &str) -> Result<f64, ConfigError> {
        self.opt_num(section, key)?
            .ok_or_else(|| ConfigError::Missing {
                key: format!("{section}.{key}"),
            })
    }

    fn text(&self, section: &str, key: &str) -> Result<Option<String>, ConfigError> {
        Ok(self
            .get(section, key)
            .and_then(Value::as_str)
            .map(str::to_owned))
    }

    fn array<const N: usize>(&self, section: &str, key: &str) -> Option<[f64; N]> {
        let arr = self.get(section, key)?.as_array()?;
        let mut out = [0.0; N];
        for (o, v) in out.iter_mut().zip(arr) {
            *o = as_number(v)?;
        }
        Some(out)
    }

    fn opt_vec3(&self, section: &str, key: &str) -> Result<Option<[f64; 3]>, ConfigError> {
        Ok(self.array::<3>(section, key))
    }

    fn vec3(&self, section: &str, key: &str) -> Result<Vector3<f64>, ConfigError> {
        self.array::<3>(section, key)
            .map(Vector3::from)
            .ok_or_else(|| ConfigError::Missing {
                key: format!("{section}.{key}"),
            })
    }
}

fn read_vehicle(doc: &Doc<'_>, base_dir: &Path) -> Result<VehicleParams, ConfigError> {
    let v = "vehicle";
    let mass = MassModel {
        total: doc.num(v, "mass_total_kg")?,
        block: doc.num(v, "mass_block_kg")?,
        buoyancy: doc.num(v, "mass_buoyancy_kg")?,
        static_moment: doc.vec3(v, "static_moment_kgm")?,
        block_inertia: doc.vec3(v, "inertia_block_kgm2")?,
        body_inertia: doc.vec3(v, "inertia_body_kgm2")?,
    };
    mass.validate().map_err(|e| invalid(v, e))?;

    let g = "vehicle.geometry";
    let range = doc.array::<2>(g, "slider_range_m").unwrap_or_default();
    let geometry = ActuatorGeometry {
        bracket_origin: doc.vec3(g, "bracket_origin_m")?,
        tail_origin: doc.vec3(g, "tail_origin_m")?,
        d1: doc.num(g, "d1_m")?,
        d2: doc.num(g, "d2_m")?,
        d3: doc.num(g, "d3_m")?,
        slider_neutral: doc.num(g, "slider_neutral_m")?,
        tail_radius: doc.num(g, "tail_radius_m")?,
        slider_range: (range[0], range[1]),
    };
    geometry.validate().map_err(|e| invalid(g, e))?;

    let h = "hydro";
    let coefficients = match doc.text(h, "coefficient_tables")? {
        Some(dir) => {
            let degree = match doc.get(h, "coefficient_degree").and_then(Value::as_integer) {
                Some(d) => d as usize,
                None => DEFAULT_DEGREE,
            };
            let tables = read_table_dir(&base_dir.join(dir))?;
            CoefficientSet::fit(&tables, degree, Basis::Parity)?
        }
        None => CoefficientSet::nominal(),
    };
    let hydro = HydroParams {
        rho: doc.num(h, "rho")?,
        tail_area: doc.num(h, "tail_area_m2")?,
        area: doc.vec3(h, "area_m2")?,
        damping: doc.vec3(h, "damping_nms")?,
        coefficients,
    };
    hydro.validate().map_err(|e| invalid(h, e))?;

    let vehicle = VehicleParams {
        mass,
        geometry,
        hydro,
    };
    let declared = doc.vec3(v, "neutral_center_of_mass_m")?;
    let computed = vehicle
        .neutral_center_of_mass()
        .map_err(|e| invalid("vehicle.geometry", e))?;
    if (declared - computed).amax() > CENTER_OF_MASS_TOLERANCE {
        return Err(ConfigError::Inconsistent {
            declared: declared.into(),
            computed: computed.into(),
        });
    }
    Ok(vehicle)
}

/// TOML for the shipped default vehicle with the given scenario block.
pub fn default_config_text(scenario_toml: &str) -> String {
    let v = VehicleParams::nominal();
    let c = v
        .neutral_center_of_mass()
        .expect("default geometry is valid");
    let arr = |x: &Vector3<f64>| format!("[{:?}, {:?}, {:?}]", x[0], x[1], x[2]);
    let g = &v.geometry;
    format!(
        "[vehicle]\n\
         mass_total_kg = {:?}\n\
         mass_block_kg = {:?}\n\
         mass_buoyancy_kg = {:?}\n\
         static_moment_kgm = {}\n\
         inertia_block_kgm2 = {}\n\
         inertia_body_kgm2 = {}\n\
         neutral_center_of_mass_m = {}\n\
         \n\
         [vehicle.geometry]\n\
         bracket_origin_m = {}\n\
         tail_origin_m = {}\n\
         d1_m = {:?}\n\
         d2_m = {:?}\n\
         d3_m = {:?}\n\
         slider_neutral_m = {:?}\n\
         tail_radius_m = {:?}\n\
         slider_range_m = [{:?}, {:?}]\n\
         \n\
         [hydro]\n\
         rho = {:?}\n\
         tail_area_m2 = {:?}\n\
         area_m2 = {}\n\
         damping_nms = {}\n\
         \n\
         {}",
        v.mass.total,
        v.mass.block,
        v.mass.buoyancy,
        arr(&v.mass.static_moment),
        arr(&v.mass.block_inertia),
        arr(&v.mass.body_inertia),
        arr(&c),
        arr(&g.bracket_origin),
        arr(&g.tail_origin),
        g.d1,
        g.d2,
        g.d3,
        g.slider_neutral,
        g.tail_radius,
        g.slider_range.0,
        g.slider_range.1,
        v.hydro.rho,
        v.hydro.tail_area,
        arr(&v.hydro.area),
        arr(&v.hydro.damping),
        scenario_toml
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCENARIO: &str = "[scenario]\npattern = \"rectilinear\"\nduration_s = 4\n\n\
        [scenario.gait]\noffset_deg = 0\namplitude_deg = 20\nfrequency_hz = 2\n\n\
        [scenario.block]\ndelta_d_m = 0\nbracket_angle_deg = 0\n";

    fn parse(text: &str) -> Result<Config, ConfigError> {
        Config::parse(text, Path::new("test.toml"), PathBuf::from("."))
    }

    #[test]
    fn default_text_round_trips_the_default_vehicle() {
        let cfg = parse(&default_config_text(SCENARIO)).unwrap();
        assert_eq!(cfg.scenario.vehicle, VehicleParams::nominal());
        assert_eq!(cfg.pattern, Pattern::Rectilinear);
        assert_eq!(cfg.scenario.gait.amplitude, 20f64.to_radians());
        assert_eq!(cfg.scenario.dt, DEFAULT_DT);
        assert_eq!(cfg.window, None);
    }

    #[test]
    fn missing_rho_names_the_key() {
        let text = default_config_text(SCENARIO).replace("rho = 1000.0\n", "");
        match parse(&text) {
            Err(ConfigError::Missing { key }) => assert_eq!(key, "hydro.rho"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = default_config_text(SCENARIO).replace("rho =", "rho_typo = 1.0\nrho =");
        match parse(&text) {
            Err(ConfigError::UnknownKey { key }) => assert_eq!(key, "hydro.rho_typo"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent_center_of_mass_rejected() {
        let text: String = default_config_text(SCENARIO)
            .lines()
            .map(|l| {
                if l.starts_with("neutral_center_of_mass_m") {
                    "neutral_center_of_mass_m = [0.001, 0.0, -0.01]"
                } else {
                    l
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        assert!(matches!(
            parse(&text),
            Err(ConfigError::Inconsistent { .. })
        ));
    }

    #[test]
    fn wrong_types_and_values_name_the_key() {
        let text =
            default_config_text(SCENARIO).replace("frequency_hz = 2", "frequency_hz = \"2\"");
        match parse(&text) {
            Err(ConfigError::Invalid { key, .. }) => assert_eq!(key, "scenario.gait.frequency_hz"),
            other => panic!("{other:?}"),
        }
        let text = default_config_text(SCENARIO).replace("\"rectilinear\"", "\"hover\"");
        match parse(&text) {
            Err(ConfigError::Invalid { key, .. }) => assert_eq!(key, "scenario.pattern"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parameter_override() {
        let cfg = parse(&default_config_text(SCENARIO)).unwrap();
        let f3 = cfg
            .with_parameter("scenario.gait.frequency_hz", 3.0)
            .unwrap();
        assert_eq!(f3.scenario.gait.frequency, 3.0);
        let dt = cfg.with_parameter("scenario.dt_s", 0.002).unwrap();
        assert_eq!(dt.scenario.dt, 0.002);
        for bad in [
            "scenario.gait.speed",
            "scenario.pattern",
            "nonsense",
            "vehicle.static_moment_kgm",
        ] {
            assert!(matches!(
                cfg.with_parameter(bad, 1.0),
                Err(ConfigError::UnknownParameter { .. })
            ));
        }
        assert!(Config::parameter_names().contains(&"hydro.rho".to_string()));
    }
}
