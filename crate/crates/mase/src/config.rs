//! Scenario files and flag overrides.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use mase_core::evolution::SolverConfig;
use mase_core::traveling_wave::solitary_profile;
use mase_core::{Field, Grid, GridSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::output::read_columns;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Zero,
    /// `amplitude exp(-((x - center) / width)^2)`, wrapped periodically.
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// `amplitude cos(wavenumber x)`; the mode must fit the window.
    Mode { amplitude: f64, wavenumber: f64 },
    /// Smooth solitary wave of speed `c`, crest at the window center.
    TwProfile { c: f64 },
    /// Two-column `x,u` CSV on the scenario grid; relative to the scenario file.
    File { path: PathBuf },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analysis {
    pub symmetry: bool,
    pub breaking: bool,
    pub weakform: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub symmetry_tol: f64,
    pub travel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry_tol: mase_core::symmetry::DEFAULT_SYMMETRY_TOL,
            travel_tol: mase_core::symmetry::DEFAULT_TRAVEL_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub grid: GridSpec,
    pub initial: InitialCondition,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub analysis: Analysis,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Scenario {
    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.grid.n_points, self.grid.length)?)
    }

    pub fn validate(&self, base: &Path) -> Result<()> {
        self.grid()?;
        self.solver.validate()?;
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let bad = |msg: String| Err(CliError::Config(msg));
        match &self.initial {
            InitialCondition::Zero => {}
            InitialCondition::Gaussian { amplitude, center, width } => {
                if !finite(&[*amplitude, *center, *width]) || *width <= 0.0 {
                    return bad(format!("gaussian needs finite parameters and width > 0, got width={width}"));
                }
                if *center < 0.0 || *center > self.grid.length {
                    return bad(format!("gaussian center {center} outside [0, {}]", self.grid.length));
                }
            }
            InitialCondition::Mode { amplitude, wavenumber } => {
                let count = wavenumber * self.grid.length / (2.0 * PI);
                if !finite(&[*amplitude, *wavenumber]) || (count - count.round()).abs() > 1e-9 {
                    return bad(format!("wavenumber {wavenumber} does not fit the window ({count} periods)"));
                }
                if count.round().abs() > (self.grid.n_points / 2) as f64 {
                    return bad(format!("wavenumber {wavenumber} is above the grid's Nyquist mode"));
                }
            }
            InitialCondition::TwProfile { c } => {
                if !c.is_finite() {
                    return bad("tw_profile speed must be finite".into());
                }
            }
            InitialCondition::File { path } => {
                let path = base.join(path);
                if !path.is_file() {
                    return bad(format!("initial-condition file {} does not exist", path.display()));
                }
            }
        }
        let tol = &self.tolerances;
        if !(tol.symmetry_tol > 0.0 && tol.travel_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        Ok(())
    }

    /// Samples the initial condition on the scenario grid.
    pub fn initial_field(&self, base: &Path) -> Result<Field> {
        let grid = self.grid()?;
        let l = grid.length();
        let field = match &self.initial {
            InitialCondition::Zero => Field::zeros(&grid),
            InitialCondition::Gaussian { amplitude, center, width } => Field::from_fn(&grid, |x| {
                let d = (x - center + 1.5 * l).rem_euclid(l) - 0.5 * l;
                amplitude * (-(d / width).powi(2)).exp()
            })?,
            InitialCondition::Mode { amplitude, wavenumber } => {
                Field::from_fn(&grid, |x| amplitude * (wavenumber * x).cos())?
            }
            InitialCondition::TwProfile { c } => solitary_profile(*c, &grid)?.to_field()?,
            InitialCondition::File { path } => {
                let path = base.join(path);
                let (_, u) = read_columns(&path)?;
                if u.len() != grid.n_points() {
                    return Err(CliError::format(
                        &path,
                        format!("{} samples for a grid of {} points", u.len(), grid.n_points()),
                    ));
                }
                Field::new(grid, u)?
            }
        };
        Ok(field)
    }
}

/// Request for a single traveling-wave construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwRequest {
    pub c: f64,
    /// Integration constant; together with `e` selects a periodic or composite level.
    #[serde(default, alias = "A")]
    pub a: Option<f64>,
    /// Level of the first integral.
    #[serde(default, alias = "E")]
    pub e: Option<f64>,
    #[serde(default = "default_tw_points")]
    pub n_points: usize,
    /// Window for solitary waves; defaults to a decay of 1e-8 at the edges.
    #[serde(default)]
    pub length: Option<f64>,
}

fn default_tw_points() -> usize {
    1024
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepCommand {
    Simulate,
    Tw,
}

/// One parameter varied over a list of values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub command: SweepCommand,
    /// A scenario (for `simulate`) or a tw request (for `tw`).
    pub template: Value,
    /// Dotted path into the template, e.g. `initial.amplitude` or `c`.
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Reads a JSON file into a generic value.
pub fn load_value(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::json(path, e))
}

/// Sets `value` at a dotted `path`, creating objects along the way.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        if key.is_empty() {
            return Err(CliError::Config(format!("empty key in path '{path}'")));
        }
        if !node.is_object() {
            if node.is_null() {
                *node = Value::Object(Default::default());
            } else {
                return Err(CliError::Config(format!("'{}' is not an object in path '{path}'", keys[..i].join("."))));
            }
        }
        let map = node.as_object_mut().expect("checked above");
        if i + 1 == keys.len() {
            map.insert((*key).to_string(), value);
            return Ok(());
        }
        node = map.entry((*key).to_string()).or_insert(Value::Null);
    }
    Ok(())
}

/// Applies `key.path=value` overrides; values parse as JSON, else as strings.
pub fn apply_overrides(root: &mut Value, overrides: &[String]) -> Result<()> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override '{item}' is not of the form key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(root, key.trim(), value)?;
    }
    Ok(())
}

pub fn from_value<T: for<'de> Deserialize<'de>>(value: Value, origin: &Path) -> Result<T> {
    serde_json::from_value(value).map_err(|e| CliError::json(origin, e))
}
