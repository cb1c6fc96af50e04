use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::tables::read_measure_csv;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::model::{catalog, BoundaryFormulation, DensityFamily, InitialData, ProblemSpec, Setup};
use crate::solver::RunOptions;
use crate::verify::StudyConfig;

/// A problem and its discretization, as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Catalog model name.
    pub model: String,
    /// Model parameters by name.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Birth size.
    pub x_b: f64,
    /// Horizon.
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Number of initial cohorts.
    #[serde(rename = "N")]
    pub initial_cohorts: usize,
    /// Number of internalization intervals.
    #[serde(rename = "n")]
    pub internalizations: usize,
    pub boundary_formulation: BoundaryFormulation,
    /// Requested RK4 step.
    pub step_size: f64,
    /// Initial population; uniform with mass 1 on `[x_b, x_b + 1]` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub prune_epsilon: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudySection>,
}

fn default_stride() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_factor() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Uniform {
        lower: f64,
        upper: f64,
        mass: f64,
    },
    Triangular {
        lower: f64,
        mode: f64,
        upper: f64,
        mass: f64,
    },
    TruncatedExponential {
        lower: f64,
        upper: f64,
        rate: f64,
        mass: f64,
    },
    /// Explicit `[location, mass]` pairs.
    Atoms {
        atoms: Vec<[f64; 2]>,
    },
    /// A `location,mass` CSV file, relative to the config file.
    Csv {
        path: PathBuf,
    },
}

/// Grid for the `converge` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    #[serde(rename = "N")]
    pub cohorts: Vec<usize>,
    #[serde(rename = "n")]
    pub intervals: Vec<usize>,
    /// Step for the study runs; the top-level step when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<f64>,
    #[serde(default = "default_true")]
    pub self_reference: bool,
    #[serde(default = "default_factor")]
    pub reference_factor: usize,
    /// Slope ranges checked by `converge --assert`.
    #[serde(default)]
    pub expect: Vec<SlopeExpectation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    FlatError,
    FunctionalError,
    ResidualNorm,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::FlatError => "flat_error",
            Metric::FunctionalError => "functional_error",
            Metric::ResidualNorm => "residual_norm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum SlopeAxis {
    #[serde(rename = "N")]
    Cohorts,
    #[serde(rename = "n")]
    Intervals,
}

impl SlopeAxis {
    pub fn name(self) -> &'static str {
        match self {
            SlopeAxis::Cohorts => "N",
            SlopeAxis::Intervals => "n",
        }
    }
}

/// `|fitted slope − slope| ≤ tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SlopeExpectation {
    pub metric: Metric,
    pub axis: SlopeAxis,
    pub slope: f64,
    pub tolerance: f64,
}

/// Keys accepted by [`ProblemConfig::apply_override`].
pub const OVERRIDE_KEYS: [&str; 6] = [
    "N",
    "n",
    "h",
    "boundary_formulation",
    "prune_epsilon",
    "snapshot_stride",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, expected: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("override `{key}`: expected {expected}, got `{value}`")))
}

impl ProblemConfig {
    /// Applies a `key=value` override. Values are type-checked; the result is re-validated by [`Self::validate`].
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "N" => self.initial_cohorts = parse_value(key, value, "a non-negative integer")?,
            "n" => self.internalizations = parse_value(key, value, "a non-negative integer")?,
            "h" => self.step_size = parse_value(key, value, "a number")?,
            "prune_epsilon" => self.prune_epsilon = parse_value(key, value, "a number")?,
            "snapshot_stride" => self.snapshot_stride = parse_value(key, value, "a non-negative integer")?,
            "boundary_formulation" => {
                self.boundary_formulation = match value.trim() {
                    "simplified" => BoundaryFormulation::Simplified,
                    "original" => BoundaryFormulation::Original,
                    other => {
                        return Err(Error::Config(format!(
                            "override `boundary_formulation`: expected `simplified` or `original`, got `{other}`"
                        )))
                    }
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown override key `{other}`; expected one of {}",
                    OVERRIDE_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Checks the discretization fields. Model parameters and initial data are
    /// checked when the problem is built.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("`{name}` must be positive and finite, got {v}")))
            }
        };
        positive("T", self.horizon)?;
        positive("step_size", self.step_size)?;
        if !self.x_b.is_finite() {
            return Err(Error::Config(format!("`x_b` must be finite, got {}", self.x_b)));
        }
        if self.initial_cohorts < 1 {
            return Err(Error::Config("`N` must be at least 1".into()));
        }
        if self.internalizations < 1 {
            return Err(Error::Config("`n` must be at least 1".into()));
        }
        if !(self.prune_epsilon.is_finite() && self.prune_epsilon >= 0.0) {
            return Err(Error::Config(format!(
                "`prune_epsilon` must be finite and non-negative, got {}",
                self.prune_epsilon
            )));
        }
        if self.snapshot_stride < 1 {
            return Err(Error::Config("`snapshot_stride` must be at least 1".into()));
        }
        if let Some(study) = &self.study {
            for (name, grid) in [("study.N", &study.cohorts), ("study.n", &study.intervals)] {
                if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config(format!(
                        "`{name}` must be a non-empty, strictly increasing list of positive integers"
                    )));
                }
            }
            if let Some(h) = study.step_size {
                positive("study.step_size", h)?;
            }
            if study.reference_factor < 2 {
                return Err(Error::Config("`study.reference_factor` must be at least 2".into()));
            }
            for e in &study.expect {
                if !(e.slope.is_finite() && e.tolerance.is_finite() && e.tolerance >= 0.0) {
                    return Err(Error::Config(
                        "slope expectations need finite slope and tolerance ≥ 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn initial_data(&self, base_dir: &Path) -> Result<InitialData> {
        let density = |d: DensityFamily| -> Result<InitialData> {
            d.validate()?;
            Ok(d.into())
        };
        match &self.initial {
            None => density(DensityFamily::Uniform {
                lower: self.x_b,
                upper: self.x_b + 1.0,
                mass: 1.0,
            }),
            Some(InitialConfig::Uniform { lower, upper, mass }) => density(DensityFamily::Uniform {
                lower: *lower,
                upper: *upper,
                mass: *mass,
            }),
            Some(InitialConfig::Triangular {
                lower,
                mode,
                upper,
                mass,
            }) => density(DensityFamily::Triangular {
                lower: *lower,
                mode: *mode,
                upper: *upper,
                mass: *mass,
            }),
            Some(InitialConfig::TruncatedExponential {
                lower,
                upper,
                rate,
                mass,
            }) => density(DensityFamily::TruncatedExponential {
                lower: *lower,
                upper: *upper,
                rate: *rate,
                mass: *mass,
            }),
            Some(InitialConfig::Atoms { atoms }) => {
                let pairs: Vec<(f64, f64)> = atoms.iter().map(|[x, m]| (*x, *m)).collect();
                Ok(DiscreteMeasure::from_pairs(&pairs)?.into())
            }
            Some(InitialConfig::Csv { path }) => Ok(read_measure_csv(&base_dir.join(path))?.into()),
        }
    }

    /// Builds the problem. Relative paths in the config resolve against `base_dir`.
    pub fn to_problem(&self, base_dir: &Path) -> Result<ProblemSpec> {
        self.validate()?;
        let problem = catalog::build(
            &self.model,
            &self.params,
            Setup {
                x_b: self.x_b,
                horizon: self.horizon,
                initial: self.initial_data(base_dir)?,
                formulation: self.boundary_formulation,
                internalizations: self.internalizations,
                initial_cohorts: self.initial_cohorts,
            },
        )?;
        problem.validate()?;
        Ok(problem)
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions::new(self.step_size)
            .with_prune_epsilon(self.prune_epsilon)
            .with_snapshot_stride(self.snapshot_stride)
    }

    /// Study grid from the `study` section.
    pub fn study_config(&self) -> Result<StudyConfig> {
        let study = self
            .study
            .as_ref()
            .ok_or_else(|| Error::Config("`converge` needs a `study` section".into()))?;
        let mut config = StudyConfig::new(
            study.cohorts.clone(),
            study.intervals.clone(),
            study.step_size.unwrap_or(self.step_size),
        );
        config.prune_epsilon = self.prune_epsilon;
        config.self_reference = study.self_reference;
        config.reference_factor = study.reference_factor;
        Ok(config)
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    let config: ProblemConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn read_config(path: &Path) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// JSON schema of [`ProblemConfig`], pretty-printed with a trailing newline.
pub fn config_schema() -> String {
    super::to_json(&schemars::schema_for!(ProblemConfig))
}
