//! Built-in models with closed-form rates, analytic derivatives and declared bounds.
//!
//! | name                | growth | mortality          | fecundity                         |
//! |---------------------|--------|--------------------|-----------------------------------|
//! | `pure_decay`        | 0      | `mu0`              | 0                                 |
//! | `pure_transport`    | `g0`   | 0                  | 0                                 |
//! | `constant_rates`    | `g0`   | `mu0`              | `beta0`                           |
//! | `ramp_fecundity`    | `g0`   | `mu0`              | `beta_max·(1 + tanh((x − x_mat)/ramp_width))/2` |
//! | `logistic_feedback` | `g0`   | `mu0 + mu1·P(ζ)`   | `beta0`                           |
//!
//! `P(ζ)` is the total mass of the environment measure.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{
    BoundaryFormulation, ConstantCoefficients, FeedbackLipschitz, InitialData, ProblemSpec, RateBounds, Schedule,
    VitalRates,
};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

pub const MODEL_NAMES: [&str; 5] = [
    "pure_decay",
    "pure_transport",
    "constant_rates",
    "ramp_fecundity",
    "logistic_feedback",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogModel {
    PureDecay {
        mu0: f64,
    },
    PureTransport {
        g0: f64,
    },
    ConstantRates {
        g0: f64,
        mu0: f64,
        beta0: f64,
    },
    RampFecundity {
        g0: f64,
        mu0: f64,
        beta_max: f64,
        x_mat: f64,
        ramp_width: f64,
    },
    LogisticFeedback {
        g0: f64,
        mu0: f64,
        mu1: f64,
        beta0: f64,
        /// Largest population the model can reach over the horizon; bounds the mortality.
        mass_cap: f64,
    },
}

/// Everything a problem needs besides the model rates.
#[derive(Debug, Clone)]
pub struct Setup {
    pub x_b: f64,
    pub horizon: f64,
    pub initial: InitialData,
    pub formulation: BoundaryFormulation,
    pub internalizations: usize,
    pub initial_cohorts: usize,
}

fn required_params(name: &str) -> Option<&'static [&'static str]> {
    Some(match name {
        "pure_decay" => &["mu0"],
        "pure_transport" => &["g0"],
        "constant_rates" => &["g0", "mu0", "beta0"],
        "ramp_fecundity" => &["g0", "mu0", "beta_max", "x_mat", "ramp_width"],
        "logistic_feedback" => &["g0", "mu0", "mu1", "beta0"],
        _ => return None,
    })
}

impl CatalogModel {
    /// Parses a model from its catalog name and parameter map. `mass_cap` is only
    /// used by `logistic_feedback`.
    pub fn from_params(name: &str, params: &BTreeMap<String, f64>, mass_cap: f64) -> Result<Self> {
        let required = required_params(name).ok_or_else(|| Error::UnknownModel(name.to_string()))?;
        if let Some(extra) = params.keys().find(|k| !required.contains(&k.as_str())) {
            return Err(Error::param(extra, format!("not a parameter of `{name}`")));
        }
        let get = |key: &str| -> Result<f64> {
            let v = *params
                .get(key)
                .ok_or_else(|| Error::param(key, format!("missing (required by `{name}`)")))?;
            if !v.is_finite() {
                return Err(Error::param(key, "must be finite"));
            }
            Ok(v)
        };
        let nonneg = |key: &str| -> Result<f64> {
            let v = get(key)?;
            if v < 0.0 {
                return Err(Error::param(key, format!("must be non-negative, got {v}")));
            }
            Ok(v)
        };
        Ok(match name {
            "pure_decay" => CatalogModel::PureDecay { mu0: nonneg("mu0")? },
            "pure_transport" => CatalogModel::PureTransport { g0: nonneg("g0")? },
            "constant_rates" => CatalogModel::ConstantRates {
                g0: nonneg("g0")?,
                mu0: nonneg("mu0")?,
                beta0: nonneg("beta0")?,
            },
            "ramp_fecundity" => {
                let ramp_width = get("ramp_width")?;
                if ramp_width <= 0.0 {
                    return Err(Error::param("ramp_width", "must be positive"));
                }
                CatalogModel::RampFecundity {
                    g0: nonneg("g0")?,
                    mu0: nonneg("mu0")?,
                    beta_max: nonneg("beta_max")?,
                    x_mat: get("x_mat")?,
                    ramp_width,
                }
            }
            "logistic_feedback" => CatalogModel::LogisticFeedback {
                g0: nonneg("g0")?,
                mu0: nonneg("mu0")?,
                mu1: nonneg("mu1")?,
                beta0: nonneg("beta0")?,
                mass_cap: mass_cap.max(0.0),
            },
            _ => unreachable!("checked above"),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CatalogModel::PureDecay { .. } => "pure_decay",
            CatalogModel::PureTransport { .. } => "pure_transport",
            CatalogModel::ConstantRates { .. } => "constant_rates",
            CatalogModel::RampFecundity { .. } => "ramp_fecundity",
            CatalogModel::LogisticFeedback { .. } => "logistic_feedback",
        }
    }

    fn growth_constant(&self) -> f64 {
        match *self {
            CatalogModel::PureDecay { .. } => 0.0,
            CatalogModel::PureTransport { g0 }
            | CatalogModel::ConstantRates { g0, .. }
            | CatalogModel::RampFecundity { g0, .. }
            | CatalogModel::LogisticFeedback { g0, .. } => g0,
        }
    }

    fn fecundity_sup(&self) -> f64 {
        match *self {
            CatalogModel::PureDecay { .. } | CatalogModel::PureTransport { .. } => 0.0,
            CatalogModel::ConstantRates { beta0, .. } | CatalogModel::LogisticFeedback { beta0, .. } => beta0,
            CatalogModel::RampFecundity { beta_max, .. } => beta_max,
        }
    }
}

impl VitalRates for CatalogModel {
    fn growth(&self, _x: f64, _env: &DiscreteMeasure) -> f64 {
        self.growth_constant()
    }

    fn mortality(&self, _x: f64, env: &DiscreteMeasure) -> f64 {
        match *self {
            CatalogModel::PureDecay { mu0 }
            | CatalogModel::ConstantRates { mu0, .. }
            | CatalogModel::RampFecundity { mu0, .. } => mu0,
            CatalogModel::PureTransport { .. } => 0.0,
            CatalogModel::LogisticFeedback { mu0, mu1, .. } => mu0 + mu1 * env.total_mass(),
        }
    }

    fn fecundity(&self, x: f64, _env: &DiscreteMeasure) -> f64 {
        match *self {
            CatalogModel::RampFecundity {
                beta_max,
                x_mat,
                ramp_width,
                ..
            } => 0.5 * beta_max * (1.0 + ((x - x_mat) / ramp_width).tanh()),
            _ => self.fecundity_sup(),
        }
    }

    fn growth_dx(&self, _x: f64, _env: &DiscreteMeasure) -> Option<f64> {
        Some(0.0)
    }

    fn mortality_dx(&self, _x: f64, _env: &DiscreteMeasure) -> Option<f64> {
        Some(0.0)
    }

    fn declared_bounds(&self) -> Option<RateBounds> {
        let mortality = match *self {
            CatalogModel::PureDecay { mu0 }
            | CatalogModel::ConstantRates { mu0, .. }
            | CatalogModel::RampFecundity { mu0, .. } => mu0,
            CatalogModel::PureTransport { .. } => 0.0,
            CatalogModel::LogisticFeedback { mu0, mu1, mass_cap, .. } => mu0 + mu1 * mass_cap,
        };
        Some(RateBounds {
            growth: self.growth_constant(),
            mortality,
            fecundity: self.fecundity_sup(),
        })
    }

    fn declared_lipschitz(&self) -> Option<FeedbackLipschitz> {
        let mortality = match *self {
            CatalogModel::LogisticFeedback { mu1, .. } => mu1,
            _ => 0.0,
        };
        Some(FeedbackLipschitz {
            growth: 0.0,
            mortality,
            fecundity: 0.0,
        })
    }

    fn constant_coefficients(&self) -> Option<ConstantCoefficients> {
        match *self {
            CatalogModel::PureDecay { mu0 } => Some(ConstantCoefficients {
                growth: 0.0,
                mortality: mu0,
                fecundity: 0.0,
            }),
            CatalogModel::PureTransport { g0 } => Some(ConstantCoefficients {
                growth: g0,
                mortality: 0.0,
                fecundity: 0.0,
            }),
            CatalogModel::ConstantRates { g0, mu0, beta0 } => Some(ConstantCoefficients {
                growth: g0,
                mortality: mu0,
                fecundity: beta0,
            }),
            CatalogModel::RampFecundity { .. } | CatalogModel::LogisticFeedback { .. } => None,
        }
    }
}

/// Builds a fully populated problem from a catalog model name and parameters.
pub fn build(name: &str, params: &BTreeMap<String, f64>, setup: Setup) -> Result<ProblemSpec> {
    let beta_hint = params.get("beta0").copied().unwrap_or(0.0).max(0.0);
    let mass_cap = setup.initial.total_mass() * (beta_hint * setup.horizon).exp();
    let model = CatalogModel::from_params(name, params, mass_cap)?;
    let spec = ProblemSpec {
        model_name: model.name().to_string(),
        x_b: setup.x_b,
        horizon: setup.horizon,
        rates: Arc::new(model),
        initial: setup.initial,
        formulation: setup.formulation,
        schedule: Schedule::Uniform,
        internalizations: setup.internalizations,
        initial_cohorts: setup.initial_cohorts,
    };
    spec.validate()?;
    Ok(spec)
}
