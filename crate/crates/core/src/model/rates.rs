use std::fmt;

use serde::{Deserialize, Serialize};

use crate::measure::DiscreteMeasure;

/// Which vital rate a value or violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rate {
    Growth,
    Mortality,
    Fecundity,
}

impl Rate {
    pub const ALL: [Rate; 3] = [Rate::Growth, Rate::Mortality, Rate::Fecundity];

    pub fn name(self) -> &'static str {
        match self {
            Rate::Growth => "growth",
            Rate::Mortality => "mortality",
            Rate::Fecundity => "fecundity",
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Global suprema of the rates over the reachable states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBounds {
    pub growth: f64,
    pub mortality: f64,
    pub fecundity: f64,
}

impl RateBounds {
    pub fn get(&self, rate: Rate) -> f64 {
        match rate {
            Rate::Growth => self.growth,
            Rate::Mortality => self.mortality,
            Rate::Fecundity => self.fecundity,
        }
    }
}

/// Lipschitz constants of the rates with respect to the environment measure,
/// measured in the flat metric: `sup_x |f(x, σ) − f(x, λ)| ≤ C_f · ρ(σ, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackLipschitz {
    pub growth: f64,
    pub mortality: f64,
    pub fecundity: f64,
}

impl FeedbackLipschitz {
    pub fn get(&self, rate: Rate) -> f64 {
        match rate {
            Rate::Growth => self.growth,
            Rate::Mortality => self.mortality,
            Rate::Fecundity => self.fecundity,
        }
    }
}

/// State- and feedback-independent coefficients, for models the reference oracle can solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCoefficients {
    pub growth: f64,
    pub mortality: f64,
    pub fecundity: f64,
}

/// Individual growth, mortality and fecundity as functions of the individual
/// state `x` and the current population measure (the environment feedback).
///
/// Implementations must be pure. Rates are expected to be finite and
/// non-negative for `x ≥ x_b`; [`validate_rates`](super::validate_rates) checks
/// this at sample points.
pub trait VitalRates: Send + Sync {
    fn growth(&self, x: f64, env: &DiscreteMeasure) -> f64;
    fn mortality(&self, x: f64, env: &DiscreteMeasure) -> f64;
    fn fecundity(&self, x: f64, env: &DiscreteMeasure) -> f64;

    /// `∂g/∂x`, if known analytically.
    fn growth_dx(&self, _x: f64, _env: &DiscreteMeasure) -> Option<f64> {
        None
    }

    /// `∂μ/∂x`, if known analytically.
    fn mortality_dx(&self, _x: f64, _env: &DiscreteMeasure) -> Option<f64> {
        None
    }

    fn declared_bounds(&self) -> Option<RateBounds> {
        None
    }

    fn declared_lipschitz(&self) -> Option<FeedbackLipschitz> {
        None
    }

    fn constant_coefficients(&self) -> Option<ConstantCoefficients> {
        None
    }

    fn rate(&self, rate: Rate, x: f64, env: &DiscreteMeasure) -> f64 {
        match rate {
            Rate::Growth => self.growth(x, env),
            Rate::Mortality => self.mortality(x, env),
            Rate::Fecundity => self.fecundity(x, env),
        }
    }
}

/// Step used for central differences when a model provides no analytic derivative.
pub fn fd_step(x_b: f64) -> f64 {
    1e-6 * x_b.abs().max(1.0)
}

/// `∂g/∂x` at `x`, falling back to a central difference.
pub fn growth_slope(rates: &dyn VitalRates, x: f64, env: &DiscreteMeasure, h: f64) -> f64 {
    rates
        .growth_dx(x, env)
        .unwrap_or_else(|| (rates.growth(x + h, env) - rates.growth(x - h, env)) / (2.0 * h))
}

/// `∂μ/∂x` at `x`, falling back to a central difference.
pub fn mortality_slope(rates: &dyn VitalRates, x: f64, env: &DiscreteMeasure, h: f64) -> f64 {
    rates
        .mortality_dx(x, env)
        .unwrap_or_else(|| (rates.mortality(x + h, env) - rates.mortality(x - h, env)) / (2.0 * h))
}

type RateFn = Box<dyn Fn(f64, &DiscreteMeasure) -> f64 + Send + Sync>;

/// Rates assembled from closures, for models outside the built-in catalog.
pub struct CustomRates {
    growth: RateFn,
    mortality: RateFn,
    fecundity: RateFn,
    growth_dx: Option<RateFn>,
    mortality_dx: Option<RateFn>,
    bounds: Option<RateBounds>,
    lipschitz: Option<FeedbackLipschitz>,
}

impl CustomRates {
    pub fn new(
        growth: impl Fn(f64, &DiscreteMeasure) -> f64 + Send + Sync + 'static,
        mortality: impl Fn(f64, &DiscreteMeasure) -> f64 + Send + Sync + 'static,
        fecundity: impl Fn(f64, &DiscreteMeasure) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomRates {
            growth: Box::new(growth),
            mortality: Box::new(mortality),
            fecundity: Box::new(fecundity),
            growth_dx: None,
            mortality_dx: None,
            bounds: None,
            lipschitz: None,
        }
    }

    pub fn with_growth_dx(mut self, f: impl Fn(f64, &DiscreteMeasure) -> f64 + Send + Sync + 'static) -> Self {
        self.growth_dx = Some(Box::new(f));
        self
    }

    pub fn with_mortality_dx(mut self, f: impl Fn(f64, &DiscreteMeasure) -> f64 + Send + Sync + 'static) -> Self {
        self.mortality_dx = Some(Box::new(f));
        self
    }

    pub fn with_bounds(mut self, bounds: RateBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn with_lipschitz(mut self, lipschitz: FeedbackLipschitz) -> Self {
        self.lipschitz = Some(lipschitz);
        self
    }
}

impl VitalRates for CustomRates {
    fn growth(&self, x: f64, env: &DiscreteMeasure) -> f64 {
        (self.growth)(x, env)
    }

    fn mortality(&self, x: f64, env: &DiscreteMeasure) -> f64 {
        (self.mortality)(x, env)
    }

    fn fecundity(&self, x: f64, env: &DiscreteMeasure) -> f64 {
        (self.fecundity)(x, env)
    }

    fn growth_dx(&self, x: f64, env: &DiscreteMeasure) -> Option<f64> {
        self.growth_dx.as_ref().map(|f| f(x, env))
    }

    fn mortality_dx(&self, x: f64, env: &DiscreteMeasure) -> Option<f64> {
        self.mortality_dx.as_ref().map(|f| f(x, env))
    }

    fn declared_bounds(&self) -> Option<RateBounds> {
        self.bounds
    }

    fn declared_lipschitz(&self) -> Option<FeedbackLipschitz> {
        self.lipschitz
    }
}
