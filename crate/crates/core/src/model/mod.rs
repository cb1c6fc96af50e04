//! Problem definitions: vital rates with environment feedback, initial data,
//! horizon and discretisation parameters, plus a catalog of tractable models.

pub mod catalog;
mod density;
mod rates;
mod validate;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use catalog::{CatalogModel, Setup};
pub use density::{Density, DensityFamily, InitialData, DENSITY_QUADRATURE_TOL};
pub use rates::{
    fd_step, growth_slope, mortality_slope, ConstantCoefficients, CustomRates, FeedbackLipschitz, Rate, RateBounds,
    VitalRates,
};
pub use validate::{random_probes, validate_rates, SampleGrid, ValidationReport, Violation, ViolationKind};

use crate::error::{Error, Result};

/// Dynamics used for the boundary cohort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryFormulation {
    /// Same dynamics as internal cohorts plus the inflow of newborns.
    #[default]
    Simplified,
    /// Tracks the accumulated size excess `π_B` of the boundary cohort.
    Original,
}

impl fmt::Display for BoundaryFormulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryFormulation::Simplified => "simplified",
            BoundaryFormulation::Original => "original",
        })
    }
}

/// When the boundary cohort is internalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// `t_i = i·T/n` for `i = 1, …, n − 1`.
    #[default]
    Uniform,
}

impl Schedule {
    /// Interval end points `t_0 = 0, t_1, …, t_n = T`.
    pub fn breakpoints(self, horizon: f64, n: usize) -> Vec<f64> {
        match self {
            Schedule::Uniform => (0..=n)
                .map(|i| if i == n { horizon } else { i as f64 * horizon / n as f64 })
                .collect(),
        }
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub model_name: String,
    pub x_b: f64,
    pub horizon: f64,
    pub rates: Arc<dyn VitalRates>,
    pub initial: InitialData,
    pub formulation: BoundaryFormulation,
    pub schedule: Schedule,
    /// Number of internalization intervals `n`.
    pub internalizations: usize,
    /// Number of initial cohorts `N`.
    pub initial_cohorts: usize,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("model_name", &self.model_name)
            .field("x_b", &self.x_b)
            .field("horizon", &self.horizon)
            .field("initial", &self.initial)
            .field("formulation", &self.formulation)
            .field("internalizations", &self.internalizations)
            .field("initial_cohorts", &self.initial_cohorts)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.x_b.is_finite() {
            return Err(Error::InvalidProblem("birth size must be finite".into()));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "horizon T must be positive and finite, got {}",
                self.horizon
            )));
        }
        if self.internalizations < 1 {
            return Err(Error::InvalidProblem(
                "need at least one internalization interval (n ≥ 1)".into(),
            ));
        }
        if self.initial_cohorts < 1 {
            return Err(Error::InvalidProblem("need at least one initial cohort (N ≥ 1)".into()));
        }
        match &self.initial {
            InitialData::Atomic(m) => m.check_support(self.x_b)?,
            InitialData::Density(d) => {
                let (lo, _) = d.support();
                if lo < self.x_b {
                    return Err(Error::InvalidProblem(format!(
                        "initial density support starts at {lo}, below the birth size {}",
                        self.x_b
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn with_formulation(&self, formulation: BoundaryFormulation) -> Self {
        ProblemSpec {
            formulation,
            ..self.clone()
        }
    }

    pub fn with_grid(&self, initial_cohorts: usize, internalizations: usize) -> Self {
        ProblemSpec {
            initial_cohorts,
            internalizations,
            ..self.clone()
        }
    }

    /// `0 = t_0 < t_1 < … < t_n = T`.
    pub fn interval_breakpoints(&self) -> Vec<f64> {
        self.schedule.breakpoints(self.horizon, self.internalizations)
    }

    /// Upper bound on the total population over `[0, T]`, `P(0)·exp(β_sup·T)`, when bounds are declared.
    pub fn reachable_mass(&self) -> Option<f64> {
        let bounds = self.rates.declared_bounds()?;
        Some(self.initial.total_mass() * (bounds.fecundity * self.horizon).exp())
    }

    /// Rightmost state any individual can reach by time T, when growth is bounded.
    pub fn reachable_extent(&self) -> Option<f64> {
        let bounds = self.rates.declared_bounds()?;
        let hi = self.initial.support().map_or(self.x_b, |(_, hi)| hi).max(self.x_b);
        Some(hi + bounds.growth * self.horizon)
    }
}
