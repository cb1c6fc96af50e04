//! Density-type initial data.
//!
//! The solver's initializer splits a density into equal-mass quantile cells, so
//! each density provides its quantile function and partial first moments.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::quadrature::adaptive_simpson_split;

pub trait Density: Send + Sync {
    /// Closed support interval `[lo, hi]`.
    fn support(&self) -> (f64, f64);
    fn total_mass(&self) -> f64;
    /// Density value including the total-mass factor.
    fn pdf(&self, x: f64) -> f64;
    /// Inverse of the normalised distribution function, `p ∈ [0, 1]`.
    fn quantile(&self, p: f64) -> f64;
    /// `∫_lo^hi x u(x) dx`.
    fn first_moment(&self, lo: f64, hi: f64) -> f64;
}

/// The density families accepted in problem configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityFamily {
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
    /// `u(x) ∝ exp(−rate·(x − lower))` on `[lower, upper]`.
    TruncatedExponential {
        lower: f64,
        upper: f64,
        rate: f64,
        mass: f64,
    },
}

impl DensityFamily {
    pub fn validate(&self) -> Result<()> {
        let (lower, upper, mass) = match *self {
            DensityFamily::Uniform { lower, upper, mass } => (lower, upper, mass),
            DensityFamily::Triangular {
                lower,
                mode,
                upper,
                mass,
            } => {
                if !(mode >= lower && mode <= upper) {
                    return Err(Error::param("mode", "must lie within [lower, upper]"));
                }
                (lower, upper, mass)
            }
            DensityFamily::TruncatedExponential {
                lower,
                upper,
                rate,
                mass,
            } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(Error::param("rate", "must be finite and positive"));
                }
                (lower, upper, mass)
            }
        };
        if !(lower.is_finite() && upper.is_finite() && upper > lower) {
            return Err(Error::param(
                "upper",
                "support must be a finite interval with upper > lower",
            ));
        }
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::param("mass", "must be finite and non-negative"));
        }
        Ok(())
    }

    fn exp_norm(lower: f64, upper: f64, rate: f64) -> f64 {
        -(-rate * (upper - lower)).exp_m1()
    }

    /// Antiderivative of `x·u(x)` from the lower support end, without the mass factor.
    fn unit_moment(&self, x: f64) -> f64 {
        match *self {
            DensityFamily::Uniform { lower, upper, .. } => {
                let x = x.clamp(lower, upper);
                (x * x - lower * lower) / (2.0 * (upper - lower))
            }
            DensityFamily::Triangular { lower, mode, upper, .. } => {
                let x = x.clamp(lower, upper);
                let span = upper - lower;
                let left = |x: f64| {
                    if mode > lower {
                        2.0 / (span * (mode - lower))
                            * ((x * x * x - lower * lower * lower) / 3.0 - lower * (x * x - lower * lower) / 2.0)
                    } else {
                        0.0
                    }
                };
                if x <= mode {
                    left(x)
                } else {
                    left(mode)
                        + 2.0 / (span * (upper - mode))
                            * (upper * (x * x - mode * mode) / 2.0 - (x * x * x - mode * mode * mode) / 3.0)
                }
            }
            DensityFamily::TruncatedExponential { lower, upper, rate, .. } => {
                let x = x.clamp(lower, upper);
                let e = (-rate * (x - lower)).exp();
                (lower - x * e + (1.0 - e) / rate) / Self::exp_norm(lower, upper, rate)
            }
        }
    }
}

impl Density for DensityFamily {
    fn support(&self) -> (f64, f64) {
        match *self {
            DensityFamily::Uniform { lower, upper, .. }
            | DensityFamily::Triangular { lower, upper, .. }
            | DensityFamily::TruncatedExponential { lower, upper, .. } => (lower, upper),
        }
    }

    fn total_mass(&self) -> f64 {
        match *self {
            DensityFamily::Uniform { mass, .. }
            | DensityFamily::Triangular { mass, .. }
            | DensityFamily::TruncatedExponential { mass, .. } => mass,
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        let unit = match *self {
            DensityFamily::Uniform { lower, upper, .. } => 1.0 / (upper - lower),
            DensityFamily::Triangular { lower, mode, upper, .. } => {
                let span = upper - lower;
                if x < mode {
                    2.0 * (x - lower) / (span * (mode - lower))
                } else if x > mode {
                    2.0 * (upper - x) / (span * (upper - mode))
                } else {
                    2.0 / span
                }
            }
            DensityFamily::TruncatedExponential { lower, upper, rate, .. } => {
                rate * (-rate * (x - lower)).exp() / Self::exp_norm(lower, upper, rate)
            }
        };
        self.total_mass() * unit
    }

    fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match *self {
            DensityFamily::Uniform { lower, upper, .. } => lower + p * (upper - lower),
            DensityFamily::Triangular { lower, mode, upper, .. } => {
                let span = upper - lower;
                let at_mode = (mode - lower) / span;
                if p <= at_mode {
                    lower + (p * span * (mode - lower)).sqrt()
                } else {
                    upper - ((1.0 - p) * span * (upper - mode)).sqrt()
                }
            }
            DensityFamily::TruncatedExponential { lower, upper, rate, .. } => {
                let z = Self::exp_norm(lower, upper, rate);
                (lower - (-p * z).ln_1p() / rate).min(upper)
            }
        }
    }

    fn first_moment(&self, lo: f64, hi: f64) -> f64 {
        self.total_mass() * (self.unit_moment(hi) - self.unit_moment(lo))
    }
}

/// Initial population: an explicit atomic measure or a density.
#[derive(Clone)]
pub enum InitialData {
    Atomic(DiscreteMeasure),
    Density(Arc<dyn Density>),
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialData::Atomic(m) => f.debug_tuple("Atomic").field(m).finish(),
            InitialData::Density(d) => f
                .debug_struct("Density")
                .field("support", &d.support())
                .field("mass", &d.total_mass())
                .finish(),
        }
    }
}

impl From<DiscreteMeasure> for InitialData {
    fn from(m: DiscreteMeasure) -> Self {
        InitialData::Atomic(m)
    }
}

impl From<DensityFamily> for InitialData {
    fn from(d: DensityFamily) -> Self {
        InitialData::Density(Arc::new(d))
    }
}

/// Absolute tolerance for integrating test functions against densities.
pub const DENSITY_QUADRATURE_TOL: f64 = 1e-12;

impl InitialData {
    pub fn total_mass(&self) -> f64 {
        match self {
            InitialData::Atomic(m) => m.total_mass(),
            InitialData::Density(d) => d.total_mass(),
        }
    }

    /// Smallest interval containing the support, or `None` for a zero measure.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            InitialData::Atomic(m) => Some((m.min_location()?, m.max_location()?)),
            InitialData::Density(d) => Some(d.support()),
        }
    }

    /// `∫ f dν`. Densities are integrated with adaptive quadrature, split at `breakpoints`.
    pub fn integrate(&self, f: &dyn Fn(f64) -> f64, breakpoints: &[f64]) -> Result<f64> {
        match self {
            InitialData::Atomic(m) => m.integrate(f),
            InitialData::Density(d) => {
                let (lo, hi) = d.support();
                let value = adaptive_simpson_split(&|x| f(x) * d.pdf(x), lo, hi, breakpoints, DENSITY_QUADRATURE_TOL);
                if value.is_finite() {
                    Ok(value)
                } else {
                    Err(Error::NonFinite {
                        what: "density integral".into(),
                        location: lo,
                        value,
                    })
                }
            }
        }
    }
}
