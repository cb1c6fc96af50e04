use serde::Serialize;

use super::state::{boundary_center_from_excess, CohortState};
use crate::error::{Error, Result};
use crate::measure::{Atom, DiscreteMeasure};
use crate::model::{fd_step, growth_slope, mortality_slope, BoundaryFormulation, ProblemSpec, VitalRates};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CohortDerivative {
    pub index: i64,
    pub abundance: f64,
    pub center: f64,
}

/// Time derivative of every field of a [`CohortState`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derivative {
    pub boundary_abundance: f64,
    /// `dX_B/dt` (simplified formulation only).
    pub boundary_center: Option<f64>,
    /// `dπ_B/dt` (original formulation only).
    pub boundary_excess: Option<f64>,
    /// `N_B · dX_B/dt`, well defined for both formulations even when `N_B = 0`.
    pub boundary_center_flux: f64,
    /// Total birth flux `Σ β(X_i) N_i` over all cohorts including the boundary.
    pub birth_flux: f64,
    pub internal: Vec<CohortDerivative>,
}

/// Evaluates the EBT right-hand side at `state`.
pub fn rhs(state: &CohortState, problem: &ProblemSpec) -> Result<Derivative> {
    let system = System::new(problem, state);
    let y = state.pack();
    let mut dy = vec![0.0; y.len()];
    let extra = system.eval(state.t, &y, &mut dy)?;
    let (boundary_center, boundary_excess) = match state.formulation {
        BoundaryFormulation::Simplified => (Some(dy[1]), None),
        BoundaryFormulation::Original => (None, Some(dy[1])),
    };
    Ok(Derivative {
        boundary_abundance: dy[0],
        boundary_center,
        boundary_excess,
        boundary_center_flux: extra.boundary_center_flux,
        birth_flux: extra.birth_flux,
        internal: state
            .internal
            .iter()
            .enumerate()
            .map(|(k, c)| CohortDerivative {
                index: c.index,
                abundance: dy[2 + 2 * k],
                center: dy[3 + 2 * k],
            })
            .collect(),
    })
}

pub(crate) struct Extras {
    pub birth_flux: f64,
    pub boundary_center_flux: f64,
}

/// The packed ODE system for a fixed cohort layout.
pub(crate) struct System<'a> {
    rates: &'a dyn VitalRates,
    x_b: f64,
    formulation: BoundaryFormulation,
    fd_h: f64,
}

impl<'a> System<'a> {
    pub fn new(problem: &'a ProblemSpec, state: &CohortState) -> Self {
        System {
            rates: problem.rates.as_ref(),
            x_b: state.x_b,
            formulation: state.formulation,
            fd_h: fd_step(state.x_b),
        }
    }

    fn boundary_center(&self, y: &[f64]) -> f64 {
        match self.formulation {
            BoundaryFormulation::Simplified => y[1],
            BoundaryFormulation::Original => boundary_center_from_excess(y[1], y[0], self.x_b),
        }
    }

    fn environment(&self, y: &[f64]) -> DiscreteMeasure {
        let mut atoms = Vec::with_capacity(y.len() / 2);
        atoms.push(Atom::new(self.boundary_center(y), y[0].max(0.0)));
        atoms.extend(y[2..].chunks_exact(2).map(|c| Atom::new(c[1], c[0].max(0.0))));
        DiscreteMeasure::from_trusted(atoms)
    }

    pub fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<Extras> {
        let env = self.environment(y);
        let checked = |value: f64, what: &str, x: f64| -> Result<f64> {
            if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::Integration {
                    t,
                    reason: format!("{what} at x = {x} evaluated to {value}"),
                })
            }
        };
        let rates = self.rates;

        let x_boundary = self.boundary_center(y);
        let mut births = checked(rates.fecundity(x_boundary, &env), "fecundity", x_boundary)? * y[0];
        for (k, c) in y[2..].chunks_exact(2).enumerate() {
            let (n, x) = (c[0], c[1]);
            births += checked(rates.fecundity(x, &env), "fecundity", x)? * n;
            dy[2 + 2 * k] = -checked(rates.mortality(x, &env), "mortality", x)? * n;
            dy[3 + 2 * k] = checked(rates.growth(x, &env), "growth", x)?;
        }
        let birth_flux = checked(births, "birth flux", x_boundary)?;

        let n_b = y[0];
        let boundary_center_flux = match self.formulation {
            BoundaryFormulation::Simplified => {
                let mu = checked(rates.mortality(x_boundary, &env), "mortality", x_boundary)?;
                dy[0] = -mu * n_b + birth_flux;
                dy[1] = checked(rates.growth(x_boundary, &env), "growth", x_boundary)?;
                n_b * dy[1]
            }
            BoundaryFormulation::Original => {
                let pi = y[1];
                let x_b = self.x_b;
                let mu = checked(rates.mortality(x_b, &env), "mortality", x_b)?;
                let g = checked(rates.growth(x_b, &env), "growth", x_b)?;
                let mu_x = checked(mortality_slope(rates, x_b, &env, self.fd_h), "mortality slope", x_b)?;
                let g_x = checked(growth_slope(rates, x_b, &env, self.fd_h), "growth slope", x_b)?;
                dy[0] = -mu * n_b - mu_x * pi + birth_flux;
                dy[1] = g * n_b + g_x * pi - mu * pi;
                // N_B X_B = π_B + x_b N_B, so N_B X_B' = π_B' − (X_B − x_b) N_B'.
                dy[1] - (x_boundary - x_b) * dy[0]
            }
        };
        Ok(Extras {
            birth_flux,
            boundary_center_flux,
        })
    }
}
