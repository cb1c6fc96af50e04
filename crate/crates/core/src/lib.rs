//! Escalator Boxcar Train (EBT) solver for one-dimensional physiologically
//! structured population models, together with the tooling used to check it:
//! the flat metric on atomic measures, weak-form residuals evaluated two
//! independent ways, reference oracles and convergence studies.
//!
//! Module map:
//!
//! - [`measure`]: atomic measures, integration, the flat distance
//! - [`model`]: vital rates, initial data, the model catalog, rate validation
//! - [`solver`]: cohort state, right-hand side, internalization, RK4 runs
//! - [`residual`]: space-time test functions and the weak residual
//! - [`verify`]: oracles, error measures, bound checks, convergence studies
//! - [`io`]: configuration files and CSV/JSON artifacts

pub mod error;
pub mod io;
pub mod measure;
pub mod model;
pub mod quadrature;
pub mod residual;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{flat_distance, Atom, DiscreteMeasure};
pub use model::{BoundaryFormulation, ProblemSpec};
pub use solver::{run, RunOptions, Trajectory};
