//! The EBT scheme: cohort state, right-hand side for both boundary
//! formulations, internalization and pruning, initial discretization, and
//! fixed-step RK4 integration into a [`Trajectory`].

mod rhs;
mod run;
mod state;

pub use rhs::{rhs, CohortDerivative, Derivative};
pub use run::{run, steps_per_interval, RunOptions, Snapshot, Trajectory};
pub use state::{
    boundary_center_from_excess, init_cohorts, BoundaryCohort, Cohort, CohortState, PruneReport, NEGATIVE_TOLERANCE,
};
