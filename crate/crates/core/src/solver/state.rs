use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{Atom, DiscreteMeasure};
use crate::model::{BoundaryFormulation, InitialData};

/// An internal cohort: `abundance` individuals with mean state `center`.
///
/// `index` is a stable identifier. Initial cohorts are numbered `1..=N`; each
/// internalization retires the boundary index and opens the next lower one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cohort {
    pub index: i64,
    pub abundance: f64,
    pub center: f64,
}

/// The boundary cohort collecting newborns at the birth size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryCohort {
    pub index: i64,
    pub abundance: f64,
    /// Reported center `X_B`. Under the original formulation this is derived from
    /// `excess` and `abundance` and kept in sync by the solver.
    pub center: f64,
    /// Accumulated size excess `π_B` (original formulation only, otherwise 0).
    pub excess: f64,
}

/// EBT unknowns at one instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortState {
    pub t: f64,
    pub x_b: f64,
    pub formulation: BoundaryFormulation,
    pub boundary: BoundaryCohort,
    pub internal: Vec<Cohort>,
}

/// `X_B = π_B / N_B + x_b` when `π_B > 0`, otherwise `x_b`.
pub fn boundary_center_from_excess(excess: f64, abundance: f64, x_b: f64) -> f64 {
    if excess > 0.0 && abundance > 0.0 {
        excess / abundance + x_b
    } else {
        x_b
    }
}

/// Sum below which a slightly negative abundance is treated as rounding noise.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

impl CohortState {
    /// Fresh state at `t = 0` with an empty boundary cohort at index 0.
    pub fn new(x_b: f64, formulation: BoundaryFormulation, internal: Vec<Cohort>) -> Self {
        CohortState {
            t: 0.0,
            x_b,
            formulation,
            boundary: BoundaryCohort {
                index: 0,
                abundance: 0.0,
                center: x_b,
                excess: 0.0,
            },
            internal,
        }
    }

    pub fn boundary_index(&self) -> i64 {
        self.boundary.index
    }

    pub fn cohort_count(&self) -> usize {
        self.internal.len() + 1
    }

    pub fn total_mass(&self) -> f64 {
        self.boundary.abundance + self.internal.iter().map(|c| c.abundance).sum::<f64>()
    }

    /// Internal cohort with the given stable index.
    pub fn cohort(&self, index: i64) -> Option<&Cohort> {
        self.internal.iter().find(|c| c.index == index)
    }

    /// One atom per cohort, boundary first; zero-mass cohorts are kept.
    pub fn assemble_measure(&self) -> DiscreteMeasure {
        let mut atoms = Vec::with_capacity(self.cohort_count());
        atoms.push(Atom::new(self.boundary.center, self.boundary.abundance.max(0.0)));
        atoms.extend(self.internal.iter().map(|c| Atom::new(c.center, c.abundance.max(0.0))));
        DiscreteMeasure::from_trusted(atoms)
    }

    /// Retires the boundary cohort into the interior (keeping its current center)
    /// and opens an empty boundary cohort at `x_b` with the next lower index.
    pub fn internalize(&self) -> CohortState {
        let mut next = self.clone();
        next.internal.push(Cohort {
            index: self.boundary.index,
            abundance: self.boundary.abundance,
            center: self.boundary.center,
        });
        next.boundary = BoundaryCohort {
            index: self.boundary.index - 1,
            abundance: 0.0,
            center: self.x_b,
            excess: 0.0,
        };
        next
    }

    /// Removes internal cohorts with abundance below `epsilon`. The boundary cohort is never removed.
    pub fn prune(&self, epsilon: f64) -> (CohortState, PruneReport) {
        let mut next = self.clone();
        let mut report = PruneReport::default();
        if epsilon > 0.0 {
            next.internal.retain(|c| {
                if c.abundance < epsilon {
                    report.removed += 1;
                    report.mass_lost += c.abundance;
                    false
                } else {
                    true
                }
            });
        }
        (next, report)
    }

    pub(crate) fn sync_boundary_center(&mut self) {
        if self.formulation == BoundaryFormulation::Original {
            self.boundary.center = boundary_center_from_excess(self.boundary.excess, self.boundary.abundance, self.x_b);
        }
    }

    /// Flat layout `[N_B, X_B | π_B, N_1, X_1, …]` used by the integrator.
    pub(crate) fn pack(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * self.cohort_count());
        y.push(self.boundary.abundance);
        y.push(match self.formulation {
            BoundaryFormulation::Simplified => self.boundary.center,
            BoundaryFormulation::Original => self.boundary.excess,
        });
        for c in &self.internal {
            y.push(c.abundance);
            y.push(c.center);
        }
        y
    }

    /// Writes an integrator vector back, clamping rounding-level negatives and
    /// rejecting anything worse.
    pub(crate) fn unpack(&mut self, t: f64, y: &[f64]) -> Result<()> {
        debug_assert_eq!(y.len(), 2 * self.cohort_count());
        if let Some(pos) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Integration {
                t,
                reason: format!("state component {pos} became non-finite ({})", y[pos]),
            });
        }
        let clamp = |v: f64, what: &str| -> Result<f64> {
            if v >= 0.0 {
                Ok(v)
            } else if v >= -NEGATIVE_TOLERANCE {
                Ok(0.0)
            } else {
                Err(Error::Integration {
                    t,
                    reason: format!("{what} went negative ({v})"),
                })
            }
        };
        self.t = t;
        self.boundary.abundance = clamp(y[0], "boundary abundance")?;
        match self.formulation {
            BoundaryFormulation::Simplified => self.boundary.center = y[1],
            BoundaryFormulation::Original => {
                self.boundary.excess = clamp(y[1], "boundary size excess")?;
                if self.boundary.excess > 0.0 && self.boundary.abundance == 0.0 {
                    return Err(Error::Integration {
                        t,
                        reason: format!(
                            "boundary cohort is empty but carries size excess {}",
                            self.boundary.excess
                        ),
                    });
                }
            }
        }
        for (k, c) in self.internal.iter_mut().enumerate() {
            c.abundance = clamp(y[2 + 2 * k], &format!("abundance of cohort {}", c.index))?;
            c.center = y[3 + 2 * k];
        }
        self.sync_boundary_center();
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PruneReport {
    pub removed: usize,
    pub mass_lost: f64,
}

/// Initial discretization into `count` internal cohorts (indices `1..=count`)
/// and an empty boundary cohort at `x_b`.
///
/// Densities are split into `count` equal-mass quantile cells, each cohort
/// sitting at its cell's conditional mean. Atomic data with at most `count`
/// atoms is copied verbatim and padded with empty cohorts at `x_b`; larger
/// atomic data is sorted and merged into `count` consecutive groups, each
/// placed at its center of mass.
pub fn init_cohorts(
    initial: &InitialData,
    count: usize,
    x_b: f64,
    formulation: BoundaryFormulation,
) -> Result<CohortState> {
    if count < 1 {
        return Err(Error::InvalidProblem("need at least one initial cohort".into()));
    }
    let mut cohorts = Vec::with_capacity(count);
    match initial {
        InitialData::Density(d) => {
            let mass = d.total_mass();
            if !(mass.is_finite() && mass >= 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "initial density has invalid mass {mass}"
                )));
            }
            let cell_mass = mass / count as f64;
            let mut lo = d.quantile(0.0);
            for k in 1..=count {
                let hi = if k == count {
                    d.support().1
                } else {
                    d.quantile(k as f64 / count as f64)
                };
                let center = if cell_mass > 0.0 {
                    (d.first_moment(lo, hi) / cell_mass).clamp(lo, hi)
                } else {
                    0.5 * (lo + hi)
                };
                cohorts.push(Cohort {
                    index: k as i64,
                    abundance: cell_mass,
                    center,
                });
                lo = hi;
            }
        }
        InitialData::Atomic(m) => {
            let atoms = m.atoms();
            if atoms.len() <= count {
                cohorts.extend(atoms.iter().enumerate().map(|(i, a)| Cohort {
                    index: i as i64 + 1,
                    abundance: a.mass,
                    center: a.location,
                }));
                for k in atoms.len() + 1..=count {
                    cohorts.push(Cohort {
                        index: k as i64,
                        abundance: 0.0,
                        center: x_b,
                    });
                }
            } else {
                let mut sorted = atoms.to_vec();
                sorted.sort_by(|l, r| l.location.total_cmp(&r.location));
                let base = sorted.len() / count;
                let extra = sorted.len() % count;
                let mut start = 0;
                for k in 0..count {
                    let len = base + usize::from(k < extra);
                    let group = &sorted[start..start + len];
                    start += len;
                    let mass: f64 = group.iter().map(|a| a.mass).sum();
                    let center = if mass > 0.0 {
                        group.iter().map(|a| a.mass * a.location).sum::<f64>() / mass
                    } else {
                        group.iter().map(|a| a.location).sum::<f64>() / len as f64
                    };
                    let lo = group[0].location;
                    let hi = group[len - 1].location;
                    cohorts.push(Cohort {
                        index: k as i64 + 1,
                        abundance: mass,
                        center: center.clamp(lo, hi),
                    });
                }
            }
        }
    }
    Ok(CohortState::new(x_b, formulation, cohorts))
}
