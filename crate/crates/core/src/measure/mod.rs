//! Finite positive atomic measures on the half-line.
//!
//! A [`DiscreteMeasure`] is an unordered list of `(location, mass)` atoms.
//! Atoms sharing a location behave as their merged sum and zero-mass atoms are
//! ignored by every operation, so the EBT state (which carries an empty
//! boundary cohort right after each internalization) maps onto a measure
//! without special cases.

mod flat;
mod simplex;

pub use flat::{flat_distance, flat_distance_lp, FlatMetric, DEFAULT_MAX_ATOMS, LP_MAX_ATOMS};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

impl Atom {
    pub fn new(location: f64, mass: f64) -> Self {
        Atom { location, mass }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a measure, rejecting negative or non-finite masses and non-finite locations.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (i, atom) in atoms.iter().enumerate() {
            if !atom.location.is_finite() {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i} has non-finite location {}",
                    atom.location
                )));
            }
            if !atom.mass.is_finite() || atom.mass < 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i} at {} has invalid mass {}",
                    atom.location, atom.mass
                )));
            }
        }
        Ok(DiscreteMeasure { atoms })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(x, m)| Atom::new(x, m)).collect())
    }

    /// Used by the solver, which has already enforced the invariants on its state.
    pub(crate) fn from_trusted(atoms: Vec<Atom>) -> Self {
        debug_assert!(atoms.iter().all(|a| a.mass >= 0.0 && a.location.is_finite()));
        DiscreteMeasure { atoms }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Checks that every atom lies in `[x_b, ∞)`.
    pub fn check_support(&self, x_b: f64) -> Result<()> {
        match self.atoms.iter().find(|a| a.location < x_b) {
            Some(a) => Err(Error::InvalidMeasure(format!(
                "atom at {} lies below the birth size {x_b}",
                a.location
            ))),
            None => Ok(()),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// `Σ mass_i · f(location_i)`, failing on the first atom where `f` is not finite.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let mut sum = 0.0;
        for atom in &self.atoms {
            if atom.mass == 0.0 {
                continue;
            }
            let value = f(atom.location);
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    what: "integrand".into(),
                    location: atom.location,
                    value,
                });
            }
            sum += atom.mass * value;
        }
        Ok(sum)
    }

    /// Mass at locations strictly greater than `threshold`.
    pub fn tail_mass(&self, threshold: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.location > threshold)
            .map(|a| a.mass)
            .sum()
    }

    pub fn min_location(&self) -> Option<f64> {
        self.atoms
            .iter()
            .filter(|a| a.mass > 0.0)
            .map(|a| a.location)
            .min_by(f64::total_cmp)
    }

    pub fn max_location(&self) -> Option<f64> {
        self.atoms
            .iter()
            .filter(|a| a.mass > 0.0)
            .map(|a| a.location)
            .max_by(f64::total_cmp)
    }

    /// Sorted, duplicate-free atoms with positive mass. Storage is left untouched.
    pub fn merged(&self) -> Vec<Atom> {
        let mut atoms: Vec<Atom> = self.atoms.iter().copied().filter(|a| a.mass > 0.0).collect();
        atoms.sort_by(|l, r| l.location.total_cmp(&r.location));
        let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match out.last_mut() {
                Some(last) if last.location == atom.location => last.mass += atom.mass,
                _ => out.push(atom),
            }
        }
        out
    }

    /// True when both measures agree after merging duplicates and dropping zero atoms.
    pub fn same_measure(&self, other: &DiscreteMeasure) -> bool {
        self.merged() == other.merged()
    }
}

/// Sorted locations of `a − b` with their nonzero net signed masses.
pub(crate) fn signed_difference(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Vec<(f64, f64)> {
    let mut points: Vec<(f64, f64)> = a
        .atoms()
        .iter()
        .map(|at| (at.location, at.mass))
        .chain(b.atoms().iter().map(|at| (at.location, -at.mass)))
        .filter(|&(_, m)| m != 0.0)
        .collect();
    points.sort_by(|l, r| l.0.total_cmp(&r.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for (x, m) in points {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 += m,
            _ => out.push((x, m)),
        }
    }
    out.retain(|&(_, d)| d != 0.0);
    out
}
