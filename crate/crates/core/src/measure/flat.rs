//! The flat (Kantorovich–Rubinstein) distance between atomic measures.
//!
//! ```text
//! ρ(μ, ν) = sup { ∫ φ d(μ − ν) : ‖φ‖_∞ + ‖φ'‖_∞ ≤ 1 }
//! ```
//!
//! The budget is the *sum* of the sup norm and the Lipschitz constant, not their
//! maximum. For two unit Diracs a distance `d` apart this gives `2d / (d + 2)`
//! rather than the `min(d, 2)` of the max-norm convention.
//!
//! For atomic measures only the values of `φ` at the atom locations matter.
//! Splitting the budget as `a + b = 1` (sup bound `a`, Lipschitz bound `b`), the
//! supremum becomes a linear program over those values with box constraints
//! `|φ_k| ≤ a` and, in one dimension, Lipschitz constraints between consecutive
//! atoms only. Test functions need not be compactly supported here: on the
//! bounded set of atoms a smooth compactly supported function can match any
//! admissible chain of values, so the program computes the exact supremum.
//!
//! [`flat_distance`] solves the inner chain problem exactly by dynamic
//! programming over concave piecewise-linear value functions and maximises the
//! (concave) result over the split `b`. [`flat_distance_lp`] solves the full
//! program, split variables included, with a dense simplex and serves as the
//! reference implementation for small inputs.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::{signed_difference, simplex, DiscreteMeasure};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ATOMS: usize = 20_000;

/// Size limit for the dense reference LP.
pub const LP_MAX_ATOMS: usize = 200;

const GOLDEN_ITERATIONS: usize = 90;

#[derive(Debug, Clone, Copy)]
pub struct FlatMetric {
    /// Limit on the combined atom count of both arguments.
    pub max_atoms: usize,
}

impl Default for FlatMetric {
    fn default() -> Self {
        FlatMetric {
            max_atoms: DEFAULT_MAX_ATOMS,
        }
    }
}

impl FlatMetric {
    pub fn distance(&self, a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
        let count = a.len() + b.len();
        if count > self.max_atoms {
            return Err(Error::Capacity {
                count,
                limit: self.max_atoms,
            });
        }
        let points = signed_difference(a, b);
        Ok(maximize_over_split(&points))
    }
}

/// Flat distance with the default atom limit.
pub fn flat_distance(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    FlatMetric::default().distance(a, b)
}

/// Reference value of the flat distance from the full linear program.
pub fn flat_distance_lp(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    let count = a.len() + b.len();
    if count > LP_MAX_ATOMS {
        return Err(Error::Capacity {
            count,
            limit: LP_MAX_ATOMS,
        });
    }
    let points = signed_difference(a, b);
    if points.is_empty() {
        return Ok(0.0);
    }
    let k = points.len();
    // Variables: φ_k = p_k − q_k (p, q ≥ 0), then the budget split a, b.
    let nvars = 2 * k + 2;
    let ia = 2 * k;
    let ib = 2 * k + 1;
    let mut objective = vec![0.0; nvars];
    for (i, &(_, d)) in points.iter().enumerate() {
        objective[i] = d;
        objective[k + i] = -d;
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..k {
        // φ_i − a ≤ 0 and −φ_i − a ≤ 0
        let mut up = vec![0.0; nvars];
        up[i] = 1.0;
        up[k + i] = -1.0;
        up[ia] = -1.0;
        let mut down = vec![0.0; nvars];
        down[i] = -1.0;
        down[k + i] = 1.0;
        down[ia] = -1.0;
        rows.push(up);
        rows.push(down);
        rhs.extend([0.0, 0.0]);
    }
    for i in 0..k.saturating_sub(1) {
        let gap = points[i + 1].0 - points[i].0;
        // ±(φ_{i+1} − φ_i) − gap·b ≤ 0
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; nvars];
            row[i + 1] = sign;
            row[k + i + 1] = -sign;
            row[i] = -sign;
            row[k + i] = sign;
            row[ib] = -gap;
            rows.push(row);
            rhs.push(0.0);
        }
    }
    let mut budget = vec![0.0; nvars];
    budget[ia] = 1.0;
    budget[ib] = 1.0;
    rows.push(budget);
    rhs.push(1.0);

    let solution = simplex::maximize(&objective, &rows, &rhs)?;
    Ok(solution.value.max(0.0))
}

/// Value of the chain program for a fixed split, exposed for the split-search oracle in tests.
pub(crate) fn chain_value(points: &[(f64, f64)], sup_bound: f64, lip_bound: f64) -> f64 {
    if points.is_empty() || sup_bound <= 0.0 {
        return 0.0;
    }
    let mut value = ConcaveChain::new(sup_bound);
    for (i, &(x, d)) in points.iter().enumerate() {
        if i > 0 {
            value.dilate(lip_bound * (x - points[i - 1].0));
        }
        value.add_linear(d);
    }
    value.maximum()
}

fn maximize_over_split(points: &[(f64, f64)]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let f = |b: f64| chain_value(points, 1.0 - b, b);
    // The value is concave in b, so a golden-section search finds the maximum.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = f(0.0).max(f1).max(f2);
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
            best = best.max(f2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
            best = best.max(f1);
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    best.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Slope(f64);

impl Eq for Slope {}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// A concave piecewise-linear function on `[-a, a]`, stored as segment lengths keyed
/// by slope (plus a lazily applied slope offset) together with its value at `-a`.
///
/// Segments are implicitly ordered left to right by decreasing slope.
struct ConcaveChain {
    half_width: f64,
    left_value: f64,
    offset: f64,
    segments: BTreeMap<Slope, f64>,
}

impl ConcaveChain {
    fn new(half_width: f64) -> Self {
        let mut segments = BTreeMap::new();
        segments.insert(Slope(0.0), 2.0 * half_width);
        ConcaveChain {
            half_width,
            left_value: 0.0,
            offset: 0.0,
            segments,
        }
    }

    /// `V(φ) += d·φ`
    fn add_linear(&mut self, d: f64) {
        self.offset += d;
        self.left_value -= d * self.half_width;
    }

    /// `V(φ) ← max_{|ψ − φ| ≤ c} V(ψ)`, restricted back to `[-a, a]`.
    fn dilate(&mut self, c: f64) {
        if c <= 0.0 {
            return;
        }
        *self.segments.entry(Slope(-self.offset)).or_insert(0.0) += 2.0 * c;

        // The new left end sits c further right on the old function; everything
        // popped here has non-negative actual slope because the plateau of
        // length 2c precedes any descending segment.
        let mut remaining = c;
        while remaining > 0.0 {
            let Some(mut entry) = self.segments.last_entry() else {
                break;
            };
            let slope = entry.key().0 + self.offset;
            let len = *entry.get();
            if len <= remaining {
                self.left_value += len * slope;
                remaining -= len;
                entry.remove();
            } else {
                self.left_value += remaining * slope;
                *entry.get_mut() -= remaining;
                remaining = 0.0;
            }
        }

        let mut remaining = c;
        while remaining > 0.0 {
            let Some(mut entry) = self.segments.first_entry() else {
                break;
            };
            let len = *entry.get();
            if len <= remaining {
                remaining -= len;
                entry.remove();
            } else {
                *entry.get_mut() -= remaining;
                remaining = 0.0;
            }
        }
    }

    fn maximum(&self) -> f64 {
        let rise: f64 = self
            .segments
            .iter()
            .map(|(slope, len)| (slope.0 + self.offset, *len))
            .filter(|&(slope, _)| slope > 0.0)
            .map(|(slope, len)| slope * len)
            .sum();
        self.left_value + rise
    }
}
