//! Sampled consistency checks for vital rates.
//!
//! This is a check at sample points, not a proof: the rates are evaluated on a
//! state grid against a set of probe environments, and every observed breach
//! of non-negativity, the declared bounds, or the declared feedback-Lipschitz
//! constants is reported. Non-finite evaluations are reported, not raised.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Rate, VitalRates};
use crate::measure::{flat_distance, Atom, DiscreteMeasure};

const REL_SLACK: f64 = 1e-9;
const ABS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl SampleGrid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        SampleGrid { lo, hi, points }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.points.max(1);
        (0..n).map(move |i| {
            if n == 1 {
                self.lo
            } else {
                self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NonFinite,
    Negative,
    ExceedsBound,
    FeedbackLipschitz,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub rate: Rate,
    pub x: f64,
    /// Probe index, and the second probe for Lipschitz violations.
    pub probe: usize,
    pub other_probe: Option<usize>,
    /// Offending value (the rate, or the rate difference for Lipschitz checks).
    pub value: f64,
    /// Limit that was exceeded (0 for sign checks).
    pub limit: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub probe_pairs: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates the rates on `grid` against every probe (and every probe pair for
/// the Lipschitz check). An empty probe list checks against the empty measure.
pub fn validate_rates(rates: &dyn VitalRates, grid: &SampleGrid, probes: &[DiscreteMeasure]) -> ValidationReport {
    let empty = [DiscreteMeasure::empty()];
    let probes = if probes.is_empty() { &empty[..] } else { probes };
    let bounds = rates.declared_bounds();
    let lipschitz = rates.declared_lipschitz();
    let xs: Vec<f64> = grid.iter().collect();
    let mut report = ValidationReport::default();

    // values[probe][rate][x]
    let mut values = vec![[Vec::new(), Vec::new(), Vec::new()]; probes.len()];
    for (p, env) in probes.iter().enumerate() {
        for (r, rate) in Rate::ALL.into_iter().enumerate() {
            for &x in &xs {
                let v = rates.rate(rate, x, env);
                report.samples += 1;
                let mut flag = |kind, limit| {
                    report.violations.push(Violation {
                        kind,
                        rate,
                        x,
                        probe: p,
                        other_probe: None,
                        value: v,
                        limit,
                    })
                };
                if !v.is_finite() {
                    flag(ViolationKind::NonFinite, 0.0);
                } else if v < 0.0 {
                    flag(ViolationKind::Negative, 0.0);
                } else if let Some(b) = bounds {
                    let limit = b.get(rate);
                    if v > limit * (1.0 + REL_SLACK) + ABS_SLACK {
                        flag(ViolationKind::ExceedsBound, limit);
                    }
                }
                values[p][r].push(v);
            }
        }
    }

    if let Some(lip) = lipschitz {
        for i in 0..probes.len() {
            for j in i + 1..probes.len() {
                let Ok(rho) = flat_distance(&probes[i], &probes[j]) else {
                    continue;
                };
                report.probe_pairs += 1;
                for (r, rate) in Rate::ALL.into_iter().enumerate() {
                    let limit = lip.get(rate) * rho;
                    for (k, &x) in xs.iter().enumerate() {
                        let (a, b) = (values[i][r][k], values[j][r][k]);
                        if !(a.is_finite() && b.is_finite()) {
                            continue;
                        }
                        let diff = (a - b).abs();
                        if diff > limit * (1.0 + REL_SLACK) + ABS_SLACK {
                            report.violations.push(Violation {
                                kind: ViolationKind::FeedbackLipschitz,
                                rate,
                                x,
                                probe: i,
                                other_probe: Some(j),
                                value: diff,
                                limit,
                            });
                        }
                    }
                }
            }
        }
    }
    report
}

/// Deterministic random probe environments with locations in `x_range` and
/// total mass at most `max_total_mass`.
pub fn random_probes(
    seed: u64,
    count: usize,
    x_range: (f64, f64),
    max_total_mass: f64,
    max_atoms: usize,
) -> Vec<DiscreteMeasure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let atoms = rng.gen_range(1..=max_atoms.max(1));
            let total = rng.gen::<f64>() * max_total_mass;
            let weights: Vec<f64> = (0..atoms).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let wsum: f64 = weights.iter().sum();
            let atoms = weights
                .iter()
                .map(|w| {
                    let x = if x_range.1 > x_range.0 {
                        rng.gen_range(x_range.0..=x_range.1)
                    } else {
                        x_range.0
                    };
                    Atom::new(x, total * w / wsum)
                })
                .collect();
            DiscreteMeasure::new(atoms).expect("generated atoms are valid")
        })
        .collect()
}
