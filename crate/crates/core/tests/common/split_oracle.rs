//! Brute-force flat distance: ternary search over the split `a + b = 1` of the
//! norm budget, with the inner problem solved by a general-purpose LP solver.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

fn net_masses(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut points: Vec<(f64, f64)> = a.iter().copied().chain(b.iter().map(|&(x, m)| (x, -m))).collect();
    points.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (x, m) in points {
        match merged.last_mut() {
            Some(last) if last.0 == x => last.1 += m,
            _ => merged.push((x, m)),
        }
    }
    merged
}

/// `max Σ d_k φ_k` with `|φ_k| ≤ sup`, `|φ_{k+1} − φ_k| ≤ lip·(x_{k+1} − x_k)`.
fn inner(points: &[(f64, f64)], sup: f64, lip: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = points.iter().map(|&(_, d)| lp.add_var(d, (-sup, sup))).collect();
    for k in 1..points.len() {
        let gap = lip * (points[k].0 - points[k - 1].0);
        lp.add_constraint([(vars[k], 1.0), (vars[k - 1], -1.0)], ComparisonOp::Le, gap);
        lp.add_constraint([(vars[k], 1.0), (vars[k - 1], -1.0)], ComparisonOp::Ge, -gap);
    }
    lp.solve().expect("bounded feasible LP").objective()
}

pub fn flat_distance_oracle(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let points = net_masses(a, b);
    let value = |s: f64| inner(&points, 1.0 - s, s);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if value(m1) < value(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    [0.0, 1.0, 0.5 * (lo + hi)]
        .into_iter()
        .map(value)
        .fold(f64::MIN, f64::max)
}
