//! Numerical quadrature used by the residual and the reference oracles.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    // A fixed pre-split keeps narrow features from slipping between the first samples.
    const PIECES: usize = 16;
    let width = (hi - lo) / PIECES as f64;
    let mut total = 0.0;
    for k in 0..PIECES {
        let x0 = lo + k as f64 * width;
        let x1 = if k + 1 == PIECES { hi } else { x0 + width };
        let fa = f(x0);
        let fb = f(x1);
        let m = 0.5 * (x0 + x1);
        let fm = f(m);
        let whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_step(f, x0, x1, fa, fm, fb, whole, tol / PIECES as f64, MAX_DEPTH);
    }
    sign * total
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson over `[a, b]` with forced breakpoints (e.g. support edges).
pub fn adaptive_simpson_split(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breakpoints: &[f64], tol: f64) -> f64 {
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let pieces = (edges.len() - 1) as f64;
    edges
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], tol / pieces))
        .sum()
}

/// Composite Simpson rule on possibly non-uniform, strictly increasing abscissae.
///
/// Pairs of intervals use the non-uniform Simpson weights; an odd trailing
/// interval gets the three-point correction that stays exact for quadratics.
pub fn simpson_irregular(ts: &[f64], fs: &[f64]) -> Result<f64> {
    if ts.len() != fs.len() {
        return Err(Error::Residual("abscissae and values differ in length".into()));
    }
    if ts.len() < 3 {
        return Err(Error::Residual(format!(
            "Simpson quadrature needs at least 3 points, got {}",
            ts.len()
        )));
    }
    if ts
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::Residual("abscissae must be strictly increasing".into()));
    }
    let intervals = ts.len() - 1;
    let paired = intervals - intervals % 2;
    let mut sum = 0.0;
    let mut i = 0;
    while i < paired {
        let h0 = ts[i + 1] - ts[i];
        let h1 = ts[i + 2] - ts[i + 1];
        let hs = h0 + h1;
        sum += hs / 6.0 * ((2.0 - h1 / h0) * fs[i] + hs * hs / (h0 * h1) * fs[i + 1] + (2.0 - h0 / h1) * fs[i + 2]);
        i += 2;
    }
    if intervals % 2 == 1 {
        let n = ts.len() - 1;
        let h0 = ts[n - 1] - ts[n - 2];
        let h1 = ts[n] - ts[n - 1];
        let alpha = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        let beta = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
        let eta = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        sum += alpha * fs[n] + beta * fs[n - 1] - eta * fs[n - 2];
    }
    Ok(sum)
}
