//! Dense tableau simplex for `max cᵀx  s.t.  Ax ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The slack basis is feasible from the start, so no phase one is needed.
//! Bland's rule keeps the many degenerate pivots of the flat-metric program
//! from cycling.

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;

pub(crate) struct Solution {
    pub value: f64,
    #[allow(dead_code)]
    pub x: Vec<f64>,
}

pub(crate) fn maximize(objective: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<Solution> {
    let n = objective.len();
    let m = rows.len();
    if rhs.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Lp("inconsistent dimensions".into()));
    }
    if rhs.iter().any(|&b| b < 0.0 || !b.is_finite()) {
        return Err(Error::Lp("right-hand side must be finite and non-negative".into()));
    }

    let width = n + m + 1;
    let mut tab = vec![0.0; (m + 1) * width];
    for (i, row) in rows.iter().enumerate() {
        tab[i * width..i * width + n].copy_from_slice(row);
        tab[i * width + n + i] = 1.0;
        tab[i * width + width - 1] = rhs[i];
    }
    // Objective row holds reduced costs negated: z − cᵀx = 0.
    for (j, &c) in objective.iter().enumerate() {
        tab[m * width + j] = -c;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iter = 50 * (n + m).max(10);
    for _ in 0..max_iter {
        let Some(enter) = (0..n + m).find(|&j| tab[m * width + j] < -EPS) else {
            let mut x = vec![0.0; n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = tab[i * width + width - 1];
                }
            }
            return Ok(Solution {
                value: tab[m * width + width - 1],
                x,
            });
        };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab[i * width + enter];
            if a > EPS {
                let ratio = tab[i * width + width - 1] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((pivot_row, _)) = leave else {
            return Err(Error::Lp("objective is unbounded".into()));
        };

        let pivot = tab[pivot_row * width + enter];
        for j in 0..width {
            tab[pivot_row * width + j] /= pivot;
        }
        for i in 0..=m {
            if i == pivot_row {
                continue;
            }
            let factor = tab[i * width + enter];
            if factor != 0.0 {
                for j in 0..width {
                    tab[i * width + j] -= factor * tab[pivot_row * width + j];
                }
            }
        }
        basis[pivot_row] = enter;
    }
    Err(Error::Lp("iteration limit reached".into()))
}
