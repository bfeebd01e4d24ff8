//! Step-type mixing proportions within a phase.

use crate::error::{Error, Result};
use crate::ode::rates::rate_f;

/// Roundoff-scale negatives are snapped to zero.
const CLAMP_TOL: f64 = 1e-12;

/// Solves a linear system in place by Gaussian elimination with partial
/// pivoting. Reports the smallest pivot magnitude on singularity.
pub(crate) fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let m = b.len();
    debug_assert!(a.len() == m && a.iter().all(|row| row.len() == m));
    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        let pivot = a[pivot_row][col];
        if pivot.abs() < 1e-13 {
            return Err(Error::numerical(format!(
                "singular mixing system: pivot magnitude {:.3e} in column {col}",
                pivot.abs()
            )));
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..m {
            let factor = a[row][col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for c in col..m {
                a[row][c] -= factor * a[col][c];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let mut acc = b[row];
        for c in row + 1..m {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Mixing proportions `tau_1..tau_{d-k}` for phase `k` of the plain system
/// at scaled state `(y, u)`.
///
/// The square system combines the normalization row with one row per low
/// type `1..d-k-1` demanding zero net flow into it. Roundoff-scale negative
/// components are clamped to zero. Larger negatives are returned as-is:
/// trial integration steps probe slightly past a phase boundary, where the
/// top component is genuinely negative, so the integrator rejects clearly
/// negative mixes only at accepted states.
pub fn solve_tau(d: usize, k: usize, y: &[f64], u: f64) -> Result<Vec<f64>> {
    if !(1..d).contains(&k) {
        return Err(Error::invalid(format!(
            "phase index {k} outside 1..={} for d={d}",
            d - 1
        )));
    }
    let top = d - k;
    if top == 1 {
        return Ok(vec![1.0]);
    }
    let mut a = vec![vec![0.0; top]; top];
    let mut rhs = vec![0.0; top];
    for col in 0..top {
        a[0][col] = 1.0;
    }
    rhs[0] = 1.0;
    for i in 1..top {
        for col in 0..top {
            a[i][col] = rate_f(d, y, u, i, col + 1);
        }
    }
    let mut tau = gauss_solve(a, rhs)?;
    for t in &mut tau {
        if (-CLAMP_TOL..0.0).contains(t) {
            *t = 0.0;
        }
    }
    Ok(tau)
}
