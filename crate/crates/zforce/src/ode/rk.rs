//! Embedded Dormand-Prince 5(4) step for autonomous systems.

use crate::error::Result;

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Difference between the fifth-order weights and the embedded fourth-order
/// weights; `h * E . k` estimates the local error.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// One fifth-order step of size `h` from `s`, returning the new state and
/// the per-component local error estimate.
pub(crate) fn dp_step(
    deriv: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    s: &[f64],
    h: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = s.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(deriv(s)?);
    let mut stage = vec![0.0; dim];
    for row in 0..6 {
        for i in 0..dim {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate() {
                acc += A[row][j] * kj[i];
            }
            stage[i] = s[i] + h * acc;
        }
        k.push(deriv(&stage)?);
    }
    // The sixth stage row holds the fifth-order weights, so `stage` is now
    // the new state and k[6] its derivative.
    let s_new = stage.clone();
    let mut err = vec![0.0; dim];
    for (i, e) in err.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, kj) in k.iter().enumerate() {
            acc += E[j] * kj[i];
        }
        *e = h * acc;
    }
    Ok((s_new, err))
}

/// Worst component error relative to the mixed tolerance; accept while <= 1.
pub(crate) fn error_ratio(s: &[f64], s_new: &[f64], err: &[f64], rtol: f64, atol: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..s.len() {
        let scale = atol + rtol * s[i].abs().max(s_new[i].abs());
        let r = (err[i] / scale).abs();
        if !r.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(r);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_step_is_fifth_order() {
        let deriv = |s: &[f64]| Ok(vec![s[0]]);
        // The local error on y' = y is h^6/3600 to leading order.
        let (y1, e1) = dp_step(&deriv, &[1.0], 0.1).unwrap();
        assert!((y1[0] - 0.1f64.exp()).abs() < 1e-9);
        let (y2, e2) = dp_step(&deriv, &[1.0], 0.05).unwrap();
        assert!((y2[0] - 0.05f64.exp()).abs() < 1e-11);
        // Halving h shrinks the error estimate by roughly 2^5.
        assert!(e2[0].abs() < e1[0].abs() / 16.0);
    }

    #[test]
    fn error_ratio_scales_with_tolerance() {
        let s = [1.0];
        let err = [1e-8];
        assert!(error_ratio(&s, &s, &err, 1e-6, 1e-9) < 1.0);
        assert!(error_ratio(&s, &s, &err, 1e-10, 1e-12) > 1.0);
    }
}
