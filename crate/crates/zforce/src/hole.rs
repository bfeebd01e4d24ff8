//! First-moment lower bound via bipartite holes.
//!
//! An (an)-bipartite hole is a pair of disjoint vertex sets of size `an`
//! each with no edge between them. If a d-regular graph has no such hole
//! then its forcing number is at least `(1 - 2a)n`. The expected number of
//! holes in the random pairing model is `exp(f(a, b, d)·n + o(n))` where
//! `b` counts cross-pair half-edges at the optimizing allocation, so the
//! largest `a` with `f(a, b*(a), d) = 0` yields a lower bound that holds
//! asymptotically almost surely.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// `x ln x`, extended by continuity with value 0 at `x = 0`.
pub fn entropy_g(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::invalid(format!("entropy argument {x} is negative")));
    }
    Ok(if x == 0.0 { 0.0 } else { x * x.ln() })
}

fn g(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Exponential growth rate of the expected number of `(an)`-bipartite holes
/// whose two sides send `2bn` half-edges to each other's complement side.
///
/// The eleven entropy arguments must all be nonnegative; equivalently
/// `a < 1/2` and `max(0, (3a-1)d/2) <= b <= da/2`. A violation is reported
/// with the offending term.
pub fn exponent_f(a: f64, b: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    let terms = [
        ("d*a", df * a),
        ("d-2d*a", df - 2.0 * df * a),
        ("d-2d*a+2b", df - 2.0 * df * a + 2.0 * b),
        ("d/2", df / 2.0),
        ("a", a),
        ("1-2a", 1.0 - 2.0 * a),
        ("d*a-2b", df * a - 2.0 * b),
        ("b", b),
        ("d-3d*a+2b", df - 3.0 * df * a + 2.0 * b),
        ("(d-2d*a+2b)/2", (df - 2.0 * df * a + 2.0 * b) / 2.0),
        ("d", df),
    ];
    // Boundary allocations (b = 0, b = da/2, b = (3a-1)d/2) are legal and
    // may round a hair below zero; only real violations are rejected.
    for (name, v) in terms {
        if v < -1e-9 {
            return Err(Error::invalid(format!(
                "entropy argument {name} = {v:.6e} is negative (a={a}, b={b}, d={d})"
            )));
        }
    }
    Ok(g(df * a) + g(df - 2.0 * df * a) + g(df - 2.0 * df * a + 2.0 * b) + g(df / 2.0)
        - 2.0 * g(a)
        - g(1.0 - 2.0 * a)
        - g(df * a - 2.0 * b)
        - g(b)
        - g(df - 3.0 * df * a + 2.0 * b)
        - g((df - 2.0 * df * a + 2.0 * b) / 2.0)
        - g(df)
        + (df * a - 2.0 * b) * std::f64::consts::LN_2)
}

/// The cross-edge allocation maximizing `exponent_f(a, ., d)`: the positive
/// root of `d^2 a^2 + 4dab - 4b^2 - 2db = 0`.
pub fn b_star(a: f64, d: usize) -> Result<f64> {
    if !(0.0 < a && a < 0.5) {
        return Err(Error::invalid(format!("side fraction a={a} not in (0, 1/2)")));
    }
    let df = d as f64;
    let t = 2.0 * df * a - df;
    let b = (t + (t * t + 4.0 * df * df * a * a).sqrt()) / 4.0;
    let lo = (3.0 * a - 1.0) * df / 2.0;
    if b < 0.0 || b > df * a / 2.0 || b < lo {
        return Err(Error::numerical(format!(
            "optimizer b={b:.6e} fell outside [{:.3e}, {:.3e}] (a={a}, d={d})",
            lo.max(0.0),
            df * a / 2.0
        )));
    }
    Ok(b)
}

fn f_at_optimum(a: f64, d: usize) -> Result<f64> {
    exponent_f(a, b_star(a, d)?, d)
}

/// Largest hole size (with the lower bound it implies) for degree `d`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HoleBoundResult {
    pub d: usize,
    /// Each hole side holds this fraction of the vertices.
    pub a_threshold: f64,
    pub b_at_threshold: f64,
    pub f_at_threshold: f64,
    /// Forcing-set fraction guaranteed a.a.s.: `1 - 2a`.
    pub lower_bound: f64,
}

/// Finds the largest `a` in `(0, 1/2)` where the hole exponent changes
/// sign: above it holes are expected, below they vanish a.a.s.
///
/// A 256-point scan locates the last sign change, bisection narrows it to
/// `tol`, and a few secant steps polish the root inside the bracket.
pub fn threshold_a(d: usize, tol: f64) -> Result<HoleBoundResult> {
    if d < 3 {
        return Err(Error::invalid("the hole bound needs d >= 3"));
    }
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(Error::invalid(format!("root tolerance {tol} out of range")));
    }
    let (lo, hi) = (1e-6, 0.5 - 1e-6);
    let grid = 256;
    let mut bracket = None;
    let mut prev = (lo, f_at_optimum(lo, d)?);
    for t in 1..=grid {
        let a = lo + (hi - lo) * t as f64 / grid as f64;
        let v = f_at_optimum(a, d)?;
        if (prev.1 > 0.0) != (v > 0.0) {
            bracket = Some((prev.0, a, prev.1));
        }
        prev = (a, v);
    }
    let Some((mut x0, mut x1, v0)) = bracket else {
        return Err(Error::numerical(format!(
            "hole exponent has no sign change on (0, 1/2) for d={d}"
        )));
    };
    let left_positive = v0 > 0.0;
    while x1 - x0 > tol {
        let mid = 0.5 * (x0 + x1);
        if (f_at_optimum(mid, d)? > 0.0) == left_positive {
            x0 = mid;
        } else {
            x1 = mid;
        }
    }
    let mut a = 0.5 * (x0 + x1);
    let (mut pa, mut pb) = (x0, x1);
    let (mut fa, mut fb) = (f_at_optimum(pa, d)?, f_at_optimum(pb, d)?);
    for _ in 0..3 {
        if fb == fa {
            break;
        }
        let cand = pb - fb * (pb - pa) / (fb - fa);
        if !(x0..=x1).contains(&cand) {
            break;
        }
        (pa, fa) = (pb, fb);
        (pb, fb) = (cand, f_at_optimum(cand, d)?);
        a = cand;
    }
    let b = b_star(a, d)?;
    Ok(HoleBoundResult {
        d,
        a_threshold: a,
        b_at_threshold: b,
        f_at_threshold: exponent_f(a, b, d)?,
        lower_bound: 1.0 - 2.0 * a,
    })
}

/// Thresholds for several degrees, searched in parallel and returned in
/// input order.
pub fn threshold_table(ds: &[usize], tol: f64) -> Result<Vec<HoleBoundResult>> {
    ds.par_iter().map(|&d| threshold_a(d, tol)).collect()
}

/// CSV rendering of a threshold table: `d,a,lower_bound`.
pub fn table_csv(rows: &[HoleBoundResult]) -> String {
    let mut out = String::from("d,a,lower_bound\n");
    for r in rows {
        out.push_str(&format!("{},{:.7},{:.7}\n", r.d, r.a_threshold, r.lower_bound));
    }
    out
}

/// Large-degree behaviour of the threshold at `a = K ln d / d`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AsymptoticCheck {
    pub k: f64,
    pub d: usize,
    /// The dominant-term exponent scaled by `d / ln^2 d`; tends to the
    /// target as `d` grows.
    pub estimate: f64,
    pub target: f64,
    /// The unreduced exponent under the same scaling. It carries an
    /// `O(a ln(1/a))` remainder that decays only logarithmically, so it sits
    /// far from the target at any practical `d`; reported for transparency.
    pub raw_scaled_exponent: f64,
}

/// Checks that the hole exponent at `a = K ln d / d` scales like
/// `K(2-K) ln^2 d / d`, the regime that pins the lower bound's leading
/// constant (holes of side `~ (ln d / d) n` stop existing at `K = 2`).
pub fn asymptotic_check(k: f64, d: usize) -> Result<AsymptoticCheck> {
    if d < 100 {
        return Err(Error::invalid("the asymptotic regime needs large d"));
    }
    if k <= 0.0 {
        return Err(Error::invalid(format!("coefficient K={k} must be positive")));
    }
    let df = d as f64;
    let a = k * df.ln() / df;
    if a >= 0.5 {
        return Err(Error::invalid(format!(
            "K={k} puts a={a:.4} outside (0, 1/2) at d={d}"
        )));
    }
    let b = b_star(a, d)?;
    let scale = df / df.ln().powi(2);
    let dominant = b - 1.5 * df * a * a + 2.0 * a * df.ln();
    Ok(AsymptoticCheck {
        k,
        d,
        estimate: dominant * scale,
        target: k * (2.0 - k),
        raw_scaled_exponent: exponent_f(a, b, d)? * scale,
    })
}
