//! Expected one-step change rates for the plain greedy process.

/// Binomial coefficient as a float; exact for the small arguments used here.
pub(crate) fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Probability that one pairing arc of a freshly dominated vertex leads to
/// an already dominated vertex rather than back into the reservoir.
pub(crate) fn arc_probability(d: usize, y: &[f64], u: f64) -> f64 {
    let typed: f64 = y.iter().enumerate().map(|(l, &yl)| l as f64 * yl).sum();
    typed / (d as f64 * u)
}

/// Expected contribution to `dy_i/dx` of one step processing a type-`j`
/// vertex, in the scaled limit.
///
/// The step frees `j` reservoir vertices. Each lands at the type given by
/// its remaining arcs (the binomial entry term), each of its arcs into the
/// dominated set demotes a dominated vertex by one type (the migration
/// term), and the processed vertex itself moves from type `j` to type 0.
/// `y` has length `d` (types `0..d-1`); type `d` never occurs after the
/// first step and is treated as zero.
pub fn rate_f(d: usize, y: &[f64], u: f64, i: usize, j: usize) -> f64 {
    debug_assert!(y.len() == d && i < d && (1..d).contains(&j) && u > 0.0);
    let p = arc_probability(d, y, u);
    let jf = j as f64;
    let entry = jf
        * binom(d - 1, i)
        * p.powi((d - 1 - i) as i32)
        * (1.0 - p).powi(i as i32);
    let inflow = if i + 1 < d {
        (i + 1) as f64 * y[i + 1]
    } else {
        0.0
    };
    let migration = jf * (d - 1) as f64 * (inflow - i as f64 * y[i]) / (d as f64 * u);
    let mut f = entry + migration;
    if i == j {
        f -= 1.0;
    }
    if i == 0 {
        f += 1.0;
    }
    f
}
