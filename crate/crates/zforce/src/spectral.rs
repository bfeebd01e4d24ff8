//! Spectral upper bounds and bipartite-hole machinery.
//!
//! For a d-regular graph whose non-principal adjacency eigenvalues are
//! bounded by `lambda` in magnitude, the expander mixing inequality forces
//! an edge between any two disjoint sets larger than `lambda*n/(d+lambda)`.
//! Running the forcing process backwards against that guarantee yields a
//! closed-form upper bound on the forcing number; bipartite holes (disjoint
//! set pairs with no crossing edge) are the obstruction the lower-bound side
//! counts.

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, RegularGraph};
use crate::rng::{derive_seed, rng_from_seed};

/// Where a lambda value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSource {
    Computed,
    Friedman,
    User,
}

/// A graph's size, degree, and eigenvalue bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectralProfile {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub source: LambdaSource,
}

impl SpectralProfile {
    /// Profile with lambda computed from the graph's actual spectrum.
    pub fn computed(g: &RegularGraph, tol: f64) -> Result<SpectralProfile> {
        Ok(SpectralProfile {
            n: g.n(),
            d: g.d(),
            lambda: second_eigenvalue(g, tol)?,
            source: LambdaSource::Computed,
        })
    }

    /// Profile using the almost-sure bound for random d-regular graphs.
    pub fn friedman(n: usize, d: usize, epsilon: f64) -> Result<SpectralProfile> {
        Ok(SpectralProfile {
            n,
            d,
            lambda: friedman_lambda(d, epsilon)?,
            source: LambdaSource::Friedman,
        })
    }

    /// Profile with a caller-supplied bound.
    pub fn user(n: usize, d: usize, lambda: f64) -> Result<SpectralProfile> {
        if lambda < 0.0 {
            return Err(Error::invalid(format!("lambda {lambda} is negative")));
        }
        Ok(SpectralProfile {
            n,
            d,
            lambda,
            source: LambdaSource::User,
        })
    }
}

fn apply_adjacency(g: &Graph, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = g.neighbors(i).iter().map(|&j| v[j as usize]).sum();
    }
}

fn project_out_ones(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Largest magnitude among the non-principal adjacency eigenvalues,
/// `max_{i >= 2} |lambda_i|`, to roughly `tol` accuracy.
///
/// Power iteration on the squared adjacency operator restricted to the
/// complement of the all-ones eigenvector. Regularity makes the deflation
/// analytic (the principal eigenpair is known exactly), and squaring merges
/// a possible `+c/-c` dominant pair into one eigenspace, so the iteration
/// cannot oscillate. Matrix-free; memory is O(n).
pub fn second_eigenvalue(g: &RegularGraph, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::invalid(format!("eigenvalue tolerance {tol} out of range")));
    }
    let n = g.n();
    if n <= 1 {
        return Ok(0.0);
    }
    let mut rng = rng_from_seed(derive_seed(0xE16E, n as u64));
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project_out_ones(&mut v);
    if normalize(&mut v) == 0.0 {
        return Err(Error::numerical("degenerate start vector"));
    }
    let mut av = vec![0.0; n];
    let mut prev = f64::INFINITY;
    let mut stable = 0;
    for iter in 0..50_000 {
        apply_adjacency(g, &v, &mut av);
        let estimate = av.iter().map(|x| x * x).sum::<f64>().sqrt();
        apply_adjacency(g, &av, &mut v);
        project_out_ones(&mut v);
        if normalize(&mut v) == 0.0 {
            // The deflated operator annihilated the iterate: all remaining
            // eigenvalues are zero.
            return Ok(0.0);
        }
        if (estimate - prev).abs() < 0.25 * tol {
            stable += 1;
            if stable >= 3 && iter >= 10 {
                return Ok(estimate);
            }
        } else {
            stable = 0;
        }
        prev = estimate;
    }
    Err(Error::numerical(format!(
        "eigenvalue iteration did not converge to {tol} within 50000 rounds"
    )))
}

/// Almost-sure eigenvalue bound for random d-regular graphs:
/// `2 sqrt(d-1) + epsilon`.
pub fn friedman_lambda(d: usize, epsilon: f64) -> Result<f64> {
    if d < 3 {
        return Err(Error::invalid("the eigenvalue bound needs d >= 3"));
    }
    if epsilon < 0.0 {
        return Err(Error::invalid(format!("epsilon {epsilon} is negative")));
    }
    Ok(2.0 * ((d - 1) as f64).sqrt() + epsilon)
}

fn vertex_set_mask(g: &Graph, name: &str, set: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; g.n()];
    for &v in set {
        if v >= g.n() {
            return Err(Error::invalid(format!(
                "{name} contains vertex {v}, graph has n={}",
                g.n()
            )));
        }
        if mask[v] {
            return Err(Error::invalid(format!("{name} lists vertex {v} twice")));
        }
        mask[v] = true;
    }
    Ok(mask)
}

/// Ordered crossing-pair count: adjacent pairs `(u, w)` with `u` in U and
/// `w` in W. An edge inside the intersection contributes twice.
pub fn crossing_pairs(g: &Graph, u_set: &[usize], w_set: &[usize]) -> Result<usize> {
    vertex_set_mask(g, "U", u_set)?;
    let w_mask = vertex_set_mask(g, "W", w_set)?;
    Ok(u_set
        .iter()
        .map(|&u| g.neighbors(u).iter().filter(|&&x| w_mask[x as usize]).count())
        .sum())
}

/// Slack of the expander mixing inequality on the pair `(U, W)`:
/// `lambda * sqrt(|U||W|(1-|U|/n)(1-|W|/n)) - |e(U,W) - d|U||W|/n|`.
/// Nonnegative slack certifies the inequality for this pair.
pub fn mixing_check(
    g: &RegularGraph,
    u_set: &[usize],
    w_set: &[usize],
    lambda: f64,
) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::invalid(format!("lambda {lambda} is negative")));
    }
    let e = crossing_pairs(g, u_set, w_set)? as f64;
    let n = g.n() as f64;
    let (su, sw) = (u_set.len() as f64, w_set.len() as f64);
    let expected = g.d() as f64 * su * sw / n;
    let spread = lambda * (su * sw * (1.0 - su / n) * (1.0 - sw / n)).sqrt();
    Ok(spread - (e - expected).abs())
}

/// Set size above which any two disjoint vertex sets must have a crossing
/// edge: `lambda * n / (d + lambda)`.
pub fn edge_guarantee_threshold(n: usize, d: usize, lambda: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("edge guarantee needs d >= 1"));
    }
    if lambda < 0.0 {
        return Err(Error::invalid(format!("lambda {lambda} is negative")));
    }
    Ok(lambda * n as f64 / (d as f64 + lambda))
}

/// The closed-form spectral upper bound on the forcing number, in its exact
/// and asymptotic forms.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectralForcingBound {
    pub n: f64,
    pub d: f64,
    pub lambda: f64,
    /// `n - ln(2 lambda/(d+lambda)) / ln(1 - (d+lambda)/n)`.
    pub exact: f64,
    /// `n - ln((d+lambda)/(2 lambda)) * n/(d+lambda)`.
    pub asymptotic: f64,
}

fn validate_bound_inputs(n: f64, d: f64, lambda: f64) -> Result<()> {
    if !(d >= 3.0) {
        return Err(Error::invalid(format!("degree {d} below 3")));
    }
    if d * d > n {
        return Err(Error::invalid(format!("degree {d} exceeds sqrt(n) = {}", n.sqrt())));
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!(
            "lambda {lambda} must be positive (the bound's logarithm diverges)"
        )));
    }
    if lambda > d {
        return Err(Error::invalid(format!("lambda {lambda} exceeds d = {d}")));
    }
    if d + lambda >= n {
        return Err(Error::invalid(format!("d + lambda = {} reaches n = {n}", d + lambda)));
    }
    Ok(())
}

/// Upper bound on the forcing number of an (n, d, lambda) graph.
///
/// Starting from a forcing set of the bound's size, the edge guarantee
/// keeps every stalled step impossible until the uncontrolled set shrinks
/// below the guarantee threshold, and from there a direct count finishes;
/// the exact form inverts that recursion, the asymptotic form replaces the
/// logarithm base with its leading term.
pub fn spectral_forcing_bound(n: f64, d: f64, lambda: f64) -> Result<SpectralForcingBound> {
    validate_bound_inputs(n, d, lambda)?;
    let exact = n - (2.0 * lambda / (d + lambda)).ln() / (1.0 - (d + lambda) / n).ln();
    let asymptotic = n - ((d + lambda) / (2.0 * lambda)).ln() * n / (d + lambda);
    Ok(SpectralForcingBound {
        n,
        d,
        lambda,
        exact,
        asymptotic,
    })
}

/// Step count at which the uncontrolled-set recursion
/// `a_t = (1 - (d+lambda)/n) a_{t-1} - lambda`, `a_1 = n`, first drops
/// below the edge-guarantee threshold plus one, with the closed-form root
/// for comparison.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RecursionCrossing {
    pub steps: usize,
    pub closed_form: f64,
}

pub fn recursion_steps_to_threshold(n: f64, d: f64, lambda: f64) -> Result<RecursionCrossing> {
    validate_bound_inputs(n, d, lambda)?;
    let q = 1.0 - (d + lambda) / n;
    let closed_form = 1.0 + (2.0 * lambda / (d + 2.0 * lambda)).ln() / q.ln();
    let threshold = lambda * n / (d + lambda) + 1.0;
    let cap = (closed_form * 10.0) as usize + 1000;
    let mut a = n;
    let mut t = 1usize;
    while a >= threshold {
        a = q * a - lambda;
        t += 1;
        if t > cap {
            return Err(Error::numerical(format!(
                "recursion failed to cross the threshold within {cap} steps"
            )));
        }
    }
    Ok(RecursionCrossing {
        steps: t,
        closed_form,
    })
}

/// True when `U` and `W` are disjoint and no edge joins them.
pub fn is_bipartite_hole(g: &Graph, u_set: &[usize], w_set: &[usize]) -> Result<bool> {
    let u_mask = vertex_set_mask(g, "U", u_set)?;
    vertex_set_mask(g, "W", w_set)?;
    if w_set.iter().any(|&w| u_mask[w]) {
        return Ok(false);
    }
    Ok(crossing_pairs(g, u_set, w_set)? == 0)
}

fn mask_to_vec(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| mask & (1 << v) != 0).collect()
}

fn lowest_bits(mut mask: u32, count: usize) -> u32 {
    let mut out = 0u32;
    for _ in 0..count {
        let bit = mask & mask.wrapping_neg();
        out |= bit;
        mask ^= bit;
    }
    out
}

fn extend_hole(
    closed: &[u32],
    full: u32,
    n: usize,
    u_mask: u32,
    forbidden: u32,
    start: usize,
    remaining: usize,
    q: usize,
) -> Option<(u32, u32)> {
    if remaining == 0 {
        let pool = full & !forbidden;
        if pool.count_ones() as usize >= q {
            return Some((u_mask, lowest_bits(pool, q)));
        }
        return None;
    }
    for v in start..n {
        if n - v < remaining {
            break;
        }
        let forb = forbidden | closed[v];
        // Every W candidate and every future U candidate must fit in what
        // is left outside the closed neighbourhood of U so far.
        if ((full & !forb).count_ones() as usize) < q {
            continue;
        }
        if let Some(found) = extend_hole(closed, full, n, u_mask | (1 << v), forb, v + 1, remaining - 1, q)
        {
            return Some(found);
        }
    }
    None
}

/// Exhaustively searches for disjoint `U`, `W` of size `q` each with no
/// crossing edge. `None` is a certificate: no such pair exists, so the
/// forcing number is at least `n - 2q`.
///
/// Enumerates `U` with pruning by the closed neighbourhood (any hole's `W`
/// must avoid it entirely); the outer level is sharded across threads. The
/// first hole in lexicographic `U` order is returned, with `W` the lowest
/// eligible vertices.
pub fn find_bipartite_hole(g: &Graph, q: usize) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
    let n = g.n();
    if n > 24 {
        return Err(Error::invalid(format!(
            "exhaustive hole search is guarded at n <= 24, got n={n}"
        )));
    }
    if q == 0 {
        return Err(Error::invalid("hole size q must be >= 1"));
    }
    if 2 * q > n {
        return Ok(None);
    }
    let closed: Vec<u32> = (0..n)
        .map(|v| {
            g.neighbors(v)
                .iter()
                .fold(1u32 << v, |m, &w| m | (1 << w))
        })
        .collect();
    let full = (1u32 << n) - 1;
    let found = (0..n).into_par_iter().find_map_first(|v0| {
        if n - v0 < q {
            return None;
        }
        let forb = closed[v0];
        if ((full & !forb).count_ones() as usize) < q {
            return None;
        }
        extend_hole(&closed, full, n, 1 << v0, forb, v0 + 1, q - 1, q)
    });
    Ok(found.map(|(u, w)| (mask_to_vec(u, n), mask_to_vec(w, n))))
}

/// Randomized hole search for graphs beyond the exhaustive guard: samples
/// `attempts` uniform q-subsets as `U` and checks whether enough vertices
/// avoid its closed neighbourhood. Finding a hole is a certificate;
/// exhausting the attempts proves nothing.
pub fn find_bipartite_hole_sampled(
    g: &Graph,
    q: usize,
    attempts: usize,
    seed: u64,
) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
    let n = g.n();
    if q == 0 {
        return Err(Error::invalid("hole size q must be >= 1"));
    }
    if 2 * q > n {
        return Ok(None);
    }
    for attempt in 0..attempts {
        let mut rng = rng_from_seed(derive_seed(seed, attempt as u64));
        let u_set: Vec<usize> = rand::seq::index::sample(&mut rng, n, q).into_vec();
        let mut excluded = vec![false; n];
        for &v in &u_set {
            excluded[v] = true;
            for &w in g.neighbors(v) {
                excluded[w as usize] = true;
            }
        }
        let pool: Vec<usize> = (0..n).filter(|&v| !excluded[v]).collect();
        if pool.len() >= q {
            let mut u_sorted = u_set;
            u_sorted.sort_unstable();
            return Ok(Some((u_sorted, pool[..q].to_vec())));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::brute_force_z;
    use crate::graph::sample_simple;

    fn dense_lambda_oracle(g: &RegularGraph) -> f64 {
        let n = g.n();
        let m = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| {
            if g.has_edge(i, j) {
                1.0
            } else {
                0.0
            }
        });
        let mut eigs: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().cloned().collect();
        let principal = eigs
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let pos = eigs.iter().position(|&e| e == principal).unwrap();
        eigs.remove(pos);
        eigs.iter().fold(0.0, |acc: f64, &e| acc.max(e.abs()))
    }

    #[test]
    fn eigenvalue_of_named_graphs() {
        let k4 = RegularGraph::complete(4).unwrap();
        assert!((second_eigenvalue(&k4, 1e-9).unwrap() - 1.0).abs() < 1e-7);
        let c6 = RegularGraph::cycle(6).unwrap();
        assert!((second_eigenvalue(&c6, 1e-9).unwrap() - 2.0).abs() < 1e-7);
        let pet = RegularGraph::petersen();
        assert!((second_eigenvalue(&pet, 1e-9).unwrap() - 2.0).abs() < 1e-7);
    }

    #[test]
    fn eigenvalue_matches_dense_oracle() {
        for (n, d, seed) in [(40, 3, 1u64), (30, 4, 2), (24, 5, 3)] {
            let (g, _) = sample_simple(n, d, seed, None).unwrap();
            let fast = second_eigenvalue(&g, 1e-10).unwrap();
            let dense = dense_lambda_oracle(&g);
            assert!(
                (fast - dense).abs() < 1e-6,
                "n={n} d={d}: {fast} vs {dense}"
            );
        }
    }

    #[test]
    fn eigenvalue_brackets_on_sampled_graphs() {
        for (n, d, seed) in [(60, 3, 11u64), (50, 4, 12), (64, 5, 13)] {
            let (g, _) = sample_simple(n, d, seed, None).unwrap();
            let lam = second_eigenvalue(&g, 1e-8).unwrap();
            let df = d as f64;
            assert!(lam < df, "lambda {lam} not below d={d}");
            assert!(
                lam >= df.sqrt() - df / (n as f64).sqrt(),
                "lambda {lam} below the regular-graph floor"
            );
        }
    }

    #[test]
    fn mixing_inequality_exhaustive_small_sets() {
        let pet = RegularGraph::petersen();
        let subsets: Vec<Vec<usize>> = (1u32..1 << 10)
            .filter(|m| m.count_ones() <= 3)
            .map(|m| (0..10).filter(|&v| m & (1 << v) != 0).collect())
            .collect();
        let masks: Vec<u32> = (1u32..1 << 10).filter(|m| m.count_ones() <= 3).collect();
        for (i, u_set) in subsets.iter().enumerate() {
            for (j, w_set) in subsets.iter().enumerate() {
                if masks[i] & masks[j] != 0 {
                    continue;
                }
                let r = mixing_check(&pet, u_set, w_set, 2.0).unwrap();
                assert!(r >= -1e-9, "U={u_set:?} W={w_set:?}: residual {r}");
            }
        }
    }

    #[test]
    fn mixing_equality_cases() {
        let pet = RegularGraph::petersen();
        let all: Vec<usize> = (0..10).collect();
        let r = mixing_check(&pet, &all, &all, 2.0).unwrap();
        assert_eq!(r, 0.0);
        let r = mixing_check(&pet, &[], &all, 2.0).unwrap();
        assert_eq!(r, 0.0);
        assert!(mixing_check(&pet, &[0, 0], &[1], 2.0).is_err());
        assert!(mixing_check(&pet, &[12], &[1], 2.0).is_err());
    }

    #[test]
    fn edge_threshold_values_and_petersen_splits() {
        assert_eq!(edge_guarantee_threshold(10, 3, 2.0).unwrap(), 4.0);
        assert_eq!(edge_guarantee_threshold(10, 3, 0.0).unwrap(), 0.0);
        assert_eq!(edge_guarantee_threshold(10, 3, 3.0).unwrap(), 5.0);
        let pet = RegularGraph::petersen();
        for mask in 0u32..1 << 10 {
            if mask.count_ones() != 5 {
                continue;
            }
            let u_set: Vec<usize> = (0..10).filter(|&v| mask & (1 << v) != 0).collect();
            let w_set: Vec<usize> = (0..10).filter(|&v| mask & (1 << v) == 0).collect();
            assert!(crossing_pairs(&pet, &u_set, &w_set).unwrap() > 0);
        }
    }

    #[test]
    fn forcing_bound_shapes() {
        let b = spectral_forcing_bound(1e6, 100.0, 100.0).unwrap();
        assert_eq!(b.exact, 1e6);
        assert_eq!(b.asymptotic, 1e6);

        let b = spectral_forcing_bound(1e6, 100.0, 20.0).unwrap();
        let deficit_exact = b.n - b.exact;
        let deficit_asym = b.n - b.asymptotic;
        assert!((deficit_exact / deficit_asym - 1.0).abs() < 0.01);

        let mut prev = f64::NEG_INFINITY;
        for i in 1..=40 {
            let lam = 100.0 * i as f64 / 40.0;
            let b = spectral_forcing_bound(1e6, 100.0, lam).unwrap();
            assert!(b.exact >= prev, "bound decreased at lambda={lam}");
            prev = b.exact;
        }
    }

    #[test]
    fn recursion_matches_closed_form() {
        for (n, d, lam) in [(1e6, 100.0, 20.0), (1e8, 1e4, 200.0), (1e5, 50.0, 14.0)] {
            let r = recursion_steps_to_threshold(n, d, lam).unwrap();
            assert!(
                (r.steps as f64 - r.closed_form).abs() <= 1.0 + 1e-6,
                "steps {} vs root {}",
                r.steps,
                r.closed_form
            );
        }
    }

    #[test]
    fn forcing_bound_rejects_bad_inputs() {
        assert!(spectral_forcing_bound(1e6, 2.0, 1.0).is_err());
        assert!(spectral_forcing_bound(100.0, 50.0, 10.0).is_err());
        assert!(spectral_forcing_bound(1e6, 100.0, 0.0).is_err());
        assert!(spectral_forcing_bound(1e6, 100.0, 101.0).is_err());
        assert!(spectral_forcing_bound(200.0, 14.0, 190.0).is_err());
    }

    #[test]
    fn holes_in_named_graphs() {
        let c6 = RegularGraph::cycle(6).unwrap();
        let (u_set, w_set) = find_bipartite_hole(&c6, 2).unwrap().unwrap();
        assert!(is_bipartite_hole(&c6, &u_set, &w_set).unwrap());
        assert_eq!(u_set.len(), 2);
        assert_eq!(w_set.len(), 2);

        let k4 = RegularGraph::complete(4).unwrap();
        assert!(find_bipartite_hole(&k4, 1).unwrap().is_none());

        let pet = RegularGraph::petersen();
        assert!(find_bipartite_hole(&pet, 3).unwrap().is_none());
        // No 3-hole certifies a forcing number of at least 10 - 6 = 4,
        // consistent with the exact value.
        assert_eq!(brute_force_z(&pet).unwrap(), 5);
        let (u2, w2) = find_bipartite_hole(&pet, 2).unwrap().unwrap();
        assert!(is_bipartite_hole(&pet, &u2, &w2).unwrap());
    }

    #[test]
    fn hole_search_guard_and_sampled_variant() {
        let (g, _) = sample_simple(30, 3, 4, None).unwrap();
        assert!(find_bipartite_hole(&g, 2).is_err());
        let c8 = RegularGraph::cycle(8).unwrap();
        let a = find_bipartite_hole_sampled(&c8, 2, 100, 9).unwrap();
        let (u_set, w_set) = a.expect("an 8-cycle has many 2-holes");
        assert!(is_bipartite_hole(&c8, &u_set, &w_set).unwrap());
        let b = find_bipartite_hole_sampled(&c8, 2, 100, 9).unwrap();
        assert_eq!(Some((u_set, w_set)), b);
        assert!(find_bipartite_hole_sampled(&c8, 5, 50, 1).unwrap().is_none());
    }

    #[test]
    fn profile_constructors() {
        let pet = RegularGraph::petersen();
        let p = SpectralProfile::computed(&pet, 1e-8).unwrap();
        assert_eq!(p.source, LambdaSource::Computed);
        assert!((p.lambda - 2.0).abs() < 1e-6);
        let f = SpectralProfile::friedman(1000, 10, 0.0).unwrap();
        assert_eq!(f.lambda, 6.0);
        assert!(SpectralProfile::user(10, 3, -1.0).is_err());
        assert_eq!(friedman_lambda(5, 0.1).unwrap(), 4.1);
        assert!(friedman_lambda(2, 0.0).is_err());
    }
}
