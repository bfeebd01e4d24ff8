//! Exact small-graph oracles by exhaustive search.
//!
//! These deliberately share no code with the production closure: forcing is
//! re-implemented here as a bitmask fixpoint sweep so the two routes check
//! each other. Sizes are guarded; these are test oracles, not tools for
//! large graphs.

use crate::error::{Error, Result};
use crate::graph::Graph;

const Z_MAX_N: usize = 20;
const GRUNDY_MAX_N: usize = 16;

fn adjacency_masks(g: &Graph) -> Vec<u32> {
    (0..g.n())
        .map(|v| {
            g.neighbors(v)
                .iter()
                .fold(0u32, |m, &w| m | (1 << w))
        })
        .collect()
}

/// Forcing fixpoint on a bitmask: sweep all vertices until stable.
fn closure_mask(adj: &[u32], initial: u32) -> u32 {
    let mut black = initial;
    loop {
        let mut changed = false;
        for (v, &nbrs) in adj.iter().enumerate() {
            if black & (1 << v) == 0 {
                continue;
            }
            let white = nbrs & !black;
            if white != 0 && white & (white - 1) == 0 {
                black |= white;
                changed = true;
            }
        }
        if !changed {
            return black;
        }
    }
}

/// Next subset with the same popcount (Gosper's hack).
fn next_same_weight(v: u32) -> u32 {
    let c = v & v.wrapping_neg();
    let r = v + c;
    (((r ^ v) >> 2) / c) | r
}

/// Exact zero forcing number by subset enumeration in increasing size.
pub fn brute_force_z(g: &Graph) -> Result<usize> {
    let n = g.n();
    if n == 0 || n > Z_MAX_N {
        return Err(Error::invalid(format!(
            "exact Z supports 1 <= n <= {Z_MAX_N}, got n={n}"
        )));
    }
    let adj = adjacency_masks(g);
    let full = (1u32 << n) - 1;
    for k in 1..=n {
        let mut s = (1u32 << k) - 1;
        loop {
            if closure_mask(&adj, s) == full {
                return Ok(k);
            }
            let next = next_same_weight(s);
            if next > full || next < s {
                break;
            }
            s = next;
        }
    }
    unreachable!("the full vertex set always forces")
}

/// Exact maximum Z-sequence length by depth-first search.
///
/// Extending a sequence with `v` requires a witness in `N(v)` outside the
/// union of earlier closed neighbourhoods; which witness is taken does not
/// change that union, so the search memoizes on the dominated mask alone.
pub fn brute_force_grundy(g: &Graph) -> Result<usize> {
    let n = g.n();
    if n == 0 || n > GRUNDY_MAX_N {
        return Err(Error::invalid(format!(
            "exact Grundy supports 1 <= n <= {GRUNDY_MAX_N}, got n={n}"
        )));
    }
    let adj = adjacency_masks(g);
    let closed: Vec<u32> = adj
        .iter()
        .enumerate()
        .map(|(v, &m)| m | (1 << v))
        .collect();
    let mut memo = vec![-1i32; 1usize << n];

    fn solve(dominated: u32, n: usize, adj: &[u32], closed: &[u32], memo: &mut [i32]) -> i32 {
        let cached = memo[dominated as usize];
        if cached >= 0 {
            return cached;
        }
        let mut best = 0;
        for v in 0..n {
            if adj[v] & !dominated != 0 {
                let rest = solve(dominated | closed[v], n, adj, closed, memo);
                best = best.max(1 + rest);
            }
        }
        memo[dominated as usize] = best;
        best
    }

    Ok(solve(0, n, &adj, &closed, &mut memo) as usize)
}
