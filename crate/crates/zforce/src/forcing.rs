//! The zero forcing process and Z-sequence bookkeeping.
//!
//! A black vertex with exactly one white neighbour forces it black; the
//! closure applies this rule to exhaustion. The final black set does not
//! depend on the order of forces, so the closure fixes a deterministic
//! order (lowest-index eligible forcer) to make replays byte-stable.
//!
//! A Z-sequence is an ordered list `v_1..v_k` where each `v_i` has a witness
//! `w_i` in `N(v_i)` outside every earlier closed neighbourhood `N[v_j]`.
//! The two constructions below convert between forcing sets and Z-sequences:
//! the chronological forces of a completed closure form a valid Z-sequence,
//! and the complement of a witness set is a zero forcing set. Together these
//! give the complementarity `(max sequence length) + Z = n` on graphs
//! without isolated vertices, which the oracle tests exercise.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Result of running the forcing process from an initial set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForcingOutcome {
    /// Sorted list of black vertices at fixpoint.
    pub final_black: Vec<usize>,
    /// Chronological `(forcer, forced)` pairs.
    pub forces: Vec<(usize, usize)>,
    /// True when some vertex stayed white.
    pub stalled: bool,
}

/// How a greedy run or forcing construction ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    ComponentStalled,
}

/// A Z-sequence with its witnesses and the derived forcing set.
///
/// Invariants: `sequence` and `witnesses` have equal length, the witness
/// condition holds index by index, and `forcing_set` is the sorted
/// complement of the witness set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZSequenceRecord {
    pub sequence: Vec<usize>,
    pub witnesses: Vec<usize>,
    pub forcing_set: Vec<usize>,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn check_vertices(g: &Graph, vs: &[usize], what: &str) -> Result<()> {
    for &v in vs {
        if v >= g.n() {
            return Err(Error::invalid(format!(
                "{what} vertex {v} out of range (n={})",
                g.n()
            )));
        }
    }
    Ok(())
}

/// Runs the forcing process from `initial` to its fixpoint.
///
/// Ties are broken toward the lowest-index eligible forcer, which pins down
/// the chronological force list; the final black set is order-independent.
pub fn closure(g: &Graph, initial: &[usize]) -> Result<ForcingOutcome> {
    check_vertices(g, initial, "initial")?;
    let n = g.n();
    let mut black = vec![false; n];
    for &v in initial {
        black[v] = true;
    }
    let mut white_count = vec![0u32; n];
    for v in 0..n {
        white_count[v] = g.neighbors(v).iter().filter(|&&w| !black[w as usize]).count() as u32;
    }

    // Candidate forcers; entries go stale when counts move on, so each pop
    // revalidates before acting.
    let mut eligible: BTreeSet<usize> = (0..n)
        .filter(|&v| black[v] && white_count[v] == 1)
        .collect();
    let mut forces = Vec::new();

    while let Some(&v) = eligible.iter().next() {
        eligible.remove(&v);
        if !black[v] || white_count[v] != 1 {
            continue;
        }
        let w = g
            .neighbors(v)
            .iter()
            .map(|&w| w as usize)
            .find(|&w| !black[w])
            .expect("white neighbour exists while count is 1");
        black[w] = true;
        forces.push((v, w));
        for &x in g.neighbors(w) {
            let x = x as usize;
            white_count[x] -= 1;
            if black[x] && white_count[x] == 1 {
                eligible.insert(x);
            }
        }
        if white_count[w] == 1 {
            eligible.insert(w);
        }
    }

    let final_black: Vec<usize> = (0..n).filter(|&v| black[v]).collect();
    let stalled = final_black.len() != n;
    Ok(ForcingOutcome {
        final_black,
        forces,
        stalled,
    })
}

/// True iff the closure of `s` colours the whole graph.
pub fn is_zero_forcing_set(g: &Graph, s: &[usize]) -> Result<bool> {
    Ok(!closure(g, s)?.stalled)
}

/// Builds the Z-sequence certificate of a zero forcing set.
///
/// The forcers of the completed closure, in chronological order, form the
/// sequence; the vertices they forced are the witnesses. Rejects sets whose
/// closure stalls.
pub fn zseq_from_forcing_set(g: &Graph, b: &[usize]) -> Result<ZSequenceRecord> {
    let outcome = closure(g, b)?;
    if outcome.stalled {
        return Err(Error::invalid(
            "not a zero forcing set: closure stalled".to_string(),
        ));
    }
    let mut forcing_set: Vec<usize> = b.to_vec();
    forcing_set.sort_unstable();
    forcing_set.dedup();
    Ok(ZSequenceRecord {
        sequence: outcome.forces.iter().map(|&(v, _)| v).collect(),
        witnesses: outcome.forces.iter().map(|&(_, w)| w).collect(),
        forcing_set,
        status: RunStatus::Complete,
        seed: None,
    })
}

/// Recovers the forcing set `V \ W` from a valid Z-sequence and verifies it
/// forces the whole graph.
pub fn forcing_set_from_zseq(g: &Graph, sequence: &[usize], witnesses: &[usize]) -> Result<Vec<usize>> {
    if !validate_zseq(g, sequence, witnesses)? {
        return Err(Error::invalid("witness condition violated"));
    }
    let mut in_witness = vec![false; g.n()];
    for &w in witnesses {
        in_witness[w] = true;
    }
    let b: Vec<usize> = (0..g.n()).filter(|&v| !in_witness[v]).collect();
    if !is_zero_forcing_set(g, &b)? {
        return Err(Error::numerical(
            "internal: witness complement failed to force".to_string(),
        ));
    }
    Ok(b)
}

/// Checks the witness condition `w_i in N(v_i) \ (N[v_1] u .. u N[v_{i-1}])`
/// index by index. Structural problems (length mismatch, bad indices) are
/// errors; a condition violation returns `Ok(false)`.
pub fn validate_zseq(g: &Graph, sequence: &[usize], witnesses: &[usize]) -> Result<bool> {
    if sequence.len() != witnesses.len() {
        return Err(Error::invalid(format!(
            "sequence length {} != witness length {}",
            sequence.len(),
            witnesses.len()
        )));
    }
    check_vertices(g, sequence, "sequence")?;
    check_vertices(g, witnesses, "witness")?;

    let mut dominated = vec![false; g.n()];
    for (&v, &w) in sequence.iter().zip(witnesses) {
        if dominated[w] || !g.has_edge(v, w) {
            return Ok(false);
        }
        dominated[v] = true;
        for &x in g.neighbors(v) {
            dominated[x as usize] = true;
        }
    }
    Ok(true)
}
