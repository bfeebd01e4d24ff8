//! Degree-greedy forcing-set constructions.
//!
//! Both algorithms grow a Z-sequence by repeatedly processing a dominated
//! vertex with the fewest undominated neighbours ("minimum positive type"),
//! shrinking the undominated reservoir as slowly as possible. The plain
//! variant keeps one dominated set; the smart variant splits it into the
//! future forcing set and the witness set, and can occasionally insert an
//! extra sequence vertex when a candidate's whole neighbourhood already
//! sits in the future forcing set.
//!
//! Runs are deterministic given the seed. Every run yields a
//! [`ZSequenceRecord`] whose sequence and witnesses satisfy the witness
//! condition; the smart record is reconstructed by replaying the forcing
//! process from its final forcing set, because the raw order in which the
//! smart variant appends insertions does not itself admit witnesses.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::{closure, zseq_from_forcing_set, RunStatus, ZSequenceRecord};
use crate::graph::RegularGraph;
use crate::indexed::IndexedSet;
use crate::rng::{rng_from_seed, Rng};

/// Which dominated set a processed vertex came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetTag {
    T,
    T1,
    T2,
}

impl SetTag {
    fn as_str(self) -> &'static str {
        match self {
            SetTag::T => "T",
            SetTag::T1 => "T1",
            SetTag::T2 => "T2",
        }
    }
}

/// Preference between the two dominated sets of the smart variant when both
/// hold minimum-type vertices. `Uniform` picks uniformly over the union.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmartPolicy {
    #[default]
    Uniform,
    PreferT1,
    PreferT2,
}

#[derive(Clone, Debug)]
pub struct GreedyOptions {
    /// On a stalled component, restart from an untouched vertex instead of
    /// reporting failure. The run is then flagged multi-component.
    pub restart_components: bool,
    pub policy: SmartPolicy,
    pub record_trace: bool,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            restart_components: false,
            policy: SmartPolicy::Uniform,
            record_trace: true,
        }
    }
}

/// One step of a greedy run: the step type, where the processed vertex came
/// from, and the per-type dominated counts after the step.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub step_type: usize,
    pub source: SetTag,
    /// Dominated vertices of each type `0..d-1` after the step.
    pub type_counts: Vec<usize>,
    pub undominated: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub n: usize,
    pub d: usize,
    pub rows: Vec<TraceRow>,
}

impl GreedyTrace {
    /// CSV with header `t,type,source,T0,...,T{d-1},U`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("t,type,source");
        for i in 0..self.d {
            out.push_str(&format!(",T{i}"));
        }
        out.push_str(",U\n");
        for row in &self.rows {
            out.push_str(&format!("{},{},{}", row.t, row.step_type, row.source.as_str()));
            for c in &row.type_counts {
                out.push_str(&format!(",{c}"));
            }
            out.push_str(&format!(",{}\n", row.undominated));
        }
        out
    }
}

/// A completed greedy run: the certificate, the optional trace, and whether
/// a restart stitched several components together.
#[derive(Clone, Debug)]
pub struct GreedyRun {
    pub record: ZSequenceRecord,
    pub trace: Option<GreedyTrace>,
    pub multi_component: bool,
    pub n: usize,
    pub d: usize,
}

impl GreedyRun {
    pub fn b_size(&self) -> usize {
        self.record.forcing_set.len()
    }

    pub fn b_frac(&self) -> f64 {
        self.b_size() as f64 / self.n as f64
    }

    pub fn status(&self) -> RunStatus {
        self.record.status
    }
}

/// Scaled trace for comparison against the fluid-limit solution: `x = t/n`,
/// `ys[row][i] = T_i(t)/n`, `us[row] = |U(t)|/n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScaledSeries {
    pub n: usize,
    pub d: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    pub us: Vec<f64>,
}

/// Rescales a trace by `1/n` in both time and counts.
pub fn trace_to_scaled_series(trace: &GreedyTrace) -> ScaledSeries {
    let n = trace.n as f64;
    ScaledSeries {
        n: trace.n,
        d: trace.d,
        xs: trace.rows.iter().map(|r| r.t as f64 / n).collect(),
        ys: trace
            .rows
            .iter()
            .map(|r| r.type_counts.iter().map(|&c| c as f64 / n).collect())
            .collect(),
        us: trace.rows.iter().map(|r| r.undominated as f64 / n).collect(),
    }
}

/// Incremental dominated/undominated bookkeeping shared by both variants.
///
/// `membership[v]` is 0 for undominated, 1 or 2 for the dominated sets (the
/// plain variant only uses 1). `buckets[k][r]` indexes dominated vertices of
/// set `k+1` with exactly `r` undominated neighbours.
struct State<'g> {
    g: &'g RegularGraph,
    d: usize,
    membership: Vec<u8>,
    u_count: Vec<u32>,
    u_size: usize,
    buckets: [Vec<IndexedSet>; 2],
    // Epoch-stamped scratch marks for neighbourhood tests.
    stamp: Vec<u32>,
    epoch: u32,
}

impl<'g> State<'g> {
    fn new(g: &'g RegularGraph) -> State<'g> {
        let n = g.n();
        let d = g.d();
        let mk = || (0..=d).map(|_| IndexedSet::with_capacity(n)).collect::<Vec<_>>();
        State {
            g,
            d,
            membership: vec![0; n],
            u_count: vec![d as u32; n],
            u_size: n,
            buckets: [mk(), mk()],
            stamp: vec![0; n],
            epoch: 0,
        }
    }

    fn in_u(&self, v: usize) -> bool {
        self.membership[v] == 0
    }

    fn bucket_of(&mut self, set: u8, r: usize) -> &mut IndexedSet {
        &mut self.buckets[(set - 1) as usize][r]
    }

    /// Moves an undominated vertex into dominated set `set`, updating the
    /// neighbour counts and bucket memberships it disturbs. The vertex's own
    /// bucket entry is added by `settle`.
    fn remove_from_u(&mut self, v: usize, set: u8) {
        debug_assert!(self.in_u(v));
        self.membership[v] = set;
        self.u_size -= 1;
        for &x in self.g.neighbors(v) {
            let x = x as usize;
            let m = self.membership[x];
            let c = self.u_count[x] as usize;
            if m != 0 {
                self.bucket_of(m, c).remove(x);
                self.bucket_of(m, c - 1).insert(x);
            }
            self.u_count[x] = (c - 1) as u32;
        }
    }

    /// Files a freshly dominated vertex under its now-stable type.
    fn settle(&mut self, v: usize) {
        let set = self.membership[v];
        debug_assert!(set != 0);
        let c = self.u_count[v] as usize;
        self.bucket_of(set, c).insert(v);
    }

    /// Moves a dominated vertex between the two dominated sets.
    fn transfer(&mut self, v: usize, to: u8) {
        let from = self.membership[v];
        debug_assert!(from != 0 && to != 0);
        if from == to {
            return;
        }
        let c = self.u_count[v] as usize;
        self.bucket_of(from, c).remove(v);
        self.bucket_of(to, c).insert(v);
        self.membership[v] = to;
    }

    /// Smallest positive type with a nonempty bucket in either set.
    fn min_positive_type(&self) -> Option<usize> {
        (1..=self.d).find(|&r| {
            !self.buckets[0][r].is_empty() || !self.buckets[1][r].is_empty()
        })
    }

    /// Picks a vertex of type `r` according to the policy. Returns the
    /// vertex and the set it lives in.
    fn pick_of_type(&self, r: usize, policy: SmartPolicy, rng: &mut Rng) -> (usize, u8) {
        let b1 = &self.buckets[0][r];
        let b2 = &self.buckets[1][r];
        let from_first = match policy {
            SmartPolicy::Uniform => {
                let total = b1.len() + b2.len();
                debug_assert!(total > 0);
                rng.gen_range(0..total) < b1.len()
            }
            SmartPolicy::PreferT1 => !b1.is_empty(),
            SmartPolicy::PreferT2 => b2.is_empty(),
        };
        if from_first {
            (b1.pick(rng).expect("bucket nonempty"), 1)
        } else {
            (b2.pick(rng).expect("bucket nonempty"), 2)
        }
    }

    fn undominated_neighbors(&self, v: usize) -> Vec<usize> {
        self.g
            .neighbors(v)
            .iter()
            .map(|&x| x as usize)
            .filter(|&x| self.in_u(x))
            .collect()
    }

    fn mark_neighbors(&mut self, v: usize) {
        self.epoch += 1;
        for &x in self.g.neighbors(v) {
            self.stamp[x as usize] = self.epoch;
        }
    }

    fn is_marked(&self, x: usize) -> bool {
        self.stamp[x] == self.epoch
    }

    fn type_counts(&self) -> Vec<usize> {
        (0..self.d)
            .map(|r| self.buckets[0][r].len() + self.buckets[1][r].len())
            .collect()
    }

    fn push_row(&self, trace: &mut Option<GreedyTrace>, t: usize, r: usize, source: SetTag) {
        if let Some(trace) = trace {
            debug_assert!(self.buckets[0][self.d].is_empty() && self.buckets[1][self.d].is_empty());
            trace.rows.push(TraceRow {
                t,
                step_type: r,
                source,
                type_counts: self.type_counts(),
                undominated: self.u_size,
            });
        }
    }

    /// Vertices of a given dominated set, sorted.
    fn members_of(&self, set: u8) -> Vec<usize> {
        (0..self.g.n())
            .filter(|&v| self.membership[v] == set)
            .collect()
    }
}

fn check_input(g: &RegularGraph) -> Result<()> {
    if g.n() == 0 {
        return Err(Error::invalid("greedy requires a nonempty graph"));
    }
    if g.d() == 0 {
        return Err(Error::invalid(
            "greedy requires d >= 1 (no isolated vertices)",
        ));
    }
    Ok(())
}

/// Runs the plain degree-greedy construction.
///
/// Starts from a random vertex, moves its closed neighbourhood out of the
/// reservoir, then repeatedly processes a uniformly random vertex of
/// minimum positive type, recording a uniformly random undominated
/// neighbour as its witness. The recorded forcing set is the complement of
/// the witness set; on connected inputs its size is `n - |S|`.
pub fn degree_greedy(g: &RegularGraph, seed: u64, opts: &GreedyOptions) -> Result<GreedyRun> {
    check_input(g)?;
    let n = g.n();
    let d = g.d();
    let mut rng = rng_from_seed(seed);
    let mut st = State::new(g);
    let mut trace = opts.record_trace.then(|| GreedyTrace {
        n,
        d,
        rows: Vec::new(),
    });
    let mut sequence = Vec::new();
    let mut witnesses = Vec::new();
    let mut multi_component = false;

    // Initialization: seed vertex plus its whole closed neighbourhood leave
    // the reservoir; the seed vertex joins the sequence with a random
    // neighbour as witness. Restarts reuse this on untouched components.
    let initialize = |st: &mut State,
                          sequence: &mut Vec<usize>,
                          witnesses: &mut Vec<usize>,
                          rng: &mut Rng,
                          v1: usize| {
        let nbrs: Vec<usize> = g.neighbors(v1).iter().map(|&x| x as usize).collect();
        let w = nbrs[rng.gen_range(0..nbrs.len())];
        sequence.push(v1);
        witnesses.push(w);
        st.remove_from_u(v1, 1);
        for &x in &nbrs {
            st.remove_from_u(x, 1);
        }
        st.settle(v1);
        for &x in &nbrs {
            st.settle(x);
        }
    };

    let v1 = rng.gen_range(0..n);
    initialize(&mut st, &mut sequence, &mut witnesses, &mut rng, v1);
    st.push_row(&mut trace, 0, d, SetTag::T);

    let mut t = 0usize;
    let status = loop {
        let Some(r) = st.min_positive_type() else {
            if st.u_size == 0 {
                break RunStatus::Complete;
            }
            if !opts.restart_components {
                break RunStatus::ComponentStalled;
            }
            // The reservoir now holds only untouched components; restart on
            // a uniformly random vertex of one of them.
            multi_component = true;
            let pool: Vec<usize> = (0..n).filter(|&v| st.in_u(v)).collect();
            let v_new = pool[rng.gen_range(0..pool.len())];
            initialize(&mut st, &mut sequence, &mut witnesses, &mut rng, v_new);
            t += 1;
            st.push_row(&mut trace, t, d, SetTag::T);
            continue;
        };
        t += 1;
        let (v, _) = st.pick_of_type(r, SmartPolicy::Uniform, &mut rng);
        let batch = st.undominated_neighbors(v);
        debug_assert_eq!(batch.len(), r);
        let w = batch[rng.gen_range(0..batch.len())];
        sequence.push(v);
        witnesses.push(w);
        for &m in &batch {
            st.remove_from_u(m, 1);
        }
        for &m in &batch {
            st.settle(m);
        }
        st.push_row(&mut trace, t, r, SetTag::T);
    };

    let mut in_witness = vec![false; n];
    for &w in &witnesses {
        in_witness[w] = true;
    }
    let forcing_set: Vec<usize> = (0..n).filter(|&v| !in_witness[v]).collect();
    Ok(GreedyRun {
        record: ZSequenceRecord {
            sequence,
            witnesses,
            forcing_set,
            status,
            seed: Some(seed),
        },
        trace,
        multi_component,
        n,
        d,
    })
}

/// Runs the smart degree-greedy construction.
///
/// The dominated vertices are split into the future forcing set (set 1) and
/// the witness set (set 2). Each step processes a minimum-positive-type
/// vertex `v`; if `v` is in set 1 with type at least 2 and some undominated
/// neighbour `u` has its whole neighbourhood in set 1, then `u` is inserted
/// into the sequence, `v` moves to set 2 and `u` to set 1. The witness is
/// the undominated neighbour of `v` with the fewest undominated neighbours
/// of its own outside `N(v)`; it joins set 2 and the rest of `N(v)` joins
/// set 1.
///
/// The returned record is rebuilt by replaying the forcing process from the
/// final set 1, which orders the sequence consistently with its witnesses.
pub fn smart_degree_greedy(g: &RegularGraph, seed: u64, opts: &GreedyOptions) -> Result<GreedyRun> {
    check_input(g)?;
    let n = g.n();
    let d = g.d();
    let mut rng = rng_from_seed(seed);
    let mut st = State::new(g);
    let mut trace = opts.record_trace.then(|| GreedyTrace {
        n,
        d,
        rows: Vec::new(),
    });
    let mut raw_len = 0usize;
    let mut multi_component = false;

    // Only the seed vertex leaves the reservoir up front; the first loop
    // step then processes it at full type.
    let v1 = rng.gen_range(0..n);
    st.remove_from_u(v1, 1);
    st.settle(v1);

    let mut t = 0usize;
    let status = loop {
        let Some(r) = st.min_positive_type() else {
            if st.u_size == 0 {
                break RunStatus::Complete;
            }
            if !opts.restart_components {
                break RunStatus::ComponentStalled;
            }
            multi_component = true;
            let pool: Vec<usize> = (0..n).filter(|&v| st.in_u(v)).collect();
            let v_new = pool[rng.gen_range(0..pool.len())];
            st.remove_from_u(v_new, 1);
            st.settle(v_new);
            continue;
        };
        t += 1;
        let (v, source) = st.pick_of_type(r, opts.policy, &mut rng);

        // Insertion clause: a type >= 2 vertex of set 1 whose neighbourhood
        // holds an undominated vertex u with N(u) entirely in set 1. The
        // lowest-index such u is inserted and v trades places into set 2.
        if source == 1 && r >= 2 {
            let candidates = st.undominated_neighbors(v);
            let insert = candidates.into_iter().find(|&u| {
                g.neighbors(u)
                    .iter()
                    .all(|&x| st.membership[x as usize] == 1)
            });
            if let Some(u) = insert {
                raw_len += 1;
                st.transfer(v, 2);
                st.remove_from_u(u, 1);
                st.settle(u);
            }
        }

        // Witness choice: minimize the count of the candidate's undominated
        // neighbours outside N(v); ties break uniformly.
        let candidates = st.undominated_neighbors(v);
        debug_assert!(!candidates.is_empty());
        st.mark_neighbors(v);
        let mut best_score = usize::MAX;
        let mut best: Vec<usize> = Vec::new();
        for &w in &candidates {
            let score = g
                .neighbors(w)
                .iter()
                .map(|&x| x as usize)
                .filter(|&x| st.in_u(x) && !st.is_marked(x))
                .count();
            if score < best_score {
                best_score = score;
                best.clear();
            }
            if score == best_score {
                best.push(w);
            }
        }
        let w = best[rng.gen_range(0..best.len())];
        raw_len += 1;

        st.remove_from_u(w, 2);
        for &m in &candidates {
            if m != w {
                st.remove_from_u(m, 1);
            }
        }
        st.settle(w);
        for &m in &candidates {
            if m != w {
                st.settle(m);
            }
        }
        let tag = if source == 1 { SetTag::T1 } else { SetTag::T2 };
        st.push_row(&mut trace, t, r, tag);
    };

    // Replay the forcing process from the final set 1 to obtain a sequence
    // in witness-consistent order. On stalled runs the replay is partial.
    let b = st.members_of(1);
    let record = match status {
        RunStatus::Complete => {
            let mut rec = zseq_from_forcing_set(g, &b)?;
            debug_assert_eq!(rec.sequence.len(), raw_len);
            rec.seed = Some(seed);
            rec
        }
        RunStatus::ComponentStalled => {
            let outcome = closure(g, &b)?;
            let witnesses: Vec<usize> = outcome.forces.iter().map(|&(_, w)| w).collect();
            let mut in_witness = vec![false; n];
            for &w in &witnesses {
                in_witness[w] = true;
            }
            ZSequenceRecord {
                sequence: outcome.forces.iter().map(|&(v, _)| v).collect(),
                witnesses,
                forcing_set: (0..n).filter(|&v| !in_witness[v]).collect(),
                status,
                seed: Some(seed),
            }
        }
    };

    Ok(GreedyRun {
        record,
        trace,
        multi_component,
        n,
        d,
    })
}
