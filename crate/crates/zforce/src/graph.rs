//! Graphs and the pairing (configuration) model.
//!
//! Random d-regular graphs are produced by pairing up `d*n` configuration
//! points (d per vertex bucket), projecting the matching to a multigraph and
//! rejection-sampling until the result is simple. Conditioned on simplicity
//! the outcome is uniform over simple d-regular graphs.

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::indexed::IndexedSet;
use crate::rng::{derive_seed, rng_from_seed};

/// A perfect matching on the `d*n` configuration points.
///
/// Point `p` lives in bucket `p / d` at slot `p % d`. Pairs are stored in
/// creation order with the lower point first.
#[derive(Clone, Debug)]
pub struct Pairing {
    pub n: usize,
    pub d: usize,
    pub pairs: Vec<(u32, u32)>,
}

impl Pairing {
    pub fn bucket(&self, point: u32) -> usize {
        point as usize / self.d
    }

    pub fn slot(&self, point: u32) -> usize {
        point as usize % self.d
    }

    /// True when every point occurs in exactly one pair.
    pub fn is_perfect_matching(&self) -> bool {
        let total = self.n * self.d;
        if self.pairs.len() * 2 != total {
            return false;
        }
        let mut seen = vec![false; total];
        for &(a, b) in &self.pairs {
            for p in [a, b] {
                let p = p as usize;
                if p >= total || seen[p] {
                    return false;
                }
                seen[p] = true;
            }
        }
        true
    }

    /// Projects the matching to a multigraph: each pair becomes an edge
    /// between the buckets of its points.
    pub fn project(&self) -> MultiGraph {
        let edges = self
            .pairs
            .iter()
            .map(|&(a, b)| {
                let (u, v) = (self.bucket(a), self.bucket(b));
                (u.min(v), u.max(v))
            })
            .collect();
        MultiGraph {
            n: self.n,
            d: self.d,
            edges,
        }
    }
}

/// Samples a uniformly random pairing of the `d*n` points.
///
/// The lowest-indexed unmatched point is matched to a uniformly random other
/// unmatched point, repeatedly; the sequential choice still yields a uniform
/// perfect matching. Deterministic given `(n, d, seed)`.
pub fn new_pairing(n: usize, d: usize, seed: u64) -> Result<Pairing> {
    if n == 0 {
        return Err(Error::invalid("pairing requires n >= 1"));
    }
    if d == 0 {
        return Err(Error::invalid("pairing requires d >= 1"));
    }
    let total = n * d;
    if total % 2 != 0 {
        return Err(Error::invalid(format!("dn odd: d={d} n={n}")));
    }

    let mut rng = rng_from_seed(seed);
    let mut unmatched = IndexedSet::with_capacity(total);
    for p in 0..total {
        unmatched.insert(p);
    }
    let mut pairs = Vec::with_capacity(total / 2);
    let mut cursor = 0usize;
    while !unmatched.is_empty() {
        while !unmatched.contains(cursor) {
            cursor += 1;
        }
        let a = cursor;
        unmatched.remove(a);
        let b = unmatched.pick(&mut rng).expect("odd point count");
        unmatched.remove(b);
        pairs.push((a as u32, b as u32));
    }
    Ok(Pairing { n, d, pairs })
}

/// A multigraph: loops and parallel edges allowed. `d` is the declared
/// degree from generation or from a file header; [`MultiGraph::to_regular`]
/// verifies it.
#[derive(Clone, Debug)]
pub struct MultiGraph {
    pub n: usize,
    pub d: usize,
    /// Unordered edges, stored with the lower endpoint first.
    pub edges: Vec<(usize, usize)>,
}

impl MultiGraph {
    /// Degree of `v`, loops counted twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum()
    }

    /// True iff there is no loop and no repeated edge.
    pub fn is_simple(&self) -> bool {
        if self.edges.iter().any(|&(a, b)| a == b) {
            return false;
        }
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }

    /// Converts to a simple [`Graph`], rejecting loops and parallel edges.
    pub fn to_graph(&self) -> Result<Graph> {
        Graph::from_edges(self.n, &self.edges)
    }

    /// Converts to a [`RegularGraph`], additionally checking that every
    /// vertex has exactly the declared degree.
    pub fn to_regular(&self) -> Result<RegularGraph> {
        RegularGraph::new(self.to_graph()?, self.d)
    }

    /// Serializes as edge-list text: header `n m d`, then one `u v` line per
    /// edge with `u <= v`, sorted. Loops appear as `u u`, parallel edges are
    /// repeated; the sort makes output bit-exact reproducible.
    pub fn to_edge_list_string(&self) -> String {
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.n, sorted.len(), self.d);
        for (u, v) in sorted {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Parses the edge-list text format (`n m d` header, then `u v` lines).
/// Blank lines and `#` comments are skipped. The declared degree is carried
/// through unchecked; conversion to [`RegularGraph`] verifies it.
pub fn read_edge_list(reader: impl BufRead) -> Result<MultiGraph> {
    let mut lines = reader.lines();
    let header = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                let t = line.trim();
                if !t.is_empty() && !t.starts_with('#') {
                    break t.to_string();
                }
            }
            None => return Err(Error::invalid("edge list: missing header")),
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::invalid(format!(
            "edge list: header must be 'n m d', got '{header}'"
        )));
    }
    let parse = |s: &str, what: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::invalid(format!("edge list: bad {what} '{s}'")))
    };
    let n = parse(fields[0], "n")?;
    let m = parse(fields[1], "m")?;
    let d = parse(fields[2], "d")?;

    let mut edges = Vec::with_capacity(m);
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::invalid(format!("edge list: bad edge line '{t}'")));
        }
        let u = parse(fields[0], "endpoint")?;
        let v = parse(fields[1], "endpoint")?;
        if u >= n || v >= n {
            return Err(Error::invalid(format!(
                "edge list: endpoint out of range in '{t}' (n={n})"
            )));
        }
        edges.push((u.min(v), u.max(v)));
    }
    if edges.len() != m {
        return Err(Error::invalid(format!(
            "edge list: header declares m={m} edges, found {}",
            edges.len()
        )));
    }
    Ok(MultiGraph { n, d, edges })
}

/// A simple undirected graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
}

impl Graph {
    /// Builds from an edge list, rejecting out-of-range endpoints, loops and
    /// parallel edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u},{v}) out of range for n={n}"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("loop at vertex {u}")));
            }
            adj[u].push(v as u32);
            adj[v].push(u as u32);
        }
        for (v, nbrs) in adj.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("parallel edge at vertex {v}")));
            }
        }
        Ok(Graph { adj })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&(v as u32)).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Edges with the lower endpoint first, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for v in 0..self.n() {
            for &w in &self.adj[v] {
                if v < w as usize {
                    out.push((v, w as usize));
                }
            }
        }
        out
    }

    /// Connected components as sorted vertex lists, ordered by smallest
    /// member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        let mut queue = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push(start);
            let mut comp = Vec::new();
            while let Some(v) = queue.pop() {
                comp.push(v);
                for &w in &self.adj[v] {
                    let w = w as usize;
                    if !seen[w] {
                        seen[w] = true;
                        queue.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Path 0-1-...-(n-1).
    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::from_edges(n, &edges).expect("path edges are valid")
    }
}

/// A simple d-regular graph. Dereferences to [`Graph`] for queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularGraph {
    graph: Graph,
    d: usize,
}

impl RegularGraph {
    /// Wraps a graph after verifying every vertex has degree exactly `d`.
    pub fn new(graph: Graph, d: usize) -> Result<RegularGraph> {
        for v in 0..graph.n() {
            if graph.degree(v) != d {
                return Err(Error::invalid(format!(
                    "vertex {v} has degree {}, expected {d}",
                    graph.degree(v)
                )));
            }
        }
        Ok(RegularGraph { graph, d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn to_multigraph(&self) -> MultiGraph {
        MultiGraph {
            n: self.graph.n(),
            d: self.d,
            edges: self.graph.edges(),
        }
    }

    pub fn to_edge_list_string(&self) -> String {
        self.to_multigraph().to_edge_list_string()
    }

    /// Cycle 0-1-...-(n-1)-0; requires n >= 3.
    pub fn cycle(n: usize) -> Result<RegularGraph> {
        if n < 3 {
            return Err(Error::invalid("cycle requires n >= 3"));
        }
        let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
        RegularGraph::new(Graph::from_edges(n, &edges)?, 2)
    }

    /// Complete graph on n vertices.
    pub fn complete(n: usize) -> Result<RegularGraph> {
        if n == 0 {
            return Err(Error::invalid("complete graph requires n >= 1"));
        }
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        RegularGraph::new(Graph::from_edges(n, &edges)?, n - 1)
    }

    /// The Petersen graph: outer 5-cycle 0..4, inner pentagram 5..9, spokes.
    pub fn petersen() -> RegularGraph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
            edges.push((i, 5 + i));
        }
        RegularGraph::new(Graph::from_edges(10, &edges).unwrap(), 3).unwrap()
    }
}

impl std::ops::Deref for RegularGraph {
    type Target = Graph;

    fn deref(&self) -> &Graph {
        &self.graph
    }
}

/// Number of cycles of a 2-regular graph (each component is one cycle).
pub fn cycle_count_2regular(g: &RegularGraph) -> Result<usize> {
    if g.d() != 2 {
        return Err(Error::invalid(format!(
            "cycle count requires a 2-regular graph, got d={}",
            g.d()
        )));
    }
    Ok(g.components().len())
}

/// Default rejection budget for [`sample_simple`]: ten times the expected
/// number of attempts, capped at one million.
pub fn default_max_attempts(d: usize) -> usize {
    let expected = (((d * d) as f64 - 1.0) / 4.0).exp();
    let budget = (10.0 * expected.ceil()) as usize;
    budget.clamp(1, 1_000_000)
}

/// Outcome bookkeeping for [`sample_simple`].
#[derive(Clone, Copy, Debug)]
pub struct SampleStats {
    pub attempts: usize,
    pub seed: u64,
}

/// Rejection-samples pairings until the projection is simple.
///
/// Attempt `k` uses the sub-seed `derive_seed(seed, k)`, so outcomes are
/// deterministic given `(n, d, seed)` and independent of how many attempts
/// other samples needed. The result is uniform over simple d-regular graphs.
pub fn sample_simple(
    n: usize,
    d: usize,
    seed: u64,
    max_attempts: Option<usize>,
) -> Result<(RegularGraph, SampleStats)> {
    if d >= n {
        return Err(Error::invalid(format!(
            "simple d-regular graph requires d < n, got d={d} n={n}"
        )));
    }
    let budget = max_attempts.unwrap_or_else(|| default_max_attempts(d));
    for attempt in 0..budget {
        let pairing = new_pairing(n, d, derive_seed(seed, attempt as u64))?;
        let mg = pairing.project();
        if mg.is_simple() {
            let g = mg.to_regular()?;
            return Ok((
                g,
                SampleStats {
                    attempts: attempt + 1,
                    seed,
                },
            ));
        }
    }
    Err(Error::numerical(format!(
        "no simple graph in {budget} attempts (n={n}, d={d}, seed={seed})"
    )))
}
