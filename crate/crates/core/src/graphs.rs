//! Small simple graphs: constructors, exact independence number,
//! isomorphism and induced-subgraph search.
//!
//! Adjacency is stored as one `u64` bitmask per vertex, which caps graphs
//! at 64 vertices. The search routines have tighter envelopes of their own.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_VERTICES: usize = 64;
pub const ALPHA_MAX_VERTICES: usize = 32;
pub const ISO_MAX_VERTICES: usize = 12;
pub const INDUCED_MAX_VERTICES: usize = 16;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

/// On-disk graph format: `{"n": 5, "edges": [[0, 1], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Graph> {
        let edges: Vec<(usize, usize)> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edges(file.n, &edges)
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> GraphFile {
        GraphFile { n: g.n, edges: g.edges().into_iter().map(|(i, j)| [i, j]).collect() }
    }
}

impl Graph {
    pub fn empty(n: usize) -> Graph {
        assert!(n <= MAX_VERTICES, "graph order {n} exceeds {MAX_VERTICES}");
        Graph { n, adj: vec![0; n] }
    }

    /// Builds a graph from unordered edges. Self-loops, out-of-range
    /// endpoints and duplicate edges (in either orientation) are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        if n > MAX_VERTICES {
            return Err(Error::capacity(format!("graph order {n} exceeds {MAX_VERTICES}")));
        }
        let mut g = Graph::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("edge ({i},{j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at vertex {i}")));
            }
            if g.has_edge(i, j) {
                return Err(Error::invalid(format!("duplicate edge ({i},{j})")));
            }
            g.add_edge(i, j);
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Graph> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn complete(n: usize) -> Graph {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn path(n: usize) -> Graph {
        let mut g = Graph::empty(n);
        for i in 1..n {
            g.add_edge(i - 1, i);
        }
        g
    }

    /// Inserts `{i, j}`; a no-op if the edge is already present.
    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i < self.n && j < self.n && i != j, "bad edge ({i},{j})");
        self.adj[i] |= 1 << j;
        self.adj[j] |= 1 << i;
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i] >> j & 1 == 1
    }

    pub fn neighbors_mask(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges as `(i, j)` with `i < j`, lexicographically ordered.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// True when every pair of distinct vertices in `set` is non-adjacent.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter().enumerate().all(|(k, &i)| set[k + 1..].iter().all(|&j| i != j && !self.has_edge(i, j)))
    }

    pub fn is_clique(&self, set: &[usize]) -> bool {
        set.iter().enumerate().all(|(k, &i)| set[k + 1..].iter().all(|&j| self.has_edge(i, j)))
    }

    /// Relabels vertices: vertex `i` becomes `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Graph {
        let mut g = Graph::empty(self.n);
        for (i, j) in self.edges() {
            g.add_edge(perm[i], perm[j]);
        }
        g
    }

    fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = (0..self.n).map(|v| self.degree(v)).collect();
        d.sort_unstable();
        d
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges())
    }
}

/// The cycle `C_n`.
pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::invalid(format!("cycle needs at least 3 vertices, got {n}")));
    }
    circulant(n, &[1])
}

/// Circulant graph: `i ~ i + k (mod n)` for every offset `k`.
pub fn circulant(n: usize, offsets: &[usize]) -> Result<Graph> {
    if n > MAX_VERTICES {
        return Err(Error::capacity(format!("graph order {n} exceeds {MAX_VERTICES}")));
    }
    let mut g = Graph::empty(n);
    for &k in offsets {
        if k == 0 || k >= n {
            return Err(Error::invalid(format!("circulant offset {k} must lie in [1, {})", n)));
        }
        for i in 0..n {
            g.add_edge(i, (i + k) % n);
        }
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependentSet {
    pub size: usize,
    /// Sorted vertex indices.
    pub witness: Vec<usize>,
}

/// Exact independence number by branch and bound.
///
/// Vertices are branched in order of descending degree (ties to the lower
/// index); each node is pruned with a greedy clique cover of the remaining
/// candidates, which upper-bounds their independence number.
pub fn independence_number(g: &Graph) -> Result<IndependentSet> {
    if g.n > ALPHA_MAX_VERTICES {
        return Err(Error::capacity(format!(
            "independence number limited to {ALPHA_MAX_VERTICES} vertices, got {}",
            g.n
        )));
    }
    let mut order: Vec<usize> = (0..g.n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));

    let mut search = MisSearch { g, order, best: Vec::new(), current: Vec::new() };
    let all = if g.n == 64 { u64::MAX } else { (1u64 << g.n) - 1 };
    search.run(all);

    let mut witness = search.best;
    witness.sort_unstable();
    Ok(IndependentSet { size: witness.len(), witness })
}

struct MisSearch<'a> {
    g: &'a Graph,
    order: Vec<usize>,
    best: Vec<usize>,
    current: Vec<usize>,
}

impl MisSearch<'_> {
    fn run(&mut self, candidates: u64) {
        if candidates == 0 {
            if self.current.len() > self.best.len() {
                self.best = self.current.clone();
            }
            return;
        }
        if self.current.len() + self.clique_cover(candidates) <= self.best.len() {
            return;
        }
        let v = *self.order.iter().find(|&&v| candidates >> v & 1 == 1).expect("non-empty");
        let rest = candidates & !(1 << v);

        self.current.push(v);
        self.run(rest & !self.g.adj[v]);
        self.current.pop();

        self.run(rest);
    }

    fn clique_cover(&self, candidates: u64) -> usize {
        let mut cliques: Vec<u64> = Vec::new();
        for &v in &self.order {
            if candidates >> v & 1 == 0 {
                continue;
            }
            match cliques.iter_mut().find(|c| **c & !self.g.adj[v] == 0) {
                Some(c) => *c |= 1 << v,
                None => cliques.push(1 << v),
            }
        }
        cliques.len()
    }
}

/// Isomorphism test by degree-filtered backtracking. On success the returned
/// permutation maps vertex `i` of `g` to vertex `perm[i]` of `h`.
pub fn is_isomorphic(g: &Graph, h: &Graph) -> Result<Option<Vec<usize>>> {
    for x in [g, h] {
        if x.n > ISO_MAX_VERTICES {
            return Err(Error::capacity(format!(
                "isomorphism limited to {ISO_MAX_VERTICES} vertices, got {}",
                x.n
            )));
        }
    }
    if g.n != h.n || g.edge_count() != h.edge_count() || g.degree_sequence() != h.degree_sequence() {
        return Ok(None);
    }
    let mut mapping = vec![usize::MAX; g.n];
    let exact = |a: usize, b: usize| g.degree(a) == h.degree(b);
    if extend_mapping(g, h, 0, &mut mapping, 0, &exact) {
        Ok(Some(mapping))
    } else {
        Ok(None)
    }
}

/// Searches for an induced copy of `pattern` inside `host`. The returned
/// mapping sends pattern vertex `i` to host vertex `m[i]`, preserving both
/// edges and non-edges.
pub fn find_induced(pattern: &Graph, host: &Graph) -> Result<Option<Vec<usize>>> {
    if host.n > INDUCED_MAX_VERTICES {
        return Err(Error::capacity(format!(
            "induced-subgraph search limited to {INDUCED_MAX_VERTICES} host vertices, got {}",
            host.n
        )));
    }
    if pattern.n > host.n {
        return Err(Error::invalid(format!(
            "pattern has {} vertices but host only {}",
            pattern.n, host.n
        )));
    }
    let mut mapping = vec![usize::MAX; pattern.n];
    let fits = |a: usize, b: usize| pattern.degree(a) <= host.degree(b);
    if extend_mapping(pattern, host, 0, &mut mapping, 0, &fits) {
        Ok(Some(mapping))
    } else {
        Ok(None)
    }
}

fn extend_mapping(
    from: &Graph,
    to: &Graph,
    depth: usize,
    mapping: &mut [usize],
    used: u64,
    compatible: &dyn Fn(usize, usize) -> bool,
) -> bool {
    if depth == from.n {
        return true;
    }
    for target in 0..to.n {
        if used >> target & 1 == 1 || !compatible(depth, target) {
            continue;
        }
        let consistent = (0..depth).all(|prev| from.has_edge(depth, prev) == to.has_edge(target, mapping[prev]));
        if !consistent {
            continue;
        }
        mapping[depth] = target;
        if extend_mapping(from, to, depth + 1, mapping, used | 1 << target, compatible) {
            return true;
        }
    }
    mapping[depth] = usize::MAX;
    false
}
