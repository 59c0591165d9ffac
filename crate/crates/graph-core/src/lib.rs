//! Undirected graph representation shared by every algorithm crate.
//!
//! Nodes are contiguous integers `0..n`. Edges are unordered pairs without
//! self-loops or duplicates; every edge may carry a strictly positive integer
//! weight. Tie-breakers throughout the workspace compare these node indices
//! directly, so the indices double as the distinct node IDs the algorithms
//! assume.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Errors raised while parsing or constructing a graph.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: malformed line {text:?} (expected \"u v\" or \"u v w\")")]
    Malformed { line: usize, text: String },
    #[error("line {line}: node {id} out of range (n = {n})")]
    OutOfRange { line: usize, id: usize, n: usize },
    #[error("line {line}: self-loop on node {id}")]
    SelfLoop { line: usize, id: usize },
    #[error("line {line}: duplicate edge {{{u},{v}}}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: non-positive weight {w}")]
    NonPositiveWeight { line: usize, w: i64 },
    #[error("line {line}: expected {expected} edge lines, found more")]
    TooManyEdges { line: usize, expected: usize },
    #[error("expected {expected} edge lines, found {found}")]
    TooFewEdges { expected: usize, found: usize },
    #[error("missing \"n m\" header line")]
    MissingHeader,
    #[error("requested {m} edges but {n} nodes admit at most {max}")]
    TooManyForSimple { n: usize, m: usize, max: usize },
}

/// An immutable simple graph with optional positive integer edge weights.
///
/// Construction validates every invariant once; afterwards the graph is
/// freely shareable across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Edges stored with `u < v`, sorted lexicographically.
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    weights: Option<HashMap<(usize, usize), u64>>,
}

impl Graph {
    /// Builds a graph from an explicit edge list, validating simplicity.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::build(n, edges.iter().enumerate().map(|(i, &(u, v))| (i + 1, u, v, None)))
    }

    /// Builds a fully weighted graph; every weight must be ≥ 1.
    pub fn from_weighted_edges(
        n: usize,
        edges: &[(usize, usize, u64)],
    ) -> Result<Self, GraphError> {
        Self::build(
            n,
            edges.iter().enumerate().map(|(i, &(u, v, w))| (i + 1, u, v, Some(w))),
        )
    }

    fn build(
        n: usize,
        it: impl Iterator<Item = (usize, usize, usize, Option<u64>)>,
    ) -> Result<Self, GraphError> {
        let mut seen = HashSet::new();
        let mut edges = Vec::new();
        let mut weights = HashMap::new();
        let mut adj = vec![Vec::new(); n];
        for (line, u, v, w) in it {
            if u >= n {
                return Err(GraphError::OutOfRange { line, id: u, n });
            }
            if v >= n {
                return Err(GraphError::OutOfRange { line, id: v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop { line, id: u });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge { line, u: key.0, v: key.1 });
            }
            edges.push(key);
            if let Some(w) = w {
                weights.insert(key, w);
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        edges.sort_unstable();
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(Graph {
            n,
            edges,
            adj,
            weights: if weights.is_empty() { None } else { Some(weights) },
        })
    }

    /// Parses the edge-list document format: a header line `n m`, then `m`
    /// lines `u v` or `u v w`. Errors name the offending 1-based line.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(GraphError::MissingHeader)?;
        let mut it = header.split_whitespace();
        let (n, m) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => match (a.parse::<usize>(), b.parse::<usize>()) {
                (Ok(n), Ok(m)) => (n, m),
                _ => return Err(GraphError::MissingHeader),
            },
            _ => return Err(GraphError::MissingHeader),
        };
        let mut rows: Vec<(usize, usize, usize, Option<u64>)> = Vec::with_capacity(m);
        let mut count = 0usize;
        for (idx, raw) in lines {
            let line = idx + 1;
            if count == m {
                return Err(GraphError::TooManyEdges { line, expected: m });
            }
            let toks: Vec<&str> = raw.split_whitespace().collect();
            let parsed = match toks.as_slice() {
                [u, v] => (u.parse::<usize>(), v.parse::<usize>(), None),
                [u, v, w] => {
                    let w: i64 = w.parse().map_err(|_| GraphError::Malformed {
                        line,
                        text: raw.to_string(),
                    })?;
                    if w <= 0 {
                        return Err(GraphError::NonPositiveWeight { line, w });
                    }
                    (u.parse::<usize>(), v.parse::<usize>(), Some(w as u64))
                }
                _ => {
                    return Err(GraphError::Malformed { line, text: raw.to_string() });
                }
            };
            let (u, v, w) = match parsed {
                (Ok(u), Ok(v), w) => (u, v, w),
                _ => return Err(GraphError::Malformed { line, text: raw.to_string() }),
            };
            rows.push((line, u, v, w));
            count += 1;
        }
        if count < m {
            return Err(GraphError::TooFewEdges { expected: m, found: count });
        }
        Self::build(n, rows.into_iter())
    }

    /// Renders the graph in the same edge-list format `parse` accepts.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            match self.weight(u, v) {
                Some(w) => {
                    let _ = writeln!(out, "{u} {v} {w}");
                }
                None => {
                    let _ = writeln!(out, "{u} {v}");
                }
            }
        }
        out
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// All edges as sorted `(u, v)` pairs with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Open neighborhood `Adj_i`, sorted ascending.
    pub fn adj(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Degree of `i`.
    pub fn deg(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Maximum degree Δ.
    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| self.deg(i)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Weight of edge `{u,v}`; `None` when the edge is unweighted or absent.
    pub fn weight(&self, u: usize, v: usize) -> Option<u64> {
        let key = (u.min(v), u.max(v));
        self.weights.as_ref()?.get(&key).copied()
    }

    /// True when every edge carries a weight.
    pub fn fully_weighted(&self) -> bool {
        match &self.weights {
            Some(w) => w.len() == self.edges.len(),
            None => self.edges.is_empty(),
        }
    }

    /// `Adj^x_i`: every node `j ≠ i` with `dis(i,j) ≤ x`, sorted ascending.
    pub fn adj_within(&self, i: usize, x: usize) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        let mut dist = vec![usize::MAX; self.n];
        let mut q = VecDeque::new();
        dist[i] = 0;
        q.push_back(i);
        while let Some(u) = q.pop_front() {
            if dist[u] == x {
                continue;
            }
            for &v in &self.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    out.push(v);
                    q.push_back(v);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Hop distances from `src` to every node (`None` = unreachable).
    pub fn bfs_distances(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut q = VecDeque::new();
        dist[src] = Some(0);
        q.push_back(src);
        while let Some(u) = q.pop_front() {
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(dist[u].unwrap() + 1);
                    q.push_back(v);
                }
            }
        }
        dist
    }

    /// Hop distance between two nodes.
    pub fn dist(&self, i: usize, j: usize) -> Option<usize> {
        self.bfs_distances(i)[j]
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        self.bfs_distances(0).iter().all(|d| d.is_some())
    }

    /// Hop diameter; `None` for disconnected graphs.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for i in 0..self.n {
            for d in self.bfs_distances(i) {
                best = best.max(d?);
            }
        }
        Some(best)
    }
}

/// Uniformly random simple graph with exactly `m` edges, deterministic per
/// seed.
pub fn generate_gnm(n: usize, m: usize, seed: u64) -> Result<Graph, GraphError> {
    let max = n.saturating_mul(n.saturating_sub(1)) / 2;
    if m > max {
        return Err(GraphError::TooManyForSimple { n, m, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: HashSet<(usize, usize)> = HashSet::with_capacity(m);
    if max > 0 && m * 3 >= max {
        // Dense request: shuffle the full edge universe to avoid rejection
        // stalls near complete graphs.
        let mut all: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        all.shuffle(&mut rng);
        chosen.extend(all.into_iter().take(m));
    } else {
        while chosen.len() < m {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v {
                chosen.insert((u.min(v), u.max(v)));
            }
        }
    }
    let edges: Vec<(usize, usize)> = chosen.into_iter().collect();
    Graph::from_edges(n, &edges)
}

/// Random simple graph whose every edge gets a uniform weight in `1..=wmax`.
pub fn generate_gnm_weighted(
    n: usize,
    m: usize,
    seed: u64,
    wmax: u64,
) -> Result<Graph, GraphError> {
    let g = generate_gnm(n, m, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let weighted: Vec<(usize, usize, u64)> = g
        .edges()
        .iter()
        .map(|&(u, v)| (u, v, rng.gen_range(1..=wmax.max(1))))
        .collect();
    Graph::from_weighted_edges(n, &weighted)
}
