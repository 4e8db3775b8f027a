//! Undirected simple graphs and the exact edit-distance oracle.
//!
//! Vertices are the contiguous integers `0..n`. Every edit operation (vertex or
//! edge insertion/deletion) has unit cost.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest vertex count accepted by [`exact_ged`] by default (10! bijections).
pub const DEFAULT_EXACT_LIMIT: usize = 10;

/// Undirected simple graph on vertices `0..n`. Edges are stored as `(u, v)`
/// with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.edges.insert((u, v));
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::empty(n);
        if n >= 3 {
            for u in 0..n {
                g.edges.insert(ordered(u, (u + 1) % n));
            }
        }
        g
    }

    /// Builds a graph from an edge list. Edges may be given in either
    /// orientation; self-loops, out-of-range endpoints and duplicates are
    /// rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            g.try_add_edge(u, v)?;
        }
        Ok(g)
    }

    fn try_add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u == v {
            return Err(Error::param(format!("self-loop on vertex {u}")));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::param(format!(
                "edge ({u}, {v}) out of range for {} vertices",
                self.n
            )));
        }
        if !self.edges.insert(ordered(u, v)) {
            return Err(Error::param(format!("duplicate edge ({u}, {v})")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.edges.contains(&ordered(u, v))
    }

    /// Dense adjacency matrix, row-major `n * n`.
    pub fn adjacency(&self) -> Vec<bool> {
        let mut adj = vec![false; self.n * self.n];
        for &(u, v) in &self.edges {
            adj[u * self.n + v] = true;
            adj[v * self.n + u] = true;
        }
        adj
    }

    /// Reads a graph file, either the JSON form `{"n": .., "edges": [[u, v], ..]}`
    /// or the line form (`n` on the first line, then one `u v` per line).
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let file: GraphFile = serde_json::from_str(trimmed)?;
            Graph::from_edges(file.n, file.edges.into_iter().map(|[u, v]| (u, v)))
        } else {
            parse_lines(text)
        }
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            n: self.n,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
        };
        serde_json::to_string(&file).expect("graph serialisation cannot fail")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = self.to_json();
        s.push('\n');
        fs::write(path, s)?;
        Ok(())
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} edges=[", self.n)?;
        for (i, (u, v)) in self.edges().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{u}-{v}")?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<[usize; 2]>,
}

fn parse_lines(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let n: usize = lines
        .next()
        .ok_or_else(|| Error::parse("empty graph file"))?
        .parse()
        .map_err(|e| Error::parse(format!("vertex count: {e}")))?;
    let mut g = Graph::empty(n);
    for line in lines {
        let mut it = line.split_whitespace();
        let (u, v) = match (it.next(), it.next(), it.next()) {
            (Some(u), Some(v), None) => (u, v),
            _ => return Err(Error::parse(format!("expected `u v`, got `{line}`"))),
        };
        let u = u
            .parse()
            .map_err(|e| Error::parse(format!("`{line}`: {e}")))?;
        let v = v
            .parse()
            .map_err(|e| Error::parse(format!("`{line}`: {e}")))?;
        g.try_add_edge(u, v)?;
    }
    Ok(g)
}

#[inline]
fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// A vertex bijection `i -> mapping[i]` between two graphs of equal order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bijection {
    mapping: Vec<usize>,
}

impl Bijection {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &m in &mapping {
            if m >= mapping.len() || seen[m] {
                return Err(Error::param(format!("{mapping:?} is not a permutation")));
            }
            seen[m] = true;
        }
        Ok(Bijection { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Bijection {
            mapping: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Bijection {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Bijection { mapping: inv }
    }
}

/// Samples G(n, p): each of the `n(n-1)/2` possible edges is present
/// independently with probability `p`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::param("random graph needs at least one vertex"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = rng::stream(seed, 0);
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            // gen::<f64>() lies in [0, 1), so p = 0 never and p = 1 always adds.
            if rng.gen::<f64>() < p {
                g.edges.insert((u, v));
            }
        }
    }
    Ok(g)
}

/// Appends isolated vertices until the graph has `target_n` vertices.
/// Returns the padded graph and the number `k` of vertices added.
pub fn pad_to(g: &Graph, target_n: usize) -> Result<(Graph, usize)> {
    if target_n < g.n {
        return Err(Error::param(format!(
            "cannot pad a graph with {} vertices down to {target_n}",
            g.n
        )));
    }
    Ok((
        Graph {
            n: target_n,
            edges: g.edges.clone(),
        },
        target_n - g.n,
    ))
}

/// Pads the smaller of the two graphs so both have the same order.
/// Returns `(g1', g2', k)`.
pub fn pad_pair(g1: &Graph, g2: &Graph) -> (Graph, Graph, usize) {
    let n = g1.n.max(g2.n);
    let (a, ka) = pad_to(g1, n).expect("target is the max order");
    let (b, kb) = pad_to(g2, n).expect("target is the max order");
    (a, b, ka + kb)
}

/// `|E1 \ pi^-1(E2)| + |E2 \ pi(E1)|`: the edges of either graph not matched
/// under the bijection.
pub fn bijection_cost(g1: &Graph, g2: &Graph, pi: &Bijection) -> Result<usize> {
    if g1.n != g2.n || pi.len() != g1.n {
        return Err(Error::param(format!(
            "size mismatch: |V1|={}, |V2|={}, |pi|={}",
            g1.n,
            g2.n,
            pi.len()
        )));
    }
    let preserved = g1
        .edges()
        .filter(|&(u, v)| g2.has_edge(pi.apply(u), pi.apply(v)))
        .count();
    Ok(g1.num_edges() + g2.num_edges() - 2 * preserved)
}

/// Exact graph edit distance by enumerating every bijection after padding.
///
/// Returns the distance and a witness bijection on the padded graphs; among
/// optimal bijections the lexicographically smallest is returned.
pub fn exact_ged(g1: &Graph, g2: &Graph) -> Result<(usize, Bijection)> {
    exact_ged_with_limit(g1, g2, DEFAULT_EXACT_LIMIT)
}

pub fn exact_ged_with_limit(g1: &Graph, g2: &Graph, max_n: usize) -> Result<(usize, Bijection)> {
    if g1.n == 0 || g2.n == 0 {
        return Err(Error::param("graphs must be non-empty"));
    }
    let (a, b, k) = pad_pair(g1, g2);
    let n = a.n;
    if n > max_n || n > 16 {
        return Err(Error::capacity(format!(
            "exact GED enumerates {n}! bijections; limit is {} vertices",
            max_n.min(16)
        )));
    }
    let edges1: Vec<(usize, usize)> = a.edges().collect();
    let mut rows2 = vec![0u32; n];
    for (u, v) in b.edges() {
        rows2[u] |= 1 << v;
        rows2[v] |= 1 << u;
    }
    let total = a.num_edges() + b.num_edges();

    // One block per image of vertex 0; blocks are lexicographically ordered,
    // so the first block attaining the minimum holds the smallest witness.
    let blocks: Vec<(usize, Vec<usize>)> = (0..n)
        .into_par_iter()
        .map(|first| best_in_block(n, first, &edges1, &rows2, total))
        .collect();
    let (cost, perm) = blocks
        .into_iter()
        .reduce(|best, cur| if cur.0 < best.0 { cur } else { best })
        .expect("n >= 1");
    Ok((cost + k, Bijection { mapping: perm }))
}

fn best_in_block(
    n: usize,
    first: usize,
    edges1: &[(usize, usize)],
    rows2: &[u32],
    total: usize,
) -> (usize, Vec<usize>) {
    let mut perm: Vec<usize> = std::iter::once(first)
        .chain((0..n).filter(|&v| v != first))
        .collect();
    let mut best = (usize::MAX, perm.clone());
    loop {
        let preserved = edges1
            .iter()
            .filter(|&&(u, v)| rows2[perm[u]] >> perm[v] & 1 == 1)
            .count();
        let cost = total - 2 * preserved;
        if cost < best.0 {
            best = (cost, perm.clone());
            if cost == 0 {
                break;
            }
        }
        if !next_permutation(&mut perm[1..]) {
            break;
        }
    }
    best
}

/// Advances to the next lexicographic permutation; false when wrapped.
pub(crate) fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}
