//! Binary quadratic encoding of graph edit distance.
//!
//! Variable `l = i * n + j` is set when vertex `i` of the first graph is mapped
//! to vertex `j` of the second. The objective is
//! `alpha * hard(x) + beta * soft(x)` where `hard` penalises assignments that
//! are not permutation matrices and `soft` counts unmatched edges in both
//! directions.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{bijection_cost, Bijection, Graph};

/// Binary assignment `x` with one entry per QUBO variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    bits: Vec<u8>,
}

impl Assignment {
    pub fn zeros(len: usize) -> Self {
        Assignment { bits: vec![0; len] }
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::param(format!("assignment entry {b} is not binary")));
        }
        Ok(Assignment { bits })
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Assignment {
            bits: bits.iter().map(|&b| b as u8).collect(),
        }
    }

    /// Reads the low `len` bits of a computational basis index, bit `l` being
    /// variable `l`.
    pub fn from_index(index: usize, len: usize) -> Self {
        Assignment {
            bits: (0..len).map(|l| (index >> l & 1) as u8).collect(),
        }
    }

    /// Permutation-matrix encoding of a bijection.
    pub fn from_bijection(pi: &Bijection) -> Self {
        let n = pi.len();
        let mut bits = vec![0; n * n];
        for i in 0..n {
            bits[i * n + pi.apply(i)] = 1;
        }
        Assignment { bits }
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::parse(format!("invalid bit `{c}`"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(|bits| Assignment { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, l: usize) -> u8 {
        self.bits[l]
    }

    pub fn flip(&mut self, l: usize) {
        self.bits[l] ^= 1;
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn to_index(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (l, &b)| acc | (b as usize) << l)
    }

    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b == 1 { '1' } else { '0' })
            .collect()
    }
}

/// Upper-triangular QUBO `x^T Q x + offset`.
///
/// Coefficients for `l <= l'` live in a dense row-major buffer; entries below
/// the diagonal are never stored or read.
#[derive(Clone, Debug, PartialEq)]
pub struct QuboProblem {
    num_vars: usize,
    coeffs: Vec<f64>,
    offset: f64,
    alpha: f64,
    beta: f64,
    n: usize,
    k: usize,
    graphs: Option<(Graph, Graph)>,
}

impl QuboProblem {
    /// A zero QUBO over `num_vars` variables with unit penalty weights and no
    /// graph metadata.
    pub fn new(num_vars: usize) -> Self {
        QuboProblem {
            num_vars,
            coeffs: vec![0.0; num_vars * num_vars],
            offset: 0.0,
            alpha: 1.0,
            beta: 1.0,
            n: 0,
            k: 0,
            graphs: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Vertex count of each (padded) graph.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Padding count added back to decoded distances.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn set_k(&mut self, k: usize) {
        self.k = k;
    }

    /// The padded input graphs, when the problem was built from graphs rather
    /// than read from a file.
    pub fn graphs(&self) -> Option<(&Graph, &Graph)> {
        self.graphs.as_ref().map(|(a, b)| (a, b))
    }

    /// Coefficient `q_{l,l'}`; arguments are sorted first.
    pub fn get(&self, l: usize, lp: usize) -> f64 {
        let (a, b) = if l <= lp { (l, lp) } else { (lp, l) };
        self.coeffs[a * self.num_vars + b]
    }

    /// Accumulates `value` into the upper-triangular entry for the unordered
    /// pair `{l, l'}`.
    pub fn add(&mut self, l: usize, lp: usize, value: f64) {
        let (a, b) = if l <= lp { (l, lp) } else { (lp, l) };
        self.coeffs[a * self.num_vars + b] += value;
    }

    /// Nonzero entries `(l, l', q)` with `l <= l'`, in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let q = self.num_vars;
        (0..q).flat_map(move |a| {
            (a..q).filter_map(move |b| {
                let v = self.coeffs[a * q + b];
                (v != 0.0).then_some((a, b, v))
            })
        })
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `x^T Q x + offset`.
    pub fn energy(&self, x: &Assignment) -> Result<f64> {
        if x.len() != self.num_vars {
            return Err(Error::param(format!(
                "assignment has {} entries, QUBO has {} variables",
                x.len(),
                self.num_vars
            )));
        }
        Ok(self.energy_unchecked(x.bits()))
    }

    pub(crate) fn energy_unchecked(&self, bits: &[u8]) -> f64 {
        let q = self.num_vars;
        let mut e = self.offset;
        for a in (0..q).filter(|&a| bits[a] == 1) {
            let row = &self.coeffs[a * q..(a + 1) * q];
            for b in a..q {
                if bits[b] == 1 {
                    e += row[b];
                }
            }
        }
        e
    }

    /// GED implied by `x`, or `None` when `x` is not a permutation matrix.
    ///
    /// With graph metadata this is `cost(pi) + k`; for problems read from a
    /// file it falls back to `round(energy / beta) + k`, which agrees on
    /// valid assignments because their energy is `beta * cost(pi)`.
    pub fn ged_from_solution(&self, x: &Assignment) -> Option<usize> {
        if x.len() != self.num_vars {
            return None;
        }
        let pi = decode(x, self.n)?;
        match &self.graphs {
            Some((g1, g2)) => bijection_cost(g1, g2, &pi).ok().map(|c| c + self.k),
            None => {
                let e = self.energy_unchecked(x.bits());
                Some((e / self.beta).round().max(0.0) as usize + self.k)
            }
        }
    }

    /// Text export: a header line, then `l l' value` per nonzero entry.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# qubo num_vars={} offset={:.17e} alpha={:.17e} beta={:.17e} k={}\n",
            self.num_vars, self.offset, self.alpha, self.beta, self.k
        );
        for (a, b, v) in self.entries() {
            let _ = writeln!(s, "{a} {b} {v:.17e}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("empty QUBO file"))?;
        let fields = parse_header(header, "# qubo")?;
        let num_vars: usize = header_field(&fields, "num_vars")?;
        let mut q = QuboProblem::new(num_vars);
        q.offset = header_field(&fields, "offset")?;
        q.alpha = header_field(&fields, "alpha")?;
        q.beta = header_field(&fields, "beta")?;
        q.k = header_field(&fields, "k")?;
        q.n = exact_sqrt(num_vars).unwrap_or(0);
        for line in lines.filter(|l| !l.starts_with('#')) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::parse(format!("expected `l l' value`, got `{line}`")));
            }
            let a: usize = parse_num(parts[0])?;
            let b: usize = parse_num(parts[1])?;
            let v: f64 = parse_num(parts[2])?;
            if a > b || b >= num_vars {
                return Err(Error::parse(format!("bad entry indices in `{line}`")));
            }
            q.add(a, b, v);
        }
        Ok(q)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

pub(crate) fn parse_header<'a>(header: &'a str, tag: &str) -> Result<Vec<(&'a str, &'a str)>> {
    let rest = header
        .strip_prefix(tag)
        .ok_or_else(|| Error::parse(format!("header must start with `{tag}`")))?;
    rest.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .ok_or_else(|| Error::parse(format!("bad header field `{kv}`")))
        })
        .collect()
}

pub(crate) fn header_field<T: std::str::FromStr>(fields: &[(&str, &str)], key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::parse(format!("missing header field `{key}`")))?;
    parse_num(raw)
}

pub(crate) fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| Error::parse(format!("`{s}`: {e}")))
}

fn exact_sqrt(q: usize) -> Option<usize> {
    let r = (q as f64).sqrt().round() as usize;
    (r * r == q).then_some(r)
}

fn check_pair(g1: &Graph, g2: &Graph) -> Result<usize> {
    if g1.n() != g2.n() {
        return Err(Error::param(format!(
            "graphs have {} and {} vertices; pad them first",
            g1.n(),
            g2.n()
        )));
    }
    Ok(g1.n())
}

fn check_len(x: &Assignment, n: usize) -> Result<()> {
    if x.len() != n * n {
        return Err(Error::param(format!(
            "assignment has {} entries, expected {}",
            x.len(),
            n * n
        )));
    }
    Ok(())
}

/// Builds the QUBO for two graphs of equal order. The padding count `k` is
/// recorded so decoded distances refer to the unpadded graphs.
pub fn build_qubo(g1: &Graph, g2: &Graph, alpha: f64, beta: f64) -> Result<QuboProblem> {
    build_qubo_padded(g1, g2, alpha, beta, 0)
}

pub fn build_qubo_padded(
    g1: &Graph,
    g2: &Graph,
    alpha: f64,
    beta: f64,
    k: usize,
) -> Result<QuboProblem> {
    let n = check_pair(g1, g2)?;
    if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
        return Err(Error::param(format!(
            "alpha and beta must be positive, got {alpha}, {beta}"
        )));
    }
    let mut q = QuboProblem::new(n * n);
    q.alpha = alpha;
    q.beta = beta;
    q.n = n;
    q.k = k;
    let var = |i: usize, j: usize| i * n + j;

    // (1 - sum x)^2 = 1 - sum x + 2 sum_{a<b} x_a x_b for binary x.
    for i in 0..n {
        for j in 0..n {
            q.add(var(i, j), var(i, j), -alpha);
            for jp in j + 1..n {
                q.add(var(i, j), var(i, jp), 2.0 * alpha);
            }
        }
    }
    for j in 0..n {
        for i in 0..n {
            q.add(var(i, j), var(i, j), -alpha);
            for ip in i + 1..n {
                q.add(var(i, j), var(ip, j), 2.0 * alpha);
            }
        }
    }
    q.offset = 2.0 * n as f64 * alpha;

    // Edges of g1 whose image is missing in g2, then the converse. Image pairs
    // run over all ordered (i', j'), including i' == j' which is never an edge.
    for (a, b) in g1.edges() {
        for ip in 0..n {
            for jp in 0..n {
                if !g2.has_edge(ip, jp) {
                    q.add(var(a, ip), var(b, jp), beta);
                }
            }
        }
    }
    for (ap, bp) in g2.edges() {
        for i in 0..n {
            for j in 0..n {
                if !g1.has_edge(i, j) {
                    q.add(var(i, ap), var(j, bp), beta);
                }
            }
        }
    }
    q.graphs = Some((g1.clone(), g2.clone()));
    Ok(q)
}

/// Row and column violations `sum_i (1 - sum_j x_ij)^2 + sum_j (1 - sum_i x_ij)^2`,
/// evaluated directly.
pub fn hard_penalty(g1: &Graph, g2: &Graph, x: &Assignment) -> Result<f64> {
    let n = check_pair(g1, g2)?;
    check_len(x, n)?;
    let mut total = 0.0;
    for i in 0..n {
        let s: f64 = (0..n).map(|j| x.get(i * n + j) as f64).sum();
        total += (1.0 - s).powi(2);
    }
    for j in 0..n {
        let s: f64 = (0..n).map(|i| x.get(i * n + j) as f64).sum();
        total += (1.0 - s).powi(2);
    }
    Ok(total)
}

/// Edge mismatch count `sum_{ij in E1} R_ij(x) + sum_{i'j' in E2} S_i'j'(x)`,
/// evaluated directly.
pub fn soft_penalty(g1: &Graph, g2: &Graph, x: &Assignment) -> Result<f64> {
    let n = check_pair(g1, g2)?;
    check_len(x, n)?;
    let xv = |i: usize, j: usize| x.get(i * n + j) as f64;
    let mut total = 0.0;
    for (i, j) in g1.edges() {
        for ip in 0..n {
            for jp in 0..n {
                let missing = 1.0 - g2.has_edge(ip, jp) as u8 as f64;
                total += xv(i, ip) * xv(j, jp) * missing;
            }
        }
    }
    for (ip, jp) in g2.edges() {
        for i in 0..n {
            for j in 0..n {
                let missing = 1.0 - g1.has_edge(i, j) as u8 as f64;
                total += xv(i, ip) * xv(j, jp) * missing;
            }
        }
    }
    Ok(total)
}

/// Reads `x` as an `n x n` matrix; returns the bijection iff it is a
/// permutation matrix.
pub fn decode(x: &Assignment, n: usize) -> Option<Bijection> {
    if x.len() != n * n {
        return None;
    }
    let mut mapping = Vec::with_capacity(n);
    for i in 0..n {
        let row = &x.bits()[i * n..(i + 1) * n];
        let mut ones = row.iter().enumerate().filter(|(_, &b)| b == 1);
        match (ones.next(), ones.next()) {
            (Some((j, _)), None) => mapping.push(j),
            _ => return None,
        }
    }
    Bijection::new(mapping).ok()
}

/// Free function form of [`QuboProblem::ged_from_solution`].
pub fn ged_from_solution(q: &QuboProblem, x: &Assignment) -> Option<usize> {
    q.ged_from_solution(x)
}
