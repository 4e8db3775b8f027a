//! Spin form of a QUBO.
//!
//! Energies follow `H(s) = -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i + offset`
//! and binary variables map to spins by `x = (1 + s) / 2`, so `x = 1` is
//! `s = +1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::qubo::{header_field, parse_header, parse_num, QuboProblem};

#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel {
    pub h: Vec<f64>,
    /// Couplings keyed by `(i, j)` with `i < j`.
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingModel {
    pub fn new(num_spins: usize) -> Self {
        IsingModel {
            h: vec![0.0; num_spins],
            j: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn num_spins(&self) -> usize {
        self.h.len()
    }

    pub fn add_coupling(&mut self, a: usize, b: usize, value: f64) {
        assert!(a != b, "coupling needs two distinct spins");
        let key = if a < b { (a, b) } else { (b, a) };
        *self.j.entry(key).or_insert(0.0) += value;
    }

    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        ising_energy(self, spins)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# ising num_spins={} offset={:.17e}\n",
            self.num_spins(),
            self.offset
        );
        for (i, &h) in self.h.iter().enumerate().filter(|(_, &h)| h != 0.0) {
            let _ = writeln!(s, "h {i} {h:.17e}");
        }
        for (&(a, b), &v) in self.j.iter().filter(|(_, &v)| v != 0.0) {
            let _ = writeln!(s, "J {a} {b} {v:.17e}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("empty Ising file"))?;
        let fields = parse_header(header, "# ising")?;
        let mut m = IsingModel::new(header_field(&fields, "num_spins")?);
        m.offset = header_field(&fields, "offset")?;
        for line in lines.filter(|l| !l.starts_with('#')) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["h", i, v] => {
                    let i: usize = parse_num(i)?;
                    if i >= m.num_spins() {
                        return Err(Error::parse(format!("spin index out of range in `{line}`")));
                    }
                    m.h[i] += parse_num::<f64>(v)?;
                }
                ["J", a, b, v] => {
                    let (a, b): (usize, usize) = (parse_num(a)?, parse_num(b)?);
                    if a >= b || b >= m.num_spins() {
                        return Err(Error::parse(format!("bad coupling indices in `{line}`")));
                    }
                    m.add_coupling(a, b, parse_num(v)?);
                }
                _ => return Err(Error::parse(format!("unrecognised line `{line}`"))),
            }
        }
        Ok(m)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Substitutes `x_l = (1 + s_l) / 2` into `x^T Q x + offset`.
pub fn to_ising(q: &QuboProblem) -> IsingModel {
    let mut m = IsingModel::new(q.num_vars());
    let mut constant = q.offset();
    for (a, b, v) in q.entries() {
        if a == b {
            // v x = v/2 + (v/2) s
            constant += v / 2.0;
            m.h[a] -= v / 2.0;
        } else {
            // v x x' = v/4 (1 + s + s' + s s')
            constant += v / 4.0;
            m.h[a] -= v / 4.0;
            m.h[b] -= v / 4.0;
            m.add_coupling(a, b, -v / 4.0);
        }
    }
    m.offset = constant;
    m
}

pub fn ising_energy(m: &IsingModel, spins: &[i8]) -> Result<f64> {
    if spins.len() != m.num_spins() {
        return Err(Error::param(format!(
            "{} spins given for a model with {}",
            spins.len(),
            m.num_spins()
        )));
    }
    if let Some(s) = spins.iter().find(|&&s| s != 1 && s != -1) {
        return Err(Error::param(format!("spin value {s} is not +-1")));
    }
    let pair: f64 =
        m.j.iter()
            .map(|(&(a, b), &v)| v * (spins[a] * spins[b]) as f64)
            .sum();
    let field: f64 = m.h.iter().zip(spins).map(|(&h, &s)| h * s as f64).sum();
    Ok(-pair - field + m.offset)
}

/// Spin vector for basis index `b`: bit set means `s = +1`.
pub fn spins_from_index(b: usize, num_spins: usize) -> Vec<i8> {
    (0..num_spins)
        .map(|i| if b >> i & 1 == 1 { 1 } else { -1 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::qubo::{build_qubo, Assignment};

    #[test]
    fn single_variable() {
        let mut q = QuboProblem::new(1);
        q.add(0, 0, 3.0);
        let m = to_ising(&q);
        assert_eq!(m.h, vec![-1.5]);
        assert_eq!(m.offset, 1.5);
        assert_eq!(ising_energy(&m, &[1]).unwrap(), 3.0);
        assert_eq!(ising_energy(&m, &[-1]).unwrap(), 0.0);
    }

    #[test]
    fn k1_ground_energy_is_zero() {
        let k1 = Graph::empty(1);
        let m = to_ising(&build_qubo(&k1, &k1, 1.0, 0.1).unwrap());
        let ground = [1i8, -1]
            .iter()
            .map(|&s| ising_energy(&m, &[s]).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(ground, 0.0);
    }

    #[test]
    fn matches_qubo_on_small_ged_instance() {
        let g1 = Graph::from_edges(2, [(0, 1)]).unwrap();
        let g2 = Graph::empty(2);
        let q = build_qubo(&g1, &g2, 1.0, 0.25).unwrap();
        let m = to_ising(&q);
        for b in 0..16 {
            let e_q = q.energy(&Assignment::from_index(b, 4)).unwrap();
            let e_i = ising_energy(&m, &spins_from_index(b, 4)).unwrap();
            assert!((e_q - e_i).abs() < 1e-12, "b={b}: {e_q} vs {e_i}");
        }
    }

    #[test]
    fn energy_errors() {
        let m = IsingModel::new(2);
        assert!(ising_energy(&m, &[1]).is_err());
        assert!(ising_energy(&m, &[1, 0]).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let g1 = Graph::from_edges(2, [(0, 1)]).unwrap();
        let m = to_ising(&build_qubo(&g1, &Graph::empty(2), 1.0, 0.1).unwrap());
        let r = IsingModel::from_text(&m.to_text()).unwrap();
        assert_eq!(r, m);
    }
}
