//! Evaluation metrics and resource accounting.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::ParamCircuit;

/// Default inclusive threshold on the relative difference for a
/// high-quality result.
pub const HQ_THRESHOLD: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "EXACT")]
    Exact,
    #[serde(rename = "QAOA")]
    Qaoa,
    #[serde(rename = "SA")]
    Sa,
    #[serde(rename = "VQE")]
    Vqe,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Exact => "EXACT",
            SolverKind::Qaoa => "QAOA",
            SolverKind::Sa => "SA",
            SolverKind::Vqe => "VQE",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EXACT" => Ok(SolverKind::Exact),
            "QAOA" => Ok(SolverKind::Qaoa),
            "SA" => Ok(SolverKind::Sa),
            "VQE" => Ok(SolverKind::Vqe),
            other => Err(Error::param(format!("unknown method `{other}`"))),
        }
    }
}

/// One experiment outcome. `approx` is empty when the solver's best sample
/// did not decode to a bijection; such records carry `delta = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: SolverKind,
    pub n: usize,
    pub pair_id: String,
    pub exact: usize,
    pub approx: Option<usize>,
    pub delta: f64,
    pub wall_time_s: f64,
    pub runs: usize,
    pub time_per_run_s: f64,
    pub config: String,
}

impl RunRecord {
    /// Builds a record with `delta` derived from `(exact, approx)`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        method: SolverKind,
        n: usize,
        pair_id: impl Into<String>,
        exact: usize,
        approx: Option<usize>,
        wall_time_s: f64,
        runs: usize,
        time_per_run_s: f64,
        config: impl Into<String>,
    ) -> Self {
        let delta = record_delta(exact, approx);
        RunRecord {
            method,
            n,
            pair_id: pair_id.into(),
            exact,
            approx,
            delta,
            wall_time_s,
            runs,
            time_per_run_s,
            config: config.into(),
        }
    }

    pub fn key(&self) -> (SolverKind, usize, String) {
        (self.method, self.n, self.pair_id.clone())
    }

    /// True when the stored delta matches the one implied by `(exact, approx)`.
    pub fn is_consistent(&self) -> bool {
        (self.delta - record_delta(self.exact, self.approx)).abs() < 1e-12
    }
}

fn record_delta(exact: usize, approx: Option<usize>) -> f64 {
    match approx {
        Some(a) => relative_difference(exact as i64, a as i64).expect("non-negative"),
        None => 1.0,
    }
}

/// `0` when `s == s_approx`, else `|s_approx - s| / max(s, s_approx)`.
pub fn relative_difference(s: i64, s_approx: i64) -> Result<f64> {
    if s < 0 || s_approx < 0 {
        return Err(Error::param(format!(
            "distances must be non-negative, got {s} and {s_approx}"
        )));
    }
    if s == s_approx {
        return Ok(0.0);
    }
    Ok((s_approx - s).abs() as f64 / s.max(s_approx) as f64)
}

fn fraction(records: &[RunRecord], pred: impl Fn(f64) -> bool) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::param("no records to aggregate"));
    }
    Ok(records.iter().filter(|r| pred(r.delta)).count() as f64 / records.len() as f64)
}

/// Fraction of records with `delta == 0`.
pub fn success_probability(records: &[RunRecord]) -> Result<f64> {
    fraction(records, |d| d == 0.0)
}

/// Fraction of records with `delta <= threshold`.
pub fn hq_probability(records: &[RunRecord], threshold: f64) -> Result<f64> {
    fraction(records, |d| d <= threshold)
}

/// Time to solution `runs * time_per_run / hq_prob`; `None` when no
/// high-quality result was observed.
pub fn tts(runs: usize, time_per_run: f64, hq_prob: f64) -> Option<f64> {
    (hq_prob > 0.0).then(|| runs as f64 * time_per_run / hq_prob)
}

/// Circuit resources. Depth and size are measured on the native gate set
/// `{H, RX, RY, RZ, RZZ, CX}` without transpilation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    pub logical_vars: usize,
    pub qubits: usize,
    pub num_params: usize,
    pub native_depth: usize,
    pub native_size: usize,
}

pub fn resource_report(c: &ParamCircuit, n: usize) -> ResourceReport {
    ResourceReport {
        logical_vars: n * n,
        qubits: n * n,
        num_params: c.num_params(),
        native_depth: c.depth(),
        native_size: c.size(),
    }
}

/// Per-(method, n) aggregate of a record set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateStats {
    pub method: SolverKind,
    pub n: usize,
    pub mean_delta: f64,
    pub success_prob: f64,
    pub hq_prob: f64,
    /// Empty when undefined.
    pub tts_s: Option<f64>,
}

pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateStats> {
    let mut groups: BTreeMap<(SolverKind, usize), Vec<RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.method, r.n)).or_default().push(r.clone());
    }
    groups
        .into_iter()
        .map(|((method, n), rs)| {
            let count = rs.len() as f64;
            let hq = hq_probability(&rs, HQ_THRESHOLD).expect("non-empty group");
            let runs = (rs.iter().map(|r| r.runs as f64).sum::<f64>() / count).round() as usize;
            let tpr = rs.iter().map(|r| r.time_per_run_s).sum::<f64>() / count;
            AggregateStats {
                method,
                n,
                mean_delta: rs.iter().map(|r| r.delta).sum::<f64>() / count,
                success_prob: success_probability(&rs).expect("non-empty group"),
                hq_prob: hq,
                tts_s: tts(runs, tpr, hq),
            }
        })
        .collect()
}

pub fn write_records(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let mut rd = csv::Reader::from_path(path)?;
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_aggregate(path: impl AsRef<Path>, stats: &[AggregateStats]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in stats {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}
