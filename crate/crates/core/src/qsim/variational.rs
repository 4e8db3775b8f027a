//! End-to-end VQE/QAOA runs on a QUBO.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use super::circuit::{build_qaoa_circuit, build_vqe_ansatz, ParamCircuit};
use super::optimize::{optimize_circuit, OptimizeOptions};
use super::state::{diagonal_from_ising_capped, sample_with, simulate_capped};
use super::DEFAULT_MAX_QUBITS;
use crate::error::{Error, Result};
use crate::ising::to_ising;
use crate::qubo::{Assignment, QuboProblem};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Vqe,
    Qaoa,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Vqe => "VQE",
            Method::Qaoa => "QAOA",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vqe" => Ok(Method::Vqe),
            "qaoa" => Ok(Method::Qaoa),
            _ => Err(Error::param(format!("unknown variational method `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariationalConfig {
    pub method: Method,
    /// Ansatz repetitions.
    pub p: usize,
    pub restarts: usize,
    /// Measurement shots per restart.
    pub shots: usize,
    pub seed: u64,
    pub final_rotation_layer: bool,
    pub max_qubits: usize,
    /// Evaluation budget per restart; `None` means `500 * num_params`.
    pub budget: Option<usize>,
    pub tol: f64,
}

impl VariationalConfig {
    pub fn new(method: Method, p: usize) -> Self {
        VariationalConfig {
            method,
            p,
            restarts: 2048,
            shots: 1024,
            seed: 0,
            final_rotation_layer: true,
            max_qubits: DEFAULT_MAX_QUBITS,
            budget: None,
            tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartTrace {
    pub restart: usize,
    pub initial_energy: f64,
    pub optimized_energy: f64,
    pub evaluations: usize,
    pub best_sample_energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariationalOutcome {
    pub best: Assignment,
    pub best_energy: f64,
    /// Decoded distance; `None` when the best sample is not a bijection.
    pub ged: Option<usize>,
    pub num_params: usize,
    pub depth: usize,
    pub size: usize,
    pub traces: Vec<RestartTrace>,
}

impl VariationalOutcome {
    /// CSV trace with one row per restart.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from(
            "restart,initial_energy,optimized_energy,evaluations,best_sample_energy\n",
        );
        for t in &self.traces {
            s.push_str(&format!(
                "{},{:.12},{:.12},{},{:.12}\n",
                t.restart,
                t.initial_energy,
                t.optimized_energy,
                t.evaluations,
                t.best_sample_energy
            ));
        }
        s
    }
}

pub fn build_circuit(q: &QuboProblem, cfg: &VariationalConfig) -> ParamCircuit {
    match cfg.method {
        Method::Vqe => build_vqe_ansatz(q.num_vars(), cfg.p, cfg.final_rotation_layer),
        Method::Qaoa => build_qaoa_circuit(&to_ising(q), cfg.p),
    }
}

/// Runs `restarts` independent optimisations from uniform random parameters
/// in `[-pi, pi]`, samples each optimised state and keeps the lowest-energy
/// bitstring overall.
pub fn run_variational(q: &QuboProblem, cfg: &VariationalConfig) -> Result<VariationalOutcome> {
    let nq = q.num_vars();
    if nq > cfg.max_qubits {
        return Err(Error::capacity(format!(
            "{nq} variables need {nq} qubits, above the cap of {}; use graphs with at most {} vertices \
             or raise the cap (up to {})",
            cfg.max_qubits,
            (cfg.max_qubits as f64).sqrt().floor(),
            super::HARD_MAX_QUBITS
        )));
    }
    if cfg.restarts == 0 || cfg.shots == 0 {
        return Err(Error::param("restarts and shots must be at least 1"));
    }
    let h = diagonal_from_ising_capped(&to_ising(q), cfg.max_qubits)?;
    let circuit = build_circuit(q, cfg);
    let np = circuit.num_params();
    let mut opts = OptimizeOptions::for_params(np);
    if let Some(b) = cfg.budget {
        opts.budget = b.max(1);
    }
    opts.tol = cfg.tol;

    let results: Vec<Result<(RestartTrace, Assignment)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(cfg.seed, r as u64);
            let theta0: Vec<f64> = (0..np).map(|_| rng.gen_range(-PI..PI)).collect();
            let opt = optimize_circuit(&circuit, &h, &theta0, &opts, cfg.max_qubits)?;
            let psi = simulate_capped(&circuit, &opt.theta, cfg.max_qubits)?;
            let counts = sample_with(&psi, cfg.shots, &mut rng);
            let (idx, e) = counts
                .keys()
                .map(|&b| (b, q.energy_unchecked(Assignment::from_index(b, nq).bits())))
                .fold((usize::MAX, f64::INFINITY), |best, cur| {
                    if cur.1 < best.1 {
                        cur
                    } else {
                        best
                    }
                });
            let trace = RestartTrace {
                restart: r,
                initial_energy: opt.initial_value,
                optimized_energy: opt.value,
                evaluations: opt.evaluations,
                best_sample_energy: e,
            };
            Ok((trace, Assignment::from_index(idx, nq)))
        })
        .collect();

    let mut traces = Vec::with_capacity(cfg.restarts);
    let mut best: Option<(Assignment, f64)> = None;
    for res in results {
        let (trace, x) = res?;
        if best
            .as_ref()
            .is_none_or(|(_, e)| trace.best_sample_energy < *e)
        {
            best = Some((x, trace.best_sample_energy));
        }
        traces.push(trace);
    }
    let (best, best_energy) = best.expect("at least one restart");
    Ok(VariationalOutcome {
        ged: q.ged_from_solution(&best),
        best,
        best_energy,
        num_params: np,
        depth: circuit.depth(),
        size: circuit.size(),
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::qubo::build_qubo;

    #[test]
    fn k1_qaoa() {
        let k1 = Graph::empty(1);
        let q = build_qubo(&k1, &k1, 1.0, 0.1).unwrap();
        let cfg = VariationalConfig {
            restarts: 8,
            shots: 64,
            seed: 3,
            ..VariationalConfig::new(Method::Qaoa, 1)
        };
        let out = run_variational(&q, &cfg).unwrap();
        assert_eq!(out.best_energy, 0.0);
        assert_eq!(out.ged, Some(0));
        assert_eq!(out.num_params, 2);
        assert_eq!(out.traces.len(), 8);
        for t in &out.traces {
            assert!(t.optimized_energy <= t.initial_energy);
        }
    }

    #[test]
    fn capacity_error_for_large_instances() {
        let g = Graph::empty(5);
        let q = build_qubo(&g, &g, 1.0, 0.1).unwrap();
        let cfg = VariationalConfig::new(Method::Qaoa, 1);
        assert!(matches!(run_variational(&q, &cfg), Err(Error::Capacity(_))));
    }

    #[test]
    fn deterministic() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let q = build_qubo(&g, &Graph::empty(2), 1.0, 0.1).unwrap();
        let cfg = VariationalConfig {
            restarts: 4,
            shots: 32,
            seed: 11,
            budget: Some(60),
            ..VariationalConfig::new(Method::Vqe, 1)
        };
        assert_eq!(
            run_variational(&q, &cfg).unwrap(),
            run_variational(&q, &cfg).unwrap()
        );
    }

    #[test]
    fn method_parse() {
        assert_eq!("QAOA".parse::<Method>().unwrap(), Method::Qaoa);
        assert_eq!("vqe".parse::<Method>().unwrap(), Method::Vqe);
        assert!("sa".parse::<Method>().is_err());
    }
}
