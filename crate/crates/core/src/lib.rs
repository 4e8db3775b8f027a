//! Graph edit distance through a QUBO/Ising reduction.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: simple undirected graphs, random generation, padding and the
//!   factorial exact GED oracle used as ground truth.
//! * [`qubo`] and [`ising`]: the binary quadratic encoding of GED and its spin
//!   form.
//! * [`sa`]: a simulated annealing sampler for any [`qubo::QuboProblem`].
//! * [`qsim`]: a dense statevector simulator with VQE and QAOA ansatz builders,
//!   a derivative-free optimizer and the end-to-end variational driver.
//! * [`metrics`]: relative difference, success/high-quality probability,
//!   time-to-solution and circuit resource accounting.
//! * [`bench`]: dataset generation, all-pairs benchmark runs, beta sweeps and
//!   reporting.

pub mod bench;
pub mod error;
pub mod graph;
pub mod ising;
pub mod metrics;
pub mod qsim;
pub mod qubo;
pub mod rng;
pub mod sa;

pub use error::{Error, Result};
pub use graph::{Bijection, Graph};
pub use ising::IsingModel;
pub use qubo::{Assignment, QuboProblem};
