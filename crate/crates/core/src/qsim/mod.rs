//! Dense statevector simulation of variational circuits.
//!
//! Conventions used throughout:
//!
//! * Qubit `q` is bit `q` of a basis index (little-endian), and qubit `l`
//!   carries QUBO variable `l`.
//! * A set bit reads as `x = 1`, i.e. spin `s = +1`. Since `Z|1> = -|1>`,
//!   `s = -Z` on each qubit.
//! * `RX(t) = exp(-i t X / 2)`, `RY(t) = exp(-i t Y / 2)`,
//!   `RZ(t) = exp(-i t Z / 2)`, `RZZ(t) = exp(-i t Z Z / 2)`.

pub mod circuit;
pub mod optimize;
pub mod state;
pub mod variational;

pub use circuit::{build_qaoa_circuit, build_vqe_ansatz, Angle, Gate, ParamCircuit};
pub use optimize::{optimize, OptimizeOptions, OptimizeResult};
pub use state::{
    diagonal_from_ising, expectation, sample, simulate, DiagonalHamiltonian, Statevector,
};
pub use variational::{
    run_variational, Method, RestartTrace, VariationalConfig, VariationalOutcome,
};

/// Default qubit cap: 16 qubits is a 1 MiB statevector.
pub const DEFAULT_MAX_QUBITS: usize = 16;
/// Absolute cap: 25 qubits is a 512 MiB statevector.
pub const HARD_MAX_QUBITS: usize = 25;
