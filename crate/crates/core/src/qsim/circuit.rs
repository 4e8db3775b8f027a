//! Parameterised circuits and the VQE/QAOA ansatz builders.

use crate::error::{Error, Result};
use crate::ising::IsingModel;

/// Rotation angle: a constant or `scale * theta[slot]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Const(f64),
    Param { slot: usize, scale: f64 },
}

impl Angle {
    pub fn param(slot: usize) -> Self {
        Angle::Param { slot, scale: 1.0 }
    }

    pub fn resolve(&self, theta: &[f64]) -> f64 {
        match *self {
            Angle::Const(a) => a,
            Angle::Param { slot, scale } => scale * theta[slot],
        }
    }

    fn slot(&self) -> Option<usize> {
        match *self {
            Angle::Const(_) => None,
            Angle::Param { slot, .. } => Some(slot),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    Rx(usize, Angle),
    Ry(usize, Angle),
    Rz(usize, Angle),
    Rzz(usize, usize, Angle),
    Cx { control: usize, target: usize },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Rzz(a, b, _) => vec![a, b],
            Gate::Cx { control, target } => vec![control, target],
        }
    }

    fn angle(&self) -> Option<&Angle> {
        match self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) | Gate::Rzz(_, _, a) => Some(a),
            Gate::H(_) | Gate::Cx { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamCircuit {
    num_qubits: usize,
    num_params: usize,
    gates: Vec<Gate>,
}

impl ParamCircuit {
    pub fn new(num_qubits: usize, num_params: usize) -> Self {
        ParamCircuit {
            num_qubits,
            num_params,
            gates: Vec::new(),
        }
    }

    /// Appends a gate after checking qubit and parameter indices.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::param(format!(
                "qubit {q} out of range for {} qubits",
                self.num_qubits
            )));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::param("two-qubit gate on a single qubit"));
        }
        if let Some(slot) = gate.angle().and_then(Angle::slot) {
            if slot >= self.num_params {
                return Err(Error::param(format!(
                    "parameter slot {slot} out of range for {} parameters",
                    self.num_params
                )));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Gate count.
    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// Longest path through the gate dependency DAG, counting gates.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        for g in &self.gates {
            let qs = g.qubits();
            let d = qs.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for q in qs {
                level[q] = d;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }
}

/// Hardware-efficient ansatz: each repetition applies two `RY` rotations per
/// qubit (distinct parameters) followed by `CX(j, k)` for every `j < k`.
///
/// With `final_rotation_layer`, one more double-`RY` layer closes the circuit,
/// giving `2 (p + 1) q` parameters instead of `2 p q`.
pub fn build_vqe_ansatz(num_qubits: usize, p: usize, final_rotation_layer: bool) -> ParamCircuit {
    let layers = p + usize::from(final_rotation_layer);
    let mut c = ParamCircuit::new(num_qubits, 2 * layers * num_qubits);
    let mut slot = 0;
    let mut rotations = |c: &mut ParamCircuit| {
        for q in 0..num_qubits {
            for _ in 0..2 {
                c.gates.push(Gate::Ry(q, Angle::param(slot)));
                slot += 1;
            }
        }
    };
    for _ in 0..p {
        rotations(&mut c);
        for j in 0..num_qubits {
            for k in j + 1..num_qubits {
                c.gates.push(Gate::Cx {
                    control: j,
                    target: k,
                });
            }
        }
    }
    if final_rotation_layer {
        rotations(&mut c);
    }
    c
}

/// QAOA circuit for an Ising model with parameters ordered
/// `(gamma_1, beta_1, ..., gamma_p, beta_p)`.
///
/// The phase layer realises `exp(-i gamma H_C)` up to a global phase: with
/// `s = -Z`, `H_C = -sum J_ij Z_i Z_j + sum h_i Z_i + const`, so each term
/// becomes a rotation with angle `2 * gamma * (Pauli coefficient)`, i.e.
/// `RZ(2 gamma h_i)` and `RZZ(-2 gamma J_ij)`. Zero terms are skipped. The
/// mixer `exp(-i beta sum X)` is `RX(2 beta)` on every qubit.
pub fn build_qaoa_circuit(m: &IsingModel, p: usize) -> ParamCircuit {
    let n = m.num_spins();
    let mut c = ParamCircuit::new(n, 2 * p);
    for q in 0..n {
        c.gates.push(Gate::H(q));
    }
    for r in 0..p {
        let (gamma, beta) = (2 * r, 2 * r + 1);
        for (q, &h) in m.h.iter().enumerate().filter(|(_, &h)| h != 0.0) {
            c.gates.push(Gate::Rz(
                q,
                Angle::Param {
                    slot: gamma,
                    scale: 2.0 * h,
                },
            ));
        }
        for (&(a, b), &j) in m.j.iter().filter(|(_, &j)| j != 0.0) {
            c.gates.push(Gate::Rzz(
                a,
                b,
                Angle::Param {
                    slot: gamma,
                    scale: -2.0 * j,
                },
            ));
        }
        for q in 0..n {
            c.gates.push(Gate::Rx(
                q,
                Angle::Param {
                    slot: beta,
                    scale: 2.0,
                },
            ));
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vqe_parameter_counts() {
        assert_eq!(build_vqe_ansatz(9, 1, true).num_params(), 36);
        assert_eq!(build_vqe_ansatz(9, 3, true).num_params(), 72);
        let c = build_vqe_ansatz(3, 1, false);
        assert_eq!(c.num_params(), 6);
        let cx = c
            .gates()
            .iter()
            .filter(|g| matches!(g, Gate::Cx { .. }))
            .count();
        assert_eq!(cx, 3);
    }

    #[test]
    fn vqe_three_qubit_depth_by_hand() {
        // RY RY on each qubit (depth 2), then CX(0,1) -> 3, CX(0,2) -> 4,
        // CX(1,2) -> 5.
        let c = build_vqe_ansatz(3, 1, false);
        assert_eq!(c.depth(), 5);
        assert_eq!(c.size(), 9);
        // The final layer adds two RY on qubit 2 after depth 5.
        let c = build_vqe_ansatz(3, 1, true);
        assert_eq!((c.depth(), c.size()), (7, 15));
    }

    #[test]
    fn vqe_slots_are_distinct() {
        let c = build_vqe_ansatz(4, 2, true);
        let mut slots: Vec<usize> = c
            .gates()
            .iter()
            .filter_map(|g| g.angle().and_then(Angle::slot))
            .collect();
        let total = slots.len();
        slots.sort_unstable();
        slots.dedup();
        assert_eq!(slots.len(), total);
        assert_eq!(total, c.num_params());
    }

    #[test]
    fn qaoa_parameter_counts() {
        let mut m = IsingModel::new(3);
        m.h[0] = 0.5;
        m.add_coupling(0, 2, 1.0);
        assert_eq!(build_qaoa_circuit(&m, 1).num_params(), 2);
        assert_eq!(build_qaoa_circuit(&m, 3).num_params(), 6);
        // 3 H + per layer (1 RZ + 1 RZZ + 3 RX)
        assert_eq!(build_qaoa_circuit(&m, 3).size(), 3 + 3 * 5);
    }

    #[test]
    fn push_validates() {
        let mut c = ParamCircuit::new(2, 1);
        assert!(c.push(Gate::H(2)).is_err());
        assert!(c.push(Gate::Ry(0, Angle::param(1))).is_err());
        assert!(c
            .push(Gate::Cx {
                control: 1,
                target: 1
            })
            .is_err());
        assert!(c.push(Gate::Rzz(0, 1, Angle::param(0))).is_ok());
        assert_eq!(c.depth(), 1);
        assert_eq!(ParamCircuit::new(3, 0).depth(), 0);
    }
}
