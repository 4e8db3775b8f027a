//! Statevector, diagonal problem Hamiltonian, expectation and sampling.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use super::circuit::{Gate, ParamCircuit};
use super::{DEFAULT_MAX_QUBITS, HARD_MAX_QUBITS};
use crate::error::{Error, Result};
use crate::ising::{ising_energy, spins_from_index, IsingModel};
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Statevector { amplitudes }
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::param("amplitude count must be a power of two"));
        }
        Ok(Statevector { amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    pub fn apply(&mut self, gate: &Gate, theta: &[f64]) {
        match *gate {
            Gate::H(q) => {
                self.apply_single(q, |a, b| ((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2))
            }
            Gate::Rx(q, angle) => {
                let t = angle.resolve(theta) / 2.0;
                let (c, s) = (t.cos(), t.sin());
                let mis = Complex64::new(0.0, -s);
                self.apply_single(q, |a, b| (a * c + b * mis, a * mis + b * c))
            }
            Gate::Ry(q, angle) => {
                let t = angle.resolve(theta) / 2.0;
                let (c, s) = (t.cos(), t.sin());
                self.apply_single(q, |a, b| (a * c - b * s, a * s + b * c))
            }
            Gate::Rz(q, angle) => {
                let t = angle.resolve(theta) / 2.0;
                let (p0, p1) = (
                    Complex64::from_polar(1.0, -t),
                    Complex64::from_polar(1.0, t),
                );
                self.apply_single(q, |a, b| (a * p0, b * p1))
            }
            Gate::Rzz(qa, qb, angle) => {
                let t = angle.resolve(theta) / 2.0;
                let even = Complex64::from_polar(1.0, -t);
                let odd = Complex64::from_polar(1.0, t);
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    let parity = (i >> qa ^ i >> qb) & 1;
                    *amp *= if parity == 0 { even } else { odd };
                }
            }
            Gate::Cx { control, target } => {
                let (cm, tm) = (1usize << control, 1usize << target);
                for i in 0..self.amplitudes.len() {
                    if i & cm != 0 && i & tm == 0 {
                        self.amplitudes.swap(i, i | tm);
                    }
                }
            }
        }
    }

    fn apply_single<F>(&mut self, q: usize, f: F)
    where
        F: Fn(Complex64, Complex64) -> (Complex64, Complex64),
    {
        let mask = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a, b) = f(self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = a;
                self.amplitudes[j] = b;
            }
        }
    }

    /// Multiplies each amplitude by `exp(-i gamma (E_b - shift))`.
    pub fn apply_diagonal_phase(&mut self, h: &DiagonalHamiltonian, gamma: f64, shift: f64) {
        for (amp, &e) in self.amplitudes.iter_mut().zip(&h.energies) {
            *amp *= Complex64::from_polar(1.0, -gamma * (e - shift));
        }
    }
}

fn check_qubits(num_qubits: usize, max_qubits: usize) -> Result<()> {
    if max_qubits > HARD_MAX_QUBITS {
        return Err(Error::capacity(format!(
            "qubit cap {max_qubits} exceeds the supported maximum of {HARD_MAX_QUBITS}"
        )));
    }
    if num_qubits > max_qubits {
        return Err(Error::capacity(format!(
            "{num_qubits} qubits exceed the cap of {max_qubits} ({} MiB statevector); \
             raise the cap up to {HARD_MAX_QUBITS} or reduce the problem size",
            (16usize << num_qubits) >> 20
        )));
    }
    Ok(())
}

/// Applies the circuit to `|0...0>` under the default qubit cap.
pub fn simulate(c: &ParamCircuit, theta: &[f64]) -> Result<Statevector> {
    simulate_capped(c, theta, DEFAULT_MAX_QUBITS)
}

pub fn simulate_capped(c: &ParamCircuit, theta: &[f64], max_qubits: usize) -> Result<Statevector> {
    check_qubits(c.num_qubits(), max_qubits)?;
    if theta.len() != c.num_params() {
        return Err(Error::param(format!(
            "{} parameters given, circuit takes {}",
            theta.len(),
            c.num_params()
        )));
    }
    let mut psi = Statevector::zero(c.num_qubits());
    for g in c.gates() {
        psi.apply(g, theta);
    }
    Ok(psi)
}

/// Problem Hamiltonian as one energy per computational basis state.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalHamiltonian {
    pub energies: Vec<f64>,
}

impl DiagonalHamiltonian {
    pub fn num_qubits(&self) -> usize {
        self.energies.len().trailing_zeros() as usize
    }

    pub fn min(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.energies
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.energies.iter().sum::<f64>() / self.energies.len() as f64
    }
}

/// Tabulates the Ising energy of every basis state (bit set = spin up).
///
/// Entries are filled incrementally: `b` differs from `b` without its highest
/// set bit `t` by flipping spin `t` up, which costs `-2 h_t - 2 sum_m J_tm s_m`.
pub fn diagonal_from_ising(m: &IsingModel) -> Result<DiagonalHamiltonian> {
    diagonal_from_ising_capped(m, DEFAULT_MAX_QUBITS)
}

pub fn diagonal_from_ising_capped(
    m: &IsingModel,
    max_qubits: usize,
) -> Result<DiagonalHamiltonian> {
    let q = m.num_spins();
    check_qubits(q, max_qubits)?;
    let mut coupling = vec![vec![0.0; q]; q];
    for (&(a, b), &v) in &m.j {
        coupling[a][b] += v;
        coupling[b][a] += v;
    }
    let row_sum: Vec<f64> = coupling.iter().map(|r| r.iter().sum()).collect();
    let mut energies = vec![0.0; 1 << q];
    energies[0] = ising_energy(m, &spins_from_index(0, q))?;
    for b in 1usize..1 << q {
        let t = (usize::BITS - 1 - b.leading_zeros()) as usize;
        let prev = b & !(1 << t);
        // sum_m J_tm s_m with s_m = 2 x_m - 1
        let mut up = 0.0;
        let mut rest = prev;
        while rest != 0 {
            let m_idx = rest.trailing_zeros() as usize;
            up += coupling[t][m_idx];
            rest &= rest - 1;
        }
        let local = 2.0 * up - row_sum[t];
        energies[b] = energies[prev] - 2.0 * m.h[t] - 2.0 * local;
    }
    Ok(DiagonalHamiltonian { energies })
}

/// `<psi| H |psi>` for a diagonal `H`.
pub fn expectation(psi: &Statevector, h: &DiagonalHamiltonian) -> Result<f64> {
    if psi.amplitudes.len() != h.energies.len() {
        return Err(Error::param("statevector and Hamiltonian sizes differ"));
    }
    Ok(psi
        .amplitudes
        .iter()
        .zip(&h.energies)
        .map(|(a, e)| a.norm_sqr() * e)
        .sum())
}

/// Draws `shots` basis states with Born-rule probabilities.
pub fn sample(psi: &Statevector, shots: usize, seed: u64) -> BTreeMap<usize, usize> {
    sample_with(psi, shots, &mut rng::stream(seed, 0))
}

pub(crate) fn sample_with<R: Rng>(
    psi: &Statevector,
    shots: usize,
    rng: &mut R,
) -> BTreeMap<usize, usize> {
    let mut cdf = Vec::with_capacity(psi.amplitudes.len());
    let mut acc = 0.0;
    for a in &psi.amplitudes {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let r = rng.gen::<f64>() * total;
        let mut idx = cdf.partition_point(|&c| c <= r);
        if idx >= cdf.len() {
            idx = cdf.len() - 1;
        }
        // Skip zero-probability states that share a CDF value.
        while psi.amplitudes[idx].norm_sqr() == 0.0 && idx + 1 < cdf.len() {
            idx += 1;
        }
        *counts.entry(idx).or_insert(0) += 1;
    }
    counts
}
