//! Derivative-free minimisation of circuit energies (Nelder-Mead simplex).

use super::circuit::ParamCircuit;
use super::state::{expectation, simulate_capped, DiagonalHamiltonian};
use super::DEFAULT_MAX_QUBITS;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeOptions {
    /// Maximum number of objective evaluations, including the starting point.
    pub budget: usize,
    /// Stop once every simplex vertex lies within `tol` (max-norm) of the best.
    pub tol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl OptimizeOptions {
    /// `budget = 500 * num_params`, `tol = 1e-4`.
    pub fn for_params(num_params: usize) -> Self {
        OptimizeOptions {
            budget: (500 * num_params).max(1),
            tol: 1e-4,
            initial_step: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeResult {
    pub theta: Vec<f64>,
    pub value: f64,
    pub initial_value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Tracks the evaluation budget and the best point seen.
struct Counted<F> {
    f: F,
    evals: usize,
    budget: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn exhausted(&self) -> bool {
        self.evals >= self.budget
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        let better = match &self.best {
            Some((_, b)) => v < *b,
            None => true,
        };
        if better {
            self.best = Some((x.to_vec(), v));
        }
        v
    }
}

/// Minimises `f` from `x0`. The returned value is the lowest one evaluated,
/// so it never exceeds `f(x0)`.
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: &OptimizeOptions) -> OptimizeResult
where
    F: FnMut(&[f64]) -> f64,
{
    let budget = opts.budget.max(1);
    let mut cf = Counted {
        f,
        evals: 0,
        budget,
        best: None,
    };
    let initial_value = cf.eval(x0);
    let dim = x0.len();
    let converged = dim == 0 || run_simplex(&mut cf, x0, initial_value, opts);
    let (theta, value) = cf.best.take().expect("x0 was evaluated");
    OptimizeResult {
        theta,
        value,
        initial_value,
        evaluations: cf.evals,
        converged,
    }
}

fn run_simplex<F: FnMut(&[f64]) -> f64>(
    cf: &mut Counted<F>,
    x0: &[f64],
    f0: f64,
    opts: &OptimizeOptions,
) -> bool {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..dim {
        if cf.exhausted() {
            return false;
        }
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = cf.eval(&x);
        simplex.push((x, v));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if size < opts.tol {
            return true;
        }
        if cf.exhausted() {
            return false;
        }

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(REFLECT);
        let fr = cf.eval(&xr);
        if fr < simplex[0].1 {
            if cf.exhausted() {
                simplex[dim] = (xr, fr);
                continue;
            }
            let xe = along(EXPAND);
            let fe = cf.eval(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        if cf.exhausted() {
            if fr < worst.1 {
                simplex[dim] = (xr, fr);
            }
            continue;
        }
        // Outside contraction when the reflection improved on the worst
        // point, inside contraction otherwise.
        let (xc, fc) = if fr < worst.1 {
            let xc = along(CONTRACT);
            let fc = cf.eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = cf.eval(&xc);
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            if cf.exhausted() {
                return false;
            }
            let x: Vec<f64> = best
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + SHRINK * (v - b))
                .collect();
            let v = cf.eval(&x);
            *vertex = (x, v);
        }
    }
}

/// Minimises `E(theta) = <psi(theta)| H |psi(theta)>` from `theta0` with at
/// most `budget` evaluations. Returns `(theta*, E*)`.
pub fn optimize(
    c: &ParamCircuit,
    h: &DiagonalHamiltonian,
    theta0: &[f64],
    budget: usize,
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let opts = OptimizeOptions {
        budget,
        tol,
        ..OptimizeOptions::for_params(c.num_params())
    };
    let r = optimize_circuit(c, h, theta0, &opts, DEFAULT_MAX_QUBITS)?;
    Ok((r.theta, r.value))
}

pub fn optimize_circuit(
    c: &ParamCircuit,
    h: &DiagonalHamiltonian,
    theta0: &[f64],
    opts: &OptimizeOptions,
    max_qubits: usize,
) -> Result<OptimizeResult> {
    // Surface size and capacity errors before entering the objective.
    let psi = simulate_capped(c, theta0, max_qubits)?;
    expectation(&psi, h)?;
    let objective = |theta: &[f64]| {
        let psi = simulate_capped(c, theta, max_qubits).expect("validated above");
        expectation(&psi, h).expect("validated above")
    };
    Ok(nelder_mead(objective, theta0, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::circuit::{Angle, Gate};

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn minimises_rosenbrock() {
        let opts = OptimizeOptions {
            budget: 5000,
            tol: 1e-8,
            initial_step: 0.5,
        };
        let r = nelder_mead(rosenbrock, &[-1.2, 1.0], &opts);
        assert!(r.converged);
        assert!(r.value < 1e-8, "{}", r.value);
        assert!((r.theta[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn respects_budget() {
        for budget in [1, 2, 3, 7, 50] {
            let opts = OptimizeOptions {
                budget,
                tol: 1e-12,
                initial_step: 0.5,
            };
            let mut calls = 0;
            let r = nelder_mead(
                |x: &[f64]| {
                    calls += 1;
                    rosenbrock(x)
                },
                &[-1.2, 1.0],
                &opts,
            );
            assert_eq!(calls, r.evaluations);
            assert!(r.evaluations <= budget);
            assert!(r.value <= r.initial_value);
        }
    }

    #[test]
    fn budget_one_returns_start() {
        let opts = OptimizeOptions {
            budget: 1,
            tol: 1e-4,
            initial_step: 0.5,
        };
        let r = nelder_mead(rosenbrock, &[0.3, 0.4], &opts);
        assert_eq!(r.theta, vec![0.3, 0.4]);
        assert_eq!(r.value, rosenbrock(&[0.3, 0.4]));
    }

    #[test]
    fn single_qubit_rotation() {
        let mut c = ParamCircuit::new(1, 1);
        c.push(Gate::Ry(0, Angle::param(0))).unwrap();
        let h = DiagonalHamiltonian {
            energies: vec![0.0, -1.0],
        };
        let (theta, e) = optimize(&c, &h, &[0.1], 100, 1e-6).unwrap();
        assert!(e <= -0.99, "E* = {e} at {theta:?}");
    }
}
