//! Simulated annealing over binary assignments.
//!
//! Each shot starts from a uniformly random assignment and proposes single
//! bit flips under a geometric cooling schedule, accepting uphill moves with
//! Metropolis probability `exp(-dE / T)`, until `T <= t_min`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qubo::{Assignment, QuboProblem};
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct SaParams {
    pub t0: f64,
    pub decay: f64,
    pub t_min: f64,
    pub shots: usize,
    pub seed: u64,
}

pub const DEFAULT_T_MIN: f64 = 1e-3;

impl SaParams {
    /// Default schedule for `q`: `t0 = 10 * max|q|`, `t_min = 1e-3`, and a
    /// decay giving roughly `10 * num_vars^2` proposals per shot.
    pub fn for_problem(q: &QuboProblem, shots: usize, seed: u64) -> Self {
        let t0 = (10.0 * q.max_abs_coeff()).max(10.0 * DEFAULT_T_MIN);
        let steps = (10 * q.num_vars() * q.num_vars()).max(10) as f64;
        let decay = (DEFAULT_T_MIN / t0).powf(1.0 / steps);
        SaParams {
            t0,
            decay,
            t_min: DEFAULT_T_MIN,
            shots,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::param(format!(
                "t0 must be positive, got {}",
                self.t0
            )));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::param(format!(
                "decay must lie in (0, 1), got {}",
                self.decay
            )));
        }
        if !(self.t_min > 0.0 && self.t_min < self.t0) {
            return Err(Error::param(format!(
                "need 0 < t_min < t0, got t_min={} t0={}",
                self.t_min, self.t0
            )));
        }
        if self.shots == 0 {
            return Err(Error::param("shots must be at least 1"));
        }
        Ok(())
    }

    /// Number of proposals each shot performs.
    pub fn steps_per_shot(&self) -> usize {
        let mut t = self.t0;
        let mut steps = 0;
        while t > self.t_min {
            t *= self.decay;
            steps += 1;
        }
        steps
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<Assignment>,
    pub energies: Vec<f64>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn best(&self) -> Option<(&Assignment, f64)> {
        best(self)
    }

    /// CSV with columns `shot,energy,bits`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("shot,energy,bits\n");
        for (i, (x, e)) in self.samples.iter().zip(&self.energies).enumerate() {
            s.push_str(&format!("{i},{e:.17e},{}\n", x.to_bit_string()));
        }
        s
    }
}

/// Minimum-energy sample; ties go to the earliest.
pub fn best(ss: &SampleSet) -> Option<(&Assignment, f64)> {
    let mut it = ss.samples.iter().zip(ss.energies.iter().copied());
    let first = it.next()?;
    Some(it.fold(first, |b, cur| if cur.1 < b.1 { cur } else { b }))
}

/// Symmetric off-diagonal couplings and diagonal, for O(1) flip energies.
struct Dense {
    q: usize,
    diag: Vec<f64>,
    w: Vec<f64>,
    /// Flip energies below this are round-off from the running field.
    eps: f64,
}

impl Dense {
    fn new(p: &QuboProblem) -> Self {
        let q = p.num_vars();
        let mut diag = vec![0.0; q];
        let mut w = vec![0.0; q * q];
        for (a, b, v) in p.entries() {
            if a == b {
                diag[a] = v;
            } else {
                w[a * q + b] = v;
                w[b * q + a] = v;
            }
        }
        Dense {
            q,
            diag,
            w,
            eps: 1e-12 * p.max_abs_coeff().max(1.0),
        }
    }

    fn row(&self, l: usize) -> &[f64] {
        &self.w[l * self.q..(l + 1) * self.q]
    }
}

/// Runs `params.shots` independent annealing restarts.
///
/// Shot `s` draws from the RNG stream `(seed, s)`, so the result does not
/// depend on how shots are scheduled across threads.
pub fn anneal(q: &QuboProblem, params: &SaParams) -> Result<SampleSet> {
    if q.num_vars() == 0 {
        return Err(Error::param("QUBO has no variables"));
    }
    params.validate()?;
    let dense = Dense::new(q);
    let results: Vec<(Assignment, f64)> = (0..params.shots)
        .into_par_iter()
        .map(|shot| {
            let bits = run_shot(&dense, params, shot as u64, |_, _| {});
            let e = q.energy_unchecked(&bits);
            (
                Assignment::from_bits(bits).expect("binary by construction"),
                e,
            )
        })
        .collect();
    let (samples, energies) = results.into_iter().unzip();
    Ok(SampleSet { samples, energies })
}

/// One restart. `observe(dE, accepted)` sees every proposal, which the tests
/// use to check the acceptance rule.
fn run_shot<F: FnMut(f64, bool)>(d: &Dense, p: &SaParams, shot: u64, mut observe: F) -> Vec<u8> {
    let mut rng = rng::stream(p.seed, shot);
    let q = d.q;
    let mut x: Vec<u8> = (0..q).map(|_| rng.gen_range(0..=1u8)).collect();
    // field[l] = sum_m w[l][m] x[m]
    let mut field = vec![0.0; q];
    for (l, f) in field.iter_mut().enumerate() {
        *f = d.row(l).iter().zip(&x).map(|(w, &b)| w * b as f64).sum();
    }
    let mut t = p.t0;
    while t > p.t_min {
        let l = rng.gen_range(0..q);
        let sign = if x[l] == 0 { 1.0 } else { -1.0 };
        let mut delta = sign * (d.diag[l] + field[l]);
        if delta.abs() < d.eps {
            delta = 0.0;
        }
        let r: f64 = rng.gen();
        let accept = delta <= 0.0 || (-delta / t).exp() > r;
        observe(delta, accept);
        if accept {
            x[l] ^= 1;
            for (f, w) in field.iter_mut().zip(d.row(l)) {
                *f += sign * w;
            }
        }
        t *= p.decay;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_graph, Graph};
    use crate::qubo::build_qubo;

    fn brute_min(q: &QuboProblem) -> f64 {
        (0..1usize << q.num_vars())
            .map(|b| q.energy(&Assignment::from_index(b, q.num_vars())).unwrap())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn k1_finds_zero() {
        let k1 = Graph::empty(1);
        let q = build_qubo(&k1, &k1, 1.0, 0.1).unwrap();
        let ss = anneal(&q, &SaParams::for_problem(&q, 100, 3)).unwrap();
        let (x, e) = best(&ss).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(x.bits(), &[1]);
    }

    #[test]
    fn params_validation() {
        let q = build_qubo(&Graph::empty(1), &Graph::empty(1), 1.0, 1.0).unwrap();
        let ok = SaParams {
            t0: 1.0,
            decay: 0.9,
            t_min: 0.01,
            shots: 1,
            seed: 0,
        };
        assert!(anneal(&q, &ok).is_ok());
        for bad in [
            SaParams {
                decay: 1.0,
                ..ok.clone()
            },
            SaParams {
                decay: 0.0,
                ..ok.clone()
            },
            SaParams {
                t_min: 2.0,
                ..ok.clone()
            },
            SaParams {
                t0: -1.0,
                ..ok.clone()
            },
            SaParams {
                shots: 0,
                ..ok.clone()
            },
        ] {
            assert!(
                matches!(anneal(&q, &bad), Err(Error::Parameter(_))),
                "{bad:?}"
            );
        }
        assert!(anneal(&QuboProblem::new(0), &ok).is_err());
    }

    #[test]
    fn reproducible() {
        let g1 = random_graph(3, 0.5, 1).unwrap();
        let g2 = random_graph(3, 0.5, 2).unwrap();
        let q = build_qubo(&g1, &g2, 1.0, 0.1).unwrap();
        let p = SaParams::for_problem(&q, 50, 99);
        assert_eq!(anneal(&q, &p).unwrap(), anneal(&q, &p).unwrap());
        let other = anneal(
            &q,
            &SaParams {
                seed: 100,
                ..p.clone()
            },
        )
        .unwrap();
        assert_ne!(anneal(&q, &p).unwrap(), other);
    }

    #[test]
    fn energies_reevaluate_exactly() {
        let g1 = random_graph(4, 0.5, 5).unwrap();
        let g2 = random_graph(4, 0.5, 6).unwrap();
        let q = build_qubo(&g1, &g2, 1.0, 0.1).unwrap();
        let ss = anneal(&q, &SaParams::for_problem(&q, 40, 1)).unwrap();
        for (x, &e) in ss.samples.iter().zip(&ss.energies) {
            assert_eq!(q.energy(x).unwrap(), e);
        }
    }

    #[test]
    fn incremental_delta_matches_full_evaluation() {
        let g1 = random_graph(3, 0.6, 8).unwrap();
        let g2 = random_graph(3, 0.3, 9).unwrap();
        let q = build_qubo(&g1, &g2, 1.0, 0.1).unwrap();
        let d = Dense::new(&q);
        let x = Assignment::from_index(0b1_0110_1001, 9);
        for l in 0..9 {
            let field: f64 = d
                .row(l)
                .iter()
                .zip(x.bits())
                .map(|(w, &b)| w * b as f64)
                .sum();
            let sign = if x.get(l) == 0 { 1.0 } else { -1.0 };
            let delta = sign * (d.diag[l] + field);
            let mut y = x.clone();
            y.flip(l);
            let full = q.energy(&y).unwrap() - q.energy(&x).unwrap();
            assert!((delta - full).abs() < 1e-9);
        }
    }

    #[test]
    fn greedy_limit_never_goes_uphill() {
        let g1 = random_graph(3, 0.5, 21).unwrap();
        let g2 = random_graph(3, 0.5, 22).unwrap();
        let q = build_qubo(&g1, &g2, 1.0, 0.1).unwrap();
        let d = Dense::new(&q);
        // t0 = t_min (1 + 1e-3) with ~1000 proposals at T ~ 1e-9, where an
        // uphill move of 0.1 is accepted with probability exp(-1e8).
        let p = SaParams {
            t0: 1e-9 * (1.0 + 1e-3),
            decay: 1.0 - 1e-6,
            t_min: 1e-9,
            shots: 1,
            seed: 0,
        };
        assert!(p.steps_per_shot() > 900);
        for shot in 0..20 {
            run_shot(&d, &p, shot, |delta, accepted| {
                if accepted {
                    assert!(delta <= 0.0, "accepted uphill {delta:e}");
                }
            });
        }
    }

    #[test]
    fn temperature_schedule_is_geometric() {
        let p = SaParams {
            t0: 10.0,
            decay: 0.5,
            t_min: 1.0,
            shots: 1,
            seed: 0,
        };
        // 10, 5, 2.5, 1.25 > 1 -> four proposals, ending at 0.625.
        assert_eq!(p.steps_per_shot(), 4);
        let q = build_qubo(&Graph::cycle(3), &Graph::cycle(3), 1.0, 0.1).unwrap();
        let dp = SaParams::for_problem(&q, 1, 0);
        let steps = dp.steps_per_shot();
        let target = 10 * 81;
        assert!((steps as i64 - target as i64).abs() <= 1, "{steps}");
    }

    #[test]
    fn best_selection() {
        let a = Assignment::from_bits(vec![0]).unwrap();
        let b = Assignment::from_bits(vec![1]).unwrap();
        let single = SampleSet {
            samples: vec![a.clone()],
            energies: vec![0.5],
        };
        assert_eq!(best(&single), Some((&a, 0.5)));
        let two = SampleSet {
            samples: vec![a.clone(), b.clone()],
            energies: vec![0.2, 0.0],
        };
        assert_eq!(best(&two), Some((&b, 0.0)));
        let tie = SampleSet {
            samples: vec![a.clone(), b],
            energies: vec![0.0, 0.0],
        };
        assert_eq!(best(&tie), Some((&a, 0.0)));
        assert_eq!(best(&SampleSet::default()), None);
    }

    #[test]
    fn best_matches_linear_scan_on_large_set() {
        let g1 = random_graph(3, 0.5, 31).unwrap();
        let g2 = random_graph(3, 0.5, 32).unwrap();
        let q = build_qubo(&g1, &g2, 1.0, 0.1).unwrap();
        let ss = anneal(&q, &SaParams::for_problem(&q, 1000, 4)).unwrap();
        let mut idx = 0;
        for i in 1..ss.len() {
            if ss.energies[i] < ss.energies[idx] {
                idx = i;
            }
        }
        let (x, e) = best(&ss).unwrap();
        assert_eq!((x, e), (&ss.samples[idx], ss.energies[idx]));
        assert!((e - brute_min(&q)).abs() < 1e-9);
    }
}
