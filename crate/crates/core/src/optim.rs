//! Derivative-free local search and start-point generation.
//!
//! [`minimize`] is a Nelder–Mead simplex method with dimension-adaptive
//! coefficients (reflection 1, expansion `1 + 2/n`, contraction
//! `0.75 - 1/(2n)`, shrink `1 - 1/n`), which behaves better than the classic
//! coefficients above four dimensions. [`polish`] restarts the simplex at the
//! incumbent until restarts stop improving it.

use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Stop once the simplex diameter and value spread both fall below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 2000,
            initial_step: 0.4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimises `f` starting from `x0`.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n > 0, "nelder-mead needs at least one parameter");
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evaluations)).collect();

    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iters {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = values[worst] - values[best];
        let diameter = simplex
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= opts.tol && diameter <= opts.tol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &idx in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += x / nf;
            }
        }

        let along = |out: &mut Vec<f64>, coef: f64, from: &[f64]| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(from) {
                *o = c + coef * (c - w);
            }
        };

        along(&mut trial, alpha, &simplex[worst]);
        let f_reflect = eval(&trial, &mut evaluations);
        if f_reflect < values[best] {
            along(&mut trial2, beta, &simplex[worst]);
            let f_expand = eval(&trial2, &mut evaluations);
            if f_expand < f_reflect {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = f_expand;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = f_reflect;
            }
            continue;
        }
        if f_reflect < values[second_worst] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = f_reflect;
            continue;
        }
        let outside = f_reflect < values[worst];
        if outside {
            along(&mut trial2, gamma * alpha, &simplex[worst]);
        } else {
            along(&mut trial2, -gamma, &simplex[worst]);
        }
        let f_contract = eval(&trial2, &mut evaluations);
        let accept = if outside {
            f_contract <= f_reflect
        } else {
            f_contract < values[worst]
        };
        if accept {
            simplex[worst].copy_from_slice(&trial2);
            values[worst] = f_contract;
            continue;
        }
        let anchor = simplex[best].clone();
        for &idx in &order[1..] {
            for (x, a) in simplex[idx].iter_mut().zip(&anchor) {
                *x = a + delta * (*x - a);
            }
            values[idx] = eval(&simplex[idx], &mut evaluations);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("simplex is nonempty");
    NelderMeadOutcome {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        evaluations,
        converged,
    }
}

/// Runs [`minimize`] and then restarts it from the incumbent with a fresh
/// simplex, up to `max_restarts` times, while restarts keep improving the
/// value by more than `opts.tol`.
pub fn polish<F>(
    mut f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
    max_restarts: usize,
) -> NelderMeadOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let mut out = minimize(&mut f, x0, opts);
    let mut step = opts.initial_step;
    for _ in 0..max_restarts {
        step *= 0.5;
        let local = NelderMeadOptions {
            initial_step: step,
            ..*opts
        };
        let next = minimize(&mut f, &out.x, &local);
        let gain = out.value - next.value;
        let evaluations = out.evaluations + next.evaluations;
        let iterations = out.iterations + next.iterations;
        if next.value <= out.value {
            out = NelderMeadOutcome {
                evaluations,
                iterations,
                ..next
            };
        } else {
            out.evaluations = evaluations;
            out.iterations = iterations;
        }
        if gain <= opts.tol {
            break;
        }
    }
    out
}

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut acc = 0.0;
    while index > 0 {
        acc += (index % b) as f64 * scale;
        index /= b;
        scale *= inv;
    }
    acc
}

/// Quasi-random start points in a box: a Halton sequence with a random
/// Cranley–Patterson shift. Point `k` depends only on `k` and the shift, so
/// asking for more points only appends to the sequence.
#[derive(Debug, Clone)]
pub struct StartSequence {
    ranges: Vec<(f64, f64)>,
    shift: Vec<f64>,
}

impl StartSequence {
    pub fn new<R: Rng + ?Sized>(ranges: Vec<(f64, f64)>, rng: &mut R) -> Self {
        assert!(ranges.len() <= PRIMES.len(), "too many dimensions");
        let shift = ranges.iter().map(|_| rng.random::<f64>()).collect();
        Self { ranges, shift }
    }

    pub fn dim(&self) -> usize {
        self.ranges.len()
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        self.ranges
            .iter()
            .zip(&self.shift)
            .zip(PRIMES)
            .map(|(((lo, hi), s), p)| {
                let u = (radical_inverse(k as u64 + 1, p) + s).fract();
                lo + u * (hi - lo)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rosenbrock(x: &[f64]) -> f64 {
        x.windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum()
    }

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let out = minimize(f, &[0.0, 0.0], &NelderMeadOptions::default());
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn rosenbrock_polished() {
        let opts = NelderMeadOptions {
            tol: 1e-10,
            max_iters: 20_000,
            initial_step: 0.5,
        };
        let out = polish(rosenbrock, &[-1.2, 1.0], &opts, 5);
        assert!(out.value < 1e-8, "value {}", out.value);
        let out = polish(rosenbrock, &[0.1, 0.2, 0.3, 0.4], &opts, 5);
        assert!(out.value < 1e-8, "value {}", out.value);
        // The 4-d function also has a local minimum near (-0.78, 0.61, 0.38, 0.15).
        let out = polish(rosenbrock, &[-1.2, 1.0, 0.5, -0.3], &opts, 5);
        assert!((out.value - 3.7014).abs() < 1e-3, "value {}", out.value);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let opts = NelderMeadOptions {
            tol: 1e-14,
            max_iters: 5,
            initial_step: 0.5,
        };
        let out = minimize(rosenbrock, &[-1.2, 1.0], &opts);
        assert!(!out.converged);
        assert_eq!(out.iterations, 5);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.5).powi(2) };
        let out = minimize(f, &[0.2], &NelderMeadOptions::default());
        assert!((out.x[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn radical_inverse_base_two() {
        let seq: Vec<f64> = (1..5).map(|k| radical_inverse(k, 2)).collect();
        assert_eq!(seq, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn start_sequence_is_nested_and_in_range() {
        let ranges = vec![(0.0, 1.0), (-2.0, 2.0), (0.0, 6.0)];
        let a = StartSequence::new(ranges.clone(), &mut ChaCha8Rng::seed_from_u64(9));
        let b = StartSequence::new(ranges.clone(), &mut ChaCha8Rng::seed_from_u64(9));
        for k in 0..100 {
            let p = a.point(k);
            assert_eq!(p, b.point(k));
            for (x, (lo, hi)) in p.iter().zip(&ranges) {
                assert!(x >= lo && x < hi);
            }
        }
    }
}
