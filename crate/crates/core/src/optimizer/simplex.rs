//! Nelder–Mead direct search with dimension-adaptive coefficients.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Outcome of one local search.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// False when the evaluation budget ran out before the tolerance was met.
    pub converged: bool,
}

/// Default edge length of the starting simplex.
pub const DEFAULT_STEP: f64 = 0.25;

/// Minimizes `objective` from `x0` with at most `budget` evaluations.
///
/// Stops once the spread of simplex values is at most `tol` and every vertex
/// lies within `√tol` of the best one. The returned value never exceeds
/// `objective(x0)`.
pub fn local_search(
    objective: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    budget: usize,
    tol: f64,
) -> LocalResult {
    local_search_with_step(objective, x0, budget, tol, DEFAULT_STEP)
}

pub fn local_search_with_step(
    objective: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    budget: usize,
    tol: f64,
    step: f64,
) -> LocalResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut f = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let f0 = f(x0, &mut evals);
    if n == 0 || budget <= 1 {
        return LocalResult {
            x: x0.to_vec(),
            value: f0,
            evaluations: evals,
            converged: n == 0,
        };
    }

    let nf = n as f64;
    let (alpha, beta, gamma, shrink) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    vals.push(f0);
    for i in 0..n {
        if evals >= budget {
            break;
        }
        let mut p = x0.to_vec();
        p[i] += step;
        vals.push(f(&p, &mut evals));
        pts.push(p);
    }
    if pts.len() < n + 1 {
        return best_of(pts, vals, evals, false);
    }

    let sqrt_tol = math::sqrt(tol);
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut converged = false;

    while evals < budget {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];

        let spread = vals[worst] - vals[best];
        let diameter = pts
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&pts[best])
                    .map(|(a, b)| math::abs(a - b))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= tol && diameter <= sqrt_tol {
            converged = true;
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[i]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= nf);

        let along = |coef: f64, out: &mut [f64], pts: &[Vec<f64>]| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(&pts[worst]) {
                *o = c + coef * (c - w);
            }
        };

        along(alpha, &mut trial, &pts);
        let fr = f(&trial, &mut evals);
        if fr < vals[best] {
            let reflected = trial.clone();
            along(alpha * beta, &mut trial, &pts);
            let fe = if evals < budget { f(&trial, &mut evals) } else { f64::INFINITY };
            if fe < fr {
                pts[worst].copy_from_slice(&trial);
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst].copy_from_slice(&trial);
            vals[worst] = fr;
            continue;
        }
        if evals >= budget {
            break;
        }
        // Outside contraction if the reflection beat the worst, inside otherwise.
        let outside = fr < vals[worst];
        let coef = if outside { alpha * gamma } else { -gamma };
        along(coef, &mut trial, &pts);
        let fc = f(&trial, &mut evals);
        let accept = if outside { fc <= fr } else { fc < vals[worst] };
        if accept {
            pts[worst].copy_from_slice(&trial);
            vals[worst] = fc;
            continue;
        }
        let anchor = pts[best].clone();
        for &i in &order[1..] {
            if evals >= budget {
                break;
            }
            for (x, a) in pts[i].iter_mut().zip(&anchor) {
                *x = a + shrink * (*x - a);
            }
            vals[i] = f(&pts[i], &mut evals);
        }
    }
    best_of(pts, vals, evals, converged)
}

fn best_of(pts: Vec<Vec<f64>>, vals: Vec<f64>, evaluations: usize, converged: bool) -> LocalResult {
    let mut bi = 0;
    for i in 1..vals.len() {
        if vals[i] < vals[bi] {
            bi = i;
        }
    }
    LocalResult {
        x: pts[bi].clone(),
        value: vals[bi],
        evaluations,
        converged,
    }
}
