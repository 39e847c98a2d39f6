//! Adaptive incoherent protocol: Bayesian updates with a mutual-information
//! choice of measurement basis before every shot.
//!
//! Every shot prepares |0⟩, applies the channel once and measures
//! `cos α|0⟩ − i sin α|1⟩`. The state never leaves the y–z great circle, so
//! the basis is a single angle α (period π).

use alloc::collections::BTreeMap;
use core::f64::consts::{FRAC_PI_2, PI};

use super::helstrom::helstrom_angle;
use super::ProtocolResult;
use crate::math;
use crate::noise::{sample_angle, SeededRng};
use crate::optimizer::golden_section_max;
use crate::{Error, RdgInstance, Result};

const COARSE_POINTS: usize = 64;
const BASIS_TOL: f64 = 1e-6;
pub const MAX_EXACT_SHOTS: usize = 24;

/// `P(outcome | Θ_b) = ½(1 + e^{−2σ²} cos 2(α + μ_b))`.
pub fn outcome_prob(rdg: &RdgInstance, hypothesis: usize, alpha: f64) -> f64 {
    let d = rdg.dist(hypothesis);
    0.5 * (1.0 + d.attenuation() * math::cos(2.0 * (alpha + d.mu())))
}

fn plogq(p: f64, ratio: f64) -> f64 {
    if p <= 0.0 || ratio <= 0.0 {
        0.0
    } else {
        p * math::ln(ratio)
    }
}

/// `I(Θ; ψ)` in nats for prior `P(Θ₀) = prior0` and outcome likelihoods `q0`, `q1`.
pub fn mutual_information(prior0: f64, q0: f64, q1: f64) -> f64 {
    let prior = [prior0, 1.0 - prior0];
    let q = [q0, q1];
    let mut total = 0.0;
    for outcome in [true, false] {
        let like = |b: usize| if outcome { q[b] } else { 1.0 - q[b] };
        let marginal = prior[0] * like(0) + prior[1] * like(1);
        if marginal <= 0.0 {
            continue;
        }
        for b in 0..2 {
            let joint = prior[b] * like(b);
            total += plogq(joint, like(b) / marginal);
        }
    }
    total.max(0.0)
}

/// Basis angle maximizing the mutual information under the current posterior.
pub fn best_basis(rdg: &RdgInstance, prior0: f64) -> f64 {
    if prior0 <= 0.0 || prior0 >= 1.0 {
        return helstrom_angle(rdg);
    }
    let info = |a: f64| {
        mutual_information(prior0, outcome_prob(rdg, 0, a), outcome_prob(rdg, 1, a))
    };
    let step = PI / COARSE_POINTS as f64;
    let mut best = (-FRAC_PI_2, f64::NEG_INFINITY);
    for k in 0..COARSE_POINTS {
        let a = -FRAC_PI_2 + k as f64 * step;
        let v = info(a);
        if v > best.1 {
            best = (a, v);
        }
    }
    let (a, v) = golden_section_max(&info, best.0 - step, best.0 + step, BASIS_TOL);
    if v >= best.1 {
        a
    } else {
        best.0
    }
}

fn bayes_update(prior0: f64, q0: f64, q1: f64, outcome: bool) -> f64 {
    let (l0, l1) = if outcome { (q0, q1) } else { (1.0 - q0, 1.0 - q1) };
    let den = prior0 * l0 + (1.0 - prior0) * l1;
    if den <= 0.0 {
        prior0
    } else {
        prior0 * l0 / den
    }
}

/// Error of the final maximum-posterior guess when `truth` holds; ties cost ½.
fn decision_error(post0: f64, truth: usize) -> f64 {
    if post0 == 0.5 {
        0.5
    } else if (post0 > 0.5) == (truth == 0) {
        0.0
    } else {
        1.0
    }
}

/// Caches the MI-optimal basis per posterior value; the set of reachable
/// posteriors is small, so this saves almost all of the maximizations.
struct BasisCache<'a> {
    rdg: &'a RdgInstance,
    memo: BTreeMap<u64, (f64, f64, f64)>,
}

impl<'a> BasisCache<'a> {
    fn new(rdg: &'a RdgInstance) -> Self {
        BasisCache {
            rdg,
            memo: BTreeMap::new(),
        }
    }

    /// `(α, q0, q1)` for posterior `p0`.
    fn get(&mut self, p0: f64) -> (f64, f64, f64) {
        let rdg = self.rdg;
        *self.memo.entry(p0.to_bits()).or_insert_with(|| {
            let a = best_basis(rdg, p0);
            (a, outcome_prob(rdg, 0, a), outcome_prob(rdg, 1, a))
        })
    }
}

/// Monte Carlo error of the adaptive protocol over `n_shots` channel uses.
///
/// Each trial runs both hypotheses: a channel angle is sampled per shot, the
/// outcome is sampled from `cos²(α + θ)`, and the posterior is updated with
/// the noise-averaged likelihoods.
pub fn adaptive_incoherent_error(
    rdg: &RdgInstance,
    n_shots: usize,
    n_trials: usize,
    rng: &mut SeededRng,
) -> Result<ProtocolResult> {
    if n_shots == 0 {
        return Err(Error::InvalidConfig("need at least one shot"));
    }
    if n_trials == 0 {
        return Err(Error::InvalidConfig("need at least one trial"));
    }
    let mut cache = BasisCache::new(rdg);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_trials {
        let mut trial_err = 0.0;
        for truth in 0..2 {
            let mut post0 = 0.5;
            for _ in 0..n_shots {
                let (alpha, q0, q1) = cache.get(post0);
                let theta = sample_angle(rdg.dist(truth), rng);
                let c = math::cos(alpha + theta);
                let outcome = rng.uniform() < c * c;
                post0 = bayes_update(post0, q0, q1, outcome);
            }
            trial_err += 0.5 * decision_error(post0, truth);
        }
        sum += trial_err;
        sum_sq += trial_err * trial_err;
    }
    let n = n_trials as f64;
    let mean = sum / n;
    let var = if n_trials > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(ProtocolResult {
        error_prob: mean,
        std_error: math::sqrt(var / n),
        queries_used: n_shots,
    })
}

/// Exact error of the same adaptive protocol by enumerating every outcome history.
pub fn adaptive_incoherent_error_exact(rdg: &RdgInstance, n_shots: usize) -> Result<f64> {
    if n_shots == 0 || n_shots > MAX_EXACT_SHOTS {
        return Err(Error::OutOfRange {
            name: "shots",
            value: n_shots as f64,
            range: "1..=24",
        });
    }
    fn walk(cache: &mut BasisCache<'_>, post0: f64, w0: f64, w1: f64, left: usize) -> f64 {
        if left == 0 {
            return 0.5 * (w0 * decision_error(post0, 0) + w1 * decision_error(post0, 1));
        }
        if w0 == 0.0 && w1 == 0.0 {
            return 0.0;
        }
        let (_, q0, q1) = cache.get(post0);
        walk(cache, bayes_update(post0, q0, q1, true), w0 * q0, w1 * q1, left - 1)
            + walk(
                cache,
                bayes_update(post0, q0, q1, false),
                w0 * (1.0 - q0),
                w1 * (1.0 - q1),
                left - 1,
            )
    }
    let mut cache = BasisCache::new(rdg);
    Ok(walk(&mut cache, 0.5, 1.0, 1.0, n_shots))
}
