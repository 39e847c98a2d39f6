//! Brute-force reference backends.
//!
//! Everything here is derived independently of the production evaluators:
//! quadrature rules come from a Jacobi-matrix eigen-solve, unitaries are
//! multiplied as quaternions, and votes are counted string by string. Tests
//! use these to check the closed forms and the fast paths.

mod golub_welsch;
mod su2;

pub use golub_welsch::{gauss_hermite, QuadratureRule, MAX_ORDER, MIN_ORDER};
pub use su2::Quaternion;

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::protocols::{QspProtocol, Segment};
use crate::{Error, RdgInstance, Result};

/// Largest total query count for the tensor-grid quadrature.
pub const MAX_QUERIES: usize = 5;
/// Largest `M` accepted by [`exhaustive_vote_error`].
pub const MAX_VOTE_HALF: u32 = 20;
/// Up to this `M` every outcome string is visited; above it strings are
/// counted per Hamming weight with an additive Pascal table.
const STRING_ENUMERATION_HALF: u32 = 10;

/// `Q` for one segment and one set of channel angles, as a quaternion.
pub fn segment_quaternion(seg: &Segment, thetas: &[f64]) -> Quaternion {
    let phases = seg.phases.as_slice();
    let mut q = Quaternion::z_rotation(phases[0]);
    for (t, p) in thetas.iter().zip(&phases[1..]) {
        q = q.compose(&Quaternion::x_rotation(*t)).compose(&Quaternion::z_rotation(*p));
    }
    q
}

/// `E|⟨meas|Q|prep⟩|²` under hypothesis `b`, over the full tensor grid.
fn segment_probability(seg: &Segment, rdg: &RdgInstance, b: usize, rule: &QuadratureRule) -> f64 {
    let r = seg.queries();
    let d = rdg.dist(b);
    let scale = core::f64::consts::SQRT_2 * d.sigma();
    let norm = 1.0 / math::sqrt(core::f64::consts::PI);
    let k = rule.order;
    let mut idx = vec![0usize; r];
    let mut thetas = vec![0.0; r];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for (j, &i) in idx.iter().enumerate() {
            thetas[j] = d.mu() + scale * rule.nodes[i];
            w *= rule.weights[i] * norm;
        }
        total += w * segment_quaternion(seg, &thetas).transition(&seg.prep, &seg.meas);
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == r {
                return total;
            }
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Probability that more than half of the votes are right (ties ½), by
/// summing over every subset of right votes.
fn subset_vote(correct: &[f64]) -> f64 {
    let m = correct.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << m) {
        let mut p = 1.0;
        for (j, c) in correct.iter().enumerate() {
            p *= if mask & (1 << j) != 0 { *c } else { 1.0 - c };
        }
        let right = mask.count_ones() as usize;
        if 2 * right > m {
            total += p;
        } else if 2 * right == m {
            total += 0.5 * p;
        }
    }
    total
}

/// Deterministic expected error of `protocol` by tensor-product quadrature
/// over every channel angle. Segments are oriented by the sign of their
/// expected outcome difference and combined by majority vote.
pub fn expected_error_quadrature(protocol: &QspProtocol, rdg: &RdgInstance, order: usize) -> Result<f64> {
    let n = protocol.total_queries();
    if n > MAX_QUERIES {
        return Err(Error::TooManyQueries {
            queries: n,
            max: MAX_QUERIES,
        });
    }
    let rule = gauss_hermite(order)?;
    let mut right0 = Vec::new();
    let mut right1 = Vec::new();
    for seg in protocol.segments() {
        let p0 = segment_probability(seg, rdg, 0, &rule);
        let p1 = segment_probability(seg, rdg, 1, &rule);
        if p0 >= p1 {
            right0.push(p0);
            right1.push(1.0 - p1);
        } else {
            right0.push(1.0 - p0);
            right1.push(p1);
        }
    }
    let err = 1.0 - 0.5 * (subset_vote(&right0) + subset_vote(&right1));
    Ok(err.clamp(0.0, 1.0))
}

/// Probability that a majority of `2M+1` independent shots, each right with
/// probability `p_shot`, is right.
pub fn exhaustive_vote_error(p_shot: f64, m: u32) -> Result<f64> {
    if m > MAX_VOTE_HALF {
        return Err(Error::OutOfRange {
            name: "M",
            value: m as f64,
            range: "0..=20",
        });
    }
    if !(0.0..=1.0).contains(&p_shot) {
        return Err(Error::OutOfRange {
            name: "shot probability",
            value: p_shot,
            range: "[0, 1]",
        });
    }
    let n = 2 * m as usize + 1;
    // Probability of a string depends only on its weight.
    let weight_prob: Vec<f64> = (0..=n)
        .map(|k| libm::pow(p_shot, k as f64) * libm::pow(1.0 - p_shot, (n - k) as f64))
        .collect();
    if m <= STRING_ENUMERATION_HALF {
        // Tally winning strings per weight so the sum stays exact in the counts.
        let mut count = vec![0u64; n + 1];
        for s in 0u64..(1u64 << n) {
            let k = s.count_ones() as usize;
            if k > m as usize {
                count[k] += 1;
            }
        }
        return Ok(count.iter().zip(&weight_prob).map(|(&c, &w)| c as f64 * w).sum());
    }
    let mut row = vec![1.0f64];
    for _ in 0..n {
        let mut next = vec![1.0; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    Ok((m as usize + 1..=n).map(|k| row[k] * weight_prob[k]).sum())
}

/// One-shot success of measuring `cos α|0⟩ − i sin α|1⟩` on `exp(iθσ_x)|0⟩`,
/// guessing hypothesis 0 on that outcome, integrated numerically.
pub fn one_shot_success(rdg: &RdgInstance, alpha: f64, rule: &QuadratureRule) -> f64 {
    let hit = |b: usize| {
        let d = rdg.dist(b);
        rule.gaussian_expectation(d.mu(), d.sigma(), |t| {
            let c = math::cos(alpha + t);
            c * c
        })
    };
    0.5 * (hit(0) + 1.0 - hit(1))
}

/// Best one-shot error found by golden-section search over α.
pub fn one_shot_error(rdg: &RdgInstance, order: usize) -> Result<(f64, f64)> {
    let rule = gauss_hermite(order)?;
    let f = |a: f64| one_shot_success(rdg, a, &rule);
    // Success has period π in α; scan for the basin then refine.
    let grid = 256;
    let step = core::f64::consts::PI / grid as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..grid {
        let a = k as f64 * step;
        let v = f(a);
        if v > best.1 {
            best = (a, v);
        }
    }
    let g = 0.5 * (math::sqrt(5.0) - 1.0);
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    while hi - lo > 1e-12 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1) >= f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let a = 0.5 * (lo + hi);
    Ok((a, 1.0 - f(a)))
}

/// MAJ error from the numerically integrated one-shot error and string counting.
pub fn maj_error(rdg: &RdgInstance, m: u32, order: usize) -> Result<f64> {
    let (_, e) = one_shot_error(rdg, order)?;
    Ok(1.0 - exhaustive_vote_error(1.0 - e, m)?)
}

/// A named reference value.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceValue {
    pub name: &'static str,
    pub delta: f64,
    pub sigma: f64,
    pub value: f64,
}

/// Oracle values for the canonical example instances, for test fixtures.
pub fn reference_values() -> Result<Vec<ReferenceValue>> {
    let mut out = Vec::new();
    let mut push = |name, delta, sigma, value| {
        out.push(ReferenceValue {
            name,
            delta,
            sigma,
            value,
        })
    };
    for (d, s) in [(0.3, 0.4), (0.1, 0.2), (0.05, 0.2), (1.0, 0.0)] {
        let r = RdgInstance::canonical(d, s)?;
        push("one_shot_error", d, s, one_shot_error(&r, 40)?.1);
        for m in [1u32, 2] {
            push(if m == 1 { "maj3_error" } else { "maj5_error" }, d, s, maj_error(&r, m, 40)?);
        }
        for n in [1usize, 3, 5] {
            let p = QspProtocol::simple(&r, n);
            let name = match n {
                1 => "simple_qsp1_error",
                3 => "simple_qsp3_error",
                _ => "simple_qsp5_error",
            };
            push(name, d, s, expected_error_quadrature(&p, &r, 16)?);
        }
    }
    let rule = gauss_hermite(40)?;
    push(
        "cos2_moment_mu0.2_sigma0.4",
        0.2,
        0.4,
        rule.gaussian_expectation(0.2, 0.4, |t| math::cos(2.0 * t)),
    );
    Ok(out)
}
