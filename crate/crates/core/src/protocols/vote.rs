//! Majority-vote amplification and the incoherent MAJ-N protocol.

use alloc::vec;
use alloc::vec::Vec;

use super::helstrom::helstrom_error_noisy;
use super::ProtocolResult;
use crate::math;
use crate::RdgInstance;

fn ln_choose(n: u64, k: u64) -> f64 {
    math::ln_gamma(n as f64 + 1.0) - math::ln_gamma(k as f64 + 1.0) - math::ln_gamma((n - k) as f64 + 1.0)
}

/// `Σ_{k=0}^{M} C(2M+1, k) p^{2M+1−k} (1−p)^k`: the probability that a
/// majority of `2M+1` Bernoulli(p) draws come out "success".
pub fn majority_vote(p: f64, m: u32) -> f64 {
    let p = p.clamp(0.0, 1.0);
    if m == 0 {
        return p;
    }
    if p == 0.0 || p == 1.0 {
        return p;
    }
    let n = 2 * m as u64 + 1;
    if n <= 60 {
        // Exact integer binomials while they fit comfortably in f64.
        let mut coeff = 1.0f64;
        let mut total = 0.0;
        for k in 0..=m as u64 {
            if k > 0 {
                coeff = coeff * (n - k + 1) as f64 / k as f64;
            }
            total += coeff * math::powi(p, (n - k) as i32) * math::powi(1.0 - p, k as i32);
        }
        return total.clamp(0.0, 1.0);
    }
    let (lp, lq) = (math::ln(p), math::ln(1.0 - p));
    let total: f64 = (0..=m as u64)
        .map(|k| math::exp(ln_choose(n, k) + (n - k) as f64 * lp + k as f64 * lq))
        .sum();
    total.clamp(0.0, 1.0)
}

/// Probability that a strict majority of independent votes is correct, where
/// vote `j` is correct with probability `correct[j]`; an even split counts ½.
pub fn vote_success(correct: &[f64]) -> f64 {
    match correct {
        [] => 0.5,
        [c] => *c,
        _ => {
            let mut dist: Vec<f64> = vec![0.0; correct.len() + 1];
            dist[0] = 1.0;
            for (j, &c) in correct.iter().enumerate() {
                for k in (0..=j + 1).rev() {
                    let stay = dist[k] * (1.0 - c);
                    let up = if k > 0 { dist[k - 1] * c } else { 0.0 };
                    dist[k] = stay + up;
                }
            }
            let m = correct.len();
            let mut total = 0.0;
            for (k, p) in dist.iter().enumerate() {
                if 2 * k > m {
                    total += p;
                } else if 2 * k == m {
                    total += 0.5 * p;
                }
            }
            total
        }
    }
}

/// Repeated Helstrom measurements (`2M+1` of them) followed by a majority vote.
pub fn maj_protocol_error(rdg: &RdgInstance, m: u32) -> ProtocolResult {
    let p_err = helstrom_error_noisy(rdg);
    // The vote fails when a majority of shots err.
    ProtocolResult::exact(majority_vote(p_err, m), 2 * m as usize + 1)
}

/// `(2M+1)!/(M!)² · 2^{−2M}`, the small-δ slope gain of a `2M+1` vote.
pub fn vote_gain(m: u32) -> f64 {
    let mf = m as f64;
    math::exp(
        math::ln_gamma(2.0 * mf + 2.0) - 2.0 * math::ln_gamma(mf + 1.0) - 2.0 * mf * core::f64::consts::LN_2,
    )
}

/// δ-coefficient `c` of the linearized MAJ error `½(1 − c δ)`.
pub fn maj_small_delta_coefficient(sigma: f64, m: u32) -> f64 {
    vote_gain(m) * math::exp(-2.0 * sigma * sigma)
}

/// `½(1 − (2M+1)!/(M!)² · 2^{−2M} · δ · e^{−2σ²})`, clamped to `[0, 1]`.
pub fn maj_error_small_delta(rdg: &RdgInstance, m: u32) -> f64 {
    let c = maj_small_delta_coefficient(rdg.sigma(), m);
    (0.5 * (1.0 - c * rdg.delta())).clamp(0.0, 1.0)
}

/// Noise level where linearized simple QSP and MAJ errors coincide:
/// `½ √((1/M) ln(2^{2M} (M!)² / (2M)!))`.
pub fn transition_sigma(m: u32) -> f64 {
    let mf = m.max(1) as f64;
    let log_ratio = 2.0 * mf * core::f64::consts::LN_2 + 2.0 * math::ln_gamma(mf + 1.0)
        - math::ln_gamma(2.0 * mf + 1.0);
    0.5 * math::sqrt(log_ratio / mf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    #[test]
    fn majority_vote_fixed_points() {
        for m in [0, 1, 2, 7, 40, 200] {
            assert!((majority_vote(0.5, m) - 0.5).abs() < 1e-12, "m={m}");
            assert_eq!(majority_vote(1.0, m), 1.0);
            assert_eq!(majority_vote(0.0, m), 0.0);
        }
        assert!((majority_vote(0.75, 1) - 0.84375).abs() < 1e-15);
    }

    #[test]
    fn majority_vote_amplifies_and_is_antisymmetric() {
        for m in [1, 3, 31, 100] {
            for p in [0.51, 0.6, 0.8, 0.99] {
                assert!(majority_vote(p, m) > p);
                let s = majority_vote(p, m) + majority_vote(1.0 - p, m);
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn log_space_branch_agrees_with_exact_branch() {
        // n = 61 is the first size handled in log space; compare to n = 59 + two extra votes.
        for p in [0.3, 0.55, 0.9] {
            let exact = majority_vote(p, 29);
            let next = majority_vote(p, 30);
            // Adding two votes moves the value monotonically toward 0 or 1.
            if p > 0.5 {
                assert!(next >= exact);
            } else {
                assert!(next <= exact);
            }
        }
        let a: f64 = (0..=30u64)
            .map(|k| {
                let mut c = 1.0f64;
                for i in 0..k {
                    c = c * (61 - i) as f64 / (i + 1) as f64;
                }
                c * 0.55f64.powi(61 - k as i32) * 0.45f64.powi(k as i32)
            })
            .sum();
        assert!((majority_vote(0.55, 30) - a).abs() < 1e-12);
    }

    #[test]
    fn vote_success_matches_iid_majority() {
        for p in [0.2, 0.5, 0.7] {
            for m in 0..4u32 {
                let v = vec![p; 2 * m as usize + 1];
                assert!((vote_success(&v) - majority_vote(p, m)).abs() < 1e-14);
            }
        }
        // Ties split evenly.
        assert!((vote_success(&[1.0, 0.0]) - 0.5).abs() < 1e-15);
        assert_eq!(vote_success(&[]), 0.5);
    }

    #[test]
    fn maj_protocol_noiseless_values() {
        let r = RdgInstance::canonical(FRAC_PI_2, 0.0).unwrap();
        assert!(maj_protocol_error(&r, 1).error_prob < 1e-15);
        let d: f64 = 0.2;
        let r = RdgInstance::canonical(d, 0.0).unwrap();
        let (a, b) = (1.0 - d.sin(), 1.0 + d.sin());
        let direct = (a * a * a + 3.0 * a * a * b) / 8.0;
        let got = maj_protocol_error(&r, 1);
        assert!((got.error_prob - direct).abs() < 1e-12);
        assert_eq!(got.queries_used, 3);
        assert_eq!(got.std_error, 0.0);
    }

    #[test]
    fn small_delta_formula() {
        let r = RdgInstance::canonical(0.05, 0.2).unwrap();
        assert!((vote_gain(1) - 1.5).abs() < 1e-14);
        assert!((vote_gain(0) - 1.0).abs() < 1e-15);
        let expected = 0.5 * (1.0 - 1.5 * 0.05 * libm::exp(-0.08));
        assert!((maj_error_small_delta(&r, 1) - expected).abs() < 1e-15);
        let m0 = 0.5 * (1.0 - 0.05 * libm::exp(-0.08));
        assert!((maj_error_small_delta(&r, 0) - m0).abs() < 1e-15);
        for m in 1..6 {
            assert!(maj_error_small_delta(&r, m) <= maj_error_small_delta(&r, 0));
        }
        // Clamped for large δ.
        let big = RdgInstance::canonical(1.5, 0.0).unwrap();
        assert_eq!(maj_error_small_delta(&big, 3), 0.0);
    }

    #[test]
    fn transition_sigma_m1() {
        let expected = libm::sqrt(core::f64::consts::LN_2) / 2.0;
        assert!((transition_sigma(1) - expected).abs() < 1e-14);
    }
}
