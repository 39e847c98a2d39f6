//! ξ-hybrid protocols: `N/ξ` coherent segments of `ξ` queries each, combined
//! by majority vote, analysed in the small-δ regime with factorials continued
//! through the gamma function.

mod digamma;

pub use digamma::digamma;

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::math;
use crate::{Error, Result};

/// Total query budget `n` and coherence length `xi`, both real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridConfig {
    n: f64,
    xi: f64,
}

impl HybridConfig {
    pub fn new(n: f64, xi: f64) -> Result<Self> {
        if !(n >= 1.0) || !n.is_finite() {
            return Err(Error::OutOfRange {
                name: "query budget",
                value: n,
                range: "[1, inf)",
            });
        }
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::OutOfRange {
                name: "coherence length",
                value: xi,
                range: "(0, inf)",
            });
        }
        Ok(HybridConfig { n, xi })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }
}

/// Bookkeeping used for the continued factorials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HybridFormula {
    /// `K = N/ξ` stages, each a `K`-vote majority over `ξ`-query segments:
    /// `ξ · Γ(K+1) / Γ((K+1)/2)² · 2^{−(K−1)} · e^{−2ξσ²}`.
    #[default]
    StageContinuation,
    /// `ξ · Γ(N/ξ+1) / Γ((N+1)/(2ξ)+1)² · 2^{−(N+1)/ξ} · e^{−2ξσ²}`.
    Literal,
}

/// δ-coefficient `c` of the hybrid error `½(1 − c δ)`.
pub fn hybrid_coefficient(sigma: f64, cfg: &HybridConfig, formula: HybridFormula) -> f64 {
    let (n, xi) = (cfg.n, cfg.xi);
    let k = n / xi;
    let log_votes = match formula {
        HybridFormula::StageContinuation => {
            math::ln_gamma(k + 1.0) - 2.0 * math::ln_gamma(0.5 * (k + 1.0)) - (k - 1.0) * LN_2
        }
        HybridFormula::Literal => {
            math::ln_gamma(k + 1.0) - 2.0 * math::ln_gamma((n + 1.0) / (2.0 * xi) + 1.0) - (n + 1.0) / xi * LN_2
        }
    };
    xi * math::exp(log_votes - 2.0 * xi * sigma * sigma)
}

/// Small-δ error of the hybrid protocol, clamped to `[0, 1]`.
pub fn hybrid_error(delta: f64, sigma: f64, cfg: &HybridConfig) -> f64 {
    hybrid_error_with(delta, sigma, cfg, HybridFormula::default())
}

pub fn hybrid_error_with(delta: f64, sigma: f64, cfg: &HybridConfig, formula: HybridFormula) -> f64 {
    (0.5 * (1.0 - hybrid_coefficient(sigma, cfg, formula) * delta)).clamp(0.0, 1.0)
}

/// `−4σ²ξ² + N(ψ((N+ξ)/2ξ) − ψ(N/2ξ))`; positive below the optimum, negative above.
pub fn stationarity_residual(xi: f64, sigma: f64, n: f64) -> Result<f64> {
    let k = n / xi;
    Ok(-4.0 * sigma * sigma * xi * xi + n * (digamma(0.5 * (k + 1.0))? - digamma(0.5 * k)?))
}

pub const XI_BRACKET_LOW: f64 = 1e-6;
/// Upper end of the root bracket, as a multiple of `N`.
pub const XI_BRACKET_HIGH_FACTOR: f64 = 1e4;
const XI_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiDiagnostic {
    /// Residual already negative at the lower end: root below the bracket.
    BelowBracket,
    /// Residual still positive at the upper end: root above the bracket.
    AboveBracket,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiSolution {
    pub xi: f64,
    /// Set when the bracket holds no sign change; `xi` is then the nearest end.
    pub diagnostic: Option<XiDiagnostic>,
}

/// Root of the stationarity equation by bisection in `ln ξ`.
pub fn optimal_xi(sigma: f64, n: f64) -> Result<XiSolution> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::OutOfRange {
            name: "sigma",
            value: sigma,
            range: "(0, inf)",
        });
    }
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::OutOfRange {
            name: "query budget",
            value: n,
            range: "[1, inf)",
        });
    }
    let (mut lo, mut hi) = (XI_BRACKET_LOW, XI_BRACKET_HIGH_FACTOR * n);
    if stationarity_residual(lo, sigma, n)? <= 0.0 {
        return Ok(XiSolution {
            xi: lo,
            diagnostic: Some(XiDiagnostic::BelowBracket),
        });
    }
    if stationarity_residual(hi, sigma, n)? >= 0.0 {
        return Ok(XiSolution {
            xi: hi,
            diagnostic: Some(XiDiagnostic::AboveBracket),
        });
    }
    while hi - lo > XI_REL_TOL * lo {
        let mid = math::sqrt(lo * hi);
        if stationarity_residual(mid, sigma, n)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(XiSolution {
        xi: math::sqrt(lo * hi),
        diagnostic: None,
    })
}

/// `σ⁻²/4`.
pub fn xi_large_sigma(sigma: f64) -> f64 {
    0.25 / (sigma * sigma)
}

/// `½σ⁻¹√(N(π²/6 + ln 4))`.
pub fn xi_small_sigma(sigma: f64, n: f64) -> f64 {
    let c = core::f64::consts::PI * core::f64::consts::PI / 6.0 + 2.0 * LN_2;
    0.5 / sigma * math::sqrt(n * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// ξ_min < 1: repeated single-query measurements win.
    IncoherentOptimal,
    Hybrid,
    /// ξ_min > N: one fully coherent sequence wins.
    CoherentOptimal,
}

impl Regime {
    pub fn classify(xi_min: f64, n: f64) -> Self {
        if xi_min < 1.0 {
            Regime::IncoherentOptimal
        } else if xi_min > n {
            Regime::CoherentOptimal
        } else {
            Regime::Hybrid
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::IncoherentOptimal => "incoherent-optimal",
            Regime::Hybrid => "hybrid",
            Regime::CoherentOptimal => "coherent-optimal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceCurve {
    pub n: f64,
    pub sigma_grid: Vec<f64>,
    pub xi_min: Vec<f64>,
    pub regimes: Vec<Regime>,
    pub diagnostics: Vec<Option<XiDiagnostic>>,
}

/// Optimal coherence length for each σ of an ascending, positive grid.
pub fn coherence_curve(n: f64, sigma_grid: &[f64]) -> Result<CoherenceCurve> {
    if sigma_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig("sigma grid must be strictly ascending"));
    }
    let mut curve = CoherenceCurve {
        n,
        sigma_grid: sigma_grid.to_vec(),
        xi_min: Vec::with_capacity(sigma_grid.len()),
        regimes: Vec::with_capacity(sigma_grid.len()),
        diagnostics: Vec::with_capacity(sigma_grid.len()),
    };
    for &s in sigma_grid {
        let sol = optimal_xi(s, n)?;
        curve.xi_min.push(sol.xi);
        curve.regimes.push(Regime::classify(sol.xi, n));
        curve.diagnostics.push(sol.diagnostic);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::qsp::simple_qsp_coefficient;
    use crate::protocols::vote::maj_small_delta_coefficient;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};

    fn cfg(n: f64, xi: f64) -> HybridConfig {
        HybridConfig::new(n, xi).unwrap()
    }

    #[test]
    fn fully_coherent_limit_is_simple_qsp() {
        let s = 0.05;
        let c = hybrid_coefficient(s, &cfg(101.0, 101.0), HybridFormula::StageContinuation);
        let q = simple_qsp_coefficient(s, 101);
        assert!((c / q - 1.0).abs() < 0.05);
        let e = hybrid_error(1e-3, s, &cfg(101.0, 101.0));
        assert!((e - 0.5 * (1.0 - q * 1e-3)).abs() < 0.05 * q * 1e-3);
    }

    #[test]
    fn single_query_segments_are_majority_vote() {
        for s in [0.0, 0.2, 0.7] {
            let c = hybrid_coefficient(s, &cfg(3.0, 1.0), HybridFormula::StageContinuation);
            assert!((c - maj_small_delta_coefficient(s, 1)).abs() < 1e-12);
            assert!((c - 1.5 * libm::exp(-2.0 * s * s)).abs() < 0.05 * c);
        }
    }

    #[test]
    fn literal_formula_is_available_and_differs() {
        let lit = hybrid_coefficient(0.0, &cfg(3.0, 1.0), HybridFormula::Literal);
        assert!((lit - 0.09375).abs() < 1e-12);
        let st = hybrid_coefficient(0.0, &cfg(3.0, 1.0), HybridFormula::StageContinuation);
        assert!((st - lit).abs() > 1.0);
    }

    #[test]
    fn zero_delta_is_a_coin_flip() {
        for xi in [0.3, 1.0, 7.5, 100.0] {
            assert_eq!(hybrid_error(0.0, 0.3, &cfg(100.0, xi)), 0.5);
        }
    }

    #[test]
    fn coefficient_positive_and_finite() {
        for n in [1.0, 10.0, 1e3, 1e5] {
            for xi in [1e-3, 0.5, 1.0, 30.0, n, 10.0 * n] {
                let c = hybrid_coefficient(0.1, &cfg(n, xi), HybridFormula::StageContinuation);
                assert!(c.is_finite() && c >= 0.0, "n={n} xi={xi}: {c}");
                // Below this the damping underflows and the error rounds to ½.
                if c * 1e-9 > f64::EPSILON {
                    assert!(hybrid_error(1e-9, 0.1, &cfg(n, xi)) < 0.5);
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(HybridConfig::new(0.5, 1.0).is_err());
        assert!(HybridConfig::new(10.0, 0.0).is_err());
        assert!(HybridConfig::new(10.0, f64::NAN).is_err());
        assert!(optimal_xi(0.0, 100.0).is_err());
    }

    #[test]
    fn optimum_is_a_local_minimum() {
        for (s, n) in [(0.05, 100.0), (0.3, 100.0), (1.0, 100.0), (0.02, 1e4), (0.2, 37.0)] {
            let x = optimal_xi(s, n).unwrap();
            assert!(x.diagnostic.is_none());
            let e = |xi: f64| hybrid_error(1e-6, s, &cfg(n, xi));
            let c = |xi: f64| hybrid_coefficient(s, &cfg(n, xi), HybridFormula::StageContinuation);
            assert!(e(x.xi) <= e(0.9 * x.xi) && e(x.xi) <= e(1.1 * x.xi));
            assert!(c(x.xi) >= c(0.9 * x.xi) && c(x.xi) >= c(1.1 * x.xi));
        }
    }

    #[test]
    fn optimum_matches_dense_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let s: f64 = libm::exp(rng.random_range(libm::log(0.05)..libm::log(2.0)));
            let n: f64 = libm::round(libm::exp(rng.random_range(libm::log(10.0)..libm::log(1000.0))));
            let sol = optimal_xi(s, n).unwrap();
            let (lo, hi) = (libm::log(XI_BRACKET_LOW), libm::log(XI_BRACKET_HIGH_FACTOR * n));
            let points = 10_000;
            let mut best = (0.0, f64::NEG_INFINITY);
            for k in 0..points {
                let xi = libm::exp(lo + (hi - lo) * k as f64 / (points - 1) as f64);
                let c = libm::log(hybrid_coefficient(s, &cfg(n, xi), HybridFormula::StageContinuation));
                if c > best.1 {
                    best = (xi, c);
                }
            }
            assert!((best.0 / sol.xi - 1.0).abs() < 0.01, "s={s} n={n}: {} vs {}", best.0, sol.xi);
        }
    }

    #[test]
    fn residual_changes_sign_once() {
        for (s, n) in [(0.01, 100.0), (0.1, 100.0), (0.5, 100.0), (2.0, 100.0), (0.005, 1e4), (0.3, 1e4)] {
            let (lo, hi) = (libm::log(XI_BRACKET_LOW), libm::log(XI_BRACKET_HIGH_FACTOR * n));
            let mut changes = 0;
            let mut prev = stationarity_residual(XI_BRACKET_LOW, s, n).unwrap() > 0.0;
            for k in 1..2000 {
                let xi = libm::exp(lo + (hi - lo) * k as f64 / 1999.0);
                let cur = stationarity_residual(xi, s, n).unwrap() > 0.0;
                if cur != prev {
                    changes += 1;
                }
                prev = cur;
            }
            assert_eq!(changes, 1, "s={s} n={n}");
        }
    }

    #[test]
    fn regime_crossings_for_n_100() {
        let at = |r: f64| optimal_xi(r * PI, 100.0).unwrap().xi;
        let x = at(0.2);
        assert!(x > 0.5 && x < 2.0, "{x}");
        // ξ_min passes 1 for σ/π in [0.1, 0.4] and passes N for σ/π in [0.005, 0.02].
        assert!(at(0.1) > 1.0 && at(0.4) < 1.0);
        assert!(at(0.005) > 100.0 && at(0.02) < 100.0);
    }

    #[test]
    fn large_sigma_asymptotics() {
        for s in [1.0, 1.5, 2.0, 3.0] {
            let r = optimal_xi(s, 100.0).unwrap().xi / xi_large_sigma(s);
            assert!((r - 1.0).abs() < 0.1, "s={s}: {r}");
        }
        let slope = (libm::log(optimal_xi(3.0, 100.0).unwrap().xi) - libm::log(optimal_xi(1.0, 100.0).unwrap().xi))
            / libm::log(3.0);
        assert!((slope + 2.0).abs() < 0.1, "{slope}");
        assert_eq!(xi_large_sigma(0.5), 1.0);
    }

    #[test]
    fn small_sigma_formula_scaling() {
        let a = xi_small_sigma(0.01, 100.0);
        assert!((xi_small_sigma(0.01, 200.0) / a - libm::sqrt(2.0)).abs() < 1e-14);
        assert!((xi_small_sigma(0.02, 100.0) / a - 0.5).abs() < 1e-14);
    }

    #[test]
    fn curve_is_monotone_with_consistent_flags() {
        let grid: Vec<f64> = (0..60).map(|k| 0.01 * libm::pow(300.0, k as f64 / 59.0)).collect();
        let c = coherence_curve(100.0, &grid).unwrap();
        assert!(c.xi_min.windows(2).all(|w| w[1] <= w[0]));
        for (x, r) in c.xi_min.iter().zip(&c.regimes) {
            assert_eq!(*r, Regime::classify(*x, 100.0));
        }
        assert_eq!(c.regimes.first(), Some(&Regime::CoherentOptimal));
        assert_eq!(c.regimes.last(), Some(&Regime::IncoherentOptimal));
        assert!(coherence_curve(100.0, &[]).unwrap().xi_min.is_empty());
        assert!(coherence_curve(100.0, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn tiny_sigma_reports_bracket_diagnostic() {
        let x = optimal_xi(1e-7, 10.0).unwrap();
        assert_eq!(x.diagnostic, Some(XiDiagnostic::AboveBracket));
        assert_eq!(x.xi, 1e5);
    }
}
