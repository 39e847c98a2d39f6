//! Multi-start direct-search optimization of single-segment QSP protocols.
//!
//! A protocol with `N` queries is parameterized by `N + 5` reals: the phases
//! `φ₀ … φ_N`, then the Bloch angles (polar, azimuth) of the preparation and
//! of the measured projector. One of these is redundant (a global rotation
//! about z can be absorbed), which the search tolerates.

pub mod simplex;

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math;
use crate::noise::SeededRng;
use crate::protocols::helstrom::helstrom_angle;
use crate::protocols::qsp::{
    segment_error_on_draws, segment_error_quadrature, StandardDraws,
};
use crate::protocols::{PhaseAngleList, QspProtocol, Segment};
use crate::quadrature::GaussHermite;
use crate::qubit::PureState;
use crate::{Error, RdgInstance, Result};

pub use simplex::{local_search, LocalResult};

/// Largest query count accepted by the quadrature objective.
pub const MAX_QUADRATURE_QUERIES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveMode {
    /// Frozen standard-normal draws per local search, re-scored on an
    /// independent sample.
    MonteCarlo,
    /// Tensor Gauss–Hermite over every channel angle; noise free.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeConfig {
    pub n_starts: usize,
    pub n_trials_per_eval: usize,
    /// Objective evaluations allowed per local search.
    pub max_iters: usize,
    pub convergence_tol: f64,
    pub seed: u64,
    pub objective_mode: ObjectiveMode,
    /// Nodes per angle for the quadrature objective.
    pub quadrature_order: usize,
    /// Size of the independent sample used to score each start (Monte Carlo mode).
    pub final_trials: usize,
}

impl OptimizeConfig {
    /// Defaults for an `n_queries` protocol: 32 starts, `500·(N+5)` evaluations
    /// per start, quadrature when `N ≤ 4`.
    pub fn for_queries(n_queries: usize) -> Self {
        OptimizeConfig {
            n_starts: 32,
            n_trials_per_eval: 2000,
            max_iters: 500 * (n_queries + 5),
            convergence_tol: 1e-10,
            seed: 0,
            objective_mode: if n_queries <= 4 {
                ObjectiveMode::Quadrature
            } else {
                ObjectiveMode::MonteCarlo
            },
            quadrature_order: 20,
            final_trials: 100_000,
        }
    }

    pub fn validate(&self, n_queries: usize) -> Result<()> {
        if self.n_starts == 0 || self.n_trials_per_eval == 0 || self.max_iters == 0 || self.final_trials == 0 {
            return Err(Error::InvalidConfig("optimizer counts must be positive"));
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol < 1.0) {
            return Err(Error::InvalidConfig("convergence tolerance must lie in (0, 1)"));
        }
        if n_queries == 0 {
            return Err(Error::InvalidConfig("need at least one query"));
        }
        if self.objective_mode == ObjectiveMode::Quadrature {
            if n_queries > MAX_QUADRATURE_QUERIES {
                return Err(Error::TooManyQueries {
                    queries: n_queries,
                    max: MAX_QUADRATURE_QUERIES,
                });
            }
            if self.quadrature_order < 2 || self.quadrature_order > crate::quadrature::MAX_ORDER {
                return Err(Error::InvalidConfig("quadrature order must lie in 2..=128"));
            }
        }
        Ok(())
    }
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self::for_queries(3)
    }
}

/// Decodes the `N + 5` search parameters into a segment.
pub fn params_to_segment(params: &[f64]) -> Result<Segment> {
    if params.len() < 5 {
        return Err(Error::LengthMismatch {
            expected: 5,
            got: params.len(),
        });
    }
    let k = params.len();
    Ok(Segment {
        phases: PhaseAngleList::new(params[..k - 4].to_vec())?,
        prep: PureState::from_bloch(params[k - 4], params[k - 3]),
        meas: PureState::from_bloch(params[k - 2], params[k - 1]),
    })
}

/// Parameters of the simple protocol: zero phases, |0⟩, Helstrom measurement.
pub fn simple_params(rdg: &RdgInstance, n_queries: usize) -> Vec<f64> {
    let mut p = alloc::vec![0.0; n_queries + 1];
    // cos α|0⟩ − i sin α|1⟩ has polar angle 2α and azimuth −π/2.
    let alpha = helstrom_angle(rdg) - (n_queries as f64 - 1.0) * rdg.center();
    p.extend_from_slice(&[0.0, 0.0, 2.0 * alpha, -core::f64::consts::FRAC_PI_2]);
    p
}

fn random_params(rng: &mut SeededRng, n_queries: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..=n_queries).map(|_| rng.uniform_in(-PI, PI)).collect();
    for _ in 0..2 {
        // Uniform on the sphere.
        let polar = libm::acos(1.0 - 2.0 * rng.uniform());
        p.push(polar);
        p.push(rng.uniform_in(-PI, PI));
    }
    p
}

/// Deterministic objective used inside one local search.
enum Scorer {
    Quadrature(GaussHermite),
    Draws(StandardDraws),
}

impl Scorer {
    fn score(&self, params: &[f64], rdg: &RdgInstance) -> (f64, f64) {
        let Ok(seg) = params_to_segment(params) else {
            return (f64::INFINITY, 0.0);
        };
        match self {
            Scorer::Quadrature(rule) => (segment_error_quadrature(&seg, rdg, rule), 0.0),
            Scorer::Draws(d) => segment_error_on_draws(&seg, rdg, d).unwrap_or((f64::INFINITY, 0.0)),
        }
    }
}

fn search_rng(cfg: &OptimizeConfig, start: usize) -> SeededRng {
    SeededRng::new(cfg.seed).child(start as u64)
}

fn final_scorer(cfg: &OptimizeConfig, n_queries: usize) -> Result<Scorer> {
    Ok(match cfg.objective_mode {
        ObjectiveMode::Quadrature => Scorer::Quadrature(GaussHermite::new(cfg.quadrature_order)?),
        ObjectiveMode::MonteCarlo => {
            let mut rng = SeededRng::new(cfg.seed).child(u64::MAX);
            Scorer::Draws(StandardDraws::new(&mut rng, cfg.final_trials, n_queries))
        }
    })
}

/// Result of one local search from one start.
#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub index: usize,
    pub params: Vec<f64>,
    /// Objective value on the search's own frozen sample.
    pub search_value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Runs local search number `index` (0 is the simple protocol; others are random).
pub fn run_start(rdg: &RdgInstance, n_queries: usize, cfg: &OptimizeConfig, index: usize) -> Result<StartOutcome> {
    cfg.validate(n_queries)?;
    run_start_from(rdg, n_queries, cfg, index, None)
}

fn run_start_from(
    rdg: &RdgInstance,
    n_queries: usize,
    cfg: &OptimizeConfig,
    index: usize,
    x0: Option<&[f64]>,
) -> Result<StartOutcome> {
    let mut rng = search_rng(cfg, index);
    let x0: Vec<f64> = match x0 {
        Some(x) => x.to_vec(),
        None if index == 0 => simple_params(rdg, n_queries),
        None => random_params(&mut rng, n_queries),
    };
    let scorer = match cfg.objective_mode {
        ObjectiveMode::Quadrature => Scorer::Quadrature(GaussHermite::new(cfg.quadrature_order)?),
        ObjectiveMode::MonteCarlo => Scorer::Draws(StandardDraws::new(&mut rng, cfg.n_trials_per_eval, n_queries)),
    };
    let mut objective = |x: &[f64]| scorer.score(x, rdg).0;
    let r = local_search(&mut objective, &x0, cfg.max_iters, cfg.convergence_tol);
    Ok(StartOutcome {
        index,
        params: r.x,
        search_value: r.value,
        evaluations: r.evaluations,
        converged: r.converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeReport {
    pub best_protocol: QspProtocol,
    pub best_params: Vec<f64>,
    pub best_error: f64,
    /// Zero in quadrature mode.
    pub best_std_error: f64,
    /// Final score of every start, by start index.
    pub per_start_errors: Vec<f64>,
    pub evaluations_used: usize,
    /// Starts whose local search hit the evaluation budget before converging.
    pub budget_exhausted: Vec<usize>,
    /// Whether the unoptimized simple protocol scored better than every start.
    pub simple_fallback: bool,
}

/// Scores a parameter vector with the same final scorer the report uses.
pub fn final_error(rdg: &RdgInstance, n_queries: usize, cfg: &OptimizeConfig, params: &[f64]) -> Result<(f64, f64)> {
    cfg.validate(n_queries)?;
    Ok(final_scorer(cfg, n_queries)?.score(params, rdg))
}

/// Merges start outcomes into a report. Order-independent: ties go to the
/// lower start index.
pub fn assemble_report(
    rdg: &RdgInstance,
    n_queries: usize,
    cfg: &OptimizeConfig,
    mut outcomes: Vec<StartOutcome>,
) -> Result<OptimizeReport> {
    cfg.validate(n_queries)?;
    if outcomes.is_empty() {
        return Err(Error::InvalidConfig("no optimizer starts to merge"));
    }
    outcomes.sort_by_key(|o| o.index);
    let scorer = final_scorer(cfg, n_queries)?;
    let scores: Vec<(f64, f64)> = outcomes.iter().map(|o| scorer.score(&o.params, rdg)).collect();
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i].0 < scores[best].0 {
            best = i;
        }
    }
    let mut best_params = outcomes[best].params.clone();
    let mut best_score = scores[best];
    let simple = simple_params(rdg, n_queries);
    let simple_score = scorer.score(&simple, rdg);
    let simple_fallback = simple_score.0 < best_score.0;
    if simple_fallback {
        best_params = simple;
        best_score = simple_score;
    }
    Ok(OptimizeReport {
        best_protocol: QspProtocol::single(params_to_segment(&best_params)?),
        best_params,
        best_error: best_score.0,
        best_std_error: best_score.1,
        per_start_errors: scores.iter().map(|s| s.0).collect(),
        evaluations_used: outcomes.iter().map(|o| o.evaluations).sum(),
        budget_exhausted: outcomes.iter().filter(|o| !o.converged).map(|o| o.index).collect(),
        simple_fallback,
    })
}

/// Best single-segment protocol over `cfg.n_starts` local searches.
pub fn optimize_qsp(rdg: &RdgInstance, n_queries: usize, cfg: &OptimizeConfig) -> Result<OptimizeReport> {
    optimize_qsp_seeded(rdg, n_queries, cfg, &[])
}

/// As [`optimize_qsp`], with extra local searches started from `seeds`
/// (e.g. a neighbouring grid cell's optimum). Seeds take start indices after
/// the regular ones.
pub fn optimize_qsp_seeded(
    rdg: &RdgInstance,
    n_queries: usize,
    cfg: &OptimizeConfig,
    seeds: &[Vec<f64>],
) -> Result<OptimizeReport> {
    cfg.validate(n_queries)?;
    let mut outcomes = Vec::with_capacity(cfg.n_starts + seeds.len());
    for i in 0..cfg.n_starts {
        outcomes.push(run_start_from(rdg, n_queries, cfg, i, None)?);
    }
    for (j, s) in seeds.iter().enumerate() {
        if s.len() != n_queries + 5 {
            return Err(Error::LengthMismatch {
                expected: n_queries + 5,
                got: s.len(),
            });
        }
        outcomes.push(run_start_from(rdg, n_queries, cfg, cfg.n_starts + j, Some(s))?);
    }
    assemble_report(rdg, n_queries, cfg, outcomes)
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub fn golden_section_max(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while math::abs(b - a) > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::qsp::{optimal_noiseless_error, simple_qsp_error_exact, simple_segment};

    fn quick(n_starts: usize) -> OptimizeConfig {
        OptimizeConfig {
            n_starts,
            ..OptimizeConfig::for_queries(3)
        }
    }

    #[test]
    fn simple_params_reproduce_simple_protocol() {
        let r = RdgInstance::canonical(0.2, 0.3).unwrap();
        let rule = GaussHermite::new(20).unwrap();
        for n in 1..=4 {
            let seg = params_to_segment(&simple_params(&r, n)).unwrap();
            let a = segment_error_quadrature(&seg, &r, &rule);
            let b = segment_error_quadrature(&simple_segment(&r, n), &r, &rule);
            assert!((a - b).abs() < 1e-13);
            assert!((a - simple_qsp_error_exact(&r, n)).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_discrimination_found_noiseless() {
        for d in [PI / 3.0, 0.7] {
            let r = RdgInstance::canonical(d, 0.0).unwrap();
            let rep = optimize_qsp(&r, 3, &quick(8)).unwrap();
            assert!(rep.best_error < 1e-6, "delta {d}: {}", rep.best_error);
        }
    }

    #[test]
    fn at_least_as_good_as_simple() {
        let r = RdgInstance::canonical(0.1, 0.0).unwrap();
        let rep = optimize_qsp(&r, 3, &quick(4)).unwrap();
        assert!(rep.best_error <= optimal_noiseless_error(0.1, 3) + 1e-4);
        let noisy = RdgInstance::canonical(0.3, 0.5).unwrap();
        let rep = optimize_qsp(&noisy, 3, &quick(4)).unwrap();
        assert!(rep.best_error <= simple_qsp_error_exact(&noisy, 3) + 1e-12);
    }

    #[test]
    fn indistinguishable_hypotheses() {
        let r = RdgInstance::canonical(0.0, 0.3).unwrap();
        let rep = optimize_qsp(&r, 3, &quick(3)).unwrap();
        assert!((rep.best_error - 0.5).abs() < 1e-9);
        let mc = OptimizeConfig {
            objective_mode: ObjectiveMode::MonteCarlo,
            n_trials_per_eval: 500,
            final_trials: 20_000,
            max_iters: 400,
            ..quick(2)
        };
        let rep = optimize_qsp(&r, 3, &mc).unwrap();
        assert!((rep.best_error - 0.5).abs() < 3.0 * rep.best_std_error + 1e-9);
    }

    #[test]
    fn report_is_deterministic_and_consistent() {
        let r = RdgInstance::canonical(0.25, 0.2).unwrap();
        let cfg = OptimizeConfig {
            objective_mode: ObjectiveMode::MonteCarlo,
            n_trials_per_eval: 300,
            final_trials: 5000,
            max_iters: 300,
            seed: 42,
            ..quick(3)
        };
        let a = optimize_qsp(&r, 3, &cfg).unwrap();
        let b = optimize_qsp(&r, 3, &cfg).unwrap();
        assert_eq!(a, b);
        let min = a.per_start_errors.iter().cloned().fold(f64::INFINITY, f64::min);
        if !a.simple_fallback {
            assert_eq!(a.best_error, min);
        } else {
            assert!(a.best_error < min);
        }
        assert_eq!(a.per_start_errors.len(), 3);
    }

    #[test]
    fn merge_is_order_independent() {
        let r = RdgInstance::canonical(0.2, 0.1).unwrap();
        let cfg = OptimizeConfig { max_iters: 200, ..quick(3) };
        let outs: Vec<StartOutcome> = (0..3).map(|i| run_start(&r, 3, &cfg, i).unwrap()).collect();
        let mut rev = outs.clone();
        rev.reverse();
        assert_eq!(
            assemble_report(&r, 3, &cfg, outs).unwrap(),
            assemble_report(&r, 3, &cfg, rev).unwrap()
        );
    }

    #[test]
    fn config_validation() {
        let r = RdgInstance::canonical(0.2, 0.1).unwrap();
        let bad = OptimizeConfig { n_starts: 0, ..quick(1) };
        assert!(optimize_qsp(&r, 3, &bad).is_err());
        let tol = OptimizeConfig { convergence_tol: 1.5, ..quick(1) };
        assert!(optimize_qsp(&r, 3, &tol).is_err());
        assert!(optimize_qsp(&r, 6, &quick(1)).is_err());
        assert!(optimize_qsp(&r, 0, &quick(1)).is_err());
    }

    #[test]
    fn golden_section_finds_peak() {
        let f = |x: f64| -(x - 0.3) * (x - 0.3);
        let (x, v) = golden_section_max(&f, -1.0, 2.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(v <= 0.0 && v > -1e-15);
    }
}
