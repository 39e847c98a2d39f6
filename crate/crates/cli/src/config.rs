//! Sweep configuration: a flat TOML key-value file.
//!
//! ```toml
//! delta_min = 0.001
//! delta_max = 1.5707963267948966
//! delta_steps = 200
//! sigma_min = 0.0
//! sigma_max = 1.2
//! sigma_steps = 200
//! protocols = ["maj", "qsp-simple"]
//! n_queries = 3
//! seed = 7
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use qdisc_core::optimizer::{ObjectiveMode, OptimizeConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolId {
    /// Repeated one-shot Helstrom measurements with a majority vote.
    Maj,
    /// A single one-shot Helstrom measurement (ignores the query budget).
    Helstrom,
    /// Zero-phase QSP sequence, exact closed form.
    QspSimple,
    /// Zero-phase QSP sequence, Monte Carlo.
    QspSimpleMc,
    /// Multi-start optimized single-segment QSP sequence.
    QspOpt,
    /// Adaptive Bayesian incoherent protocol, Monte Carlo.
    Adaptive,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 6] = [
        ProtocolId::Maj,
        ProtocolId::Helstrom,
        ProtocolId::QspSimple,
        ProtocolId::QspSimpleMc,
        ProtocolId::QspOpt,
        ProtocolId::Adaptive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolId::Maj => "maj",
            ProtocolId::Helstrom => "helstrom",
            ProtocolId::QspSimple => "qsp-simple",
            ProtocolId::QspSimpleMc => "qsp-simple-mc",
            ProtocolId::QspOpt => "qsp-opt",
            ProtocolId::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown protocol `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptMode {
    Quadrature,
    MonteCarlo,
}

/// One grid axis: `steps` evenly spaced points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        let span = self.max - self.min;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.max
                } else {
                    self.min + span * k as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.steps - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_steps: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sigma_steps: usize,
    pub protocols: Vec<ProtocolId>,
    /// Query budget for every protocol; must be odd when `maj` is requested.
    pub n_queries: usize,
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    /// Left out of manifests so reruns elsewhere record the same settings.
    #[serde(skip_serializing)]
    pub out_dir: String,
    /// Trials per cell for Monte Carlo protocols.
    pub mc_trials: usize,
    /// `[numerator, denominator]` for the ratio map; defaults to the first two protocols.
    pub ratio: Option<[ProtocolId; 2]>,
    pub opt_starts: usize,
    pub opt_trials_per_eval: usize,
    /// Objective evaluations per local search; 0 means `500·(N+5)`.
    pub opt_max_evals: usize,
    pub opt_tol: f64,
    pub opt_mode: Option<OptMode>,
    pub opt_quadrature_order: usize,
    pub opt_final_trials: usize,
    /// Rounds of neighbour-parameter adoption after an optimized sweep.
    pub pointwise_best_passes: usize,
    /// Also render each surface and the ratio map as SVG.
    pub svg: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let opt = OptimizeConfig::for_queries(3);
        SweepSpec {
            delta_min: 0.0,
            delta_max: core::f64::consts::FRAC_PI_2,
            delta_steps: 200,
            sigma_min: 0.0,
            sigma_max: 1.2,
            sigma_steps: 200,
            protocols: vec![ProtocolId::Maj, ProtocolId::QspSimple],
            n_queries: 3,
            seed: 0,
            threads: 0,
            out_dir: "qdisc-out".into(),
            mc_trials: 100_000,
            ratio: None,
            opt_starts: opt.n_starts,
            opt_trials_per_eval: opt.n_trials_per_eval,
            opt_max_evals: 0,
            opt_tol: opt.convergence_tol,
            opt_mode: None,
            opt_quadrature_order: opt.quadrature_order,
            opt_final_trials: opt.final_trials,
            pointwise_best_passes: 1,
            svg: true,
        }
    }
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn delta_axis(&self) -> Axis {
        Axis {
            min: self.delta_min,
            max: self.delta_max,
            steps: self.delta_steps,
        }
    }

    pub fn sigma_axis(&self) -> Axis {
        Axis {
            min: self.sigma_min,
            max: self.sigma_max,
            steps: self.sigma_steps,
        }
    }

    /// The protocols compared by the ratio map, if any.
    pub fn ratio_pair(&self) -> Option<[ProtocolId; 2]> {
        self.ratio.or(match self.protocols.as_slice() {
            [a, b, ..] => Some([*a, *b]),
            _ => None,
        })
    }

    pub fn optimizer(&self) -> OptimizeConfig {
        let mut cfg = OptimizeConfig::for_queries(self.n_queries);
        cfg.n_starts = self.opt_starts;
        cfg.n_trials_per_eval = self.opt_trials_per_eval;
        if self.opt_max_evals > 0 {
            cfg.max_iters = self.opt_max_evals;
        }
        cfg.convergence_tol = self.opt_tol;
        if let Some(mode) = self.opt_mode {
            cfg.objective_mode = match mode {
                OptMode::Quadrature => ObjectiveMode::Quadrature,
                OptMode::MonteCarlo => ObjectiveMode::MonteCarlo,
            };
        }
        cfg.quadrature_order = self.opt_quadrature_order;
        cfg.final_trials = self.opt_final_trials;
        cfg.seed = self.seed;
        cfg
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        for (name, axis) in [("delta", self.delta_axis()), ("sigma", self.sigma_axis())] {
            if axis.steps < 2 {
                return bad(format!("{name}_steps must be at least 2"));
            }
            if !(axis.min < axis.max) || !axis.min.is_finite() || !axis.max.is_finite() {
                return bad(format!("{name}_min must be below {name}_max"));
            }
        }
        if self.delta_min < 0.0 || self.sigma_min < 0.0 {
            return bad("delta and sigma must be non-negative".into());
        }
        if self.protocols.is_empty() {
            return bad("no protocols requested".into());
        }
        let mut seen = self.protocols.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.protocols.len() {
            return bad("protocols listed twice".into());
        }
        if self.n_queries == 0 {
            return bad("n_queries must be positive".into());
        }
        if self.protocols.contains(&ProtocolId::Maj) && self.n_queries % 2 == 0 {
            return bad("maj needs an odd n_queries".into());
        }
        if self.mc_trials == 0 {
            return bad("mc_trials must be positive".into());
        }
        if let Some([a, b]) = self.ratio {
            if !self.protocols.contains(&a) || !self.protocols.contains(&b) {
                return bad("ratio protocols must be among the swept protocols".into());
            }
        }
        if self.protocols.contains(&ProtocolId::QspOpt) {
            self.optimizer()
                .validate(self.n_queries)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }
}
