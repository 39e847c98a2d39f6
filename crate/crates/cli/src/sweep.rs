//! Cell-parallel (δ, σ) sweeps.

use qdisc_core::optimizer::{self, OptimizeConfig};
use qdisc_core::protocols::adaptive::adaptive_incoherent_error;
use qdisc_core::protocols::helstrom::helstrom_error_noisy;
use qdisc_core::protocols::qsp::{qsp_error_mc, simple_qsp_error_exact};
use qdisc_core::protocols::vote::maj_protocol_error;
use qdisc_core::{QspProtocol, RdgInstance, SeededRng};
use rayon::prelude::*;

use crate::config::{ProtocolId, SweepSpec};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub error_prob: f64,
    pub std_error: f64,
}

/// Error probabilities of one protocol over the grid. `values[j * n_delta + i]`
/// holds cell `(deltas[i], sigmas[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSurface {
    pub protocol: ProtocolId,
    pub deltas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub values: Vec<Cell>,
}

impl ErrorSurface {
    pub fn get(&self, i: usize, j: usize) -> Cell {
        self.values[j * self.deltas.len() + i]
    }

    pub fn same_grid(&self, other: &ErrorSurface) -> bool {
        self.deltas == other.deltas && self.sigmas == other.sigmas
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellDiagnostic {
    pub protocol: ProtocolId,
    pub delta: f64,
    pub sigma: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub surfaces: Vec<ErrorSurface>,
    pub diagnostics: Vec<CellDiagnostic>,
}

impl SweepOutput {
    pub fn surface(&self, p: ProtocolId) -> Option<&ErrorSurface> {
        self.surfaces.iter().find(|s| s.protocol == p)
    }
}

fn protocol_tag(p: ProtocolId) -> u64 {
    ProtocolId::ALL.iter().position(|q| *q == p).unwrap_or(0) as u64
}

fn cell_rng(spec: &SweepSpec, p: ProtocolId, i: usize, j: usize) -> SeededRng {
    SeededRng::for_cell(spec.seed, i, j).child(protocol_tag(p))
}

fn cell_optimizer(spec: &SweepSpec, base: &OptimizeConfig, i: usize, j: usize) -> OptimizeConfig {
    OptimizeConfig {
        seed: cell_rng(spec, ProtocolId::QspOpt, i, j).next_u64(),
        ..base.clone()
    }
}

struct Evaluated {
    cell: Cell,
    params: Option<Vec<f64>>,
    note: Option<String>,
}

fn evaluate(spec: &SweepSpec, p: ProtocolId, rdg: &RdgInstance, i: usize, j: usize) -> Result<Evaluated, CliError> {
    let n = spec.n_queries;
    let exact = |e: f64| Evaluated {
        cell: Cell {
            error_prob: e,
            std_error: 0.0,
        },
        params: None,
        note: None,
    };
    Ok(match p {
        ProtocolId::Maj => exact(maj_protocol_error(rdg, ((n - 1) / 2) as u32).error_prob),
        ProtocolId::Helstrom => exact(helstrom_error_noisy(rdg)),
        ProtocolId::QspSimple => exact(simple_qsp_error_exact(rdg, n)),
        ProtocolId::QspSimpleMc => {
            let r = qsp_error_mc(&QspProtocol::simple(rdg, n), rdg, spec.mc_trials, &mut cell_rng(spec, p, i, j))?;
            Evaluated {
                cell: Cell {
                    error_prob: r.error_prob,
                    std_error: r.std_error,
                },
                params: None,
                note: None,
            }
        }
        ProtocolId::Adaptive => {
            let r = adaptive_incoherent_error(rdg, n, spec.mc_trials, &mut cell_rng(spec, p, i, j))?;
            Evaluated {
                cell: Cell {
                    error_prob: r.error_prob,
                    std_error: r.std_error,
                },
                params: None,
                note: None,
            }
        }
        ProtocolId::QspOpt => {
            let cfg = cell_optimizer(spec, &spec.optimizer(), i, j);
            let rep = optimizer::optimize_qsp(rdg, n, &cfg)?;
            let note = (!rep.budget_exhausted.is_empty())
                .then(|| format!("{} of {} starts hit the evaluation budget", rep.budget_exhausted.len(), cfg.n_starts));
            Evaluated {
                cell: Cell {
                    error_prob: rep.best_error,
                    std_error: rep.best_std_error,
                },
                params: Some(rep.best_params),
                note,
            }
        }
    })
}

/// Evaluates every requested protocol on every grid cell.
///
/// Cells run in parallel on the current rayon pool; each cell draws from its
/// own `(seed, i, j, protocol)` stream, so results do not depend on the
/// schedule or the thread count.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput, CliError> {
    spec.validate()?;
    let deltas = spec.delta_axis().points();
    let sigmas = spec.sigma_axis().points();
    let nd = deltas.len();
    let cells = nd * sigmas.len();
    let mut surfaces = Vec::new();
    let mut diagnostics = Vec::new();
    for &p in &spec.protocols {
        let results: Vec<Evaluated> = (0..cells)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % nd, k / nd);
                let rdg = RdgInstance::canonical(deltas[i], sigmas[j])?;
                evaluate(spec, p, &rdg, i, j)
            })
            .collect::<Result<_, CliError>>()?;
        let mut values: Vec<Cell> = results.iter().map(|r| r.cell).collect();
        for (k, r) in results.iter().enumerate() {
            if let Some(m) = &r.note {
                diagnostics.push(CellDiagnostic {
                    protocol: p,
                    delta: deltas[k % nd],
                    sigma: sigmas[k / nd],
                    message: m.clone(),
                });
            }
        }
        if p == ProtocolId::QspOpt {
            let mut params: Vec<Vec<f64>> = results.into_iter().map(|r| r.params.unwrap_or_default()).collect();
            for _ in 0..spec.pointwise_best_passes {
                let adopted = pointwise_best_pass(spec, &deltas, &sigmas, &mut values, &mut params)?;
                if adopted == 0 {
                    break;
                }
            }
        }
        for c in values.iter_mut() {
            c.error_prob = c.error_prob.clamp(0.0, 1.0);
        }
        surfaces.push(ErrorSurface {
            protocol: p,
            deltas: deltas.clone(),
            sigmas: sigmas.clone(),
            values,
        });
    }
    Ok(SweepOutput { surfaces, diagnostics })
}

/// Lets each cell adopt a grid neighbour's optimized parameters when they
/// score better on the cell's own final evaluation. Returns the number of
/// adoptions.
fn pointwise_best_pass(
    spec: &SweepSpec,
    deltas: &[f64],
    sigmas: &[f64],
    values: &mut [Cell],
    params: &mut [Vec<f64>],
) -> Result<usize, CliError> {
    let nd = deltas.len();
    let ns = sigmas.len();
    let base = spec.optimizer();
    let snapshot: &[Vec<f64>] = params;
    let updates: Vec<Option<(Cell, Vec<f64>)>> = (0..values.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % nd, k / nd);
            let rdg = RdgInstance::canonical(deltas[i], sigmas[j])?;
            let cfg = cell_optimizer(spec, &base, i, j);
            let mut best: Option<(Cell, Vec<f64>)> = None;
            let mut best_err = values[k].error_prob;
            let neighbours = [
                (i > 0).then(|| k - 1),
                (i + 1 < nd).then(|| k + 1),
                (j > 0).then(|| k - nd),
                (j + 1 < ns).then(|| k + nd),
            ];
            for q in neighbours.into_iter().flatten() {
                if snapshot[q].len() != spec.n_queries + 5 {
                    continue;
                }
                let (e, se) = optimizer::final_error(&rdg, spec.n_queries, &cfg, &snapshot[q])?;
                if e < best_err {
                    best_err = e;
                    best = Some((
                        Cell {
                            error_prob: e,
                            std_error: se,
                        },
                        snapshot[q].clone(),
                    ));
                }
            }
            Ok(best)
        })
        .collect::<Result<_, CliError>>()?;
    let mut adopted = 0;
    for (k, u) in updates.into_iter().enumerate() {
        if let Some((c, p)) = u {
            values[k] = c;
            params[k] = p;
            adopted += 1;
        }
    }
    Ok(adopted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qdisc_core::protocols::vote::majority_vote;

    fn small_spec(protocols: Vec<ProtocolId>) -> SweepSpec {
        SweepSpec {
            delta_min: 0.0,
            delta_max: 0.6,
            delta_steps: 2,
            sigma_min: 0.0,
            sigma_max: 0.5,
            sigma_steps: 2,
            protocols,
            mc_trials: 4000,
            opt_starts: 2,
            opt_max_evals: 300,
            ..SweepSpec::default()
        }
    }

    #[test]
    fn maj_row_at_zero_noise() {
        let out = run_sweep(&small_spec(vec![ProtocolId::Maj])).unwrap();
        let s = &out.surfaces[0];
        for i in 0..2 {
            let d = s.deltas[i];
            let p = 0.5 * (1.0 - d.sin());
            assert!((s.get(i, 0).error_prob - majority_vote(p, 1)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_separation_column_is_a_coin_flip() {
        let out = run_sweep(&small_spec(ProtocolId::ALL.to_vec())).unwrap();
        for s in &out.surfaces {
            for j in 0..2 {
                let c = s.get(0, j);
                assert!((c.error_prob - 0.5).abs() <= 3.0 * c.std_error + 1e-9, "{}: {c:?}", s.protocol);
            }
        }
    }

    #[test]
    fn reruns_are_identical() {
        let spec = small_spec(vec![ProtocolId::QspSimpleMc, ProtocolId::QspOpt, ProtocolId::Adaptive]);
        assert_eq!(run_sweep(&spec).unwrap(), run_sweep(&spec).unwrap());
    }
}
