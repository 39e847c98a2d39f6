//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use qdisc_core::hybrid::{coherence_curve, xi_large_sigma, xi_small_sigma, XiDiagnostic};
use qdisc_core::optimizer;
use qdisc_core::oracle::reference_values;
use qdisc_core::protocols::adaptive::{adaptive_incoherent_error, adaptive_incoherent_error_exact};
use qdisc_core::protocols::qsp::simple_qsp_error_exact;
use qdisc_core::{RdgInstance, SeededRng};
use serde_json::{json, Value};

use crate::boundary::{extract_boundary, ratio_map, small_delta_intercept, RatioMap};
use crate::config::{ProtocolId, SweepSpec};
use crate::error::CliError;
use crate::output::{self, Heatmap, Manifest, Palette};
use crate::sweep::{run_sweep, ErrorSurface};

/// Shots above this are only estimated by Monte Carlo.
const EXACT_ADAPTIVE_SHOTS: usize = 16;
/// Ratio heatmaps saturate at this factor either side of 1.
const RATIO_SPAN: f64 = 4.0;

#[derive(Debug, Parser)]
#[command(name = "qdisc", version, about = "Noisy rotation-channel discrimination toolkit")]
struct Cli {
    /// TOML sweep configuration; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every configured protocol over the (δ, σ) grid.
    Sweep {
        /// Label the σ axis of the heatmaps in units of π.
        #[arg(long)]
        sigma_over_pi: bool,
    },
    /// Optimize the phases of an N-query sequence at one (δ, σ).
    Optimize {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        n: usize,
    },
    /// Optimal coherence length of the hybrid protocol against σ.
    HybridCurve {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        sigma_min: f64,
        #[arg(long)]
        sigma_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Ratio map and level-1 boundary between two surfaces of a sweep CSV.
    Boundary {
        #[arg(long, value_name = "CSV")]
        surface: PathBuf,
        #[arg(long)]
        numerator: ProtocolId,
        #[arg(long)]
        denominator: ProtocolId,
        #[arg(long)]
        sigma_over_pi: bool,
    },
    /// Error of the adaptive Bayesian protocol at one (δ, σ).
    Adaptive {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        shots: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
    /// Reference computations from the brute-force backends.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Print the reference values as JSON.
    Dump,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sweep { .. } => "sweep",
            Command::Optimize { .. } => "optimize",
            Command::HybridCurve { .. } => "hybrid-curve",
            Command::Boundary { .. } => "boundary",
            Command::Adaptive { .. } => "adaptive",
            Command::Oracle { .. } => "oracle dump",
        }
    }
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qdisc: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut spec = match &cli.config {
        Some(path) => SweepSpec::load(path)?,
        None => SweepSpec::default(),
    };
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    if let Some(t) = cli.threads {
        spec.threads = t;
    }
    if let Some(d) = &cli.out_dir {
        spec.out_dir = d.to_string_lossy().into_owned();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let out_dir = PathBuf::from(&spec.out_dir);
    fs::create_dir_all(&out_dir)?;
    let name = cli.command.name();
    let (args, outputs) = pool.install(|| dispatch(&cli.command, &mut spec, &out_dir))?;
    output::write_manifest(
        &out_dir,
        &Manifest {
            tool: "qdisc",
            version: env!("CARGO_PKG_VERSION"),
            command: name,
            seed: spec.seed,
            config: &json!({ "spec": spec, "args": args }),
            outputs,
        },
    )
}

type Ran = (Value, Vec<String>);

fn dispatch(cmd: &Command, spec: &mut SweepSpec, dir: &Path) -> Result<Ran, CliError> {
    match cmd {
        Command::Sweep { sigma_over_pi } => sweep(spec, dir, *sigma_over_pi),
        Command::Optimize { delta, sigma, n } => optimize(spec, dir, *delta, *sigma, *n),
        Command::HybridCurve {
            n,
            sigma_min,
            sigma_max,
            points,
        } => hybrid_curve(dir, *n, *sigma_min, *sigma_max, *points),
        Command::Boundary {
            surface,
            numerator,
            denominator,
            sigma_over_pi,
        } => {
            let surfaces = output::load_surfaces(surface)?;
            let find = |p: ProtocolId| {
                surfaces
                    .iter()
                    .find(|s| s.protocol == p)
                    .ok_or_else(|| CliError::Runtime(format!("{} has no `{p}` surface", surface.display())))
            };
            let outputs = write_ratio(dir, find(*numerator)?, find(*denominator)?, *sigma_over_pi, true)?;
            let args = json!({ "surface": surface, "numerator": numerator, "denominator": denominator });
            Ok((args, outputs))
        }
        Command::Adaptive {
            delta,
            sigma,
            shots,
            trials,
        } => adaptive(spec, dir, *delta, *sigma, *shots, *trials),
        Command::Oracle {
            command: OracleCommand::Dump,
        } => {
            let values: Vec<Value> = reference_values()?
                .into_iter()
                .map(|r| json!({ "name": r.name, "delta": r.delta, "sigma": r.sigma, "value": r.value }))
                .collect();
            let text = serde_json::to_string_pretty(&values).map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("{text}");
            fs::write(dir.join("oracle.json"), text + "\n")?;
            Ok((Value::Null, vec!["oracle.json".into()]))
        }
    }
}

fn sweep(spec: &SweepSpec, dir: &Path, sigma_over_pi: bool) -> Result<Ran, CliError> {
    let out = run_sweep(spec)?;
    let mut outputs = vec!["surfaces.csv".to_string()];
    output::emit_csv(&dir.join("surfaces.csv"), &out.surfaces)?;
    for d in &out.diagnostics {
        eprintln!("qdisc: {} at delta={} sigma={}: {}", d.protocol, d.delta, d.sigma, d.message);
    }
    if spec.svg {
        for s in &out.surfaces {
            let file = format!("{}.svg", s.protocol);
            let values: Vec<f64> = s.values.iter().map(|c| c.error_prob).collect();
            output::emit_svg_heatmap(
                &dir.join(&file),
                &Heatmap {
                    title: s.protocol.name(),
                    deltas: &s.deltas,
                    sigmas: &s.sigmas,
                    values: &values,
                    palette: Palette::Sequential,
                    sigma_over_pi,
                },
            )?;
            outputs.push(file);
        }
    }
    if let Some([a, b]) = spec.ratio_pair() {
        let (sa, sb) = (out.surface(a), out.surface(b));
        if let (Some(sa), Some(sb)) = (sa, sb) {
            outputs.extend(write_ratio(dir, sa, sb, sigma_over_pi, spec.svg)?);
        }
    }
    Ok((json!({ "sigma_over_pi": sigma_over_pi }), outputs))
}

fn write_ratio(
    dir: &Path,
    a: &ErrorSurface,
    b: &ErrorSurface,
    sigma_over_pi: bool,
    svg: bool,
) -> Result<Vec<String>, CliError> {
    let ratio: RatioMap = ratio_map(a, b)?;
    let lines = extract_boundary(&ratio);
    output::emit_ratio_csv(&dir.join("ratio.csv"), &ratio)?;
    output::emit_boundary_csv(&dir.join("boundary.csv"), &lines)?;
    let mut outputs = vec!["ratio.csv".to_string(), "boundary.csv".to_string()];
    if svg {
        let title = format!("{} / {}", a.protocol, b.protocol);
        output::emit_svg_heatmap(
            &dir.join("ratio.svg"),
            &Heatmap {
                title: &title,
                deltas: &ratio.deltas,
                sigmas: &ratio.sigmas,
                values: &ratio.values,
                palette: Palette::Diverging { span: RATIO_SPAN },
                sigma_over_pi,
            },
        )?;
        outputs.push("ratio.svg".into());
    }
    match small_delta_intercept(&lines) {
        Some((d, s)) => println!("boundary: {} polylines, smallest-delta point delta={d} sigma={s}", lines.len()),
        None => println!("boundary: none (ratio never crosses 1)"),
    }
    Ok(outputs)
}

fn write_json(dir: &Path, file: &str, v: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("{text}");
    fs::write(dir.join(file), text + "\n")?;
    Ok(())
}

fn optimize(spec: &mut SweepSpec, dir: &Path, delta: f64, sigma: f64, n: usize) -> Result<Ran, CliError> {
    spec.n_queries = n;
    let rdg = RdgInstance::canonical(delta, sigma)?;
    let cfg = spec.optimizer();
    cfg.validate(n).map_err(|e| CliError::Config(e.to_string()))?;
    let rep = optimizer::optimize_qsp(&rdg, n, &cfg)?;
    let result = json!({
        "delta": delta,
        "sigma": sigma,
        "n": n,
        "error_prob": rep.best_error,
        "std_error": rep.best_std_error,
        "simple_error": simple_qsp_error_exact(&rdg, n),
        "params": rep.best_params,
        "per_start_errors": rep.per_start_errors,
        "evaluations_used": rep.evaluations_used,
        "budget_exhausted": rep.budget_exhausted,
        "simple_fallback": rep.simple_fallback,
    });
    write_json(dir, "optimize.json", &result)?;
    let args = json!({ "delta": delta, "sigma": sigma, "n": n });
    Ok((args, vec!["optimize.json".into()]))
}

fn hybrid_curve(dir: &Path, n: f64, sigma_min: f64, sigma_max: f64, points: usize) -> Result<Ran, CliError> {
    if !(sigma_min > 0.0 && sigma_min < sigma_max && sigma_max.is_finite()) {
        return Err(CliError::Config("need 0 < sigma-min < sigma-max".into()));
    }
    if points < 2 {
        return Err(CliError::Config("need at least 2 points".into()));
    }
    let grid: Vec<f64> = (0..points)
        .map(|k| sigma_min + (sigma_max - sigma_min) * k as f64 / (points - 1) as f64)
        .collect();
    let curve = coherence_curve(n, &grid)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(dir.join("hybrid_curve.csv"))?;
    w.write_record(["sigma", "sigma_over_pi", "xi_min", "xi_large", "xi_small", "regime", "note"])?;
    for k in 0..points {
        let s = curve.sigma_grid[k];
        let note = match curve.diagnostics[k] {
            None => "",
            Some(XiDiagnostic::BelowBracket) => "below-bracket",
            Some(XiDiagnostic::AboveBracket) => "above-bracket",
        };
        w.write_record([
            format!("{s}"),
            format!("{}", s / core::f64::consts::PI),
            format!("{}", curve.xi_min[k]),
            format!("{}", xi_large_sigma(s)),
            format!("{}", xi_small_sigma(s, n)),
            curve.regimes[k].label().to_string(),
            note.to_string(),
        ])?;
    }
    w.flush()?;
    let args = json!({ "n": n, "sigma_min": sigma_min, "sigma_max": sigma_max, "points": points });
    Ok((args, vec!["hybrid_curve.csv".into()]))
}

fn adaptive(
    spec: &SweepSpec,
    dir: &Path,
    delta: f64,
    sigma: f64,
    shots: usize,
    trials: usize,
) -> Result<Ran, CliError> {
    let rdg = RdgInstance::canonical(delta, sigma)?;
    let mc = adaptive_incoherent_error(&rdg, shots, trials, &mut SeededRng::new(spec.seed))?;
    let exact = if shots <= EXACT_ADAPTIVE_SHOTS {
        Some(adaptive_incoherent_error_exact(&rdg, shots)?)
    } else {
        None
    };
    let result = json!({
        "delta": delta,
        "sigma": sigma,
        "shots": shots,
        "trials": trials,
        "error_prob": mc.error_prob,
        "std_error": mc.std_error,
        "exact_error_prob": exact,
    });
    write_json(dir, "adaptive.json", &result)?;
    let args = json!({ "delta": delta, "sigma": sigma, "shots": shots, "trials": trials });
    Ok((args, vec!["adaptive.json".into()]))
}
