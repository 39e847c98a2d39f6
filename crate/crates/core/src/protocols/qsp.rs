//! Coherent QSP protocols: exact, Monte Carlo and quadrature error evaluation.
//!
//! A segment with phases `φ₀ … φ_r` implements
//! `Q = e^{iφ₀σ_z} Π_{ℓ=1}^{r} (E(θ_ℓ) e^{iφ_ℓσ_z})`, with a fresh channel
//! angle `θ_ℓ` drawn for every call. Hypothesis probabilities are
//! `|⟨meas|Q|prep⟩|²`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::f64::consts::FRAC_PI_4;

use super::vote::vote_success;
use super::{PhaseAngleList, ProtocolResult, QspProtocol, Segment};
use crate::math;
use crate::noise::SeededRng;
use crate::quadrature::GaussHermite;
use crate::qubit::{rot_x, rot_z, Complex, PureState, Unitary2};
use crate::{Error, RdgInstance, Result};

/// Ordered product `e^{iφ₀σ_z} Π (E(θ_ℓ) e^{iφ_ℓσ_z})`, using `thetas[ℓ-1]` for call `ℓ`.
pub fn qsp_unitary(phi: &PhaseAngleList, thetas: &[f64]) -> Result<Unitary2> {
    let phases = phi.as_slice();
    if thetas.len() != phases.len() - 1 {
        return Err(Error::LengthMismatch {
            expected: phases.len() - 1,
            got: thetas.len(),
        });
    }
    let mut u = rot_z(phases[0]);
    for (theta, phase) in thetas.iter().zip(&phases[1..]) {
        u = u * rot_x(*theta) * rot_z(*phase);
    }
    Ok(u)
}

/// Zero-phase segment of `queries` calls measured at the Helstrom angle of the
/// accumulated rotation.
pub fn simple_segment(rdg: &RdgInstance, queries: usize) -> Segment {
    Segment {
        phases: PhaseAngleList::zeros(queries),
        prep: PureState::ZERO,
        meas: PureState::measurement_at(FRAC_PI_4 - queries as f64 * rdg.center()),
    }
}

/// Segment with phase factors precomputed for fast repeated evaluation.
#[derive(Debug, Clone)]
pub(crate) struct CompiledSegment {
    // e^{iφ_ℓ}
    phase: Vec<Complex>,
    prep: [Complex; 2],
    meas: [Complex; 2],
}

#[inline]
fn apply_z(p: Complex, v: [Complex; 2]) -> [Complex; 2] {
    [p * v[0], p.conj() * v[1]]
}

#[inline]
fn apply_x(c: f64, s: f64, v: [Complex; 2]) -> [Complex; 2] {
    let is = Complex::new(0.0, s);
    [v[0] * c + is * v[1], is * v[0] + v[1] * c]
}

impl CompiledSegment {
    pub(crate) fn new(seg: &Segment) -> Self {
        CompiledSegment {
            phase: seg
                .phases
                .as_slice()
                .iter()
                .map(|&p| {
                    let (s, c) = math::sin_cos(p);
                    Complex::new(c, s)
                })
                .collect(),
            prep: seg.prep.amplitudes(),
            meas: seg.meas.amplitudes(),
        }
    }

    pub(crate) fn queries(&self) -> usize {
        self.phase.len() - 1
    }

    /// Probability of the measured projector given one angle per call.
    pub(crate) fn probability(&self, thetas: &[f64]) -> f64 {
        let r = self.queries();
        debug_assert_eq!(thetas.len(), r);
        let mut v = apply_z(self.phase[r], self.prep);
        for l in (1..=r).rev() {
            let (s, c) = math::sin_cos(thetas[l - 1]);
            v = apply_z(self.phase[l - 1], apply_x(c, s, v));
        }
        let a = self.meas[0].conj() * v[0] + self.meas[1].conj() * v[1];
        a.norm_sqr().min(1.0)
    }

    /// Same, with every call at angle `mu + sigma * z[ℓ]`.
    fn probability_shifted(&self, mu: f64, sigma: f64, z: &[f64], buf: &mut [f64]) -> f64 {
        for (b, zi) in buf.iter_mut().zip(z) {
            *b = mu + sigma * zi;
        }
        self.probability(buf)
    }

    /// `E[p]` under i.i.d. Normal(mu, sigma²) angles by tensor Gauss–Hermite.
    ///
    /// The sum over the last-applied angle is folded into three weighted
    /// moments, so the cost is `order^(r-1)` rather than `order^r`.
    pub(crate) fn expectation_quadrature(&self, mu: f64, sigma: f64, rule: &GaussHermite) -> f64 {
        let r = self.queries();
        if r == 0 || sigma == 0.0 {
            let buf = vec![mu; r];
            return self.probability(&buf);
        }
        let points: Vec<(f64, f64, f64)> = rule
            .gaussian_points(mu, sigma)
            .map(|(t, w)| {
                let (s, c) = math::sin_cos(t);
                (c, s, w)
            })
            .collect();
        let (mut c2, mut s2, mut cs) = (0.0, 0.0, 0.0);
        for &(c, s, w) in &points {
            c2 += w * c * c;
            s2 += w * s * s;
            cs += w * c * s;
        }
        let p0 = self.phase[0];
        let wm = [p0.conj() * self.meas[0], p0 * self.meas[1]];
        let start = apply_z(self.phase[r], self.prep);
        let leaf = |u: [Complex; 2]| -> f64 {
            let a = wm[0].conj() * u[0] + wm[1].conj() * u[1];
            let b = wm[0].conj() * u[1] + wm[1].conj() * u[0];
            c2 * a.norm_sqr() + s2 * b.norm_sqr() - 2.0 * cs * (a.conj() * b).im
        };
        self.descend(r, start, &points, &leaf)
    }

    // Applies call `level` (and the phase after it) for every node, recursing
    // down to call 2; call 1 is handled by `leaf`.
    fn descend(
        &self,
        level: usize,
        state: [Complex; 2],
        points: &[(f64, f64, f64)],
        leaf: &dyn Fn([Complex; 2]) -> f64,
    ) -> f64 {
        if level == 1 {
            return leaf(state);
        }
        let mut total = 0.0;
        for &(c, s, w) in points {
            let next = apply_z(self.phase[level - 1], apply_x(c, s, state));
            total += w * self.descend(level - 1, next, points, leaf);
        }
        total
    }
}

/// `½(1 − |p₀ − p₁|)` with the better outcome orientation.
fn oriented_error(p0: f64, p1: f64) -> f64 {
    0.5 * (1.0 - math::abs(p0 - p1))
}

/// Per-segment probability that the segment's guess is right under each hypothesis.
fn correct_probs(p0: f64, p1: f64, outcome_means_zero: bool) -> (f64, f64) {
    if outcome_means_zero {
        (p0, 1.0 - p1)
    } else {
        (1.0 - p0, p1)
    }
}

/// Exact error of `protocol` on a noiseless instance.
pub fn qsp_error_noiseless(protocol: &QspProtocol, rdg: &RdgInstance) -> Result<ProtocolResult> {
    if !rdg.is_noiseless() {
        return Err(Error::NoisyInstance(rdg.sigma()));
    }
    let mut c0 = Vec::with_capacity(protocol.segments().len());
    let mut c1 = Vec::with_capacity(protocol.segments().len());
    for seg in protocol.segments() {
        let cs = CompiledSegment::new(seg);
        let r = cs.queries();
        let p0 = cs.probability(&vec![rdg.dist(0).mu(); r]);
        let p1 = cs.probability(&vec![rdg.dist(1).mu(); r]);
        let (a, b) = correct_probs(p0, p1, p0 >= p1);
        c0.push(a);
        c1.push(b);
    }
    let err = if c0.len() == 1 {
        1.0 - 0.5 * (c0[0] + c1[0])
    } else {
        1.0 - 0.5 * (vote_success(&c0) + vote_success(&c1))
    };
    Ok(ProtocolResult::exact(err.clamp(0.0, 1.0), protocol.total_queries()))
}

/// Best achievable noiseless error with `n` coherent calls: `½(1 − sin nδ)`
/// while `nδ < π/2`, zero from there on.
pub fn optimal_noiseless_error(delta: f64, n: usize) -> f64 {
    let x = n as f64 * delta;
    if x >= FRAC_PI_2 {
        0.0
    } else {
        (0.5 * (1.0 - math::sin(x))).max(0.0)
    }
}

/// `n·e^{−2nσ²}`: δ-coefficient of the linearized simple-QSP error.
pub fn simple_qsp_coefficient(sigma: f64, n: usize) -> f64 {
    let nf = n as f64;
    nf * math::exp(-2.0 * nf * sigma * sigma)
}

/// Linearized simple-QSP error `½(1 − (2M+1) δ e^{−2(2M+1)σ²})`, clamped.
pub fn simple_qsp_error_noisy(rdg: &RdgInstance, m: u32) -> f64 {
    let c = simple_qsp_coefficient(rdg.sigma(), 2 * m as usize + 1);
    (0.5 * (1.0 - c * rdg.delta())).clamp(0.0, 1.0)
}

/// Exact error of the simple protocol with `n` calls: `½(1 − e^{−2nσ²}|sin nδ|)`.
pub fn simple_qsp_error_exact(rdg: &RdgInstance, n: usize) -> f64 {
    let nf = n as f64;
    let lam = math::exp(-2.0 * nf * rdg.sigma() * rdg.sigma());
    0.5 * (1.0 - lam * math::abs(math::sin(nf * rdg.delta())))
}

/// Frozen standard-normal draws: `per_trial` values for each of `n_trials`.
///
/// Reusing one set across evaluations (common random numbers) makes the Monte
/// Carlo objective a deterministic, smooth function of the protocol parameters.
#[derive(Debug, Clone)]
pub struct StandardDraws {
    per_trial: usize,
    z: Vec<f64>,
}

impl StandardDraws {
    pub fn new(rng: &mut SeededRng, n_trials: usize, per_trial: usize) -> Self {
        let z = (0..n_trials * per_trial).map(|_| rng.standard_normal()).collect();
        StandardDraws { per_trial, z }
    }

    pub fn n_trials(&self) -> usize {
        if self.per_trial == 0 {
            0
        } else {
            self.z.len() / self.per_trial
        }
    }

    pub fn per_trial(&self) -> usize {
        self.per_trial
    }

    fn trial(&self, i: usize) -> &[f64] {
        &self.z[i * self.per_trial..(i + 1) * self.per_trial]
    }
}

/// Error and standard error of one segment on frozen draws, both hypotheses
/// sharing the same draws.
pub fn segment_error_on_draws(seg: &Segment, rdg: &RdgInstance, draws: &StandardDraws) -> Result<(f64, f64)> {
    let cs = CompiledSegment::new(seg);
    if draws.per_trial() != cs.queries() {
        return Err(Error::LengthMismatch {
            expected: cs.queries(),
            got: draws.per_trial(),
        });
    }
    let n = draws.n_trials();
    if n == 0 {
        return Err(Error::InvalidConfig("need at least one trial"));
    }
    let (mu0, mu1, sigma) = (rdg.dist(0).mu(), rdg.dist(1).mu(), rdg.sigma());
    let mut buf = vec![0.0; cs.queries()];
    let mut acc = Moments::default();
    for i in 0..n {
        let z = draws.trial(i);
        let p0 = cs.probability_shifted(mu0, sigma, z, &mut buf);
        let p1 = cs.probability_shifted(mu1, sigma, z, &mut buf);
        acc.push(p0 - p1);
    }
    let (mean, sem) = acc.mean_sem();
    Ok((oriented_error(mean, 0.0), 0.5 * sem))
}

/// Deterministic quadrature error of one segment.
pub fn segment_error_quadrature(seg: &Segment, rdg: &RdgInstance, rule: &GaussHermite) -> f64 {
    let cs = CompiledSegment::new(seg);
    let sigma = rdg.sigma();
    let p0 = cs.expectation_quadrature(rdg.dist(0).mu(), sigma, rule);
    let p1 = cs.expectation_quadrature(rdg.dist(1).mu(), sigma, rule);
    oriented_error(p0, p1)
}

#[derive(Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn mean_sem(&self) -> (f64, f64) {
        if self.n < 2 {
            return (self.mean, 0.0);
        }
        let var = self.m2 / (self.n - 1) as f64;
        (self.mean, math::sqrt(var / self.n as f64))
    }
}

/// Monte Carlo estimate of the symmetric error
/// `½ E_{Θ₀}[P(guess 1)] + ½ E_{Θ₁}[P(guess 0)]`.
///
/// Each call draws a fresh angle; both hypotheses reuse the same standard
/// normals within a trial. With several segments the per-segment outcomes are
/// majority-voted (exactly, given the sampled angles); each segment's outcome
/// orientation is fixed from a first pass over the same random stream.
pub fn qsp_error_mc(
    protocol: &QspProtocol,
    rdg: &RdgInstance,
    n_trials: usize,
    rng: &mut SeededRng,
) -> Result<ProtocolResult> {
    if n_trials == 0 {
        return Err(Error::InvalidConfig("need at least one trial"));
    }
    let segs: Vec<CompiledSegment> = protocol.segments().iter().map(CompiledSegment::new).collect();
    let (mu0, mu1, sigma) = (rdg.dist(0).mu(), rdg.dist(1).mu(), rdg.sigma());
    let max_r = segs.iter().map(CompiledSegment::queries).max().unwrap_or(0);
    let mut z = vec![0.0; max_r];
    let mut buf = vec![0.0; max_r];
    let queries = protocol.total_queries();

    if segs.len() == 1 {
        let seg = &segs[0];
        let r = seg.queries();
        let mut acc = Moments::default();
        for _ in 0..n_trials {
            for zi in z[..r].iter_mut() {
                *zi = rng.standard_normal();
            }
            let p0 = seg.probability_shifted(mu0, sigma, &z[..r], &mut buf[..r]);
            let p1 = seg.probability_shifted(mu1, sigma, &z[..r], &mut buf[..r]);
            acc.push(p0 - p1);
        }
        let (mean, sem) = acc.mean_sem();
        return Ok(ProtocolResult {
            error_prob: oriented_error(mean, 0.0),
            std_error: 0.5 * sem,
            queries_used: queries,
        });
    }

    let mut sample = |rng: &mut SeededRng, out: &mut [(f64, f64)]| {
        for (seg, slot) in segs.iter().zip(out.iter_mut()) {
            let r = seg.queries();
            for zi in z[..r].iter_mut() {
                *zi = rng.standard_normal();
            }
            let p0 = seg.probability_shifted(mu0, sigma, &z[..r], &mut buf[..r]);
            let p1 = seg.probability_shifted(mu1, sigma, &z[..r], &mut buf[..r]);
            *slot = (p0, p1);
        }
    };

    let mut probs = vec![(0.0, 0.0); segs.len()];
    let mut pilot = rng.clone();
    let mut diff = vec![0.0; segs.len()];
    for _ in 0..n_trials {
        sample(&mut pilot, &mut probs);
        for (d, (p0, p1)) in diff.iter_mut().zip(&probs) {
            *d += p0 - p1;
        }
    }
    let orientation: Vec<bool> = diff.iter().map(|d| *d >= 0.0).collect();

    let mut c0 = vec![0.0; segs.len()];
    let mut c1 = vec![0.0; segs.len()];
    let mut acc = Moments::default();
    for _ in 0..n_trials {
        sample(rng, &mut probs);
        for (j, (p0, p1)) in probs.iter().enumerate() {
            let (a, b) = correct_probs(*p0, *p1, orientation[j]);
            c0[j] = a;
            c1[j] = b;
        }
        acc.push(1.0 - 0.5 * (vote_success(&c0) + vote_success(&c1)));
    }
    let (mean, sem) = acc.mean_sem();
    Ok(ProtocolResult {
        error_prob: mean.clamp(0.0, 1.0),
        std_error: sem,
        queries_used: queries,
    })
}
