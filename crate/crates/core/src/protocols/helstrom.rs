//! One-shot Helstrom discrimination.

use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::math;
use crate::{Error, RdgInstance, Result};

/// `½(1 − sin δ)` for two fixed rotations; `δ` must already be reduced into `[0, π/2]`.
pub fn helstrom_error_noiseless(delta: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&delta) {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            range: "[0, pi/2]",
        });
    }
    Ok((0.5 * (1.0 - math::sin(delta))).max(0.0))
}

/// Measurement angle α maximizing [`success_probability`].
pub fn helstrom_angle(rdg: &RdgInstance) -> f64 {
    FRAC_PI_4 - rdg.center()
}

/// Equal-prior success of preparing |0⟩ and measuring `cos α|0⟩ − i sin α|1⟩`,
/// guessing hypothesis 0 on that outcome:
/// `¼[(1 + λ cos 2(α+μ₀)) + (1 − λ cos 2(α+μ₁))]` with `λ = e^{−2σ²}`.
pub fn success_probability(rdg: &RdgInstance, alpha: f64) -> f64 {
    let lam = rdg.dist(0).attenuation();
    let mu0 = rdg.dist(0).mu();
    let mu1 = rdg.dist(1).mu();
    0.25 * ((1.0 + lam * math::cos(2.0 * (alpha + mu0)))
        + (1.0 - lam * math::cos(2.0 * (alpha + mu1))))
}

/// Minimum one-shot error for the noisy pair, `½(1 − |sin δ|·e^{−2σ²})`.
pub fn helstrom_error_noisy(rdg: &RdgInstance) -> f64 {
    let lam = rdg.dist(0).attenuation();
    0.5 * (1.0 - lam * math::abs(math::sin(rdg.delta())))
}
