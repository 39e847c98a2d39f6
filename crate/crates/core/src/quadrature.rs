//! Gauss–Hermite rules for Gaussian expectations.
//!
//! Nodes come from Newton iteration on the orthonormal Hermite recurrence,
//! started from the usual asymptotic guesses. The `oracle` module builds its
//! rules a different way and the two are checked against each other.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// π^{-1/4}
const PI_M4: f64 = 0.751_125_544_464_942_5;
pub const MAX_ORDER: usize = 128;

/// Nodes and weights for `∫ e^{-x²} f(x) dx ≈ Σ wᵢ f(xᵢ)`, nodes descending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::OutOfRange {
                name: "quadrature order",
                value: order as f64,
                range: "1..=128",
            });
        }
        let n = order;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let nf = n as f64;
        let mut z = 0.0f64;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => math::sqrt(2.0 * nf + 1.0) - 1.85575 * libm::pow(2.0 * nf + 1.0, -0.16667),
                1 => z - 1.14 * libm::pow(nf, 0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = PI_M4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * math::sqrt(2.0 / jf) * p2 - math::sqrt((jf - 1.0) / jf) * p3;
                }
                pp = math::sqrt(2.0 * nf) * p2;
                let step = p1 / pp;
                z -= step;
                if math::abs(step) <= 1e-15 * math::abs(z).max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
        Ok(GaussHermite {
            nodes: x,
            weights: w,
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Angles and probability weights that integrate against Normal(mu, sigma²).
    pub fn gaussian_points(&self, mu: f64, sigma: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let scale = core::f64::consts::SQRT_2 * sigma;
        let norm = 1.0 / math::sqrt(core::f64::consts::PI);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mu + scale * x, w * norm))
    }

    /// `E[f(θ)]` for `θ ~ Normal(mu, sigma²)`.
    pub fn expectation(&self, mu: f64, sigma: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.gaussian_points(mu, sigma).map(|(t, w)| w * f(t)).sum()
    }
}
