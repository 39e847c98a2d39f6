//! Gauss–Hermite rules from the eigen-decomposition of the Hermite Jacobi matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 128;

/// Nodes and weights for `∫ e^{−x²} f(x) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `E[f(θ)]` for θ ~ Normal(mu, sigma²).
    pub fn gaussian_expectation(&self, mu: f64, sigma: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let scale = core::f64::consts::SQRT_2 * sigma;
        let norm = 1.0 / math::sqrt(core::f64::consts::PI);
        self.integrate(|x| f(mu + scale * x)) * norm
    }
}

pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
        return Err(Error::OutOfRange {
            name: "quadrature order",
            value: order as f64,
            range: "2..=128",
        });
    }
    let n = order;
    let mut diag = vec![0.0; n];
    // Recurrence x H_k = ½ H_{k+1} + k H_{k−1} in orthonormal form.
    let mut off: Vec<f64> = (1..=n).map(|k| math::sqrt(k as f64 / 2.0)).collect();
    off[n - 1] = 0.0;
    let mut first_row = vec![0.0; n];
    first_row[0] = 1.0;
    symmetric_tridiagonal_ql(&mut diag, &mut off, &mut first_row)?;

    let mut pairs: Vec<(f64, f64)> = diag
        .iter()
        .zip(&first_row)
        .map(|(&x, &v)| (x, math::sqrt(core::f64::consts::PI) * v * v))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Enforce exact symmetry; the eigen-solve leaves rounding-level asymmetry.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[j].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    Ok(QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        order,
    })
}

/// Implicit QL with Wilkinson shifts. On return `diag` holds the eigenvalues
/// and `first_row[j]` the first component of eigenvector `j`.
fn symmetric_tridiagonal_ql(diag: &mut [f64], off: &mut [f64], first_row: &mut [f64]) -> Result<()> {
    let n = diag.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = math::abs(diag[m]) + math::abs(diag[m + 1]);
                if math::abs(off[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::InvalidConfig("tridiagonal eigen-solve did not converge"));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = math::sqrt(g * g + 1.0);
            g = diag[m] - diag[l] + off[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = math::sqrt(f * f + g * g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let t = first_row[i + 1];
                first_row[i + 1] = s * first_row[i] + c * t;
                first_row[i] = c * first_row[i] - s * t;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
