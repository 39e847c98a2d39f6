//! Gaussian angle noise, the discrimination instance, and seeded sampling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::math;
use crate::{Error, Result};

/// Normal(mu, sigma²) over rotation angles, unwrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleDistribution {
    mu: f64,
    sigma: f64,
}

impl AngleDistribution {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() {
            return Err(Error::InvalidDistribution("mean and deviation must be finite"));
        }
        if sigma < 0.0 {
            return Err(Error::InvalidDistribution("deviation must be non-negative"));
        }
        Ok(AngleDistribution { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `e^{-2σ²}`, the contrast left in `cos 2θ` after averaging.
    pub fn attenuation(&self) -> f64 {
        math::exp(-2.0 * self.sigma * self.sigma)
    }
}

/// E[cos 2θ] = cos(2μ)·e^{-2σ²}.
pub fn cos2_moment(d: &AngleDistribution) -> f64 {
    math::cos(2.0 * d.mu) * d.attenuation()
}

/// E[sin 2θ] = sin(2μ)·e^{-2σ²}.
pub fn sin2_moment(d: &AngleDistribution) -> f64 {
    math::sin(2.0 * d.mu) * d.attenuation()
}

/// The two hypotheses of a rotation discrimination game. Both share one σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdgInstance {
    dist0: AngleDistribution,
    dist1: AngleDistribution,
}

impl RdgInstance {
    pub fn new(dist0: AngleDistribution, dist1: AngleDistribution) -> Result<Self> {
        if dist0.sigma != dist1.sigma {
            return Err(Error::InvalidDistribution(
                "both hypotheses must share the same deviation",
            ));
        }
        Ok(RdgInstance { dist0, dist1 })
    }

    /// Sweep convention: hypothesis 0 is centred at 0, hypothesis 1 at `delta`.
    pub fn canonical(delta: f64, sigma: f64) -> Result<Self> {
        Self::new(
            AngleDistribution::new(0.0, sigma)?,
            AngleDistribution::new(delta, sigma)?,
        )
    }

    pub fn dist(&self, hypothesis: usize) -> &AngleDistribution {
        match hypothesis {
            0 => &self.dist0,
            _ => &self.dist1,
        }
    }

    pub fn delta(&self) -> f64 {
        math::abs(self.dist0.mu - self.dist1.mu)
    }

    pub fn sigma(&self) -> f64 {
        self.dist0.sigma
    }

    pub fn is_noiseless(&self) -> bool {
        self.dist0.sigma == 0.0
    }

    pub fn swapped(&self) -> Self {
        RdgInstance {
            dist0: self.dist1,
            dist1: self.dist0,
        }
    }

    /// Midpoint of the two means.
    pub fn center(&self) -> f64 {
        0.5 * (self.dist0.mu + self.dist1.mu)
    }
}

/// A deterministic, splittable random stream.
///
/// ChaCha8 keyed by the 64-bit seed. Children share the key and get their own
/// ChaCha stream id, so a sweep cell's stream depends only on
/// `(seed, i, j)` and never on scheduling.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for grid cell `(i, j)`.
    pub fn for_cell(seed: u64, i: usize, j: usize) -> Self {
        SeededRng::new(seed).child(i as u64).child(j as u64)
    }

    /// Fresh stream derived from this one's identity (not its position).
    pub fn child(&self, tag: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(splitmix64(self.inner.get_stream() ^ splitmix64(tag)));
        SeededRng {
            seed: self.seed,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Raw 64 random bits, e.g. to seed a nested computation.
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One draw from `d`; exactly `mu` when `sigma == 0`.
pub fn sample_angle(d: &AngleDistribution, rng: &mut SeededRng) -> f64 {
    let z = rng.standard_normal();
    if d.sigma == 0.0 {
        d.mu
    } else {
        d.mu + d.sigma * z
    }
}
