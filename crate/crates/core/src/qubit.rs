//! Exact 2×2 complex linear algebra for single-qubit states and gates.

use core::ops::Mul;

use crate::math;
use crate::{Error, Result};

pub type Complex = num_complex::Complex64;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// Default absolute tolerance for algebraic identities.
pub const TOL: f64 = 1e-12;

/// A 2×2 complex matrix, row-major. Constructed only from unitary factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    m: [[Complex; 2]; 2],
}

impl Unitary2 {
    pub const IDENTITY: Unitary2 = Unitary2 {
        m: [[ONE, ZERO], [ZERO, ONE]],
    };

    /// Wraps raw entries, checking `U†U = I` within [`TOL`].
    pub fn from_entries(m: [[Complex; 2]; 2]) -> Result<Self> {
        let u = Unitary2 { m };
        if u.unitarity_defect() > TOL {
            return Err(Error::OutOfRange {
                name: "unitarity defect",
                value: u.unitarity_defect(),
                range: "<= 1e-12",
            });
        }
        Ok(u)
    }

    pub fn entries(&self) -> &[[Complex; 2]; 2] {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex {
        self.m[row][col]
    }

    pub fn dagger(&self) -> Self {
        let m = &self.m;
        Unitary2 {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    pub fn det(&self) -> Complex {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.dagger() * *self;
        let mut worst = 0.0f64;
        for (r, row) in p.m.iter().enumerate() {
            for (c, z) in row.iter().enumerate() {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((*z - target).norm());
            }
        }
        worst
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Unitary2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        worst
    }

    /// Same as [`max_abs_diff`](Self::max_abs_diff) after removing the best global phase.
    pub fn phase_insensitive_diff(&self, other: &Unitary2) -> f64 {
        // ⟨other, self⟩ in the Frobenius inner product gives the aligning phase.
        let mut overlap = ZERO;
        for r in 0..2 {
            for c in 0..2 {
                overlap += other.m[r][c].conj() * self.m[r][c];
            }
        }
        if overlap.norm() == 0.0 {
            return self.max_abs_diff(other);
        }
        let phase = overlap / overlap.norm();
        let mut aligned = *other;
        for row in aligned.m.iter_mut() {
            for z in row.iter_mut() {
                *z *= phase;
            }
        }
        self.max_abs_diff(&aligned)
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let a = &self.m;
        let b = &rhs.m;
        Unitary2 {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
        }
    }
}

impl Mul<PureState> for Unitary2 {
    type Output = PureState;

    fn mul(self, rhs: PureState) -> PureState {
        apply(&self, &rhs)
    }
}

/// `exp(iθσ_x) = [[cos θ, i sin θ], [i sin θ, cos θ]]`.
pub fn rot_x(theta: f64) -> Unitary2 {
    let (s, c) = math::sin_cos(theta);
    Unitary2 {
        m: [
            [Complex::new(c, 0.0), Complex::new(0.0, s)],
            [Complex::new(0.0, s), Complex::new(c, 0.0)],
        ],
    }
}

/// `exp(iφσ_z) = diag(e^{iφ}, e^{-iφ})`.
pub fn rot_z(phi: f64) -> Unitary2 {
    let (s, c) = math::sin_cos(phi);
    Unitary2 {
        m: [
            [Complex::new(c, s), ZERO],
            [ZERO, Complex::new(c, -s)],
        ],
    }
}

/// A normalized single-qubit pure state, stored as amplitudes on |0⟩, |1⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    amp: [Complex; 2],
}

impl PureState {
    pub const ZERO: PureState = PureState { amp: [ONE, ZERO] };
    pub const ONE: PureState = PureState { amp: [ZERO, ONE] };

    /// Normalizes `(a, b)`; rejects the zero vector and non-finite input.
    pub fn new(a: Complex, b: Complex) -> Result<Self> {
        let n2 = a.norm_sqr() + b.norm_sqr();
        if !n2.is_finite() {
            return Err(Error::OutOfRange {
                name: "state norm",
                value: n2,
                range: "finite",
            });
        }
        if n2 == 0.0 {
            return Err(Error::OutOfRange {
                name: "state norm",
                value: 0.0,
                range: "> 0",
            });
        }
        let inv = 1.0 / math::sqrt(n2);
        Ok(PureState {
            amp: [a * inv, b * inv],
        })
    }

    /// `cos(polar/2)|0⟩ + e^{i·azimuth} sin(polar/2)|1⟩`.
    pub fn from_bloch(polar: f64, azimuth: f64) -> Self {
        let (s, c) = math::sin_cos(0.5 * polar);
        let (sa, ca) = math::sin_cos(azimuth);
        PureState {
            amp: [Complex::new(c, 0.0), Complex::new(s * ca, s * sa)],
        }
    }

    /// `cos α|0⟩ - i sin α|1⟩`: the projector whose overlap with
    /// `rot_x(θ)|0⟩` is `cos(α + θ)`.
    pub fn measurement_at(alpha: f64) -> Self {
        let (s, c) = math::sin_cos(alpha);
        PureState {
            amp: [Complex::new(c, 0.0), Complex::new(0.0, -s)],
        }
    }

    pub fn amplitudes(&self) -> [Complex; 2] {
        self.amp
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.amp[0].norm_sqr() + self.amp[1].norm_sqr())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex {
        self.amp[0].conj() * other.amp[0] + self.amp[1].conj() * other.amp[1]
    }

    /// Multiplies every amplitude by `e^{iγ}`; no observable changes.
    pub fn with_global_phase(&self, gamma: f64) -> Self {
        let (s, c) = math::sin_cos(gamma);
        let p = Complex::new(c, s);
        PureState {
            amp: [self.amp[0] * p, self.amp[1] * p],
        }
    }

    /// Bloch vector `(x, y, z)`.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let [a, b] = self.amp;
        let ab = a.conj() * b;
        [2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()]
    }
}

pub fn apply(u: &Unitary2, s: &PureState) -> PureState {
    let m = &u.m;
    PureState {
        amp: [
            m[0][0] * s.amp[0] + m[0][1] * s.amp[1],
            m[1][0] * s.amp[0] + m[1][1] * s.amp[1],
        ],
    }
}

/// `|⟨meas|state⟩|²`, clamped into `[0, 1]` against rounding.
pub fn transition_prob(meas: &PureState, state: &PureState) -> f64 {
    meas.inner(state).norm_sqr().clamp(0.0, 1.0)
}
