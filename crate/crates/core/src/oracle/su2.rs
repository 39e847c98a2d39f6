//! SU(2) elements as unit quaternions `a·I + i(b σ_x + c σ_y + d σ_z)`.

use crate::qubit::{Complex, PureState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion { a: 1.0, b: 0.0, c: 0.0, d: 0.0 };

    /// `exp(iθσ_x)`.
    pub fn x_rotation(theta: f64) -> Self {
        let (s, c) = libm::sincos(theta);
        Quaternion { a: c, b: s, c: 0.0, d: 0.0 }
    }

    /// `exp(iφσ_z)`.
    pub fn z_rotation(phi: f64) -> Self {
        let (s, c) = libm::sincos(phi);
        Quaternion { a: c, b: 0.0, c: 0.0, d: s }
    }

    /// `(a₁ + i v₁·σ)(a₂ + i v₂·σ) = a₁a₂ − v₁·v₂ + i(a₁v₂ + a₂v₁ − v₁×v₂)·σ`.
    pub fn compose(&self, o: &Quaternion) -> Quaternion {
        Quaternion {
            a: self.a * o.a - self.b * o.b - self.c * o.c - self.d * o.d,
            b: self.a * o.b + o.a * self.b - (self.c * o.d - self.d * o.c),
            c: self.a * o.c + o.a * self.c - (self.d * o.b - self.b * o.d),
            d: self.a * o.d + o.a * self.d - (self.b * o.c - self.c * o.b),
        }
    }

    /// Matrix `[[a + id, c + ib], [−c + ib, a − id]]`.
    pub fn matrix(&self) -> [[Complex; 2]; 2] {
        [
            [Complex::new(self.a, self.d), Complex::new(self.c, self.b)],
            [Complex::new(-self.c, self.b), Complex::new(self.a, -self.d)],
        ]
    }

    /// `|⟨meas|U|prep⟩|²`.
    pub fn transition(&self, prep: &PureState, meas: &PureState) -> f64 {
        let u = self.matrix();
        let p = prep.amplitudes();
        let m = meas.amplitudes();
        let out0 = u[0][0] * p[0] + u[0][1] * p[1];
        let out1 = u[1][0] * p[0] + u[1][1] * p[1];
        (m[0].conj() * out0 + m[1].conj() * out1).norm_sqr()
    }
}
