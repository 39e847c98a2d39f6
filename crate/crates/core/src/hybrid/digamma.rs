use crate::math;
use crate::{Error, Result};

const SHIFT_TO: f64 = 8.0;

/// The digamma function ψ(x) = Γ'(x)/Γ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::OutOfRange {
            name: "digamma argument",
            value: x,
            range: "(0, inf)",
        });
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < SHIFT_TO {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli-number tail: B_{2k} / (2k x^{2k}).
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    Ok(acc + math::ln(x) - 0.5 / x - tail)
}
