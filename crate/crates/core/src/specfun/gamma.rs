use std::f64::consts::PI;

use super::{is_nonpositive_integer, SpecFunError};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)] // published digits, kept verbatim
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln|Γ(x)|` and the sign of `Γ(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGamma {
    pub value: f64,
    pub sign: f64,
}

/// `sin(πx)` with exact zeros at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    let (r, sign) = if r >= 1.0 { (r - 1.0, -1.0) } else { (r, 1.0) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

pub(crate) fn cos_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    // cos(πr) = sin(π(r + 1/2)); reduce before the shift.
    sin_pi(r + 0.5)
}

fn lanczos_ln_gamma(x: f64) -> f64 {
    debug_assert!(x >= 0.5);
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `ln|Γ(x)|` together with the sign of `Γ(x)`.
pub fn log_gamma(x: f64) -> Result<LogGamma, SpecFunError> {
    if x.is_nan() || is_nonpositive_integer(x) {
        return Err(SpecFunError::Pole {
            function: "log_gamma",
            arg: x,
        });
    }
    if x == 1.0 || x == 2.0 {
        return Ok(LogGamma {
            value: 0.0,
            sign: 1.0,
        });
    }
    if x >= 0.5 {
        return Ok(LogGamma {
            value: lanczos_ln_gamma(x),
            sign: 1.0,
        });
    }
    // Reflection: Γ(x)Γ(1-x) = π / sin(πx), with Γ(1-x) > 0 here.
    let s = sin_pi(x);
    Ok(LogGamma {
        value: PI.ln() - s.abs().ln() - lanczos_ln_gamma(1.0 - x),
        sign: s.signum(),
    })
}

pub fn gamma(x: f64) -> Result<f64, SpecFunError> {
    let lg = log_gamma(x)?;
    Ok(lg.sign * lg.value.exp())
}

/// `1/Γ(x)`, which is entire; returns exactly zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    match log_gamma(x) {
        Ok(lg) => lg.sign * (-lg.value).exp(),
        Err(_) => 0.0,
    }
}

/// Digamma `ψ(x) = Γ'(x)/Γ(x)`.
pub fn digamma(x: f64) -> Result<f64, SpecFunError> {
    if x.is_nan() || is_nonpositive_integer(x) {
        return Err(SpecFunError::Pole {
            function: "digamma",
            arg: x,
        });
    }
    if x < 0.0 {
        // ψ(x) = ψ(1-x) - π cot(πx)
        let cot = cos_pi(x) / sin_pi(x);
        return Ok(digamma_positive(1.0 - x) - PI * cot);
    }
    Ok(digamma_positive(x))
}

fn digamma_positive(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli tail: B_{2k} / (2k x^{2k}), k = 1..7
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    acc + x.ln() - 0.5 / x - tail
}
