//! Real-argument special functions used by the bound-state solver.
//!
//! Everything here is a pure function of its arguments. Evaluations of the
//! confluent hypergeometric functions return an [`FnEval`] so callers can see
//! how trustworthy a value is before they act on its sign.

mod gamma;
mod kummer;
mod tricomi;

pub use gamma::{digamma, gamma, log_gamma, rgamma, LogGamma};
pub use kummer::{kummer_m, kummer_m_scaled};
pub use tricomi::{tricomi_u, tricomi_u_da};

use thiserror::Error;

/// A function value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FnEval {
    pub value: f64,
    pub abs_err_estimate: f64,
    pub terms_used: usize,
}

impl FnEval {
    pub(crate) fn new(value: f64, abs_err_estimate: f64, terms_used: usize) -> Self {
        let err = if abs_err_estimate.is_finite() {
            abs_err_estimate.abs()
        } else {
            f64::MAX
        };
        FnEval {
            value,
            abs_err_estimate: err,
            terms_used: terms_used.max(1),
        }
    }

    /// Estimated relative error; infinite when the value is zero.
    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            f64::INFINITY
        } else {
            self.abs_err_estimate / self.value.abs()
        }
    }

    fn scaled(self, factor: f64) -> Self {
        FnEval::new(
            self.value * factor,
            self.abs_err_estimate * factor.abs(),
            self.terms_used,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("pole: {function} is singular at {arg}")]
    Pole { function: &'static str, arg: f64 },
    #[error("parameter pole: b = {b} is a non-positive integer")]
    ParameterPole { b: f64 },
    #[error("overflow: |x| = {x} exceeds the guard of {limit}")]
    Overflow { x: f64, limit: f64 },
    #[error("range: {function}({a}, {b}, {x}) is not representable in double precision")]
    Range {
        function: &'static str,
        a: f64,
        b: f64,
        x: f64,
    },
    #[error("domain: {function} requires {requirement}, got {arg}")]
    Domain {
        function: &'static str,
        requirement: &'static str,
        arg: f64,
    },
    #[error("no convergence in {function} after {terms} terms (partial value {partial}, error estimate {err_estimate})")]
    Convergence {
        function: &'static str,
        partial: f64,
        err_estimate: f64,
        terms: usize,
    },
}

pub(crate) fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}
