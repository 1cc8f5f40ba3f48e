use super::{is_nonpositive_integer, FnEval, SpecFunError};

const MAX_TERMS: usize = 20_000;
const X_GUARD: f64 = 700.0;

pub(crate) struct SeriesSum {
    pub sum: f64,
    pub max_term: f64,
    pub terms: usize,
}

/// Partial sums of Σ (a)_k / (b)_k · x^k / k!.
pub(crate) fn m_series(a: f64, b: f64, x: f64) -> Result<SeriesSum, SpecFunError> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut max_term = 1.0_f64;
    // Terms may pass through a minimum near k ≈ -a before growing again.
    let min_k = if a < 0.0 { (-a).ceil() as usize + 1 } else { 0 };
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * x / ((b + kf) * (kf + 1.0));
        if term == 0.0 {
            return Ok(SeriesSum {
                sum,
                max_term,
                terms: k + 1,
            });
        }
        sum += term;
        if !sum.is_finite() {
            return Err(SpecFunError::Overflow { x, limit: X_GUARD });
        }
        max_term = max_term.max(term.abs());
        if k >= min_k && term.abs() <= 1e-17 * sum.abs() {
            return Ok(SeriesSum {
                sum,
                max_term,
                terms: k + 2,
            });
        }
    }
    Err(SpecFunError::Convergence {
        function: "kummer_m",
        partial: sum,
        err_estimate: term.abs(),
        terms: MAX_TERMS,
    })
}

/// `a` is carried as hi + lo so that a rounded `b - a` does not leak into
/// ill-conditioned sums.
fn series_eval(a: Dd, b: f64, x: f64) -> Result<FnEval, SpecFunError> {
    let s = m_series(a.0, b, x)?;
    let err = f64::EPSILON * s.max_term * (4.0 + (s.terms as f64).sqrt());
    if err <= 1e-14 * s.sum.abs() {
        return Ok(FnEval::new(s.sum, err, s.terms));
    }
    // Cancellation: redo the sum in double-double arithmetic.
    let (sum, terms) = m_series_dd(a, b, x, s.terms);
    let err = DD_EPS * s.max_term * (8.0 + terms as f64) + f64::EPSILON * sum.abs();
    Ok(FnEval::new(sum, err, terms))
}

const DD_EPS: f64 = 4.93e-32;

/// Unevaluated sum hi + lo with |lo| ≤ ulp(hi)/2.
#[derive(Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn from_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd(s, (a - (s - bb)) + (b - bb))
    }

    fn add(self, o: Dd) -> Dd {
        let Dd(s, e) = Dd::from_sum(self.0, o.0);
        let e = e + self.1 + o.1;
        let hi = s + e;
        Dd(hi, e - (hi - s))
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p) + (self.0 * o.1 + self.1 * o.0);
        let hi = p + e;
        Dd(hi, e - (hi - p))
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.0 / o.0;
        let r = self.add(o.mul(Dd(-q1, 0.0)));
        let q2 = r.0 / o.0;
        let r = r.add(o.mul(Dd(-q2, 0.0)));
        let q3 = r.0 / o.0;
        Dd::from_sum(q1, q2).add(Dd(q3, 0.0))
    }
}

fn m_series_dd(a: Dd, b: f64, x: f64, terms: usize) -> (f64, usize) {
    let mut term = Dd(1.0, 0.0);
    let mut sum = Dd(1.0, 0.0);
    let xd = Dd(x, 0.0);
    let mut used = 1;
    for k in 0..terms.max(1) + 8 {
        let kf = k as f64;
        let num = a.add(Dd(kf, 0.0)).mul(xd);
        let den = Dd::from_sum(b, kf).mul(Dd(kf + 1.0, 0.0));
        term = term.mul(num).div(den);
        sum = sum.add(term);
        used = k + 2;
        if term.0 == 0.0 {
            break;
        }
    }
    (sum.0 + sum.1, used)
}

fn check_args(b: f64, x: f64) -> Result<(), SpecFunError> {
    if is_nonpositive_integer(b) {
        return Err(SpecFunError::ParameterPole { b });
    }
    if x.is_nan() || x.abs() > X_GUARD {
        return Err(SpecFunError::Overflow { x, limit: X_GUARD });
    }
    Ok(())
}

/// Kummer's function `M(a, b; x) = Σ (a)_k/(b)_k x^k/k!`.
///
/// The direct series and the Kummer-transformed form `e^x M(b-a, b; -x)`
/// are both summed when the direct series shows cancellation; the one with
/// the smaller error estimate wins.
pub fn kummer_m(a: f64, b: f64, x: f64) -> Result<FnEval, SpecFunError> {
    check_args(b, x)?;
    if x == 0.0 {
        return Ok(FnEval::new(1.0, 0.0, 1));
    }
    let direct = series_eval(Dd(a, 0.0), b, x)?;
    if direct.abs_err_estimate <= 1e-15 * direct.value.abs() {
        return Ok(direct);
    }
    let transformed = series_eval(Dd::from_sum(b, -a), b, -x).map(|v| v.scaled(x.exp()));
    match transformed {
        Ok(t) if t.abs_err_estimate < direct.abs_err_estimate => Ok(t),
        _ => Ok(direct),
    }
}

/// `e^{-x} M(a, b; x)`, which stays representable when `M` itself does not.
pub fn kummer_m_scaled(a: f64, b: f64, x: f64) -> Result<FnEval, SpecFunError> {
    check_args(b, x)?;
    if x == 0.0 {
        return Ok(FnEval::new(1.0, 0.0, 1));
    }
    let via_transform = series_eval(Dd::from_sum(b, -a), b, -x)?;
    if via_transform.abs_err_estimate <= 1e-15 * via_transform.value.abs() {
        return Ok(via_transform);
    }
    match series_eval(Dd(a, 0.0), b, x).map(|v| v.scaled((-x).exp())) {
        Ok(d) if d.abs_err_estimate < via_transform.abs_err_estimate => Ok(d),
        _ => Ok(via_transform),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_values() {
        assert_eq!(kummer_m(0.3, 1.7, 0.0).unwrap().value, 1.0);
        let e = kummer_m(1.0, 1.0, 1.0).unwrap();
        assert!((e.value - std::f64::consts::E).abs() < 1e-15);
        // M(a, a; x) = e^x for negative x too
        let v = kummer_m(2.5, 2.5, -3.0).unwrap();
        assert!((v.value - (-3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn terminating_series() {
        // M(-2, 1; x) = 1 - 2x + x²/2 (Laguerre L_2)
        let x = 1.7;
        let v = kummer_m(-2.0, 1.0, x).unwrap();
        assert!((v.value - (1.0 - 2.0 * x + x * x / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn parameter_pole_and_guard() {
        assert!(matches!(
            kummer_m(1.0, -2.0, 0.5),
            Err(SpecFunError::ParameterPole { .. })
        ));
        assert!(matches!(
            kummer_m(1.0, 2.0, 701.0),
            Err(SpecFunError::Overflow { .. })
        ));
    }

    #[test]
    fn scaled_matches_unscaled() {
        let x = 40.0;
        let m = kummer_m(1.3, 2.2, x).unwrap();
        let s = kummer_m_scaled(1.3, 2.2, x).unwrap();
        assert!((m.value * (-x).exp() / s.value - 1.0).abs() < 1e-12);
        // Far beyond where e^x M overflows, the scaled value is still finite.
        let big = kummer_m_scaled(1.0, 1.0, 690.0).unwrap();
        assert!((big.value - 1.0).abs() < 1e-14);
    }
}
