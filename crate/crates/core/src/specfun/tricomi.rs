//! Tricomi's confluent hypergeometric function `U(a, b; x)` for real
//! parameters and `x > 0`.
//!
//! Evaluation strategy, for `b >= 1` (smaller `b` goes through
//! `U(a,b;x) = x^{1-b} U(a-b+1, 2-b; x)`):
//!
//! * `a` or `a-b+1` a non-positive integer: the terminating polynomial.
//! * large `x`: the asymptotic series, accepted only when it converges to
//!   working precision before its terms start to grow.
//! * small `x`: the power series at `a` itself (two Kummer functions for
//!   non-integer `b`, the logarithmic series for integer `b`), falling back
//!   to Miller's algorithm when large positive `a` makes it cancel.
//! * otherwise `a` is shifted up by an integer to `a0 > max(0, b-1)`, where
//!   `U(a0)` and `U(a0+1)` come from Miller's backward recurrence normalized
//!   by `Σ (a)_n (a-b+1)_n / n! · U(a+n, b; x) = x^{-a}`. The three-term
//!   recurrence in `a` is then run downward, the stable direction for `U`
//!   as long as `a` stays above about `b - 1`. Below that, for large `b`,
//!   the unwanted solution can grow; the growth is measured and the power
//!   series is used instead when it is more accurate.

use super::gamma::{digamma, log_gamma};
use super::kummer::m_series;
use super::{is_nonpositive_integer, FnEval, SpecFunError};

const EPS: f64 = f64::EPSILON;
const SERIES_MAX_X: f64 = 0.5;
const SERIES_FALLBACK_MAX_X: f64 = 40.0;
const INTEGER_SNAP: f64 = 1e-8;
const MAX_SERIES_TERMS: usize = 20_000;
const MAX_MILLER_START: usize = 4_000_000;

/// Tricomi's `U(a, b; x)` for `x > 0`.
pub fn tricomi_u(a: f64, b: f64, x: f64) -> Result<FnEval, SpecFunError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain {
            function: "tricomi_u",
            requirement: "x > 0",
            arg: x,
        });
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(SpecFunError::Domain {
            function: "tricomi_u",
            requirement: "finite a and b",
            arg: if a.is_finite() { b } else { a },
        });
    }
    if a == 0.0 {
        return Ok(FnEval::new(1.0, 0.0, 1));
    }
    let v = if b < 1.0 {
        u_b_ge_one(a - b + 1.0, 2.0 - b, x)?.scaled(x.powf(1.0 - b))
    } else {
        u_b_ge_one(a, b, x)?
    };
    if !v.value.is_finite() {
        return Err(SpecFunError::Range {
            function: "tricomi_u",
            a,
            b,
            x,
        });
    }
    Ok(v)
}

/// `∂U/∂a` from a five-point central stencil.
///
/// The step is `h = max(1e-6, 1e-8 |a|)`. The reported error combines the
/// spread between the two- and four-point stencils with the propagated
/// evaluation error of the samples.
pub fn tricomi_u_da(a: f64, b: f64, x: f64) -> Result<FnEval, SpecFunError> {
    let h = (1e-8 * a.abs()).max(1e-6);
    let f = |da: f64| tricomi_u(a + da, b, x);
    let (m2, m1, p1, p2) = (f(-2.0 * h)?, f(-h)?, f(h)?, f(2.0 * h)?);
    let central = (p1.value - m1.value) / (2.0 * h);
    let five = (m2.value - 8.0 * m1.value + 8.0 * p1.value - p2.value) / (12.0 * h);
    let sample_err = (m2.abs_err_estimate
        + 8.0 * m1.abs_err_estimate
        + 8.0 * p1.abs_err_estimate
        + p2.abs_err_estimate)
        / (12.0 * h);
    let terms = m2.terms_used + m1.terms_used + p1.terms_used + p2.terms_used;
    Ok(FnEval::new(five, (five - central).abs() + sample_err, terms))
}

fn u_b_ge_one(a: f64, b: f64, x: f64) -> Result<FnEval, SpecFunError> {
    if a == 0.0 {
        return Ok(FnEval::new(1.0, 0.0, 1));
    }
    if is_nonpositive_integer(a) {
        if let Some(v) = polynomial(-a as usize, b, x) {
            return Ok(v);
        }
    }
    let p = a - b + 1.0;
    if is_nonpositive_integer(p) {
        if let Some(v) = polynomial(-p as usize, 2.0 - b, x) {
            return Ok(v.scaled(x.powf(1.0 - b)));
        }
    }
    if let Some(v) = asymptotic(a, b, x) {
        return Ok(v);
    }
    general(a, b, x)
}

/// `U(-m, b; x) = (-1)^m Σ_s C(m,s) (b+s)_{m-s} (-x)^s`.
///
/// Returns `None` when cancellation makes the sum unreliable.
fn polynomial(m: usize, b: f64, x: f64) -> Option<FnEval> {
    if m > 400 {
        return None;
    }
    // poch[s] = (b+s)_{m-s}
    let mut poch = vec![1.0_f64; m + 1];
    for s in (0..m).rev() {
        poch[s] = poch[s + 1] * (b + s as f64);
    }
    let mut binom = 1.0_f64;
    let mut xpow = 1.0_f64;
    let mut sum = 0.0_f64;
    let mut abs_sum = 0.0_f64;
    for (s, p) in poch.iter().enumerate() {
        let t = binom * p * xpow;
        sum += t;
        abs_sum += t.abs();
        binom *= (m - s) as f64 / (s + 1) as f64;
        xpow *= -x;
    }
    if m % 2 == 1 {
        sum = -sum;
    }
    let err = EPS * abs_sum * (m as f64 + 2.0);
    if !sum.is_finite() || err > 1e-12 * sum.abs() {
        return None;
    }
    Some(FnEval::new(sum, err, m + 1))
}

/// `x^{-a} Σ (a)_k (a-b+1)_k / k! · (-x)^{-k}`, truncated once the terms
/// fall below working precision while still decreasing.
fn asymptotic(a: f64, b: f64, x: f64) -> Option<FnEval> {
    if x < 2.0 {
        return None;
    }
    let p = a - b + 1.0;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut max_term = 1.0_f64;
    for k in 0..400 {
        let kf = k as f64;
        let ratio = (a + kf) * (p + kf) / ((kf + 1.0) * x);
        if ratio.abs() >= 1.0 {
            return None;
        }
        term *= -ratio;
        sum += term;
        max_term = max_term.max(term.abs());
        if term.abs() <= 1e-17 * sum.abs() {
            let err = term.abs() + EPS * max_term * (kf + 2.0).sqrt();
            if err > 1e-14 * sum.abs() {
                return None;
            }
            let scale = (-a * x.ln()).exp();
            if !scale.is_finite() || scale == 0.0 {
                return None;
            }
            let value = sum * scale;
            return Some(FnEval::new(
                value,
                (err + 2.0 * EPS * (a * x.ln()).abs() * sum.abs()) * scale,
                k + 1,
            ));
        }
    }
    None
}

fn general(a: f64, b: f64, x: f64) -> Result<FnEval, SpecFunError> {
    let nearest = b.round();
    let snap = (b - nearest).abs() <= INTEGER_SNAP;
    let b_eff = if snap { nearest } else { b };

    let mut result = if x < SERIES_MAX_X {
        let series = series_u(a, b_eff, x)?;
        // Large positive a makes the series cancel; Miller needs no shift there.
        if series.rel_err() > 1e-11 && a > (b_eff - 1.0).max(0.0) && x >= 1e-3 {
            match miller(a, b_eff, x) {
                Ok([m, ..]) if m.abs_err_estimate < series.abs_err_estimate => m,
                _ => series,
            }
        } else {
            series
        }
    } else {
        let mut k = 0usize;
        let mut a0 = a;
        if a0 <= b_eff - 1.0 || a0 <= 0.0 {
            let shift = ((b_eff - 1.0).max(0.0) - a).floor() + 1.0;
            k = shift as usize;
            a0 = a + shift;
        }
        let [u0, u1, u2] = miller(a0, b_eff, x)?;
        let recurred = if k == 0 {
            u0
        } else {
            // Two starting pairs; their spread measures how much the
            // recurrence amplified the starting error.
            let near = downward(a0, b_eff, x, u0, u1, k);
            let far = downward(a0 + 1.0, b_eff, x, u1, u2, k + 1);
            let spread = (near.value - far.value).abs();
            // Both pairs can be accurate while the recurrence itself is
            // unstable (large b, a below b - 1). Perturbing one start value
            // measures the growth of the unwanted solution directly.
            let delta = 1e-9;
            let bumped = downward(a0, b_eff, x, u0, u1.scaled(1.0 + delta), k);
            let growth = (bumped.value - near.value).abs() / delta;
            let injected = u0.rel_err().max(u1.rel_err()) + EPS * (k as f64 + 1.0);
            FnEval::new(
                near.value,
                near.abs_err_estimate + spread + growth * injected,
                near.terms_used + far.terms_used,
            )
        };
        if recurred.rel_err() > 1e-12 && x <= SERIES_FALLBACK_MAX_X {
            match series_u(a, b_eff, x) {
                Ok(s) if s.abs_err_estimate < recurred.abs_err_estimate => s,
                _ => recurred,
            }
        } else {
            recurred
        }
    };

    if snap && b != nearest {
        // ∂U/∂b is of order |U| (|ln x| + ln(|a| + b) + 1).
        let slope = result.value.abs() * (x.ln().abs() + (a.abs() + b).ln().abs() + 1.0);
        result.abs_err_estimate += (b - nearest).abs() * slope;
    }
    Ok(result)
}

/// Run `U(c-1) = (2c + x - b) U(c) - c (c-b+1) U(c+1)` for `steps` steps
/// starting from `U(a0)`, `U(a0+1)`.
fn downward(a0: f64, b: f64, x: f64, u0: FnEval, u1: FnEval, steps: usize) -> FnEval {
    let (mut ua, mut ub) = (u0.value, u1.value);
    // Downward is the stable direction, so errors stay relative to the
    // size of the terms rather than compounding.
    let mut rel = u0.rel_err().max(u1.rel_err());
    let mut err = u0.abs_err_estimate;
    let mut c = a0;
    for _ in 0..steps {
        let t1 = (2.0 * c + x - b) * ua;
        let t2 = c * (c - b + 1.0) * ub;
        let next = t1 - t2;
        rel += EPS;
        err = rel * (t1.abs() + t2.abs());
        ub = ua;
        ua = next;
        c -= 1.0;
    }
    FnEval::new(ua, err, u0.terms_used + u1.terms_used + steps)
}

/// Power-series evaluation, `b >= 1`, any real `a`.
fn series_u(a: f64, b: f64, x: f64) -> Result<FnEval, SpecFunError> {
    if b == b.round() {
        log_series(a, b as usize - 1, x)
    } else {
        two_m(a, b, x)
    }
}

/// `Γ(p)/Γ(q)` as (log magnitude, sign), or `None` when `1/Γ(q)` vanishes.
fn gamma_ratio(p: f64, q: f64) -> Result<Option<(f64, f64)>, SpecFunError> {
    if is_nonpositive_integer(q) {
        return Ok(None);
    }
    let gp = log_gamma(p)?;
    let gq = log_gamma(q)?;
    Ok(Some((gp.value - gq.value, gp.sign * gq.sign)))
}

/// `Γ(1-b)/Γ(a-b+1) M(a,b;x) + Γ(b-1)/Γ(a) x^{1-b} M(a-b+1, 2-b; x)`.
fn two_m(a: f64, b: f64, x: f64) -> Result<FnEval, SpecFunError> {
    let mut value = 0.0;
    let mut err = 0.0;
    let mut terms = 0;
    if let Some((log_c, sign)) = gamma_ratio(1.0 - b, a - b + 1.0)? {
        let m = m_series(a, b, x)?;
        let t = sign * log_c.exp() * m.sum;
        let m_rel = EPS * m.max_term / m.sum.abs() * (4.0 + (m.terms as f64).sqrt());
        value += t;
        err += t.abs() * (m_rel + EPS * (2.0 + log_c.abs())) + EPS * m.max_term * log_c.exp();
        terms += m.terms;
    }
    if let Some((log_c, sign)) = gamma_ratio(b - 1.0, a)? {
        let log_c = log_c + (1.0 - b) * x.ln();
        let m = m_series(a - b + 1.0, 2.0 - b, x)?;
        let t = sign * log_c.exp() * m.sum;
        let m_rel = EPS * m.max_term / m.sum.abs() * (4.0 + (m.terms as f64).sqrt());
        value += t;
        err += t.abs() * (m_rel + EPS * (2.0 + log_c.abs())) + EPS * m.max_term * log_c.exp();
        terms += m.terms;
    }
    Ok(FnEval::new(value, err + EPS * value.abs(), terms))
}

/// Logarithmic series for integer `b = n + 1`:
///
/// `U = (-1)^{n+1}/(n! Γ(a-n)) Σ_k (a)_k/((n+1)_k k!) x^k [ln x + ψ(a+k) - ψ(1+k) - ψ(n+k+1)]
///    + 1/Γ(a) Σ_{k=1}^{n} (k-1)! (1-a+k)_{n-k}/(n-k)! x^{-k}`.
///
/// Where `a + k <= 0` the pole of ψ is cancelled against the zero of
/// `1/Γ(a-n)` through `ψ(z) = ψ(1-z) - π cot(πz)`, which contributes
/// `cos(πa) Γ(1+n-a) / n!` per unit coefficient.
fn log_series(a: f64, n: usize, x: f64) -> Result<FnEval, SpecFunError> {
    let nf = n as f64;
    let lnx = x.ln();
    let euler = 0.577_215_664_901_532_9_f64;
    let lg_n1 = log_gamma(nf + 1.0)?.value;

    // c1 = (-1)^{n+1} / (n! Γ(a-n))
    let parity = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
    let c1 = if is_nonpositive_integer(a - nf) {
        0.0
    } else {
        let g = log_gamma(a - nf)?;
        parity * g.sign * (-(lg_n1 + g.value)).exp()
    };
    // Only needed where a + k <= 0, which implies a < 1 + n.
    let reflected = if a < 1.0 + nf {
        super::gamma::cos_pi(a) * (log_gamma(1.0 + nf - a)?.value - lg_n1).exp()
    } else {
        0.0
    };

    let mut psi_1 = -euler;
    let mut psi_n1 = -euler + (1..=n).map(|j| 1.0 / j as f64).sum::<f64>();
    let mut coef = 1.0_f64;
    let mut s1 = 0.0_f64;
    let mut s1_abs = 0.0_f64;
    let mut terms = 0;
    let min_k = if a < 0.0 { (-a).ceil() as usize + 1 } else { 0 };
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        let z = a + kf;
        let t = if z > 0.0 {
            c1 * coef * (lnx + digamma(z)? - psi_1 - psi_n1)
        } else {
            let base = if c1 == 0.0 {
                0.0
            } else {
                c1 * coef * (lnx + digamma(1.0 - z)? - psi_1 - psi_n1)
            };
            base + coef * reflected
        };
        s1 += t;
        s1_abs += t.abs();
        terms = k + 1;
        if !s1.is_finite() {
            return Err(SpecFunError::Overflow { x, limit: 700.0 });
        }
        if coef == 0.0 && k >= min_k {
            break;
        }
        if k > min_k + 2 && kf > x && t.abs() <= 1e-17 * s1_abs {
            break;
        }
        coef *= z * x / ((nf + 1.0 + kf) * (kf + 1.0));
        psi_1 += 1.0 / (kf + 1.0);
        psi_n1 += 1.0 / (nf + kf + 1.0);
        if k + 1 == MAX_SERIES_TERMS {
            return Err(SpecFunError::Convergence {
                function: "tricomi_u",
                partial: s1,
                err_estimate: t.abs(),
                terms,
            });
        }
    }

    // Finite part, weighted by 1/Γ(a).
    let mut s2 = 0.0_f64;
    let mut s2_abs = 0.0_f64;
    if n > 0 && !is_nonpositive_integer(a) {
        let g = log_gamma(a)?;
        for k in 1..=n {
            let mut poch = 1.0;
            for j in 0..(n - k) {
                poch *= 1.0 - a + k as f64 + j as f64;
            }
            let log_fact = log_gamma(k as f64)?.value - log_gamma((n - k) as f64 + 1.0)?.value;
            let t = g.sign * poch * (log_fact - g.value - k as f64 * lnx).exp();
            s2 += t;
            s2_abs += t.abs();
        }
    }

    let value = s1 + s2;
    let err = EPS
        * (s1_abs * (4.0 + (terms as f64).sqrt() + lg_n1)
            + s2_abs * (nf + 4.0)
            + value.abs());
    Ok(FnEval::new(value, err, terms + n))
}

/// Miller's backward recurrence for `U(a0)` and `U(a0+1)`, `a0 > max(0, b-1)`.
///
/// Works on `z_n = w_n U(a0+n)` with `w_n = (a0)_n (a0-b+1)_n / n!`, for
/// which the recurrence reads
/// `z_{n-1} = -n / ((a0+n-1)(p+n-1)) · [(b - 2(a0+n) - x) z_n + (n+1) z_{n+1}]`
/// and the normalization is simply `Σ z_n = x^{-a0}`.
fn miller(a0: f64, b: f64, x: f64) -> Result<[FnEval; 3], SpecFunError> {
    let p = a0 - b + 1.0;
    let run = |n_start: usize| -> (f64, f64, f64) {
        let mut z_next2 = 0.0_f64;
        let mut z_next = 0.0_f64;
        let mut z = 1.0_f64;
        let mut sum = 1.0_f64;
        for n in (1..=n_start).rev() {
            let nf = n as f64;
            let z_prev = -nf / ((a0 + nf - 1.0) * (p + nf - 1.0))
                * ((b - 2.0 * (a0 + nf) - x) * z + (nf + 1.0) * z_next);
            sum += z_prev;
            z_next2 = z_next;
            z_next = z;
            z = z_prev;
            if z.abs() > 1e250 {
                z *= 1e-250;
                z_next *= 1e-250;
                z_next2 *= 1e-250;
                sum *= 1e-250;
            }
        }
        (z / sum, z_next / sum, z_next2 / sum)
    };

    let log_scale = -a0 * x.ln();
    let mut n_start = ((600.0 / x) as usize).max(64);
    let mut prev = run(n_start);
    let mut prev_change = f64::INFINITY;
    loop {
        n_start *= 2;
        let cur = run(n_start);
        let diff0 = (cur.0 - prev.0).abs();
        let diff1 = (cur.1 - prev.1).abs();
        let change = (diff0 / cur.0.abs()).max(diff1 / cur.1.abs());
        // Either converged, or stalled on the rounding floor of the sum.
        let settled = change <= 1e-13 || (change <= 1e-10 && change >= 0.5 * prev_change);
        if settled {
            let scale = log_scale.exp();
            // y_n = z_n / w_n
            let u0 = cur.0 * scale;
            let u1 = cur.1 / (a0 * p) * scale;
            let u2 = cur.2 * 2.0 / (a0 * (a0 + 1.0) * p * (p + 1.0)) * scale;
            let rel = change + EPS * (4.0 + log_scale.abs());
            return Ok([u0, u1, u2].map(|u| FnEval::new(u, rel * u.abs(), n_start)));
        }
        if n_start > MAX_MILLER_START {
            return Err(SpecFunError::Convergence {
                function: "tricomi_u",
                partial: cur.0 * log_scale.exp(),
                err_estimate: diff0 * log_scale.exp(),
                terms: n_start,
            });
        }
        prev = cur;
        prev_change = change;
    }
}
