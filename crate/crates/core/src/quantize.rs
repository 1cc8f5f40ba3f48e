//! Exact bound states: roots in E of the wall condition
//! `U(ā, b̄; y_a) = 0`, and the corresponding radial wavefunctions.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::Branch;
use crate::model::DerivedParams;
use crate::oracle::{self, GridSpec, OracleError};
use crate::quad;
use crate::specfun::{tricomi_u, FnEval, SpecFunError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("e_max: {e_max} must be finite and > 0")]
    InvalidRange { e_max: f64 },
    #[error(
        "suspected missed root in channel (ell = {ell}, s = {s}): oracle counts {expected_min}..={expected_max} levels below {e_max}, scan found {found}"
    )]
    SuspectedMissedRoot {
        ell: i64,
        s: i8,
        e_max: f64,
        expected_min: usize,
        expected_max: usize,
        found: usize,
    },
    #[error("level n = {n} has no sample grid: r_max = {r_max} must exceed r_a = {r_a}")]
    InvalidProfile { n: usize, r_max: f64, r_a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Case1,
    Case2,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Exact, Method::Case1, Method::Case2, Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Case1 => "case1",
            Method::Case2 => "case2",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method '{s}' (expected exact, case1, case2, oracle)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLevel {
    pub n: usize,
    pub ell: i64,
    pub s: i8,
    pub energy: f64,
    pub method: Method,
    pub branch: Option<Branch>,
    /// |U| at the accepted energy (exact method), otherwise 0.
    pub residual: f64,
    /// Largest |U| at the two scan points that bracketed the root.
    pub residual_scale: f64,
    /// Final bisection width in energy.
    pub bracket_width: f64,
}

/// U(ā, b̄; y_a) with a flag for evaluations whose sign cannot be trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub eval: FnEval,
    /// Error estimate above 10% of |value|.
    pub flagged: bool,
}

impl Residual {
    pub fn value(&self) -> f64 {
        self.eval.value
    }
}

fn residual_at_a(a_bar: f64, dp: &DerivedParams) -> Result<Residual, SolveError> {
    let eval = tricomi_u(a_bar, dp.b_bar(), dp.y_a)?;
    let flagged = eval.abs_err_estimate > 0.1 * eval.value.abs();
    if flagged {
        log::debug!(
            "residual at a = {a_bar}: |U| = {:.3e} with error estimate {:.3e}",
            eval.value.abs(),
            eval.abs_err_estimate
        );
    }
    Ok(Residual { eval, flagged })
}

/// The wall condition evaluated at energy `energy`.
pub fn quantization_residual(energy: f64, dp: &DerivedParams) -> Result<Residual, SolveError> {
    residual_at_a(dp.a_bar(energy), dp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchControls {
    /// Scan step in ā (equivalently in τ/(2mω)).
    pub a_step: f64,
    /// Bisection stops at this width relative to max(|E|, ω).
    pub rel_tol: f64,
    /// Nodes of the oracle grid used to verify the root count; `None` skips it.
    pub verify_nodes: Option<usize>,
    /// How many times the scan step may be halved after a count mismatch.
    pub max_refinements: usize,
}

impl Default for SearchControls {
    fn default() -> Self {
        SearchControls {
            a_step: 0.05,
            rel_tol: 1e-12,
            verify_nodes: Some(20_000),
            max_refinements: 3,
        }
    }
}

/// Lowest energy the scan considers: where ā = b̄.
pub fn scan_floor(dp: &DerivedParams) -> f64 {
    dp.energy_from_a_bar(dp.b_bar())
}

/// All exact levels of one channel with energy below `e_max`.
pub fn solve_channel(
    dp: &DerivedParams,
    e_max: f64,
    controls: &SearchControls,
) -> Result<Vec<EnergyLevel>, SolveError> {
    if !(e_max > 0.0) || !e_max.is_finite() {
        return Err(SolveError::InvalidRange { e_max });
    }
    let mut step = controls.a_step;
    let mut attempt = 0;
    loop {
        let levels = scan(dp, e_max, step, controls.rel_tol)?;
        let Some(nodes) = controls.verify_nodes else {
            return Ok(levels);
        };
        let grid = GridSpec::for_energy(dp, e_max, nodes)?;
        let delta = 1e-3 * e_max.abs().max(dp.omega_ac);
        let expected_min = oracle::sturm_count(dp, &grid, e_max - delta);
        let expected_max = oracle::sturm_count(dp, &grid, e_max + delta);
        let found = levels.len();
        if (expected_min..=expected_max).contains(&found) {
            return Ok(levels);
        }
        if attempt == controls.max_refinements {
            return Err(SolveError::SuspectedMissedRoot {
                ell: dp.channel.ell,
                s: dp.channel.s.as_i8(),
                e_max,
                expected_min,
                expected_max,
                found,
            });
        }
        attempt += 1;
        step *= 0.5;
        log::warn!(
            "channel (ell = {}, s = {}): oracle expects {expected_min}..={expected_max} levels, scan found {found}; retrying with step {step}",
            dp.channel.ell,
            dp.channel.s
        );
    }
}

fn scan(
    dp: &DerivedParams,
    e_max: f64,
    step: f64,
    rel_tol: f64,
) -> Result<Vec<EnergyLevel>, SolveError> {
    let a_top = dp.b_bar();
    let a_min = dp.a_bar(e_max);
    let mut levels = Vec::new();
    if a_min >= a_top {
        return Ok(levels);
    }
    let steps = ((a_top - a_min) / step).ceil() as usize;
    let mut prev_a = a_top;
    let mut prev = residual_at_a(prev_a, dp)?;
    for k in 1..=steps {
        let a = (a_top - k as f64 * step).max(a_min);
        let cur = residual_at_a(a, dp)?;
        if cur.value() == 0.0 {
            levels.push(make_level(dp, levels.len(), a, 0.0, cur, prev.value().abs()));
        } else if prev.value() != 0.0 && prev.value().signum() != cur.value().signum() {
            let level = bisect(dp, levels.len(), prev_a, prev, a, cur, rel_tol)?;
            levels.push(level);
        }
        prev_a = a;
        prev = cur;
    }
    Ok(levels)
}

/// Root between `a_hi` (larger ā, lower E) and `a_lo`.
fn bisect(
    dp: &DerivedParams,
    n: usize,
    mut a_hi: f64,
    hi: Residual,
    mut a_lo: f64,
    lo: Residual,
    rel_tol: f64,
) -> Result<EnergyLevel, SolveError> {
    let scale = hi.value().abs().max(lo.value().abs());
    let hi_sign = hi.value().signum();
    let mut best = if hi.value().abs() < lo.value().abs() {
        (a_hi, hi)
    } else {
        (a_lo, lo)
    };
    loop {
        let mid = 0.5 * (a_hi + a_lo);
        let width = dp.omega_ac * (a_hi - a_lo);
        let e_mid = dp.energy_from_a_bar(mid);
        if width <= rel_tol * e_mid.abs().max(dp.omega_ac) || mid == a_hi || mid == a_lo {
            let r = residual_at_a(mid, dp)?;
            if r.value().abs() <= best.1.value().abs() {
                best = (mid, r);
            }
            return Ok(make_level(dp, n, mid, width, best.1, scale));
        }
        let r = residual_at_a(mid, dp)?;
        if r.value() == 0.0 {
            return Ok(make_level(dp, n, mid, width, r, scale));
        }
        if r.value().abs() < best.1.value().abs() {
            best = (mid, r);
        }
        if r.value().signum() == hi_sign {
            a_hi = mid;
        } else {
            a_lo = mid;
        }
    }
}

fn make_level(
    dp: &DerivedParams,
    n: usize,
    a_bar: f64,
    width: f64,
    r: Residual,
    scale: f64,
) -> EnergyLevel {
    EnergyLevel {
        n,
        ell: dp.channel.ell,
        s: dp.channel.s.as_i8(),
        energy: dp.energy_from_a_bar(a_bar),
        method: Method::Exact,
        branch: None,
        residual: r.value().abs(),
        residual_scale: scale,
        bracket_width: width,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// ∫|f|² 2πr dr of the normalized samples, recomputed on an independent panel set.
    pub norm: f64,
    /// Probability of finding the particle at r > r_b.
    pub mass_beyond_rb: f64,
    /// Share of the normalization integral attributed to the Gaussian tail.
    pub tail_fraction: f64,
    pub node_count: usize,
}

/// Unnormalized f(y) = e^{−y/2} y^{|γ|/2} U(ā, b̄; y), relative to `ln_ref`.
struct Profile<'a> {
    dp: &'a DerivedParams,
    a_bar: f64,
    ln_ref: f64,
}

impl Profile<'_> {
    fn value(&self, y: f64) -> Result<f64, SolveError> {
        let u = tricomi_u(self.a_bar, self.dp.b_bar(), y)?.value;
        if u == 0.0 {
            return Ok(0.0);
        }
        let ln = -0.5 * y + 0.5 * self.dp.gamma.abs() * y.ln() + u.abs().ln() - self.ln_ref;
        Ok(u.signum() * ln.exp())
    }

    fn ln_abs(&self, y: f64) -> Result<f64, SolveError> {
        let u = tricomi_u(self.a_bar, self.dp.b_bar(), y)?.value;
        Ok(-0.5 * y + 0.5 * self.dp.gamma.abs() * y.ln() + u.abs().ln())
    }
}

/// Panel edges in y from `y0` to `y1`: geometric near the origin, at most
/// `w` wide elsewhere.
fn panel_edges(y0: f64, y1: f64, w: f64) -> Vec<f64> {
    let mut edges = vec![y0];
    let mut y = y0;
    while y < y1 {
        y = (y + w.min(0.5 * y)).min(y1);
        edges.push(y);
    }
    edges
}

/// Normalized radial wavefunction of an exact level, sampled on a geometric
/// grid of `n_samples` radii in `[r_a, r_max]`.
pub fn wavefunction(
    level: &EnergyLevel,
    dp: &DerivedParams,
    r_max: f64,
    n_samples: usize,
) -> Result<RadialProfile, SolveError> {
    if !(r_max > dp.r_a) || n_samples < 2 {
        return Err(SolveError::InvalidProfile {
            n: level.n,
            r_max,
            r_a: dp.r_a,
        });
    }
    let a_bar = dp.a_bar(level.energy);
    let mw = dp.m * dp.omega_ac;
    let y_a = dp.y_a;
    // Beyond this point the Gaussian factor has fallen by e^{-30} past the
    // classical turning region.
    let y_end = y_a + 4.0 * level.energy.max(0.0) / dp.omega_ac + 2.0 * dp.gamma.abs() + 60.0;
    let w = 0.5 / (1.0 + a_bar.abs().sqrt());

    let mut profile = Profile {
        dp,
        a_bar,
        ln_ref: 0.0,
    };
    let coarse = panel_edges(y_a, y_end, 4.0 * w);
    let mut ln_ref = f64::NEG_INFINITY;
    for &y in &coarse[1..] {
        ln_ref = ln_ref.max(profile.ln_abs(y)?);
    }
    profile.ln_ref = ln_ref;

    let measure = 2.0 * PI / mw;
    let rule = quad::gauss_legendre(10);
    let sq = |y: f64| profile.value(y).map(|f| f * f);
    let body = quad::integrate_panels(&panel_edges(y_a, y_end, w), &rule, sq)?;
    // Tail beyond y_end: g² decays like e^{-y} y^{p} there.
    let g_end = profile.value(y_end)?;
    let p = dp.gamma.abs() - 2.0 * a_bar;
    let decay = (1.0 - p / y_end).max(0.5);
    let tail = g_end * g_end / decay;
    let total = body + tail;
    let tail_fraction = tail / total;
    if tail_fraction > 1e-6 {
        log::warn!("wavefunction n = {}: tail holds {tail_fraction:.3e} of the norm", level.n);
    }
    let scale = 1.0 / (measure * total).sqrt();

    let check = quad::integrate_panels(&panel_edges(y_a, y_end, 0.7 * w), &rule, sq)?;
    let norm = measure * (check + tail) * scale * scale;

    let y_b = dp.y_of_r(dp.r_b);
    let mass_beyond_rb = if y_b >= y_end {
        tail * measure * scale * scale
    } else {
        let beyond = quad::integrate_panels(&panel_edges(y_b, y_end, w), &rule, sq)?;
        (beyond + tail) * measure * scale * scale
    };

    let ratio = (r_max / dp.r_a).powf(1.0 / (n_samples as f64 - 1.0));
    let mut radii = Vec::with_capacity(n_samples);
    let mut values = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let r = if i + 1 == n_samples {
            r_max
        } else {
            dp.r_a * ratio.powi(i as i32)
        };
        radii.push(r);
        values.push(scale * profile.value(dp.y_of_r(r))?);
    }

    let node_count = count_nodes(&profile, y_a, y_end.min(y_a + 4.0 * level.energy.max(0.0) / dp.omega_ac + 20.0))?;

    Ok(RadialProfile {
        radii,
        values,
        norm,
        mass_beyond_rb,
        tail_fraction,
        node_count,
    })
}

/// Sign changes of f on (y_a, y1], sampled densely in y.
fn count_nodes(profile: &Profile<'_>, y_a: f64, y1: f64) -> Result<usize, SolveError> {
    let edges = panel_edges(y_a, y1, 0.1 / (1.0 + profile.a_bar.abs().sqrt()));
    let mut samples = Vec::with_capacity(edges.len());
    // Skip the wall itself, where f vanishes.
    for w in edges.windows(2) {
        samples.push(profile.value(0.5 * (w[0] + w[1]))?);
        samples.push(profile.value(w[1])?);
    }
    Ok(oracle::sign_changes(&samples))
}
