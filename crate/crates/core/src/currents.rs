//! Persistent spin currents at zero temperature, I = −Σ ∂E/∂Φ_MAC with
//! ω_AC held fixed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::{case1_radicand, n_max, Branch};
use crate::model::{DerivedParams, Spin};
use crate::quantize::{EnergyLevel, Method};

const PI3: f64 = PI * PI * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurrentError {
    #[error("imaginary current: n = {n} has radicand {radicand} (n_max = {})", n_max.map_or("none".to_string(), |v| v.to_string()))]
    ImaginaryCurrent {
        n: usize,
        n_max: Option<usize>,
        radicand: f64,
    },
    #[error("degenerate gamma: gamma = 0 at ell = {ell}, sign undefined")]
    DegenerateGamma { ell: i64 },
    #[error("window: {0}")]
    InvalidWindow(String),
    #[error("label mismatch: level {label} is present at one of phi +/- h only")]
    LabelMismatch { label: String },
    #[error("spectrum source: {0}")]
    Source(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NPolicy {
    /// Every n the case-1 cutoff admits.
    AllAdmissible,
    Explicit(Vec<usize>),
}

/// Which states are summed over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupationWindow {
    pub ell_min: i64,
    pub ell_max: i64,
    pub n_policy: NPolicy,
}

impl OccupationWindow {
    pub fn new(ell_min: i64, ell_max: i64, n_policy: NPolicy) -> Result<Self, CurrentError> {
        let w = OccupationWindow {
            ell_min,
            ell_max,
            n_policy,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), CurrentError> {
        if self.ell_min > self.ell_max {
            return Err(CurrentError::InvalidWindow(format!(
                "ell_min = {} exceeds ell_max = {}",
                self.ell_min, self.ell_max
            )));
        }
        if let NPolicy::Explicit(ns) = &self.n_policy {
            if ns.is_empty() {
                return Err(CurrentError::InvalidWindow("n list is empty".into()));
            }
        }
        Ok(())
    }

    pub fn ells(&self) -> impl Iterator<Item = i64> {
        self.ell_min..=self.ell_max
    }

    pub fn contains(&self, level: &EnergyLevel) -> bool {
        (self.ell_min..=self.ell_max).contains(&level.ell)
            && match &self.n_policy {
                NPolicy::AllAdmissible => true,
                NPolicy::Explicit(ns) => ns.contains(&level.n),
            }
    }

    /// The derived parameters of `dp`'s system at every ℓ in the window.
    pub fn channels(&self, dp: &DerivedParams) -> Vec<DerivedParams> {
        self.ells().map(|ell| dp.with_ell(ell)).collect()
    }
}

fn case1_ns(dp: &DerivedParams, w: &OccupationWindow) -> Result<Vec<usize>, CurrentError> {
    w.validate()?;
    let max = n_max(dp);
    let ns: Vec<usize> = match &w.n_policy {
        NPolicy::AllAdmissible => max.map_or_else(Vec::new, |m| (0..=m).collect()),
        NPolicy::Explicit(ns) => ns.clone(),
    };
    for &n in &ns {
        let radicand = case1_radicand(n, dp);
        if max.is_none_or(|m| n > m) || !(radicand >= 0.0) {
            return Err(CurrentError::ImaginaryCurrent {
                n,
                n_max: max,
                radicand,
            });
        }
    }
    Ok(ns)
}

/// The bracketed n-term shared by the closed form and the per-level derivative:
/// sω/π³ √R + ω(4n+1)/(4Φ√R).
fn case1_term(n: usize, dp: &DerivedParams) -> f64 {
    let root = case1_radicand(n, dp).sqrt();
    let w = dp.omega_ac;
    dp.s() * w / PI3 * root + w * (4.0 * n as f64 + 1.0) / (4.0 * dp.phi_mac * root)
}

/// Case-1 closed form
/// `I = ω/(2π) − sω/π³ ± Σ_n [sω/π³ √R + ω(4n+1)/(4Φ√R)]`.
///
/// The ℓ range of the window does not enter; the formula sums over n only.
pub fn current_case1(
    dp: &DerivedParams,
    w: &OccupationWindow,
    branch: Branch,
) -> Result<f64, CurrentError> {
    let ns = case1_ns(dp, w)?;
    let wac = dp.omega_ac;
    let sum: f64 = ns.iter().map(|&n| case1_term(n, dp)).sum();
    Ok(wac / (2.0 * PI) - dp.s() * wac / PI3 + branch.sign() * sum)
}

/// −∂E/∂Φ of the case-1 energies summed over every (ℓ, n) in the window:
/// each level contributes `ω/(2π) + sω/π³ ± [sω/π³ √R + ω(4n+1)/(4Φ√R)]`.
pub fn current_case1_per_level(
    dp: &DerivedParams,
    w: &OccupationWindow,
    branch: Branch,
) -> Result<f64, CurrentError> {
    let wac = dp.omega_ac;
    let mut total = 0.0;
    for ch in w.channels(dp) {
        for n in case1_ns(&ch, w)? {
            total += wac / (2.0 * PI) + ch.s() * wac / PI3 + branch.sign() * case1_term(n, &ch);
        }
    }
    Ok(total)
}

fn check_case2(dps: &[DerivedParams], s: Spin) -> Result<(), CurrentError> {
    if dps.is_empty() {
        return Err(CurrentError::InvalidWindow("no channels".into()));
    }
    for dp in dps {
        if dp.channel.s != s {
            return Err(CurrentError::InvalidWindow(format!(
                "channel ell = {} has s = {}, expected {s}",
                dp.channel.ell, dp.channel.s
            )));
        }
        if dp.gamma == 0.0 {
            return Err(CurrentError::DegenerateGamma {
                ell: dp.channel.ell,
            });
        }
    }
    Ok(())
}

/// Case-2 closed form `I = sω/(4π) + Σ_ℓ ω/(4π) · γ/|γ|`.
pub fn current_case2(dps: &[DerivedParams], s: Spin) -> Result<f64, CurrentError> {
    check_case2(dps, s)?;
    let unit = dps[0].omega_ac / (4.0 * PI);
    let sum: f64 = dps.iter().map(|dp| dp.gamma.signum()).sum();
    Ok(s.sign() * unit + unit * sum)
}

/// −∂E/∂Φ of the case-2 energies summed over ℓ and `n_count` radial levels:
/// each level contributes `ω/(4π)(s + γ/|γ|)`.
pub fn current_case2_per_level(
    dps: &[DerivedParams],
    s: Spin,
    n_count: usize,
) -> Result<f64, CurrentError> {
    check_case2(dps, s)?;
    let unit = dps[0].omega_ac / (4.0 * PI);
    let per_n: f64 = dps
        .iter()
        .map(|dp| unit * (s.sign() + dp.gamma.signum()))
        .sum();
    Ok(per_n * n_count as f64)
}

type LevelKey = (Method, Option<Branch>, i64, i8, usize);

fn key(l: &EnergyLevel) -> LevelKey {
    (l.method, l.branch, l.ell, l.s, l.n)
}

fn label(k: &LevelKey) -> String {
    let branch = k.1.map_or(String::new(), |b| format!(" branch {b}"));
    format!("{}{branch} ell={} s={} n={}", k.0, k.2, k.3, k.4)
}

/// `I = −Σ (E(Φ+h) − E(Φ−h))/(2h)` over the levels in the window, with
/// levels matched by (method, branch, ℓ, s, n).
pub fn current_numeric<F, E>(
    source: F,
    phi: f64,
    w: &OccupationWindow,
    h: f64,
) -> Result<f64, CurrentError>
where
    F: Fn(f64) -> Result<Vec<EnergyLevel>, E>,
    E: std::fmt::Display,
{
    w.validate()?;
    if !(h > 0.0) {
        return Err(CurrentError::InvalidWindow(format!("step h = {h} must be > 0")));
    }
    let collect = |p: f64| -> Result<BTreeMap<LevelKey, f64>, CurrentError> {
        let levels = source(p).map_err(|e| CurrentError::Source(e.to_string()))?;
        Ok(levels
            .iter()
            .filter(|l| w.contains(l))
            .map(|l| (key(l), l.energy))
            .collect())
    };
    let plus = collect(phi + h)?;
    let minus = collect(phi - h)?;
    if let Some(k) = plus
        .keys()
        .find(|k| !minus.contains_key(k))
        .or_else(|| minus.keys().find(|k| !plus.contains_key(k)))
    {
        return Err(CurrentError::LabelMismatch { label: label(k) });
    }
    Ok(plus
        .iter()
        .map(|(k, e_plus)| -(e_plus - minus[k]) / (2.0 * h))
        .sum())
}
