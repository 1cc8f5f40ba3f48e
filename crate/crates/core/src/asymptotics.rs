//! Closed-form spectra in the two asymptotic regimes of the wall condition.
//!
//! Case 1 (large −ā at fixed y_a) comes from the cosine form of U and holds
//! only up to a radial cutoff n_max. Case 2 (y_a → 0) comes from the Γ(ā)
//! poles and is the shifted Landau ladder. Both are evaluated exactly as
//! written below, with no re-derivation.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::DerivedParams;
use crate::quantize::{EnergyLevel, Method};

const PI3: f64 = PI * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("cutoff: n = {n} exceeds n_max = {}", fmt_n_max(*.n_max))]
    Cutoff { n: usize, n_max: Option<usize> },
}

fn fmt_n_max(n_max: Option<usize>) -> String {
    n_max.map_or_else(|| "none".to_string(), |v| v.to_string())
}

/// Upper bound s Φ_MAC/(2π³) − ¼ on the case-1 radial index.
pub fn n_max_bound(dp: &DerivedParams) -> f64 {
    dp.s() * dp.phi_mac / (2.0 * PI3) - 0.25
}

/// Largest integer n strictly below [`n_max_bound`]; `None` when no n ≥ 0 is.
pub fn n_max(dp: &DerivedParams) -> Option<usize> {
    let bound = n_max_bound(dp);
    if !(bound > 0.0) {
        return None;
    }
    Some(bound.ceil() as usize - 1)
}

/// 1 − π³(4n+1)/(2 s Φ_MAC).
pub fn case1_radicand(n: usize, dp: &DerivedParams) -> f64 {
    1.0 - PI3 * (4.0 * n as f64 + 1.0) / (2.0 * dp.s() * dp.phi_mac)
}

/// An admissible (branch, n) for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Case1Params {
    pub branch: Branch,
    pub n: usize,
    pub ell: i64,
    pub s: i8,
}

impl Case1Params {
    pub fn new(branch: Branch, n: usize, dp: &DerivedParams) -> Result<Self, AsymptoticsError> {
        check_cutoff(n, dp)?;
        Ok(Case1Params {
            branch,
            n,
            ell: dp.channel.ell,
            s: dp.channel.s.as_i8(),
        })
    }
}

fn check_cutoff(n: usize, dp: &DerivedParams) -> Result<(), AsymptoticsError> {
    let max = n_max(dp);
    match max {
        Some(m) if n <= m && case1_radicand(n, dp) >= 0.0 => Ok(()),
        _ => Err(AsymptoticsError::Cutoff { n, n_max: max }),
    }
}

/// Case-1 energy
/// `E = −ω[n − (s/2)(ℓ + (1−s)/2 − sΦ/π) + 3/4] − (sΦ/π³) ω [1 ± √(1 − π³(4n+1)/(2sΦ))]`.
pub fn energy_case1(p: &Case1Params, dp: &DerivedParams) -> Result<f64, AsymptoticsError> {
    check_cutoff(p.n, dp)?;
    Ok(case1_formula(p.branch, p.n, p.ell, dp))
}

/// The case-1 expression without the cutoff check; NaN where the radicand
/// is negative.
pub fn case1_formula(branch: Branch, n: usize, ell: i64, dp: &DerivedParams) -> f64 {
    let s = dp.s();
    let w = dp.omega_ac;
    let phi = dp.phi_mac;
    let bracket = n as f64 - 0.5 * s * (ell as f64 + 0.5 * (1.0 - s) - s * phi / PI) + 0.75;
    let root = case1_radicand(n, dp).sqrt();
    -w * bracket - (s * phi / PI3) * w * (1.0 + branch.sign() * root)
}

/// Case-2 energy `E = ω[n + |γ|/2 + sγ/2 + 1]`.
pub fn energy_case2(n: usize, dp: &DerivedParams) -> f64 {
    let g = dp.gamma;
    dp.omega_ac * (n as f64 + 0.5 * g.abs() + 0.5 * dp.s() * g + 1.0)
}

/// Phase of the large-(−a) cosine form of U:
/// `√(2bx − 4ax) − bπ/2 + aπ + π/4`.
pub fn u_asymptotic_phase(a: f64, b: f64, x: f64) -> f64 {
    (2.0 * b * x - 4.0 * a * x).sqrt() - 0.5 * b * PI + a * PI + 0.25 * PI
}

/// `cos(√(2bx − 4ax) − bπ/2 + aπ + π/4)`, proportional to U for large −a.
pub fn u_asymptotic_cosine(a: f64, b: f64, x: f64) -> f64 {
    u_asymptotic_phase(a, b, x).cos()
}

/// Every admissible case-1 level of one channel, both branches, ordered by
/// (branch, n).
pub fn case1_levels(dp: &DerivedParams, branches: &[Branch]) -> Vec<EnergyLevel> {
    let Some(max) = n_max(dp) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for &branch in branches {
        for n in 0..=max {
            if let Ok(p) = Case1Params::new(branch, n, dp) {
                if let Ok(energy) = energy_case1(&p, dp) {
                    out.push(formula_level(dp, n, energy, Method::Case1, Some(branch)));
                }
            }
        }
    }
    out
}

/// Case-2 levels n = 0..count of one channel.
pub fn case2_levels(dp: &DerivedParams, count: usize) -> Vec<EnergyLevel> {
    (0..count)
        .map(|n| formula_level(dp, n, energy_case2(n, dp), Method::Case2, None))
        .collect()
}

fn formula_level(
    dp: &DerivedParams,
    n: usize,
    energy: f64,
    method: Method,
    branch: Option<Branch>,
) -> EnergyLevel {
    EnergyLevel {
        n,
        ell: dp.channel.ell,
        s: dp.channel.s.as_i8(),
        energy,
        method,
        branch,
        residual: 0.0,
        residual_scale: 0.0,
        bracket_width: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive, Channel, PhysicalConfig, Spin};

    fn dp_with(ell: i64, s: Spin, phi: f64) -> DerivedParams {
        derive(&PhysicalConfig::default(), Channel::new(ell, s))
            .unwrap()
            .with_phase(phi)
    }

    #[test]
    fn cutoff_examples() {
        assert_eq!(n_max(&dp_with(0, Spin::Up, 2.0 * PI3)), Some(0));
        assert_eq!(n_max(&dp_with(0, Spin::Up, 10.0 * PI3)), Some(4));
        assert_eq!(n_max(&dp_with(0, Spin::Up, PI3 / 4.0)), None);
        // s Φ < 0 has no admissible n even though the radicand is positive.
        let neg = dp_with(0, Spin::Down, 2.0 * PI3);
        assert_eq!(n_max(&neg), None);
        assert!(case1_radicand(0, &neg) > 1.0);
        assert!(matches!(
            Case1Params::new(Branch::Plus, 0, &neg),
            Err(AsymptoticsError::Cutoff { n_max: None, .. })
        ));
    }

    #[test]
    fn case1_substitution() {
        let dp = dp_with(0, Spin::Up, 2.0 * PI3);
        assert!((case1_radicand(0, &dp) - 0.75).abs() < 1e-15);
        let p = Case1Params::new(Branch::Plus, 0, &dp).unwrap();
        let e = energy_case1(&p, &dp).unwrap();
        let expected = -(PI * PI + 0.75) - 2.0 * (1.0 + 0.75f64.sqrt());
        assert!((e - expected).abs() < 1e-13);
        assert!(Case1Params::new(Branch::Plus, 1, &dp).is_err());
    }

    #[test]
    fn case2_substitution() {
        assert_eq!(energy_case2(0, &dp_with(0, Spin::Up, 0.0)), 1.0);
        assert!((energy_case2(0, &dp_with(0, Spin::Up, PI)) - 1.0).abs() < 1e-15);
        let dp = dp_with(1, Spin::Down, -PI);
        assert!((dp.gamma - 2.5).abs() < 1e-15);
        assert!((energy_case2(2, &dp) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_phase_substitution() {
        let phase = u_asymptotic_phase(-10.0, 1.0, 0.5);
        let expected = 21f64.sqrt() - PI / 2.0 - 10.0 * PI + PI / 4.0;
        assert!((phase - expected).abs() < 1e-13);
    }

    #[test]
    fn zero_phase_degeneracy_classes() {
        // With Φ = 0 every channel with sγ < 0 sits on E = ω(n + 1).
        for s in [Spin::Up, Spin::Down] {
            for ell in -10..=10 {
                let dp = dp_with(ell, s, 0.0);
                let e = energy_case2(0, &dp);
                if dp.s() * dp.gamma < 0.0 {
                    assert_eq!(e, 1.0, "ell = {ell}, s = {s}");
                } else {
                    assert_eq!(e, 1.0 + dp.gamma.abs());
                }
            }
        }
    }

    #[test]
    fn irrational_phase_breaks_degeneracy() {
        // Channels with sγ < 0 stay on the ω(n+1) ladder for every Φ; the
        // phase splits the sγ > 0 channels from each other and from that
        // ladder at any n.
        let mut lifted = Vec::new();
        for s in [Spin::Up, Spin::Down] {
            for ell in -10..=10 {
                let dp = dp_with(ell, s, 1.0);
                if dp.s() * dp.gamma > 0.0 {
                    lifted.push(energy_case2(0, &dp));
                } else {
                    assert_eq!(energy_case2(0, &dp), 1.0);
                }
            }
        }
        lifted.sort_by(f64::total_cmp);
        for w in lifted.windows(2) {
            assert!(w[1] - w[0] > 1e-9, "{w:?}");
        }
        for e in &lifted {
            assert!((e - e.round()).abs() > 1e-9, "{e}");
        }
    }

    #[test]
    fn case2_relabeling() {
        for s in [Spin::Up, Spin::Down] {
            for ell in -5..=5 {
                let a = energy_case2(1, &dp_with(ell, s, 0.7));
                let b = energy_case2(1, &dp_with(ell + 1, s, 0.7 + 2.0 * PI));
                assert!((a - b).abs() < 1e-13);
            }
        }
    }
}
