//! Physical configuration, channel labels, and the parameters of the
//! reduced radial problem derived from them.
//!
//! Units are natural (ħ = c = ε₀ = 1). The charged region is the shell
//! `r_a <= r <= r_b`; the cavity `r < r_a` is field free.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("r = {r} is outside the domain ({requirement})")]
    Domain { r: f64, requirement: &'static str },
    #[error("rho: {rho} gives omega_ac <= 0, so there is no confining well for bound states")]
    Unbound { rho: f64 },
    #[error("config json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config file: {0}")]
    Io(#[from] std::io::Error),
}

/// The experiment's dials: mass, dipole moment, charge density and radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    pub m: f64,
    pub mu: f64,
    pub rho: f64,
    pub r_a: f64,
    pub r_b: f64,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        PhysicalConfig {
            m: 1.0,
            mu: 1.0,
            rho: 1.0,
            r_a: 1.0,
            r_b: 4.0,
        }
    }
}

impl PhysicalConfig {
    pub fn new(m: f64, mu: f64, rho: f64, r_a: f64, r_b: f64) -> Result<Self, ModelError> {
        let cfg = PhysicalConfig {
            m,
            mu,
            rho,
            r_a,
            r_b,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |field: &'static str, v: f64, ok: bool, reason: &str| {
            if !v.is_finite() {
                Err(ModelError::InvalidConfig {
                    field,
                    reason: format!("must be finite, got {v}"),
                })
            } else if !ok {
                Err(ModelError::InvalidConfig {
                    field,
                    reason: format!("{reason}, got {v}"),
                })
            } else {
                Ok(())
            }
        };
        check("m", self.m, self.m > 0.0, "must be > 0")?;
        check("mu", self.mu, self.mu > 0.0, "must be > 0")?;
        check("rho", self.rho, true, "")?;
        check("r_a", self.r_a, self.r_a > 0.0, "must be > 0")?;
        check("r_b", self.r_b, self.r_b >= self.r_a, "must be >= r_a")?;
        Ok(())
    }

    /// Parses `{"m","mu","rho","r_a","r_b"}`; unknown keys are rejected.
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let cfg: PhysicalConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// ω_AC = μρ/m.
    pub fn omega_ac(&self) -> f64 {
        self.mu * self.rho / self.m
    }

    /// Dimensionless wall position y_a = m ω_AC r_a² / 2.
    pub fn y_a(&self) -> f64 {
        0.5 * self.m * self.omega_ac() * self.r_a * self.r_a
    }
}

/// Projection of the dipole moment on the cylinder axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn from_sign(s: i8) -> Option<Spin> {
        match s {
            1 => Some(Spin::Up),
            -1 => Some(Spin::Down),
            _ => None,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "+1",
            Spin::Down => "-1",
        })
    }
}

/// One symmetry sector (ℓ, s). Motion along the axis is frozen (p_z = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Channel {
    pub ell: i64,
    pub s: Spin,
}

impl Channel {
    pub const P_Z: f64 = 0.0;

    pub fn new(ell: i64, s: Spin) -> Self {
        Channel { ell, s }
    }
}

/// How the spin sign enters the missing phase.
///
/// `Literal` stores Φ_MAC = s π μ ρ r_a² and substitutes that signed value
/// wherever the phase symbol appears. `Unsigned` substitutes π μ ρ r_a² for
/// both spin projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseConvention {
    #[default]
    Literal,
    Unsigned,
}

/// Parameters of the reduced radial equation for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub channel: Channel,
    pub m: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub omega_ac: f64,
    pub phi_mac: f64,
    pub gamma: f64,
    pub y_a: f64,
    /// Set when Φ_MAC was supplied directly instead of computed from μρr_a².
    pub phase_overridden: bool,
}

impl DerivedParams {
    pub fn s(&self) -> f64 {
        self.channel.s.sign()
    }

    /// τ(E) = 2mE − s m ω γ − m ω.
    pub fn tau(&self, energy: f64) -> f64 {
        let mw = self.m * self.omega_ac;
        2.0 * self.m * energy - self.s() * mw * self.gamma - mw
    }

    pub fn energy_from_tau(&self, tau: f64) -> f64 {
        let mw = self.m * self.omega_ac;
        (tau + self.s() * mw * self.gamma + mw) / (2.0 * self.m)
    }

    /// First parameter of U in the decaying solution: |γ|/2 + 1/2 − τ/(2mω).
    pub fn a_bar(&self, energy: f64) -> f64 {
        0.5 * self.gamma.abs() + 0.5 - self.tau(energy) / (2.0 * self.m * self.omega_ac)
    }

    pub fn energy_from_a_bar(&self, a_bar: f64) -> f64 {
        let tau = (0.5 * self.gamma.abs() + 0.5 - a_bar) * 2.0 * self.m * self.omega_ac;
        self.energy_from_tau(tau)
    }

    /// Second parameter of U: |γ| + 1.
    pub fn b_bar(&self) -> f64 {
        self.gamma.abs() + 1.0
    }

    /// y = m ω r² / 2.
    pub fn y_of_r(&self, r: f64) -> f64 {
        0.5 * self.m * self.omega_ac * r * r
    }

    /// Length scale 1/√(mω) of the effective oscillator.
    pub fn length_scale(&self) -> f64 {
        1.0 / (self.m * self.omega_ac).sqrt()
    }

    /// Same system with Φ_MAC set directly; ω_AC and y_a are unchanged.
    pub fn with_phase(&self, phi_mac: f64) -> DerivedParams {
        DerivedParams {
            phi_mac,
            gamma: gamma_of(self.channel, phi_mac),
            phase_overridden: true,
            ..*self
        }
    }

    /// Same system in a different angular-momentum sector.
    pub fn with_ell(&self, ell: i64) -> DerivedParams {
        let channel = Channel::new(ell, self.channel.s);
        DerivedParams {
            channel,
            gamma: gamma_of(channel, self.phi_mac),
            ..*self
        }
    }
}

/// γ = ℓ + (1−s)/2 − Φ_MAC/(2π).
pub fn gamma_of(ch: Channel, phi_mac: f64) -> f64 {
    ch.ell as f64 + 0.5 * (1.0 - ch.s.sign()) - phi_mac / (2.0 * PI)
}

/// Radial electric field of the uniformly charged shell; zero in the cavity.
pub fn electric_field(r: f64, cfg: &PhysicalConfig) -> Result<f64, ModelError> {
    if !(r > 0.0) {
        return Err(ModelError::Domain {
            r,
            requirement: "r > 0",
        });
    }
    if r < cfg.r_a {
        return Ok(0.0);
    }
    Ok(0.5 * cfg.rho * (r - cfg.r_a) * (r + cfg.r_a) / r)
}

/// Azimuthal components (A1, A2) of the effective vector potential μσ×E,
/// with σ³ replaced by the channel's spin sign.
pub fn effective_potentials(
    r: f64,
    ch: Channel,
    cfg: &PhysicalConfig,
) -> Result<(f64, f64), ModelError> {
    if !(r >= cfg.r_a) {
        return Err(ModelError::Domain {
            r,
            requirement: "r >= r_a",
        });
    }
    let s = ch.s.sign();
    let mu_rho = cfg.mu * cfg.rho;
    Ok((
        0.5 * s * mu_rho * r,
        0.5 * s * mu_rho * cfg.r_a * cfg.r_a / r,
    ))
}

/// Φ_MAC = s π μ ρ r_a², the phase of A2 around any loop enclosing the cavity.
pub fn missing_phase(cfg: &PhysicalConfig, s: Spin) -> f64 {
    s.sign() * PI * cfg.mu * cfg.rho * cfg.r_a * cfg.r_a
}

/// Derived parameters under the literal phase convention.
pub fn derive(cfg: &PhysicalConfig, ch: Channel) -> Result<DerivedParams, ModelError> {
    derive_with(cfg, ch, PhaseConvention::Literal, None)
}

pub fn derive_with(
    cfg: &PhysicalConfig,
    ch: Channel,
    convention: PhaseConvention,
    phi_override: Option<f64>,
) -> Result<DerivedParams, ModelError> {
    cfg.validate()?;
    let omega_ac = cfg.omega_ac();
    if !(omega_ac > 0.0) {
        return Err(ModelError::Unbound { rho: cfg.rho });
    }
    let computed = match convention {
        PhaseConvention::Literal => missing_phase(cfg, ch.s),
        PhaseConvention::Unsigned => missing_phase(cfg, Spin::Up),
    };
    let phi_mac = phi_override.unwrap_or(computed);
    if !phi_mac.is_finite() {
        return Err(ModelError::InvalidConfig {
            field: "phi_override",
            reason: format!("must be finite, got {phi_mac}"),
        });
    }
    Ok(DerivedParams {
        channel: ch,
        m: cfg.m,
        r_a: cfg.r_a,
        r_b: cfg.r_b,
        omega_ac,
        phi_mac,
        gamma: gamma_of(ch, phi_mac),
        y_a: cfg.y_a(),
        phase_overridden: phi_override.is_some(),
    })
}

/// Divergence (1/r) d(r E_r)/dr by central difference.
pub fn field_divergence(r: f64, cfg: &PhysicalConfig) -> Result<f64, ModelError> {
    if !(r > cfg.r_a) {
        return Err(ModelError::Domain {
            r,
            requirement: "r > r_a",
        });
    }
    let h = 1e-5 * r.min(r - cfg.r_a).max(1e-300);
    let flux = |x: f64| electric_field(x, cfg).map(|e| x * e);
    Ok((flux(r + h)? - flux(r - h)?) / (2.0 * h * r))
}

/// One sample of the effective-potential comparison. Both potentials are
/// in units of 2m × energy, i.e. `2m E f = -f'' - f'/r + V f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub r: f64,
    /// From the Pauli Hamiltonian with the shell field inserted directly:
    /// π_φ² − μ²E_r² + μ ∇·E.
    pub direct: f64,
    /// From the reduced radial equation: γ²/r² + m²ω²r²/4 + s m ω γ + m ω.
    pub reduced: f64,
    pub difference: f64,
    /// The −μ²E_r² term of the direct route on its own.
    pub dipole_square_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub channel: Channel,
    pub convention: PhaseConvention,
    /// Coefficients of r², r⁻² and r⁰ in the reduced-equation potential.
    pub reduced_r2_coefficient: f64,
    pub reduced_inv_r2_coefficient: f64,
    pub reduced_constant: f64,
    pub rows: Vec<ConsistencyRow>,
}

/// Compares the radial potential assembled directly from the field with
/// the one implied by the reduced radial equation. Informational only.
pub fn consistency_report(
    cfg: &PhysicalConfig,
    ch: Channel,
    convention: PhaseConvention,
    r_samples: &[f64],
) -> Result<ConsistencyReport, ModelError> {
    let dp = derive_with(cfg, ch, convention, None)?;
    let mw = dp.m * dp.omega_ac;
    let s = ch.s.sign();
    let r2_coef = 0.25 * mw * mw;
    let inv_r2_coef = dp.gamma * dp.gamma;
    let constant = s * mw * dp.gamma + mw;

    let mut rows = Vec::with_capacity(r_samples.len());
    for &r in r_samples {
        if !(r > cfg.r_a) || r > 10.0 * cfg.r_a {
            return Err(ModelError::Domain {
                r,
                requirement: "r_a < r <= 10 r_a",
            });
        }
        let e_r = electric_field(r, cfg)?;
        // π_φ = (ℓ + 1/2)/r − s/(2r) + s μ E_r
        let pi_phi = (ch.ell as f64 + 0.5 - 0.5 * s) / r + s * cfg.mu * e_r;
        let dipole_square_term = -(cfg.mu * e_r).powi(2);
        let direct = pi_phi * pi_phi + dipole_square_term + cfg.mu * field_divergence(r, cfg)?;
        let reduced = inv_r2_coef / (r * r) + r2_coef * r * r + constant;
        rows.push(ConsistencyRow {
            r,
            direct,
            reduced,
            difference: direct - reduced,
            dipole_square_term,
        });
    }
    Ok(ConsistencyReport {
        channel: ch,
        convention,
        reduced_r2_coefficient: r2_coef,
        reduced_inv_r2_coefficient: inv_r2_coef,
        reduced_constant: constant,
        rows,
    })
}
