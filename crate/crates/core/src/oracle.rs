//! Finite-difference eigenvalues of the radial equation.
//!
//! With u = √r f the radial equation becomes
//! `-u'' + [(γ² − ¼)/r² + m²ω²r²/4] u = τ u` on `[r_a, r_max]` with
//! Dirichlet ends. Central differences give a symmetric tridiagonal matrix
//! whose eigenvalues are bracketed by Sturm counts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::DerivedParams;

/// Minimum distance from the wall to the truncation radius, in units of 1/√(mω).
pub const MIN_DECAY_LENGTHS: f64 = 8.0;
pub const MIN_NODES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid: {0}")]
    InvalidGrid(String),
    #[error("requested k = 0 eigenvalues")]
    EmptyRequest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n_nodes: usize,
}

impl GridSpec {
    pub fn new(dp: &DerivedParams, r_max: f64, n_nodes: usize) -> Result<Self, OracleError> {
        let grid = GridSpec {
            r_min: dp.r_a,
            r_max,
            n_nodes,
        };
        grid.validate(dp)?;
        Ok(grid)
    }

    /// Grid that covers the classically allowed region below `e_max` plus
    /// several decay lengths beyond it.
    pub fn for_energy(dp: &DerivedParams, e_max: f64, n_nodes: usize) -> Result<Self, OracleError> {
        let len = dp.length_scale();
        let mw = dp.m * dp.omega_ac;
        let tau = dp.tau(e_max).max(0.0);
        let r_turn = 2.0 * tau.sqrt() / mw;
        let r_max = (dp.r_a + 12.0 * len).max(r_turn + 6.0 * len);
        Self::new(dp, r_max, n_nodes)
    }

    pub fn validate(&self, dp: &DerivedParams) -> Result<(), OracleError> {
        if self.n_nodes < MIN_NODES {
            return Err(OracleError::InvalidGrid(format!(
                "n_nodes = {} is below the minimum {MIN_NODES}",
                self.n_nodes
            )));
        }
        if self.r_min != dp.r_a {
            return Err(OracleError::InvalidGrid(format!(
                "r_min = {} differs from r_a = {}",
                self.r_min, dp.r_a
            )));
        }
        let needed = dp.r_a + MIN_DECAY_LENGTHS * dp.length_scale();
        if !(self.r_max >= needed) {
            return Err(OracleError::InvalidGrid(format!(
                "r_max = {} is below r_a + 8/sqrt(m omega) = {needed}",
                self.r_max
            )));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n_nodes as f64 + 1.0)
    }

    /// Same interval with the spacing halved.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            n_nodes: 2 * self.n_nodes + 1,
            ..*self
        }
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.r_min + (i as f64 + 1.0) * self.h()
    }
}

/// Diagonal of the matrix in τ units; the off-diagonal is the constant −1/h².
fn diagonal(dp: &DerivedParams, grid: &GridSpec) -> Vec<f64> {
    let h = grid.h();
    let inv_h2 = 1.0 / (h * h);
    let mw = dp.m * dp.omega_ac;
    let c = dp.gamma * dp.gamma - 0.25;
    (0..grid.n_nodes)
        .map(|i| {
            let r = grid.radius(i);
            2.0 * inv_h2 + c / (r * r) + 0.25 * mw * mw * r * r
        })
        .collect()
}

fn count_below(diag: &[f64], off2: f64, tau: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for (i, &a) in diag.iter().enumerate() {
        d = if i == 0 { a - tau } else { a - tau - off2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (a.abs() + off2.sqrt());
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Number of grid eigenvalues with energy below `energy`.
pub fn sturm_count(dp: &DerivedParams, grid: &GridSpec, energy: f64) -> usize {
    let diag = diagonal(dp, grid);
    let h = grid.h();
    count_below(&diag, 1.0 / (h * h).powi(2), dp.tau(energy))
}

/// Lowest `k` eigenvalues (as energies) on one grid.
fn eigenvalues_on(dp: &DerivedParams, grid: &GridSpec, k: usize) -> Vec<f64> {
    let diag = diagonal(dp, grid);
    let h = grid.h();
    let off2 = 1.0 / (h * h).powi(2);
    // Gershgorin: every eigenvalue is at least min V.
    let lower = diag.iter().fold(f64::INFINITY, |m, &a| m.min(a)) - 2.0 / (h * h);
    let tol = 1e-10 * dp.omega_ac * 2.0 * dp.m;
    let mut upper = lower + dp.m * dp.omega_ac * (2.0 * k as f64 + 4.0);
    while count_below(&diag, off2, upper) < k {
        upper = lower + 2.0 * (upper - lower);
    }

    let mut out = Vec::with_capacity(k);
    let mut lo = lower;
    for j in 0..k {
        let mut a = lo;
        let mut b = upper;
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if count_below(&diag, off2, mid) > j {
                b = mid;
            } else {
                a = mid;
            }
        }
        let tau = 0.5 * (a + b);
        out.push(dp.energy_from_tau(tau));
        lo = a;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSpectrum {
    pub grid: GridSpec,
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    /// (4 E_{h/2} − E_h)/3.
    pub extrapolated: Vec<f64>,
    /// Probability mass of the highest requested state in the outer 10% of the grid.
    pub outer_mass: f64,
    pub truncation_warning: bool,
}

impl OracleSpectrum {
    pub fn energies(&self) -> &[f64] {
        &self.extrapolated
    }
}

/// Lowest `k` Dirichlet eigenvalues on `grid` and on the grid with h/2,
/// with Richardson extrapolation.
pub fn fd_eigenvalues(
    dp: &DerivedParams,
    grid: &GridSpec,
    k: usize,
) -> Result<OracleSpectrum, OracleError> {
    if k == 0 {
        return Err(OracleError::EmptyRequest);
    }
    grid.validate(dp)?;
    let fine_grid = grid.refined();
    let (coarse, fine) = rayon::join(
        || eigenvalues_on(dp, grid, k),
        || eigenvalues_on(dp, &fine_grid, k),
    );
    let extrapolated = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();

    let v = eigenvector(dp, grid, coarse[k - 1]);
    let total: f64 = v.iter().map(|x| x * x).sum();
    let start = grid.n_nodes - grid.n_nodes / 10;
    let outer: f64 = v[start..].iter().map(|x| x * x).sum();
    let outer_mass = outer / total;
    let truncation_warning = outer_mass > 1e-8;
    if truncation_warning {
        log::warn!(
            "oracle truncation: state {} has mass {outer_mass:.3e} in the outer 10% of [{}, {}]",
            k - 1,
            grid.r_min,
            grid.r_max
        );
    }
    Ok(OracleSpectrum {
        grid: *grid,
        coarse,
        fine,
        extrapolated,
        outer_mass,
        truncation_warning,
    })
}

/// Grid eigenvector (values of u at interior nodes) for the eigenvalue
/// closest to `energy`, by inverse iteration. Unit Euclidean norm.
pub fn eigenvector(dp: &DerivedParams, grid: &GridSpec, energy: f64) -> Vec<f64> {
    let diag = diagonal(dp, grid);
    let h = grid.h();
    let off = -1.0 / (h * h);
    let n = diag.len();
    let tau = dp.tau(energy);
    let shift = tau + 1e-9 * tau.abs().max(dp.m * dp.omega_ac);

    let mut x = vec![1.0; n];
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for _ in 0..3 {
        // Thomas algorithm for (T − shift) y = x.
        let mut denom = diag[0] - shift;
        c[0] = off / denom;
        d[0] = x[0] / denom;
        for i in 1..n {
            denom = diag[i] - shift - off * c[i - 1];
            if denom == 0.0 {
                denom = f64::EPSILON;
            }
            c[i] = off / denom;
            d[i] = (x[i] - off * d[i - 1]) / denom;
        }
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    }
    x
}

/// Interior sign changes, ignoring components below `1e-10` of the maximum.
pub fn sign_changes(values: &[f64]) -> usize {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-10 * max;
    let mut last = 0.0f64;
    let mut changes = 0;
    for &v in values {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            changes += 1;
        }
        last = v.signum();
    }
    changes
}

/// Golden-file record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFixture {
    pub config: crate::model::PhysicalConfig,
    pub channel: crate::model::Channel,
    pub grid: GridSpec,
    pub eigenvalues: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive, Channel, PhysicalConfig, Spin};

    fn default_dp() -> DerivedParams {
        derive(&PhysicalConfig::default(), Channel::new(0, Spin::Up)).unwrap()
    }

    #[test]
    fn grid_validation() {
        let dp = default_dp();
        assert!(GridSpec::new(&dp, 20.0, 999).is_err());
        assert!(GridSpec::new(&dp, 5.0, 2000).is_err());
        let g = GridSpec::new(&dp, 13.0, 2000).unwrap();
        assert!((g.h() - 12.0 / 2001.0).abs() < 1e-15);
        assert!((g.refined().h() - g.h() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn count_steps_by_one_across_each_eigenvalue() {
        let dp = default_dp();
        let grid = GridSpec::for_energy(&dp, 12.0, 4000).unwrap();
        let spec = fd_eigenvalues(&dp, &grid, 5).unwrap();
        assert_eq!(sturm_count(&dp, &grid, spec.coarse[0] - 0.1), 0);
        for (j, &e) in spec.coarse.iter().enumerate() {
            assert_eq!(sturm_count(&dp, &grid, e - 1e-7), j);
            assert_eq!(sturm_count(&dp, &grid, e + 1e-7), j + 1);
        }
        for w in spec.coarse.windows(2) {
            assert!(w[1] - w[0] > 1e-8);
        }
    }

    #[test]
    fn eigenvector_nodes() {
        let dp = default_dp();
        let grid = GridSpec::for_energy(&dp, 12.0, 3000).unwrap();
        let spec = fd_eigenvalues(&dp, &grid, 4).unwrap();
        for (n, &e) in spec.coarse.iter().enumerate() {
            assert_eq!(sign_changes(&eigenvector(&dp, &grid, e)), n);
        }
        assert!(!spec.truncation_warning);
    }

    #[test]
    fn flat_oscillator_limit() {
        // γ² = ¼ and r_a → 0: the half-line oscillator −u'' + r²u/4, whose
        // Dirichlet spectrum is the odd full-line levels τ = 2j + 3/2.
        let cfg = PhysicalConfig::new(1.0, 1.0, 1.0, 1e-10, 1.0).unwrap();
        let dp = derive(&cfg, Channel::new(0, Spin::Up))
            .unwrap()
            .with_phase(-std::f64::consts::PI);
        assert!((dp.gamma - 0.5).abs() < 1e-15);
        let grid = GridSpec::new(&dp, 16.0, 8000).unwrap();
        let spec = fd_eigenvalues(&dp, &grid, 3).unwrap();
        for (j, &e) in spec.extrapolated.iter().enumerate() {
            let tau = dp.tau(e);
            assert!((tau - (2.0 * j as f64 + 1.5)).abs() < 1e-7, "{j}: {tau}");
        }
    }
}
