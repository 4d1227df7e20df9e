//! Replica-symmetric fixed point for the MMSE of random linear encoders.
//!
//! With `s = R / σ²` and `β = η s`, the fixed-point equation becomes
//! `u(β) = β·mmse(X, β) − R + σ²β = 0`; among its roots the one minimizing
//! `g(β) = I(X; √β X + N) − (R/2) log β + βσ²/2` is selected.

use rayon::prelude::*;

use crate::dist::{info_dimension, Distribution};
use crate::error::{Error, Result};
use crate::scalar_channel::{self, ScalarChannel};

/// Default number of log-spaced scan points.
pub const SCAN_POINTS: usize = 400;
/// Lower end of the scan.
pub const SCAN_LO: f64 = 1e-6;
/// The scan stops at `SCAN_HI_FACTOR · R / σ²`.
pub const SCAN_HI_FACTOR: f64 = 10.0;
/// Bisection stops once `hi / lo - 1` drops below this.
pub const ROOT_REL_WIDTH: f64 = 1e-10;
/// Free energies within this (scaled by `max(1, |g|)`) count as tied; ties
/// go to the largest root.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaSolution {
    pub rate: f64,
    pub noise_var: f64,
    /// Ascending.
    pub roots: Vec<f64>,
    /// `g(β)` at each root.
    pub free_energies: Vec<f64>,
    pub selected_beta: f64,
    /// `β* σ² / R`.
    pub eta: f64,
    /// `mmse(X, β*)`.
    pub dl_mse: f64,
}

impl ReplicaSolution {
    pub fn selected_index(&self) -> usize {
        self.roots
            .iter()
            .position(|&b| b == self.selected_beta)
            .expect("selected root is listed")
    }
}

fn check_args(dist: &Distribution, rate: f64, noise_var: f64) -> Result<()> {
    dist.require_standardized()?;
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::InvalidArgument(format!("rate must be positive, got {rate}")));
    }
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::InvalidArgument(format!("noise variance must be positive, got {noise_var}")));
    }
    Ok(())
}

/// `β·mmse(X, β) − R + σ²β`.
pub fn residual(dist: &Distribution, beta: f64, rate: f64, noise_var: f64) -> Result<f64> {
    let m = ScalarChannel::new(dist, beta)?.mmse()?;
    Ok(beta * m - rate + noise_var * beta)
}

/// All sign changes of the residual on the default scan.
pub fn find_roots(dist: &Distribution, rate: f64, noise_var: f64) -> Result<Vec<f64>> {
    find_roots_with(dist, rate, noise_var, SCAN_POINTS)
}

/// As [`find_roots`] with `points` scan points.
pub fn find_roots_with(dist: &Distribution, rate: f64, noise_var: f64, points: usize) -> Result<Vec<f64>> {
    check_args(dist, rate, noise_var)?;
    let hi = SCAN_HI_FACTOR * rate / noise_var;
    if hi <= SCAN_LO || points < 2 {
        return Err(Error::InvalidArgument("scan range is empty".into()));
    }
    let grid = crate::special::log_space(SCAN_LO, hi, points);
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&b| residual(dist, b, rate, noise_var))
        .collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (u0, u1) = (values[i], values[i + 1]);
        if u0 == 0.0 {
            roots.push(grid[i]);
        } else if u0.signum() != u1.signum() && u1 != 0.0 {
            roots.push(bisect(dist, rate, noise_var, grid[i], grid[i + 1], u0)?);
        }
    }
    if values[values.len() - 1] == 0.0 {
        roots.push(grid[grid.len() - 1]);
    }
    if roots.is_empty() {
        return Err(Error::NoRoot);
    }
    Ok(roots)
}

fn bisect(dist: &Distribution, rate: f64, noise_var: f64, mut lo: f64, mut hi: f64, mut u_lo: f64) -> Result<f64> {
    while hi / lo - 1.0 > ROOT_REL_WIDTH {
        let mid = (lo * hi).sqrt();
        let u = residual(dist, mid, rate, noise_var)?;
        if u == 0.0 {
            return Ok(mid);
        }
        if u.signum() == u_lo.signum() {
            lo = mid;
            u_lo = u;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// `I(X; √β X + N) − (R/2) log β + βσ²/2`.
///
/// This drops the β-independent `−(R/2)(1 + log(R/σ²))` from the η-form of
/// the free energy, which only shifts all values equally.
pub fn free_energy(dist: &Distribution, beta: f64, rate: f64, noise_var: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    let info = scalar_channel::mutual_info(dist, beta)?;
    Ok(free_energy_from_info(info, beta, rate, noise_var))
}

fn free_energy_from_info(info: f64, beta: f64, rate: f64, noise_var: f64) -> f64 {
    info - 0.5 * rate * beta.ln() + 0.5 * beta * noise_var
}

/// Index of the minimizing free energy, ties broken toward larger β.
pub fn select_root(roots: &[f64], free_energies: &[f64]) -> usize {
    let min = free_energies.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = TIE_TOL * min.abs().max(1.0);
    (0..roots.len())
        .filter(|&i| free_energies[i] <= min + tol)
        .max_by(|&a, &b| roots[a].total_cmp(&roots[b]))
        .expect("at least one root")
}

/// Solves the fixed point and selects the free-energy minimizer.
pub fn replica_mse(dist: &Distribution, rate: f64, noise_var: f64) -> Result<ReplicaSolution> {
    let roots = find_roots(dist, rate, noise_var)?;
    solution_from_roots(dist, rate, noise_var, roots)
}

/// Builds the solution record from known roots (ascending).
pub fn solution_from_roots(dist: &Distribution, rate: f64, noise_var: f64, roots: Vec<f64>) -> Result<ReplicaSolution> {
    check_args(dist, rate, noise_var)?;
    // Mutual information accumulated between consecutive roots.
    let mut free_energies = Vec::with_capacity(roots.len());
    let mut info = 0.0;
    let mut prev = 0.0;
    for &b in &roots {
        info += if prev == 0.0 {
            scalar_channel::mutual_info(dist, b)?
        } else {
            scalar_channel::mutual_info_increment(dist, prev, b)?
        };
        prev = b;
        free_energies.push(free_energy_from_info(info, b, rate, noise_var));
    }
    let idx = select_root(&roots, &free_energies);
    let beta = roots[idx];
    Ok(ReplicaSolution {
        rate,
        noise_var,
        selected_beta: beta,
        eta: beta * noise_var / rate,
        dl_mse: ScalarChannel::new(dist, beta)?.mmse()?,
        roots,
        free_energies,
    })
}

/// `d / (R − d)` for `R > d`, infinite otherwise.
pub fn sensitivity_from_dimension(d: f64, rate: f64) -> f64 {
    if rate > d {
        d / (rate - d)
    } else {
        f64::INFINITY
    }
}

/// High-SNR limit of `D_L / σ²` predicted from the information dimension.
pub fn sensitivity_asymptote(dist: &Distribution, rate: f64) -> f64 {
    sensitivity_from_dimension(info_dimension(dist), rate)
}
