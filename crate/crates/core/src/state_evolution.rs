//! Scalar state evolution of soft-threshold AMP / LASSO.
//!
//! The effective noise `τ²` solves `R τ² = σ² + E[(η(X + τN; ατ) − X)²]` and
//! the reconstruction error is `R τ*² − σ²`.

use rayon::prelude::*;

use crate::dist::MixtureDistribution;
use crate::error::{Error, Result};
use crate::special::{golden_section, integrate_breaks, norm_log_diff_cdf, norm_pdf, norm_sf, QuadOptions};

pub const DAMPING: f64 = 0.5;
pub const SE_REL_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 100_000;
/// Divergence is declared once `τ² > DIVERGENCE_FACTOR · (σ² + 1)/R`.
pub const DIVERGENCE_FACTOR: f64 = 1e8;
pub const ALPHA_SCAN_STEP: f64 = 0.01;
pub const ALPHA_SCAN_MAX: f64 = 10.0;

/// `sign(x) · max(|x| − θ, 0)`.
pub fn soft_threshold(x: f64, theta: f64) -> f64 {
    if x >= theta {
        x - theta
    } else if x <= -theta {
        x + theta
    } else {
        0.0
    }
}

/// `E[(N − c)² 1{N ≥ u}]`.
fn shifted_upper_moment(c: f64, u: f64) -> f64 {
    if u == f64::NEG_INFINITY {
        return 1.0 + c * c;
    }
    ((1.0 + c * c) * norm_sf(u) + (u - 2.0 * c) * norm_pdf(u)).max(0.0)
}

/// Risk of soft thresholding at `ατ` for a fixed signal value `a`.
pub fn atom_risk(a: f64, tau: f64, alpha: f64) -> f64 {
    let z = a / tau;
    let u = alpha - z;
    let l = -alpha - z;
    let upper = shifted_upper_moment(alpha, u);
    // (N + α)² 1{N ≤ l} mirrors to (N − α)² 1{N ≥ −l}
    let lower = shifted_upper_moment(alpha, -l);
    let middle = if a == 0.0 { 0.0 } else { a * a * norm_log_diff_cdf(l, u).exp() };
    tau * tau * (upper + lower) + middle
}

/// `E[(η(X + τN; ατ) − X)²]`. Atoms are exact; continuous parts integrate the
/// atom risk against their density.
pub fn se_risk(dist: &MixtureDistribution, tau: f64, alpha: f64) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(tau * tau);
    }
    let mut total = 0.0;
    for atom in dist.atoms() {
        total += atom.mass * atom_risk(atom.value, tau, alpha);
    }
    for wc in dist.components() {
        let c = &wc.component;
        let (lo, hi) = c.window();
        let mut breaks = c.quadrature_breaks();
        // The risk changes shape on the scale of τ around the origin.
        for k in [0.0, alpha, alpha + 8.0] {
            breaks.push(k * tau);
            breaks.push(-k * tau);
        }
        breaks.retain(|&b| b >= lo && b <= hi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let q = integrate_breaks(
            |x| c.density(x) * atom_risk(x, tau, alpha),
            &breaks,
            QuadOptions { abs_tol: 1e-300, rel_tol: 1e-11, max_intervals: 4000 },
        )?;
        total += wc.weight * q.value;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateEvolutionSolution {
    pub alpha: f64,
    pub tau_star_sq: f64,
    /// `R τ*² − σ²`; infinite when the iteration diverged.
    pub mse: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `R τ*² − σ² − risk(τ*, α)`.
    pub residual: f64,
}

impl StateEvolutionSolution {
    fn diverged(alpha: f64, tau_sq: f64, iterations: usize) -> Self {
        StateEvolutionSolution {
            alpha,
            tau_star_sq: tau_sq,
            mse: f64::INFINITY,
            converged: false,
            iterations,
            residual: f64::NAN,
        }
    }
}

/// Damped fixed-point iteration of `τ² ← (σ² + risk(τ, α))/R` from
/// `(σ² + 1)/R`, with an Aitken jump after every two plain steps.
pub fn solve_se(dist: &MixtureDistribution, rate: f64, noise_var: f64, alpha: f64) -> Result<StateEvolutionSolution> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::InvalidArgument(format!("rate must be positive, got {rate}")));
    }
    if !(noise_var >= 0.0) || !noise_var.is_finite() {
        return Err(Error::InvalidArgument(format!("noise variance must be nonnegative, got {noise_var}")));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
    }
    let map = |t2: f64| -> Result<f64> {
        let r = if t2 > 0.0 { se_risk(dist, t2.sqrt(), alpha)? } else { 0.0 };
        Ok((noise_var + r) / rate)
    };
    let step = |t2: f64| -> Result<f64> { Ok((1.0 - DAMPING) * t2 + DAMPING * map(t2)?) };
    let start = (noise_var + 1.0) / rate;
    let limit = DIVERGENCE_FACTOR * start;
    let mut t2 = start;
    // Two plain steps x0 → x1 → x2, then an Aitken jump from (x0, x1, x2).
    let mut x0 = t2;
    let mut x1 = f64::NAN;
    for it in 1..=MAX_ITERATIONS {
        let mut next = step(t2)?;
        if !(next <= limit) {
            return Ok(StateEvolutionSolution::diverged(alpha, next, it));
        }
        // Exact zero fixed point of the noiseless problem.
        if noise_var == 0.0 && next < 1e-250 {
            return Ok(StateEvolutionSolution {
                alpha,
                tau_star_sq: 0.0,
                mse: 0.0,
                converged: true,
                iterations: it,
                residual: 0.0,
            });
        }
        if (next - t2).abs() <= SE_REL_TOL * next {
            let risk = se_risk(dist, next.sqrt(), alpha)?;
            return Ok(StateEvolutionSolution {
                alpha,
                tau_star_sq: next,
                mse: (rate * next - noise_var).max(0.0),
                converged: true,
                iterations: it,
                residual: rate * next - noise_var - risk,
            });
        }
        if x1.is_nan() {
            x1 = next;
        } else {
            let d1 = x1 - x0;
            let d2 = next - x1;
            let denom = d2 - d1;
            if denom != 0.0 {
                let acc = next - d2 * d2 / denom;
                if acc.is_finite() && acc > next * 1e-6 && acc < (next * 1e6).min(limit) {
                    next = acc;
                }
            }
            x0 = next;
            x1 = f64::NAN;
        }
        t2 = next;
    }
    Ok(StateEvolutionSolution {
        alpha,
        tau_star_sq: t2,
        mse: f64::INFINITY,
        converged: false,
        iterations: MAX_ITERATIONS,
        residual: f64::NAN,
    })
}

/// Minimizes the state-evolution error over α: scan on `[0, 10]` with step
/// 0.01, then golden-section refinement around the best point.
pub fn optimize_alpha(dist: &MixtureDistribution, rate: f64, noise_var: f64) -> Result<StateEvolutionSolution> {
    let n = (ALPHA_SCAN_MAX / ALPHA_SCAN_STEP).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| ALPHA_SCAN_MAX * i as f64 / n as f64).collect();
    let sols: Vec<StateEvolutionSolution> =
        grid.par_iter().map(|&a| solve_se(dist, rate, noise_var, a)).collect::<Result<_>>()?;
    let best = (0..sols.len())
        .min_by(|&i, &j| sols[i].mse.total_cmp(&sols[j].mse))
        .expect("non-empty scan");
    if !sols[best].mse.is_finite() {
        return Ok(sols[best]);
    }
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(n)];
    let mut err = None;
    let (alpha, _) = golden_section(
        |a| match solve_se(dist, rate, noise_var, a) {
            Ok(s) => s.mse,
            Err(e) => {
                err.get_or_insert(e);
                f64::INFINITY
            }
        },
        a,
        b,
        1e-6,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let refined = solve_se(dist, rate, noise_var, alpha)?;
    Ok(if refined.mse <= sols[best].mse { refined } else { sols[best] })
}
