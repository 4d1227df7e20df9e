//! Phase-transition thresholds of ℓ1 / LASSO / AMP decoding for sparse,
//! sparse-positive and simple signals, and the optimized-LASSO noise
//! sensitivity.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::{norm_pdf, norm_sf, scan_then_golden};

pub const ALPHA_MAX: f64 = 10.0;
pub const ALPHA_STEP: f64 = 1e-3;
pub const ALPHA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalFamily {
    /// Sparse with arbitrary sign.
    Pm,
    /// Sparse and nonnegative.
    Plus,
    /// Entries in `[0, 1]`, most of them saturated.
    Simple,
}

impl SignalFamily {
    pub const ALL: [SignalFamily; 3] = [SignalFamily::Pm, SignalFamily::Plus, SignalFamily::Simple];

    pub fn as_str(self) -> &'static str {
        match self {
            SignalFamily::Pm => "pm",
            SignalFamily::Plus => "plus",
            SignalFamily::Simple => "simple",
        }
    }
}

impl fmt::Display for SignalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignalFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pm" => Ok(SignalFamily::Pm),
            "plus" => Ok(SignalFamily::Plus),
            "simple" => Ok(SignalFamily::Simple),
            _ => Err(Error::InvalidArgument(format!("unknown signal family {s:?}"))),
        }
    }
}

/// `E[(N − α)² 1{N ≥ α}] = (1 + α²) Φ(−α) − α φ(α)`.
pub fn one_sided_tail(alpha: f64) -> f64 {
    ((1.0 + alpha * alpha) * norm_sf(alpha) - alpha * norm_pdf(alpha)).max(0.0)
}

/// `γ(1 + α²) + k(1 − γ)·one_sided_tail(α)` with `k = 2` (±) or `k = 1` (+).
pub fn threshold_objective(family: SignalFamily, gamma: f64, alpha: f64) -> f64 {
    let k = match family {
        SignalFamily::Pm => 2.0,
        SignalFamily::Plus => 1.0,
        SignalFamily::Simple => panic!("the simple-signal threshold has no α objective"),
    };
    gamma * (1.0 + alpha * alpha) + k * (1.0 - gamma) * one_sided_tail(alpha)
}

/// Threshold value and the minimizing α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub rate: f64,
    pub alpha: f64,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..=1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("gamma must lie in [0, 1], got {gamma}")))
    }
}

fn minimize(family: SignalFamily, gamma: f64) -> Result<Threshold> {
    check_gamma(gamma)?;
    let (alpha, rate) = scan_then_golden(|a| threshold_objective(family, gamma, a), 0.0, ALPHA_MAX, ALPHA_STEP, ALPHA_TOL);
    Ok(Threshold { rate, alpha })
}

pub fn r_pm(gamma: f64) -> Result<Threshold> {
    minimize(SignalFamily::Pm, gamma)
}

pub fn r_plus(gamma: f64) -> Result<Threshold> {
    minimize(SignalFamily::Plus, gamma)
}

/// `(γ + 1)/2`.
pub fn r_simple(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(0.5 * (gamma + 1.0))
}

/// Threshold for any family; `alpha` is NaN for simple signals.
pub fn threshold(family: SignalFamily, gamma: f64) -> Result<Threshold> {
    match family {
        SignalFamily::Simple => Ok(Threshold { rate: r_simple(gamma)?, alpha: f64::NAN }),
        f => minimize(f, gamma),
    }
}

/// `R_±(γ) / (R − R_±(γ))` above the threshold, infinite at or below it.
pub fn lasso_sensitivity(gamma: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::InvalidArgument(format!("rate must be positive, got {rate}")));
    }
    let t = r_pm(gamma)?.rate;
    Ok(if rate > t { t / (rate - t) } else { f64::INFINITY })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve {
    pub family: SignalFamily,
    pub gammas: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub optimizer_alphas: Vec<f64>,
}

pub fn threshold_curve(family: SignalFamily, gammas: &[f64]) -> Result<ThresholdCurve> {
    let pts: Vec<Threshold> = gammas.par_iter().map(|&g| threshold(family, g)).collect::<Result<_>>()?;
    Ok(ThresholdCurve {
        family,
        gammas: gammas.to_vec(),
        thresholds: pts.iter().map(|p| p.rate).collect(),
        optimizer_alphas: pts.iter().map(|p| p.alpha).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRow {
    pub gamma: f64,
    /// Threshold of optimal decoding, which equals γ.
    pub optimal: f64,
    pub r_pm: f64,
    pub r_plus: f64,
    pub r_simple: f64,
}

pub fn phase_diagram(gammas: &[f64]) -> Result<Vec<PhaseRow>> {
    gammas
        .par_iter()
        .map(|&g| {
            Ok(PhaseRow {
                gamma: g,
                optimal: g,
                r_pm: r_pm(g)?.rate,
                r_plus: r_plus(g)?.rate,
                r_simple: r_simple(g)?,
            })
        })
        .collect()
}
