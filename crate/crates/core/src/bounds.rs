//! Achievability constants for linear encoding of discrete-continuous
//! mixtures: decoder Lipschitz constants, the worst-case noise-sensitivity
//! bound for Gaussian matrices, and the subspace-count exponent.
//!
//! Entropies are in nats.

use crate::error::{Error, Result};
use crate::special::{binary_entropy, xlogx};

/// Margin by which the shrinkage inequality must hold.
pub const SHRINKAGE_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AchievabilityBound {
    pub gamma: f64,
    pub rate: f64,
    pub discrete_entropy: f64,
    pub lipschitz: f64,
    pub sensitivity_bound: f64,
}

fn check(gamma: f64, h_pd: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !(h_pd >= 0.0) || !h_pd.is_finite() {
        return Err(Error::InvalidArgument(format!("discrete entropy must be nonnegative, got {h_pd}")));
    }
    Ok(())
}

fn log_lipschitz(gamma: f64, h_pd: f64, rate: f64) -> f64 {
    let gap = rate - gamma;
    0.5 * rate.ln() - gap.ln()
        + gamma / gap * (rate / gamma).ln()
        + (h_pd * (1.0 - gamma) + binary_entropy(gamma)) / gap
        + 0.5
}

/// `√R/(R−γ) · (R/γ)^{γ/(R−γ)} · exp((H(1−γ) + h(γ))/(R−γ) + ½)`; infinite
/// for `R ≤ γ`.
pub fn lipschitz_constant(gamma: f64, h_pd: f64, rate: f64) -> Result<f64> {
    check(gamma, h_pd)?;
    if rate <= gamma {
        return Ok(f64::INFINITY);
    }
    Ok(log_lipschitz(gamma, h_pd, rate).exp())
}

/// The sparse form `√(eR)/(R−γ) · (R/γ²)^{γ/(R−γ)} · (1/(1−γ))^{(1−γ)/(R−γ)}`.
pub fn lipschitz_constant_sparse(gamma: f64, rate: f64) -> Result<f64> {
    check(gamma, 0.0)?;
    if rate <= gamma {
        return Ok(f64::INFINITY);
    }
    let gap = rate - gamma;
    let log = 0.5 * (std::f64::consts::E * rate).ln() - gap.ln() + gamma / gap * (rate / (gamma * gamma)).ln()
        - (1.0 - gamma) / gap * (1.0 - gamma).ln();
    Ok(log.exp())
}

/// `R²/(R−γ)² · (R/γ)^{2γ/(R−γ)} · exp((2H(1−γ) + 2h(γ))/(R−γ) + 1)`.
pub fn sensitivity_upper_bound(gamma: f64, h_pd: f64, rate: f64) -> Result<f64> {
    check(gamma, h_pd)?;
    if rate <= gamma {
        return Ok(f64::INFINITY);
    }
    let gap = rate - gamma;
    let log = 2.0 * rate.ln() - 2.0 * gap.ln()
        + 2.0 * gamma / gap * (rate / gamma).ln()
        + (2.0 * h_pd * (1.0 - gamma) + 2.0 * binary_entropy(gamma)) / gap
        + 1.0;
    Ok(log.exp())
}

pub fn achievability_bound(gamma: f64, h_pd: f64, rate: f64) -> Result<AchievabilityBound> {
    Ok(AchievabilityBound {
        gamma,
        rate,
        discrete_entropy: h_pd,
        lipschitz: lipschitz_constant(gamma, h_pd, rate)?,
        sensitivity_bound: sensitivity_upper_bound(gamma, h_pd, rate)?,
    })
}

/// `(H + δ')(1 − γ + δ) + max{h(γ + δ), h(γ − δ)}`.
pub fn subspace_count_exponent(gamma: f64, delta: f64, delta_p: f64, h_pd: f64) -> Result<f64> {
    check(gamma, h_pd)?;
    if !(delta >= 0.0 && delta_p >= 0.0) {
        return Err(Error::InvalidArgument("slacks must be nonnegative".into()));
    }
    if !(gamma - delta > 0.0 && gamma + delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma ± delta must stay inside (0, 1), got {} and {}",
            gamma - delta,
            gamma + delta
        )));
    }
    Ok((h_pd + delta_p) * (1.0 - gamma + delta) + binary_entropy(gamma + delta).max(binary_entropy(gamma - delta)))
}

/// Left side of the shrinkage inequality at `log t`, with `a = (γ + δ)/R`:
/// `(R(1−a)/2) log(R(1−a)²/(e t²)) + (R a/2) log a`.
fn shrinkage_lhs(rate: f64, a: f64, log_t: f64) -> f64 {
    let q = 1.0 - a;
    0.5 * rate * q * ((rate * q * q).ln() - 1.0 - 2.0 * log_t) + 0.5 * rate * xlogx(a)
}

/// Largest `t` for which the shrinkage inequality holds strictly (by
/// [`SHRINKAGE_MARGIN`]), found by bisection on `log t`. The decoder built
/// from it is `1/t`-Lipschitz.
pub fn min_shrinkage_t(gamma: f64, h_pd: f64, rate: f64, delta: f64, delta_p: f64) -> Result<f64> {
    if !(delta > 0.0 && delta_p > 0.0) {
        return Err(Error::InvalidArgument("slacks must be positive".into()));
    }
    if !(rate > gamma + delta) {
        return Err(Error::Unsatisfiable(format!(
            "rate {rate} must exceed gamma + delta = {}",
            gamma + delta
        )));
    }
    let rhs = subspace_count_exponent(gamma, delta, delta_p, h_pd)?;
    let a = (gamma + delta) / rate;
    let holds = |log_t: f64| shrinkage_lhs(rate, a, log_t) - rhs > SHRINKAGE_MARGIN;
    // The left side decreases in t and diverges as t → 0.
    let (mut lo, mut hi) = (-700.0f64, 50.0f64);
    if !holds(lo) {
        return Err(Error::Unsatisfiable(format!("no t above e^{lo} satisfies the inequality")));
    }
    if holds(hi) {
        return Ok(hi.exp());
    }
    while hi - lo > 1e-14 * lo.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo.exp())
}

/// Limit of `1/t` from [`min_shrinkage_t`] as both slacks vanish:
/// `√(eR)/(R−γ) · (R/γ)^{γ/(2(R−γ))} · exp((H(1−γ) + h(γ))/(R−γ))`.
pub fn shrinkage_lipschitz_limit(gamma: f64, h_pd: f64, rate: f64) -> Result<f64> {
    check(gamma, h_pd)?;
    if rate <= gamma {
        return Ok(f64::INFINITY);
    }
    let gap = rate - gamma;
    let log = 0.5 * (std::f64::consts::E * rate).ln() - gap.ln()
        + 0.5 * gamma / gap * (rate / gamma).ln()
        + (h_pd * (1.0 - gamma) + binary_entropy(gamma)) / gap;
    Ok(log.exp())
}
