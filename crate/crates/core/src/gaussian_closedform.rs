//! Closed-form distortion curves for a unit-variance Gaussian input, the
//! Marčenko–Pastur check of the linear-MMSE curve, and the low-distortion laws
//! for discrete-continuous mixtures.

use crate::dist::MixtureDistribution;
use crate::error::{Error, Result};
use crate::special::{binary_entropy, integrate, QuadOptions};

/// Rates within this of 1 count as the critical regime.
const RATE_EPS: f64 = 1e-12;

/// Distortion of optimal, optimal-linear and random-linear encoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionPoint {
    pub rate: f64,
    pub noise_var: f64,
    pub d_star: f64,
    pub d_star_linear: f64,
    pub d_l: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn d_star_gaussian(rate: f64, noise_var: f64) -> f64 {
    // (1 + 1/σ²)^{-R} = exp(-R log1p(1/σ²))
    (-rate * (1.0 / noise_var).ln_1p()).exp()
}

pub fn d_star_linear_gaussian(rate: f64, noise_var: f64) -> f64 {
    let m = rate.max(1.0);
    // 1 − R/(σ² + m) written to keep precision when σ² ≪ 1 and R ≥ 1
    (noise_var + m - rate) / (noise_var + m)
}

pub fn d_l_gaussian(rate: f64, noise_var: f64) -> f64 {
    let a = 1.0 - rate - noise_var;
    let disc = (1.0 - rate).powi(2) + 2.0 * (1.0 + rate) * noise_var + noise_var * noise_var;
    let root = disc.sqrt();
    if a >= 0.0 {
        0.5 * (a + root)
    } else {
        // ½(a + √disc) = ½(disc − a²)/(√disc − a), and disc − a² = 4σ².
        2.0 * noise_var / (root - a)
    }
}

pub fn gaussian_curves(rate: f64, noise_var: f64) -> Result<DistortionPoint> {
    check_positive("rate", rate)?;
    check_positive("noise variance", noise_var)?;
    Ok(DistortionPoint {
        rate,
        noise_var,
        d_star: d_star_gaussian(rate, noise_var),
        d_star_linear: d_star_linear_gaussian(rate, noise_var),
        d_l: d_l_gaussian(rate, noise_var),
    })
}

/// `∫ 1/(1 + R x/σ²) ν(dx)` for the Marčenko–Pastur law `ν` of ratio `1/R`,
/// computed by quadrature.
///
/// The substitution `x = a + (b − a) sin²θ` removes the square-root edges.
pub fn mp_integral(rate: f64, noise_var: f64) -> Result<f64> {
    check_positive("rate", rate)?;
    check_positive("noise variance", noise_var)?;
    let c = 1.0 / rate;
    let a = (1.0 - c.sqrt()).powi(2);
    let b = (1.0 + c.sqrt()).powi(2);
    let w = b - a;
    let k = rate / noise_var;
    let f = |t: f64| {
        let (s, co) = t.sin_cos();
        let (s2, c2) = (s * s, co * co);
        let x = a + w * s2;
        let jac_density = if a == 0.0 {
            // sin²θ / x = 1/b when the lower edge sits at zero.
            w * w * 2.0 * c2 / (2.0 * std::f64::consts::PI * c * b)
        } else {
            w * w * 2.0 * s2 * c2 / (2.0 * std::f64::consts::PI * c * x)
        };
        jac_density / (1.0 + k * x)
    };
    let q = integrate(f, 0.0, std::f64::consts::FRAC_PI_2, QuadOptions::new(1e-15, 1e-12))?;
    Ok((1.0 - rate).max(0.0) + q.value)
}

/// Worst-case and asymptotic noise sensitivities for a Gaussian input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivities {
    /// `sup_σ² D*/σ²`.
    pub zeta_star: f64,
    /// `lim_{σ²→0} D*/σ²`.
    pub xi_star: f64,
    /// `sup_σ² D*_L/σ²`.
    pub zeta_star_linear: f64,
    /// `sup_σ² D_L/σ²`.
    pub zeta_l: f64,
}

/// `exp(−R h(1/R))` with `h` the binary entropy in nats.
pub fn zeta_star_entropy_form(rate: f64) -> f64 {
    if rate < 1.0 {
        f64::INFINITY
    } else {
        (-rate * binary_entropy(1.0 / rate)).exp()
    }
}

/// `(R − 1)^{R−1} / R^R`, with `0⁰ = 1`.
pub fn zeta_star_product_form(rate: f64) -> f64 {
    if rate < 1.0 {
        f64::INFINITY
    } else {
        (xlog(rate - 1.0) - xlog(rate)).exp()
    }
}

fn xlog(x: f64) -> f64 {
    crate::special::xlogx(x)
}

pub fn gaussian_sensitivities(rate: f64) -> Result<Sensitivities> {
    check_positive("rate", rate)?;
    let critical = (rate - 1.0).abs() <= RATE_EPS;
    let xi_star = if critical {
        1.0
    } else if rate < 1.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(Sensitivities {
        zeta_star: zeta_star_entropy_form(rate),
        xi_star,
        zeta_star_linear: if rate >= 1.0 { 1.0 / rate } else { f64::INFINITY },
        zeta_l: if rate > 1.0 && !critical { 1.0 / (rate - 1.0) } else { f64::INFINITY },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRegime {
    Below,
    Critical,
    Above,
}

impl RateRegime {
    pub fn of(rate: f64) -> Self {
        if (rate - 1.0).abs() <= RATE_EPS {
            RateRegime::Critical
        } else if rate < 1.0 {
            RateRegime::Below
        } else {
            RateRegime::Above
        }
    }
}

/// One curve against its small-noise expansion. `scale` is the order of the
/// last retained term, so `ratio = residual / scale` should vanish with σ².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerm {
    pub exact: f64,
    pub expansion: f64,
    pub residual: f64,
    pub scale: f64,
    pub ratio: f64,
}

impl ExpansionTerm {
    fn new(exact: f64, expansion: f64, scale: f64) -> Self {
        let residual = (exact - expansion).abs();
        ExpansionTerm { exact, expansion, residual, scale, ratio: residual / scale }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionReport {
    pub regime: RateRegime,
    pub d_star: ExpansionTerm,
    pub d_star_linear: ExpansionTerm,
    pub d_l: ExpansionTerm,
}

/// Small-noise expansions of the three Gaussian curves. Requires σ² ≤ 1e-3.
pub fn high_snr_expansions(rate: f64, noise_var: f64) -> Result<ExpansionReport> {
    check_positive("rate", rate)?;
    check_positive("noise variance", noise_var)?;
    if noise_var > 1e-3 {
        return Err(Error::InvalidArgument(format!(
            "expansions need noise variance <= 1e-3, got {noise_var}"
        )));
    }
    let p = gaussian_curves(rate, noise_var)?;
    let s2 = noise_var;
    let sigma = s2.sqrt();
    let lead = s2.powf(rate);
    let regime = RateRegime::of(rate);
    let d_star = ExpansionTerm::new(p.d_star, lead, lead);
    let (d_star_linear, d_l) = match regime {
        RateRegime::Below => (
            ExpansionTerm::new(p.d_star_linear, 1.0 - rate + rate * s2, s2),
            ExpansionTerm::new(p.d_l, 1.0 - rate + rate * s2 / (1.0 - rate), s2),
        ),
        RateRegime::Critical => (
            ExpansionTerm::new(p.d_star_linear, s2, s2),
            ExpansionTerm::new(p.d_l, sigma - s2 / 2.0, sigma),
        ),
        RateRegime::Above => (
            ExpansionTerm::new(p.d_star_linear, s2 / rate, s2),
            ExpansionTerm::new(p.d_l, s2 / (rate - 1.0), s2),
        ),
    };
    Ok(ExpansionReport { regime, d_star, d_star_linear, d_l })
}

/// Low-distortion rate-distortion value (nats) with a flag set when `D` is
/// outside the range where the expansion is trustworthy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdValue {
    pub nats: f64,
    pub out_of_regime: bool,
}

fn continuous_part(mix: &MixtureDistribution) -> Result<(f64, f64, f64, f64)> {
    let gamma = mix.gamma();
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument("mixture has no continuous part".into()));
    }
    Ok((gamma, mix.continuous_variance(), mix.discrete_entropy(), mix.continuous_non_gaussianness()?))
}

/// `(γ/2) log(γ var(P_c)/D) + h(γ) + (1−γ) H(P_d) − γ 𝒟(P_c)`.
pub fn rd_mixture(mix: &MixtureDistribution, distortion: f64) -> Result<RdValue> {
    check_positive("distortion", distortion)?;
    let (gamma, var_c, h_d, non_g) = continuous_part(mix)?;
    let nats = 0.5 * gamma * (gamma * var_c / distortion).ln() + binary_entropy(gamma)
        + (1.0 - gamma) * h_d
        - gamma * non_g;
    Ok(RdValue { nats, out_of_regime: distortion > 0.01 * var_c * gamma })
}

/// Small-noise law `D* ≈ C σ^{2R/γ}` for a mixture input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureAsymptote {
    pub constant: f64,
    pub exponent: f64,
    /// `C σ^{2R/γ}`.
    pub leading: f64,
    /// `lim D*/σ²`: infinite below `γ`, `C` at `γ`, zero above.
    pub xi_star: f64,
    pub infinite_sensitivity: bool,
}

/// Inverts the low-distortion rate-distortion expansion against the channel
/// capacity `(R/2) log(1 + 1/σ²)`.
///
/// `C = var(P_c) · exp(2H(P_d)(1−γ)/γ − 2𝒟(P_c)) / ((1−γ)^{2(1−γ)/γ} γ)`.
pub fn d_star_mixture_asymptote(mix: &MixtureDistribution, rate: f64, noise_var: f64) -> Result<MixtureAsymptote> {
    check_positive("rate", rate)?;
    check_positive("noise variance", noise_var)?;
    let (gamma, var_c, h_d, non_g) = continuous_part(mix)?;
    let q = 1.0 - gamma;
    let log_c = var_c.ln() + 2.0 * h_d * q / gamma - 2.0 * non_g - 2.0 * xlog(q) / gamma - gamma.ln();
    let constant = log_c.exp();
    let exponent = 2.0 * rate / gamma;
    let leading = (log_c + 0.5 * exponent * noise_var.ln()).exp();
    let (xi_star, infinite) = if (rate - gamma).abs() <= RATE_EPS * gamma.max(1.0) {
        (constant, false)
    } else if rate < gamma {
        (f64::INFINITY, true)
    } else {
        (0.0, false)
    };
    Ok(MixtureAsymptote { constant, exponent, leading, xi_star, infinite_sensitivity: infinite })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Atom, ContinuousComponent, WeightedComponent};
    use approx::assert_relative_eq;

    #[test]
    fn unit_case() {
        let p = gaussian_curves(1.0, 1.0).unwrap();
        assert_relative_eq!(p.d_star, 0.5, max_relative = 1e-15);
        assert_relative_eq!(p.d_star_linear, 0.5, max_relative = 1e-15);
        assert_relative_eq!(p.d_l, 0.5 * (5f64.sqrt() - 1.0), max_relative = 1e-15);
    }

    #[test]
    fn no_information_limit() {
        for r in [0.2, 1.0, 3.0] {
            let p = gaussian_curves(r, 1e9).unwrap();
            for v in [p.d_star, p.d_star_linear, p.d_l] {
                assert!((v - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn d_l_branches_agree_near_switch() {
        // a = 1 − R − σ² changes sign at R = 1 − σ²
        let s2 = 0.01;
        let lo = d_l_gaussian(1.0 - s2 - 1e-9, s2);
        let hi = d_l_gaussian(1.0 - s2 + 1e-9, s2);
        assert!((lo - hi).abs() < 1e-8);
    }

    #[test]
    fn mp_integral_matches_closed_form() {
        for (r, s2) in [(2.0, 1.0), (1.0, 1.0), (0.5, 10.0), (0.3, 0.01), (4.0, 1e-4), (1.0, 1e-6)] {
            let q = mp_integral(r, s2).unwrap();
            assert!((q - d_l_gaussian(r, s2)).abs() < 1e-6 * d_l_gaussian(r, s2).max(1e-3), "{r} {s2}");
        }
        assert_relative_eq!(mp_integral(2.0, 1.0).unwrap(), 0.5 * (8f64.sqrt() - 2.0), max_relative = 1e-9);
    }

    #[test]
    fn sensitivity_examples() {
        let s = gaussian_sensitivities(2.0).unwrap();
        assert_relative_eq!(s.zeta_star, 0.25, max_relative = 1e-14);
        assert_eq!(s.zeta_star_linear, 0.5);
        assert_eq!(s.zeta_l, 1.0);
        assert_eq!(s.xi_star, 0.0);
        let s = gaussian_sensitivities(1.0).unwrap();
        assert_eq!(s.zeta_star, 1.0);
        assert_eq!(s.zeta_star_linear, 1.0);
        assert_eq!(s.zeta_l, f64::INFINITY);
        assert_eq!(s.xi_star, 1.0);
        let s = gaussian_sensitivities(0.5).unwrap();
        assert!(s.zeta_star.is_infinite() && s.zeta_star_linear.is_infinite() && s.zeta_l.is_infinite());
        assert!(s.xi_star.is_infinite());
    }

    #[test]
    fn zeta_star_forms_agree() {
        for i in 0..200 {
            let r = 1.0 + i as f64 * 0.05;
            assert_relative_eq!(zeta_star_entropy_form(r), zeta_star_product_form(r), max_relative = 1e-12);
        }
    }

    #[test]
    fn zeta_star_is_the_supremum() {
        // sup over σ² of D*/σ² on a dense grid approaches the closed form from below.
        let r = 2.5;
        let sup = crate::special::log_space(1e-4, 1e4, 20001)
            .into_iter()
            .map(|s2| d_star_gaussian(r, s2) / s2)
            .fold(0.0, f64::max);
        let z = zeta_star_entropy_form(r);
        assert!(sup <= z * (1.0 + 1e-12) && sup > z * (1.0 - 1e-6));
    }

    #[test]
    fn expansions() {
        let rep = high_snr_expansions(1.0, 1e-6).unwrap();
        assert_eq!(rep.regime, RateRegime::Critical);
        assert!(rep.d_l.ratio < 0.05);
        let rep = high_snr_expansions(0.5, 1e-6).unwrap();
        assert!(rep.d_l.residual < 0.05 * 1e-6);
        let rep = high_snr_expansions(2.0, 1e-6).unwrap();
        assert!(rep.d_star.exact / 1e-12 < 1.01 && rep.d_star.exact / 1e-12 > 1.0 / 1.01);
        for r in [0.3, 1.0, 1.7] {
            let rep = high_snr_expansions(r, 1e-6).unwrap();
            for t in [rep.d_star, rep.d_star_linear, rep.d_l] {
                assert!(t.ratio < 0.05, "{r}: {t:?}");
            }
        }
        assert!(high_snr_expansions(1.0, 0.1).is_err());
    }

    #[test]
    fn rd_mixture_examples() {
        let g = MixtureDistribution::continuous(ContinuousComponent::gaussian(0.0, 1.0)).unwrap();
        let v = rd_mixture(&g, 1e-4).unwrap();
        assert_relative_eq!(v.nats, 0.5 * 1e4f64.ln(), max_relative = 1e-9);
        assert!(!v.out_of_regime);
        let sparse = MixtureDistribution::sparse(0.5, ContinuousComponent::gaussian(0.0, 2.0)).unwrap();
        let v = rd_mixture(&sparse, 1e-6).unwrap();
        assert_relative_eq!(v.nats, 0.25 * 1e6f64.ln() + 2f64.ln(), max_relative = 1e-9);
        assert_relative_eq!(v.nats, 4.147025, epsilon = 1e-6);
        let w = rd_mixture(&sparse, 2e-6).unwrap();
        assert_relative_eq!(v.nats - w.nats, 0.25 * 2f64.ln(), max_relative = 1e-9);
        assert!(rd_mixture(&sparse, 0.1).unwrap().out_of_regime);
    }

    #[test]
    fn mixture_asymptote_examples() {
        let g = MixtureDistribution::continuous(ContinuousComponent::gaussian(0.0, 1.0)).unwrap();
        let a = d_star_mixture_asymptote(&g, 1.0, 1e-8).unwrap();
        assert_relative_eq!(a.constant, 1.0, max_relative = 1e-9);
        assert_relative_eq!(a.leading, 1e-8, max_relative = 1e-9);
        assert_relative_eq!(a.xi_star, 1.0, max_relative = 1e-9);
        // Agrees with the exact Gaussian D* to first order.
        assert_relative_eq!(a.leading, d_star_gaussian(1.0, 1e-8), max_relative = 1e-7);

        let s = MixtureDistribution::sparse(0.5, ContinuousComponent::gaussian(0.0, 1.0)).unwrap();
        let a = d_star_mixture_asymptote(&s, 0.5, 1e-6).unwrap();
        assert_relative_eq!(a.constant, 8.0, max_relative = 1e-9);
        assert_relative_eq!(a.xi_star, 8.0, max_relative = 1e-9);
        let a = d_star_mixture_asymptote(&s, 0.3, 1e-6).unwrap();
        assert!(a.infinite_sensitivity && a.xi_star.is_infinite());
        assert_eq!(d_star_mixture_asymptote(&s, 0.9, 1e-6).unwrap().xi_star, 0.0);
    }

    #[test]
    fn asymptote_inverts_rd_expansion() {
        // Plugging the leading D* back into the expansion recovers R·½log(1/σ²).
        let mix = MixtureDistribution::new(
            vec![Atom::new(0.0, 0.5), Atom::new(2.0, 0.2)],
            vec![WeightedComponent { weight: 0.3, component: ContinuousComponent::laplace(1.0, 0.7) }],
        )
        .unwrap();
        let (r, s2) = (0.6, 1e-10);
        let a = d_star_mixture_asymptote(&mix, r, s2).unwrap();
        let rd = rd_mixture(&mix, a.leading).unwrap();
        assert_relative_eq!(rd.nats, 0.5 * r * (1.0 / s2).ln(), max_relative = 1e-9);
    }

    #[test]
    fn ordering_on_grid() {
        for r in crate::special::lin_space(0.05, 4.0, 40) {
            for s2 in crate::special::log_space(1e-8, 1e3, 40) {
                let p = gaussian_curves(r, s2).unwrap();
                assert!(p.d_star <= p.d_star_linear + 1e-12);
                assert!(p.d_star_linear <= p.d_l + 1e-12);
                assert!(p.d_l <= 1.0 + 1e-12);
            }
        }
    }
}
