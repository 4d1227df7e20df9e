//! MMSE and mutual information of a scalar prior observed through
//! `Y = sqrt(snr) X + N`, `N ~ N(0,1)`.
//!
//! The MMSE is evaluated as `E[Var(X | Y)]`, which keeps every term
//! non-negative and retains relative accuracy at high SNR where `1 - E[E[X|Y]^2]`
//! would cancel. Posteriors are handled in log space: atoms contribute exact
//! likelihood terms, continuous families their closed-form marginal likelihood
//! and posterior moments.

use crate::dist::{Atom, ContinuousComponent, Distribution};
use crate::error::{Error, Result};
use crate::special::{self, HermiteRule, QuadOptions};

/// Posterior weights below `exp(-45)` of the leading atom are dropped.
const ATOM_WINDOW_LOG_RATIO: f64 = 45.0;
/// Output-density window beyond the extreme atoms; `φ(40) ≈ 1e-348`.
const ATOM_Y_MARGIN: f64 = 40.0;
/// Gaps between scaled atoms wider than twice this get break points this far
/// from each atom; the mass left in the middle is below `Q(9) ≈ 1e-19`.
const GAP_SHOULDER: f64 = 9.0;
/// Self-similar priors are truncated where the tail variance is below
/// `TAIL_FACTOR · min(1, 1/snr)`; each remaining cell is modelled as a
/// Gaussian carrying the tail variance, which keeps the second moment exact.
pub const TAIL_FACTOR: f64 = 1e-3;
/// Below this SNR the mutual information uses `I(t) ≈ t/2 - t²/4`.
const MI_SMALL_SNR: f64 = 1e-8;

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_intervals: 4000,
    }
}

/// One point of the scalar channel curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    pub snr: f64,
    pub mmse: f64,
    pub mutual_info: f64,
}

/// `(log mass, mean, variance)` of `N(mu, sd²)` restricted to `[lo, hi]`.
pub fn truncated_normal(mu: f64, sd: f64, lo: f64, hi: f64) -> (f64, f64, f64) {
    let a = (lo - mu) / sd;
    let b = (hi - mu) / sd;
    let half = 0.5 * (b - a);
    let centre = 0.5 * (a + b);
    if half < 0.25 && centre.abs() * half < 2.5 {
        return narrow_truncated_normal(0.5 * (lo + hi), sd, centre, half);
    }
    // Deep one-sided tails: the closed-form variance is O(1/a²) built from
    // O(a²) terms.
    if b == f64::INFINITY && a >= special::DEEP_TAIL {
        let (log_r, excess, var) = special::normal_tail_moments(a);
        return (special::norm_log_pdf(a) + log_r, lo + sd * excess, sd * sd * var);
    }
    if a == f64::NEG_INFINITY && b <= -special::DEEP_TAIL {
        let (log_r, excess, var) = special::normal_tail_moments(-b);
        return (special::norm_log_pdf(b) + log_r, hi - sd * excess, sd * sd * var);
    }
    let log_z = special::norm_log_diff_cdf(a, b);
    if log_z == f64::NEG_INFINITY {
        // Numerically empty: collapse onto the nearer endpoint.
        let x = if b <= 0.0 { hi } else { lo };
        return (log_z, x, 0.0);
    }
    let ratio = |t: f64| {
        if t.is_finite() {
            (special::norm_log_pdf(t) - log_z).exp()
        } else {
            0.0
        }
    };
    let ra = ratio(a);
    let rb = ratio(b);
    let ta = if a.is_finite() { a * ra } else { 0.0 };
    let tb = if b.is_finite() { b * rb } else { 0.0 };
    let m = ra - rb;
    let v = (1.0 + ta - tb - m * m).max(0.0);
    let mean = (mu + sd * m).clamp(lo, hi);
    (log_z, mean, sd * sd * v)
}

/// Interval much narrower than `sd`: the closed-form variance would be a
/// small difference of O(1) terms, so integrate the tilted density
/// `exp(-c u - u²/2)` on `[-h, h]` by Gauss–Legendre instead.
fn narrow_truncated_normal(mid: f64, sd: f64, c: f64, h: f64) -> (f64, f64, f64) {
    let (nodes, weights) = special::legendre_20();
    let mut z = 0.0;
    let mut m = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        let u = h * x;
        let p = w * (-c * u - 0.5 * u * u).exp();
        z += p;
        m += p * u;
    }
    m /= z;
    let mut v = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        let u = h * x;
        v += w * (-c * u - 0.5 * u * u).exp() * (u - m).powi(2);
    }
    v /= z;
    let log_z = special::norm_log_pdf(c) + (h * z).ln();
    (log_z, mid + sd * m, sd * sd * v)
}

/// Log marginal density of `Y = r X + N` under `c`, with the posterior mean
/// and variance of `X` given `Y = y`.
fn component_posterior(c: &ContinuousComponent, r: f64, y: f64) -> (f64, f64, f64) {
    let s = r * r;
    match *c {
        ContinuousComponent::Gaussian { mean, variance } => {
            let tot = s * variance + 1.0;
            let log_m = special::norm_log_pdf((y - r * mean) / tot.sqrt()) - 0.5 * tot.ln();
            let post_mean = (mean + variance * r * y) / tot;
            (log_m, post_mean, variance / tot)
        }
        ContinuousComponent::Uniform { lo, hi } => {
            let (log_z, m, v) = truncated_normal(y / r, 1.0 / r, lo, hi);
            (log_z - (hi - lo).ln() - r.ln(), m, v)
        }
        ContinuousComponent::Laplace { location, scale } => {
            let mu_y = y / r;
            let sd = 1.0 / r;
            let shift = 1.0 / (s * scale);
            let d = location - mu_y;
            let half = 0.5 / (s * scale * scale);
            // Each side is a Gaussian centred at mu_y ∓ shift, truncated at
            // the location, with log weight ±d/scale + half + ln Φ̄(x). For
            // x ≥ 0 the first and last terms cancel (badly when the prior is
            // much narrower than the noise), and the same weight is
            // ln φ(r d) + ln R(x) with R the Mills ratio.
            let side = |signed_d: f64, x: f64| {
                if x >= 0.0 {
                    special::norm_log_pdf(r * d) + special::log_mills(x)
                } else {
                    signed_d / scale + half + special::norm_log_cdf(-x)
                }
            };
            let (_, m_up, v_up) = truncated_normal(mu_y - shift, sd, location, f64::INFINITY);
            let lw_up = side(d, r * (d + shift));
            let (_, m_dn, v_dn) = truncated_normal(mu_y + shift, sd, f64::NEG_INFINITY, location);
            let lw_dn = side(-d, r * (shift - d));
            let lse = special::log_sum_exp([lw_up, lw_dn]);
            let (p_up, p_dn) = ((lw_up - lse).exp(), (lw_dn - lse).exp());
            let mean = p_up * m_up + p_dn * m_dn;
            let var = p_up * (v_up + (m_up - mean).powi(2)) + p_dn * (v_dn + (m_dn - mean).powi(2));
            (lse - (2.0 * scale).ln() - r.ln(), mean, var)
        }
    }
}

/// Prior prepared for repeated posterior evaluations at one SNR.
#[derive(Debug, Clone)]
pub struct ScalarChannel {
    snr: f64,
    r: f64,
    /// Sorted atom locations scaled by `r`.
    scaled_atoms: Vec<f64>,
    atom_values: Vec<f64>,
    atom_log_mass: Vec<f64>,
    atom_mass: Vec<f64>,
    window_extra: f64,
    components: Vec<(f64, ContinuousComponent)>,
    tail_variance: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Term {
    log_w: f64,
    mean: f64,
    var: f64,
}

impl ScalarChannel {
    /// Prepares `dist` for the channel at `snr`. No standardization check.
    pub fn new(dist: &Distribution, snr: f64) -> Result<Self> {
        Self::with_tail_tolerance(dist, snr, TAIL_FACTOR * (1.0 / snr).min(1.0))
    }

    /// As [`Self::new`], truncating self-similar priors where the tail
    /// variance drops below `tail_tol`.
    pub fn with_tail_tolerance(dist: &Distribution, snr: f64, tail_tol: f64) -> Result<Self> {
        if !(snr > 0.0) || !snr.is_finite() {
            return Err(Error::InvalidArgument(format!("snr must be positive and finite, got {snr}")));
        }
        let mut tail_variance = 0.0;
        let (mut atoms, components): (Vec<Atom>, Vec<(f64, ContinuousComponent)>) = match dist {
            Distribution::Mixture(m) => (
                m.atoms().to_vec(),
                m.components()
                    .iter()
                    .map(|c| (c.weight.ln(), c.component))
                    .collect(),
            ),
            Distribution::SelfSimilar(s) => {
                let depth = s.depth_for_tail_variance(tail_tol);
                tail_variance = s.tail_variance(depth);
                (s.truncated_atoms(depth), vec![])
            }
        };
        atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
        let r = snr.sqrt();
        let (p_min, p_max) = atoms
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), a| (lo.min(a.mass), hi.max(a.mass)));
        let window_extra = if atoms.is_empty() {
            0.0
        } else {
            2.0 * (ATOM_WINDOW_LOG_RATIO + (p_max / p_min).ln())
        };
        Ok(ScalarChannel {
            snr,
            r,
            scaled_atoms: atoms.iter().map(|a| r * a.value).collect(),
            atom_values: atoms.iter().map(|a| a.value).collect(),
            atom_log_mass: atoms.iter().map(|a| a.mass.ln()).collect(),
            atom_mass: atoms.iter().map(|a| a.mass).collect(),
            window_extra,
            components,
            tail_variance,
        })
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    /// Number of atoms used (after self-similar truncation).
    pub fn atom_count(&self) -> usize {
        self.atom_values.len()
    }

    fn atom_range(&self, y: f64) -> (usize, usize) {
        let n = self.scaled_atoms.len();
        if n == 0 {
            return (0, 0);
        }
        let idx = self.scaled_atoms.partition_point(|&v| v < y);
        let near = if idx == 0 {
            0
        } else if idx == n {
            n - 1
        } else if y - self.scaled_atoms[idx - 1] <= self.scaled_atoms[idx] - y {
            idx - 1
        } else {
            idx
        };
        let d = (y - self.scaled_atoms[near]).abs();
        let cut = (d * d + self.window_extra).sqrt() * (1.0 + self.snr * self.tail_variance).sqrt();
        let lo = self.scaled_atoms.partition_point(|&v| v < y - cut);
        let hi = self.scaled_atoms.partition_point(|&v| v <= y + cut);
        (lo, hi)
    }

    fn collect_terms(&self, y: f64, terms: &mut Vec<Term>) {
        terms.clear();
        let (lo, hi) = self.atom_range(y);
        if self.tail_variance == 0.0 {
            for i in lo..hi {
                terms.push(Term {
                    log_w: self.atom_log_mass[i] + special::norm_log_pdf(y - self.scaled_atoms[i]),
                    mean: self.atom_values[i],
                    var: 0.0,
                });
            }
        } else {
            // Each truncated cell is a Gaussian with the tail variance.
            let tv = self.tail_variance;
            let k = 1.0 + self.snr * tv;
            let sk = k.sqrt();
            let log_sk = sk.ln();
            for i in lo..hi {
                let d = y - self.scaled_atoms[i];
                terms.push(Term {
                    log_w: self.atom_log_mass[i] + special::norm_log_pdf(d / sk) - log_sk,
                    mean: self.atom_values[i] + tv * self.r * d / k,
                    var: tv / k,
                });
            }
        }
        for (log_w, c) in &self.components {
            let (log_m, mean, var) = component_posterior(c, self.r, y);
            terms.push(Term {
                log_w: log_w + log_m,
                mean,
                var,
            });
        }
    }

    /// `(log p(y), E[X | y], Var(X | y))`.
    pub fn posterior(&self, y: f64) -> (f64, f64, f64) {
        let mut terms = Vec::new();
        self.posterior_with(y, &mut terms)
    }

    fn posterior_with(&self, y: f64, terms: &mut Vec<Term>) -> (f64, f64, f64) {
        self.collect_terms(y, terms);
        let max = terms.iter().map(|t| t.log_w).fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return (max, 0.0, 0.0);
        }
        let mut z = 0.0;
        let mut m = 0.0;
        for t in terms.iter_mut() {
            t.log_w = (t.log_w - max).exp();
            z += t.log_w;
            m += t.log_w * t.mean;
        }
        let mean = m / z;
        let mut v = 0.0;
        for t in terms.iter() {
            v += t.log_w * (t.var + (t.mean - mean).powi(2));
        }
        (max + z.ln(), mean, v / z)
    }

    pub fn posterior_mean(&self, y: f64) -> f64 {
        self.posterior(y).1
    }

    /// Break points for integrals over `y`: every scaled atom with margins,
    /// and the windows of the continuous components.
    fn y_breaks(&self) -> Vec<f64> {
        let mut breaks = Vec::new();
        if let (Some(&first), Some(&last)) = (self.scaled_atoms.first(), self.scaled_atoms.last()) {
            breaks.push(first - ATOM_Y_MARGIN);
            breaks.push(last + ATOM_Y_MARGIN);
            breaks.extend_from_slice(&self.scaled_atoms);
            // Wide gaps would otherwise be single panels whose nodes all miss
            // the Gaussian shoulders next to the atoms.
            for w in self.scaled_atoms.windows(2) {
                if w[1] - w[0] > 2.0 * GAP_SHOULDER {
                    breaks.push(w[0] + GAP_SHOULDER);
                    breaks.push(w[1] - GAP_SHOULDER);
                }
            }
            // Atom/continuous posterior transitions sit about
            // sqrt(2 log snr) from each atom.
            if !self.components.is_empty() && self.scaled_atoms.len() <= 64 {
                let spread = (2.0 * self.snr.max(1.0).ln() + 2.0).sqrt();
                for &a in &self.scaled_atoms {
                    breaks.push(a - spread);
                    breaks.push(a + spread);
                }
            }
        }
        for (_, c) in &self.components {
            breaks.extend(self.component_window(c));
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        breaks
    }

    fn component_window(&self, c: &ContinuousComponent) -> Vec<f64> {
        let r = self.r;
        match *c {
            ContinuousComponent::Gaussian { mean, variance } => {
                let w = 12.0 * (self.snr * variance + 1.0).sqrt();
                vec![r * mean - w, r * mean, r * mean + w]
            }
            ContinuousComponent::Uniform { lo, hi } => vec![r * lo - 12.0, r * lo, r * hi, r * hi + 12.0],
            ContinuousComponent::Laplace { location, scale } => {
                let w = crate::dist::LAPLACE_TAIL_SCALES * r * scale + 12.0;
                vec![r * location - w, r * location, r * location + w]
            }
        }
    }

    /// `∫ g(log p(y), Var(X|y)) dy` over the output density's support.
    fn integrate_y<G: Fn(f64, f64) -> f64>(&self, g: G) -> Result<f64> {
        let breaks = self.y_breaks();
        let mut terms = Vec::new();
        let opts = QuadOptions {
            max_intervals: quad_opts().max_intervals.max(4 * breaks.len()),
            ..quad_opts()
        };
        let q = special::integrate_breaks(
            |y| {
                let (lp, _, v) = self.posterior_with(y, &mut terms);
                if lp == f64::NEG_INFINITY {
                    0.0
                } else {
                    g(lp, v)
                }
            },
            &breaks,
            opts,
        )?;
        Ok(q.value)
    }

    /// `E[Var(X | Y)] = ∫ p(y) Var(X | y) dy`.
    pub fn mmse(&self) -> Result<f64> {
        self.integrate_y(|lp, v| lp.exp() * v)
    }

    /// Same quantity with the outer expectation over the noise done by an
    /// `n`-point Gauss–Hermite rule per atom; continuous parts use adaptive
    /// quadrature over `y`.
    pub fn mmse_hermite(&self, n: usize) -> Result<f64> {
        let rule = HermiteRule::new(n);
        let mut terms = Vec::new();
        let mut total = 0.0;
        for (i, &ya) in self.scaled_atoms.iter().enumerate() {
            total += self.atom_mass[i] * rule.expect(|z| self.posterior_with(ya + z, &mut terms).2);
        }
        for (log_w, c) in &self.components {
            let breaks = self.component_window(c);
            let q = special::integrate_breaks(
                |y| {
                    let (log_m, _, _) = component_posterior(c, self.r, y);
                    (log_w + log_m).exp() * self.posterior_with(y, &mut terms).2
                },
                &breaks,
                quad_opts(),
            )?;
            total += q.value;
        }
        Ok(total)
    }

    /// `E[-log p(Y)] - ½ log(2πe)`, the mutual information evaluated directly
    /// from the output entropy.
    pub fn mutual_info_direct(&self) -> Result<f64> {
        let h = self.integrate_y(|lp, _| -lp.exp() * lp)?;
        Ok(h - 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln())
    }
}

fn is_point_mass(dist: &Distribution) -> bool {
    dist.variance() == 0.0
}

/// `mmse(X, snr)` for a standardized prior.
pub fn mmse(dist: &Distribution, snr: f64) -> Result<f64> {
    dist.require_standardized()?;
    ScalarChannel::new(dist, snr)?.mmse()
}

/// MMSE without the standardization contract, for priors of any variance.
pub fn mmse_unstandardized(dist: &Distribution, snr: f64) -> Result<f64> {
    if is_point_mass(dist) {
        return Ok(0.0);
    }
    ScalarChannel::new(dist, snr)?.mmse()
}

/// `½ ∫_a^b mmse(t) dt` by Gauss–Kronrod in `log t`.
fn half_mmse_integral(dist: &Distribution, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let (la, lb) = (a.ln(), b.ln());
    // One panel per factor of ten keeps the adaptive start well resolved.
    let panels = (((lb - la) / std::f64::consts::LN_10).ceil() as usize).max(1);
    let breaks: Vec<f64> = (0..=panels).map(|i| la + (lb - la) * i as f64 / panels as f64).collect();
    let mut failure = None;
    let q = special::integrate_breaks(
        |u| {
            let t = u.exp();
            match ScalarChannel::new(dist, t).and_then(|c| c.mmse()) {
                Ok(m) => 0.5 * m * t,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &breaks,
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 2e-7,
            max_intervals: 400,
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(q.value)
}

/// `I(X; sqrt(snr) X + N)` in nats, by the integral of the MMSE over SNR.
pub fn mutual_info(dist: &Distribution, snr: f64) -> Result<f64> {
    if is_point_mass(dist) {
        return Ok(0.0);
    }
    dist.require_standardized()?;
    if !(snr > 0.0) {
        return Err(Error::InvalidArgument(format!("snr must be positive, got {snr}")));
    }
    let head = snr.min(MI_SMALL_SNR);
    let small = 0.5 * head - 0.25 * head * head;
    Ok(small + half_mmse_integral(dist, head, snr)?)
}

/// Mutual information increment `I(b) - I(a)`.
pub fn mutual_info_increment(dist: &Distribution, a: f64, b: f64) -> Result<f64> {
    if a <= 0.0 {
        return mutual_info(dist, b);
    }
    dist.require_standardized()?;
    if b >= a {
        half_mmse_integral(dist, a, b)
    } else {
        half_mmse_integral(dist, b, a).map(|v| -v)
    }
}

/// `(snr, snr · mmse)` along a grid.
pub fn mmse_dimension_profile(dist: &Distribution, snr_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if snr_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("snr grid must be increasing".into()));
    }
    snr_grid.iter().map(|&s| Ok((s, s * mmse(dist, s)?))).collect()
}

/// MMSE and mutual information along an increasing grid; the information is
/// accumulated panel by panel.
pub fn channel_curve(dist: &Distribution, snr_grid: &[f64]) -> Result<Vec<ChannelPoint>> {
    if snr_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("snr grid must be increasing".into()));
    }
    let mut out = Vec::with_capacity(snr_grid.len());
    let mut info = 0.0;
    let mut prev = 0.0;
    for &s in snr_grid {
        info += if prev == 0.0 {
            mutual_info(dist, s)?
        } else {
            mutual_info_increment(dist, prev, s)?
        };
        prev = s;
        out.push(ChannelPoint {
            snr: s,
            mmse: mmse(dist, s)?,
            mutual_info: info,
        });
    }
    Ok(out)
}
