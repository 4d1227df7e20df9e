//! Scalar input laws: discrete-continuous mixtures and self-similar digit
//! laws (Cantor-type), with their information-theoretic descriptors.

use std::collections::HashMap;
use std::f64::consts::{E, LN_2, PI};

use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};

use crate::error::{Error, Result};
use crate::special::{self, QuadOptions};

/// Tolerance on `Σ masses + Σ weights = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Half-width, in standard deviations, of the Gaussian quadrature window.
pub const TAIL_SIGMAS: f64 = 12.0;

/// Half-width, in scale units, of the Laplace quadrature window; ±12 sd would
/// leave ~4e-8 of the exponential tail outside.
pub const LAPLACE_TAIL_SCALES: f64 = 40.0;

/// Sampling depth for self-similar laws; `M^-34` is below f64 resolution for
/// every base `M >= 3`.
const SAMPLE_DEPTH: u32 = 34;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub mass: f64,
}

impl Atom {
    pub fn new(value: f64, mass: f64) -> Self {
        Atom { value, mass }
    }
}

/// Named absolutely continuous families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuousComponent {
    Gaussian { mean: f64, variance: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Laplace with density `exp(-|x - location| / scale) / (2 scale)`.
    Laplace { location: f64, scale: f64 },
}

impl ContinuousComponent {
    pub fn gaussian(mean: f64, variance: f64) -> Self {
        ContinuousComponent::Gaussian { mean, variance }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        ContinuousComponent::Uniform { lo, hi }
    }

    pub fn laplace(location: f64, scale: f64) -> Self {
        ContinuousComponent::Laplace { location, scale }
    }

    /// Laplace law with the given variance (`2 scale^2`).
    pub fn laplace_with_variance(location: f64, variance: f64) -> Self {
        ContinuousComponent::Laplace {
            location,
            scale: (variance / 2.0).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ContinuousComponent::Gaussian { mean, variance } => mean.is_finite() && variance > 0.0 && variance.is_finite(),
            ContinuousComponent::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && hi > lo,
            ContinuousComponent::Laplace { location, scale } => location.is_finite() && scale > 0.0 && scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid continuous component {self:?}")))
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            ContinuousComponent::Gaussian { .. } => "gaussian",
            ContinuousComponent::Uniform { .. } => "uniform",
            ContinuousComponent::Laplace { .. } => "laplace",
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            ContinuousComponent::Gaussian { mean, variance } => {
                let sd = variance.sqrt();
                special::norm_pdf((x - mean) / sd) / sd
            }
            ContinuousComponent::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            ContinuousComponent::Laplace { location, scale } => (-(x - location).abs() / scale).exp() / (2.0 * scale),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ContinuousComponent::Gaussian { mean, variance } => special::norm_cdf((x - mean) / variance.sqrt()),
            ContinuousComponent::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            ContinuousComponent::Laplace { location, scale } => {
                let z = (x - location) / scale;
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ContinuousComponent::Gaussian { mean, .. } => mean,
            ContinuousComponent::Uniform { lo, hi } => 0.5 * (lo + hi),
            ContinuousComponent::Laplace { location, .. } => location,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ContinuousComponent::Gaussian { variance, .. } => variance,
            ContinuousComponent::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            ContinuousComponent::Laplace { scale, .. } => 2.0 * scale * scale,
        }
    }

    /// Closed-form differential entropy in nats.
    pub fn differential_entropy(&self) -> f64 {
        match *self {
            ContinuousComponent::Gaussian { variance, .. } => 0.5 * (2.0 * PI * E * variance).ln(),
            ContinuousComponent::Uniform { lo, hi } => (hi - lo).ln(),
            ContinuousComponent::Laplace { scale, .. } => 1.0 + (2.0 * scale).ln(),
        }
    }

    /// Integration window: the support when bounded, otherwise wide enough
    /// that the excluded mass is below 1e-16.
    pub fn window(&self) -> (f64, f64) {
        match *self {
            ContinuousComponent::Uniform { lo, hi } => (lo, hi),
            ContinuousComponent::Gaussian { mean, variance } => {
                let sd = variance.sqrt();
                (mean - TAIL_SIGMAS * sd, mean + TAIL_SIGMAS * sd)
            }
            ContinuousComponent::Laplace { location, scale } => {
                (location - LAPLACE_TAIL_SCALES * scale, location + LAPLACE_TAIL_SCALES * scale)
            }
        }
    }

    /// Window plus interior points where the density is not smooth.
    pub fn quadrature_breaks(&self) -> Vec<f64> {
        let (lo, hi) = self.window();
        match *self {
            ContinuousComponent::Laplace { location, .. } => vec![lo, location, hi],
            _ => vec![lo, self.mean(), hi],
        }
    }

    /// Probability mass outside [`Self::window`].
    pub fn truncated_mass(&self) -> f64 {
        let (lo, hi) = self.window();
        self.cdf(lo) + (1.0 - self.cdf(hi))
    }

    /// `(x - shift) / scale`, applied to the law.
    pub fn affine(&self, shift: f64, scale: f64) -> Self {
        match *self {
            ContinuousComponent::Gaussian { mean, variance } => ContinuousComponent::Gaussian {
                mean: (mean - shift) / scale,
                variance: variance / (scale * scale),
            },
            ContinuousComponent::Uniform { lo, hi } => ContinuousComponent::Uniform {
                lo: (lo - shift) / scale,
                hi: (hi - shift) / scale,
            },
            ContinuousComponent::Laplace { location, scale: b } => ContinuousComponent::Laplace {
                location: (location - shift) / scale,
                scale: b / scale,
            },
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ContinuousComponent::Gaussian { mean, variance } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + variance.sqrt() * z
            }
            ContinuousComponent::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            ContinuousComponent::Laplace { location, scale } => {
                // Inverse CDF on u in (-1/2, 1/2).
                let u: f64 = rng.random::<f64>() - 0.5;
                location - scale * u.signum() * (-2.0 * u.abs()).ln_1p()
            }
        }
    }
}

/// Differential entropy `-∫ f log f` by adaptive quadrature over the window.
pub fn differential_entropy_quadrature(c: &ContinuousComponent) -> Result<f64> {
    let q = special::integrate_breaks(
        |x| {
            let f = c.density(x);
            -special::xlogx(f)
        },
        &c.quadrature_breaks(),
        QuadOptions::new(1e-12, 1e-10),
    )?;
    Ok(q.value)
}

/// Relative entropy from `c` to the Gaussian with the same mean and variance,
/// by quadrature of `f log(f / g)`.
pub fn non_gaussianness(c: &ContinuousComponent) -> Result<f64> {
    c.validate()?;
    let (m, v) = (c.mean(), c.variance());
    let log_g = |x: f64| -0.5 * (x - m).powi(2) / v - 0.5 * (2.0 * PI * v).ln();
    let q = special::integrate_breaks(
        |x| {
            let f = c.density(x);
            if f > 0.0 {
                f * (f.ln() - log_g(x))
            } else {
                0.0
            }
        },
        &c.quadrature_breaks(),
        QuadOptions::new(1e-12, 1e-10),
    )?;
    Ok(q.value.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedComponent {
    pub weight: f64,
    pub component: ContinuousComponent,
}

/// `P_X = Σ mass_i δ_{a_i} + Σ w_j P_j` with `P_j` absolutely continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDistribution {
    atoms: Vec<Atom>,
    continuous: Vec<WeightedComponent>,
}

impl MixtureDistribution {
    pub fn new(atoms: Vec<Atom>, continuous: Vec<WeightedComponent>) -> Result<Self> {
        if atoms.is_empty() && continuous.is_empty() {
            return Err(Error::InvalidArgument("empty mixture".into()));
        }
        for a in &atoms {
            if !(a.mass > 0.0 && a.mass <= 1.0) || !a.value.is_finite() {
                return Err(Error::InvalidArgument(format!("invalid atom {a:?}")));
            }
        }
        for c in &continuous {
            if !(c.weight > 0.0 && c.weight <= 1.0) {
                return Err(Error::InvalidArgument(format!("invalid component weight {}", c.weight)));
            }
            c.component.validate()?;
        }
        let total: f64 = atoms.iter().map(|a| a.mass).sum::<f64>() + continuous.iter().map(|c| c.weight).sum::<f64>();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, expected 1")));
        }
        Ok(MixtureDistribution { atoms, continuous })
    }

    pub fn point_mass(value: f64) -> Self {
        MixtureDistribution {
            atoms: vec![Atom::new(value, 1.0)],
            continuous: vec![],
        }
    }

    pub fn continuous(component: ContinuousComponent) -> Result<Self> {
        Self::new(vec![], vec![WeightedComponent { weight: 1.0, component }])
    }

    /// `(1 - γ) δ_0 + γ P_c`.
    pub fn sparse(gamma: f64, component: ContinuousComponent) -> Result<Self> {
        if gamma >= 1.0 {
            return Self::continuous(component);
        }
        if gamma <= 0.0 {
            return Ok(Self::point_mass(0.0));
        }
        Self::new(vec![Atom::new(0.0, 1.0 - gamma)], vec![WeightedComponent { weight: gamma, component }])
    }

    /// Simple signal: atoms at 0 and 1 with mass `(1-γ)/2` each plus `γ P_c`.
    pub fn simple(gamma: f64, component: ContinuousComponent) -> Result<Self> {
        let half = 0.5 * (1.0 - gamma);
        Self::new(
            vec![Atom::new(0.0, half), Atom::new(1.0, half)],
            vec![WeightedComponent { weight: gamma, component }],
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn components(&self) -> &[WeightedComponent] {
        &self.continuous
    }

    /// Total continuous weight.
    pub fn gamma(&self) -> f64 {
        self.continuous.iter().map(|c| c.weight).sum::<f64>().clamp(0.0, 1.0)
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass * a.value).sum::<f64>()
            + self.continuous.iter().map(|c| c.weight * c.component.mean()).sum::<f64>()
    }

    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass * a.value * a.value).sum::<f64>()
            + self
                .continuous
                .iter()
                .map(|c| c.weight * (c.component.variance() + c.component.mean().powi(2)))
                .sum::<f64>()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        // Centered form avoids cancellation for large means.
        self.atoms.iter().map(|a| a.mass * (a.value - m).powi(2)).sum::<f64>()
            + self
                .continuous
                .iter()
                .map(|c| c.weight * (c.component.variance() + (c.component.mean() - m).powi(2)))
                .sum::<f64>()
    }

    /// Shannon entropy (nats) of the atom masses renormalized to one.
    pub fn discrete_entropy(&self) -> f64 {
        let total = self.atom_mass();
        if total <= 0.0 {
            return 0.0;
        }
        // Merge coincident atoms first.
        let mut merged: HashMap<u64, f64> = HashMap::new();
        for a in &self.atoms {
            *merged.entry(a.value.to_bits()).or_default() += a.mass;
        }
        -merged.values().map(|&m| special::xlogx(m / total)).sum::<f64>()
    }

    /// Mean of the normalized continuous part.
    pub fn continuous_mean(&self) -> f64 {
        let g = self.gamma();
        self.continuous.iter().map(|c| c.weight * c.component.mean()).sum::<f64>() / g
    }

    /// Variance of the normalized continuous part `P_c`.
    pub fn continuous_variance(&self) -> f64 {
        let g = self.gamma();
        let m = self.continuous_mean();
        self.continuous
            .iter()
            .map(|c| c.weight * (c.component.variance() + (c.component.mean() - m).powi(2)))
            .sum::<f64>()
            / g
    }

    fn continuous_density(&self, x: f64) -> f64 {
        let g = self.gamma();
        self.continuous.iter().map(|c| c.weight * c.component.density(x)).sum::<f64>() / g
    }

    /// Non-Gaussianness of the normalized continuous part.
    pub fn continuous_non_gaussianness(&self) -> Result<f64> {
        match self.continuous.as_slice() {
            [] => Err(Error::InvalidArgument("mixture has no continuous part".into())),
            [single] => non_gaussianness(&single.component),
            many => {
                let m = self.continuous_mean();
                let v = self.continuous_variance();
                let mut breaks: Vec<f64> = many.iter().flat_map(|c| c.component.quadrature_breaks()).collect();
                breaks.sort_by(f64::total_cmp);
                breaks.dedup();
                let q = special::integrate_breaks(
                    |x| {
                        let f = self.continuous_density(x);
                        if f > 0.0 {
                            f * (f.ln() + 0.5 * (x - m).powi(2) / v + 0.5 * (2.0 * PI * v).ln())
                        } else {
                            0.0
                        }
                    },
                    &breaks,
                    QuadOptions::new(1e-12, 1e-10),
                )?;
                Ok(q.value.max(0.0))
            }
        }
    }

    pub fn affine(&self, shift: f64, scale: f64) -> Self {
        MixtureDistribution {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new((a.value - shift) / scale, a.mass))
                .collect(),
            continuous: self
                .continuous
                .iter()
                .map(|c| WeightedComponent {
                    weight: c.weight,
                    component: c.component.affine(shift, scale),
                })
                .collect(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut u: f64 = rng.random();
        for a in &self.atoms {
            if u < a.mass {
                return a.value;
            }
            u -= a.mass;
        }
        for c in &self.continuous {
            if u < c.weight {
                return c.component.sample(rng);
            }
            u -= c.weight;
        }
        // Rounding slack lands in the last component.
        match (self.continuous.last(), self.atoms.last()) {
            (Some(c), _) => c.component.sample(rng),
            (None, Some(a)) => a.value,
            (None, None) => unreachable!("validated non-empty"),
        }
    }
}

/// `X = shift + scale · Σ_{i≥1} D_i M^{-i}` with i.i.d. digits `D_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarDistribution {
    base: u32,
    digit_probs: Vec<f64>,
    depth_hint: u32,
    shift: f64,
    scale: f64,
}

impl SelfSimilarDistribution {
    pub fn new(base: u32, digit_probs: Vec<f64>, depth_hint: u32) -> Result<Self> {
        if base < 2 || digit_probs.len() != base as usize {
            return Err(Error::InvalidArgument("need base >= 2 and one probability per digit".into()));
        }
        if digit_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument("digit probabilities must lie in [0,1]".into()));
        }
        let total: f64 = digit_probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidArgument(format!("digit probabilities sum to {total}")));
        }
        if depth_hint == 0 {
            return Err(Error::InvalidArgument("depth_hint must be positive".into()));
        }
        Ok(SelfSimilarDistribution {
            base,
            digit_probs,
            depth_hint,
            shift: 0.0,
            scale: 1.0,
        })
    }

    /// Middle-thirds Cantor law: ternary digits uniform on {0, 2}.
    pub fn cantor() -> Self {
        SelfSimilarDistribution::new(3, vec![0.5, 0.0, 0.5], 12).expect("valid cantor law")
    }

    pub fn with_affine(mut self, shift: f64, scale: f64) -> Self {
        self.shift = shift;
        self.scale = scale;
        self
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digit_probs(&self) -> &[f64] {
        &self.digit_probs
    }

    pub fn depth_hint(&self) -> u32 {
        self.depth_hint
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn digit_entropy(&self) -> f64 {
        -self.digit_probs.iter().map(|&p| special::xlogx(p)).sum::<f64>()
    }

    fn digit_mean(&self) -> f64 {
        self.digit_probs.iter().enumerate().map(|(d, p)| d as f64 * p).sum()
    }

    fn digit_variance(&self) -> f64 {
        let m = self.digit_mean();
        self.digit_probs
            .iter()
            .enumerate()
            .map(|(d, p)| p * (d as f64 - m).powi(2))
            .sum()
    }

    /// Mean of the unscaled digit expansion.
    fn raw_mean(&self) -> f64 {
        self.digit_mean() / (self.base as f64 - 1.0)
    }

    fn raw_variance(&self) -> f64 {
        let m = self.base as f64;
        self.digit_variance() / (m * m - 1.0)
    }

    pub fn mean(&self) -> f64 {
        self.shift + self.scale * self.raw_mean()
    }

    pub fn variance(&self) -> f64 {
        self.scale * self.scale * self.raw_variance()
    }

    /// Variance of the law conditioned on its first `depth` digits.
    pub fn tail_variance(&self, depth: u32) -> f64 {
        self.variance() * (self.base as f64).powi(-2 * depth as i32)
    }

    /// Smallest depth whose tail variance does not exceed `tol`.
    pub fn depth_for_tail_variance(&self, tol: f64) -> u32 {
        let mut d = 1;
        while self.tail_variance(d) > tol && d < 60 {
            d += 1;
        }
        d
    }

    /// Number of atoms of the depth-`depth` truncation.
    pub fn truncated_len(&self, depth: u32) -> usize {
        let k = self.digit_probs.iter().filter(|&&p| p > 0.0).count();
        k.saturating_pow(depth)
    }

    /// Depth-`depth` discrete approximation: one atom per digit string, placed
    /// at the conditional mean of its cell. Atoms are returned sorted.
    pub fn truncated_atoms(&self, depth: u32) -> Vec<Atom> {
        let m = self.base as f64;
        let digits: Vec<(f64, f64)> = self
            .digit_probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(d, &p)| (d as f64, p))
            .collect();
        let mut cells = vec![(0.0f64, 1.0f64)];
        let mut width = 1.0;
        for _ in 0..depth {
            width /= m;
            let mut next = Vec::with_capacity(cells.len() * digits.len());
            for &(lo, p) in &cells {
                for &(d, q) in &digits {
                    next.push((lo + d * width, p * q));
                }
            }
            cells = next;
        }
        let tail_mean = width * self.raw_mean();
        let mut atoms: Vec<Atom> = cells
            .into_iter()
            .map(|(lo, p)| Atom::new(self.shift + self.scale * (lo + tail_mean), p))
            .collect();
        atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
        atoms
    }

    /// Cells `(lo, hi, mass)` of the depth-`depth` digit partition, in the
    /// affine coordinates of the law.
    fn cells(&self, depth: u32) -> Vec<(f64, f64, f64)> {
        let width = (self.base as f64).powi(-(depth as i32));
        let tail_mean = width * self.raw_mean();
        self.truncated_atoms(depth)
            .into_iter()
            .map(|a| {
                let lo = a.value - self.scale * tail_mean;
                let hi = lo + self.scale * width;
                if lo <= hi {
                    (lo, hi, a.mass)
                } else {
                    (hi, lo, a.mass)
                }
            })
            .collect()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let m = self.base as f64;
        let mut x = 0.0;
        let mut w = 1.0;
        for _ in 0..SAMPLE_DEPTH.max(self.depth_hint) {
            w /= m;
            let mut u: f64 = rng.random();
            let mut digit = self.base as usize - 1;
            for (d, &p) in self.digit_probs.iter().enumerate() {
                if p > 0.0 && u < p {
                    digit = d;
                    break;
                }
                u -= p;
            }
            while self.digit_probs[digit] == 0.0 {
                digit -= 1;
            }
            x += digit as f64 * w;
        }
        self.shift + self.scale * x
    }
}

/// Affine map recorded by [`Distribution::standardize`]:
/// `original = mean + std_dev * standardized`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub mean: f64,
    pub std_dev: f64,
}

impl AffineMap {
    pub fn to_original(&self, z: f64) -> f64 {
        self.mean + self.std_dev * z
    }

    pub fn to_standardized(&self, x: f64) -> f64 {
        (x - self.mean) / self.std_dev
    }
}

/// A scalar input law.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Mixture(MixtureDistribution),
    SelfSimilar(SelfSimilarDistribution),
}

impl From<MixtureDistribution> for Distribution {
    fn from(m: MixtureDistribution) -> Self {
        Distribution::Mixture(m)
    }
}

impl From<SelfSimilarDistribution> for Distribution {
    fn from(s: SelfSimilarDistribution) -> Self {
        Distribution::SelfSimilar(s)
    }
}

impl Distribution {
    /// Standardized `(1-γ)δ_0 + γ N(0, σ²)` with unit total variance.
    pub fn standard_sparse_gaussian(gamma: f64) -> Self {
        let m = MixtureDistribution::sparse(gamma, ContinuousComponent::gaussian(0.0, 1.0)).expect("valid sparse law");
        Distribution::Mixture(m).standardize().expect("non-degenerate").0
    }

    pub fn standard_gaussian() -> Self {
        Distribution::Mixture(
            MixtureDistribution::continuous(ContinuousComponent::gaussian(0.0, 1.0)).expect("valid gaussian"),
        )
    }

    /// Standardized Cantor law.
    pub fn standard_cantor() -> Self {
        Distribution::SelfSimilar(SelfSimilarDistribution::cantor())
            .standardize()
            .expect("non-degenerate")
            .0
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Mixture(m) => m.mean(),
            Distribution::SelfSimilar(s) => s.mean(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Distribution::Mixture(m) => m.variance(),
            Distribution::SelfSimilar(s) => s.variance(),
        }
    }

    pub fn second_moment(&self) -> f64 {
        self.variance() + self.mean().powi(2)
    }

    pub fn is_standardized(&self, tol: f64) -> bool {
        self.mean().abs() <= tol && (self.variance() - 1.0).abs() <= tol
    }

    /// Contract check used by the noisy-channel routines.
    pub fn require_standardized(&self) -> Result<()> {
        if self.is_standardized(1e-9) {
            Ok(())
        } else {
            Err(Error::NotStandardized {
                mean: self.mean(),
                variance: self.variance(),
            })
        }
    }

    /// Rescales to zero mean and unit variance and records the affine map.
    pub fn standardize(&self) -> Result<(Distribution, AffineMap)> {
        let mean = self.mean();
        let var = self.variance();
        if !(var > 0.0) || !var.is_finite() {
            return Err(Error::InvalidArgument("cannot standardize a law with zero variance".into()));
        }
        let sd = var.sqrt();
        let map = AffineMap { mean, std_dev: sd };
        let out = match self {
            Distribution::Mixture(m) => Distribution::Mixture(m.affine(mean, sd)),
            Distribution::SelfSimilar(s) => {
                let mut t = s.clone();
                t.shift = (s.shift - mean) / sd;
                t.scale = s.scale / sd;
                Distribution::SelfSimilar(t)
            }
        };
        Ok((out, map))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Distribution::Mixture(m) => m.sample(rng),
            Distribution::SelfSimilar(s) => s.sample(rng),
        }
    }
}

/// Information dimension: the continuous weight for mixtures, the normalized
/// digit entropy for self-similar laws.
pub fn info_dimension(dist: &Distribution) -> f64 {
    match dist {
        Distribution::Mixture(m) => m.gamma(),
        Distribution::SelfSimilar(s) => s.digit_entropy() / (s.base as f64).ln(),
    }
}

/// Shannon entropy of the renormalized discrete part.
pub fn discrete_entropy(dist: &MixtureDistribution) -> f64 {
    dist.discrete_entropy()
}

fn entropy_of(masses: impl Iterator<Item = f64>) -> f64 {
    -masses.map(special::xlogx).sum::<f64>()
}

/// `H(⌊m X⌋) / log m`.
pub fn estimate_info_dimension(dist: &Distribution, m: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidArgument("quantization level must be >= 2".into()));
    }
    let mf = m as f64;
    let h = match dist {
        Distribution::Mixture(mix) => mixture_quantized_entropy(mix, mf)?,
        Distribution::SelfSimilar(s) => self_similar_quantized_entropy(s, m),
    };
    Ok(h / mf.ln())
}

const MAX_BINS: usize = 50_000_000;

fn mixture_quantized_entropy(mix: &MixtureDistribution, m: f64) -> Result<f64> {
    let mut atom_bins: HashMap<i64, f64> = HashMap::new();
    for a in mix.atoms() {
        *atom_bins.entry((m * a.value).floor() as i64).or_default() += a.mass;
    }
    if mix.components().is_empty() {
        return Ok(entropy_of(atom_bins.into_values()));
    }
    let lo = mix
        .components()
        .iter()
        .map(|c| c.component.window().0)
        .fold(f64::INFINITY, f64::min);
    let hi = mix
        .components()
        .iter()
        .map(|c| c.component.window().1)
        .fold(f64::NEG_INFINITY, f64::max);
    let k0 = (m * lo).floor() as i64;
    let k1 = (m * hi).floor() as i64;
    let n_bins = (k1 - k0 + 1) as usize;
    if n_bins > MAX_BINS {
        return Err(Error::InvalidArgument(format!("{n_bins} bins exceed the supported maximum")));
    }
    let mut bins = vec![0.0f64; n_bins];
    for c in mix.components() {
        let mut prev = c.component.cdf(k0 as f64 / m);
        for (i, bin) in bins.iter_mut().enumerate() {
            let right = (k0 + i as i64 + 1) as f64 / m;
            let next = c.component.cdf(right);
            *bin += c.weight * (next - prev).max(0.0);
            prev = next;
        }
    }
    for (k, mass) in atom_bins.iter_mut() {
        if (k0..=k1).contains(k) {
            bins[(*k - k0) as usize] += *mass;
            *mass = 0.0;
        }
    }
    Ok(entropy_of(bins.into_iter().chain(atom_bins.into_values())))
}

fn self_similar_quantized_entropy(s: &SelfSimilarDistribution, m: u64) -> f64 {
    let base = s.base as u64;
    // Exact when the quantizer is aligned with the digit grid.
    if s.shift == 0.0 && s.scale == 1.0 {
        let mut power = 1u64;
        let mut j = 0u32;
        while power < m {
            power = power.saturating_mul(base);
            j += 1;
        }
        if power == m {
            return j as f64 * s.digit_entropy();
        }
    }
    // Otherwise spread each fine cell's mass uniformly over its interval.
    let mut depth = 1;
    while (base as f64).powi(depth as i32) < 64.0 * m as f64 * s.scale.abs() && s.truncated_len(depth + 1) <= 1 << 20 {
        depth += 1;
    }
    let mf = m as f64;
    let mut bins: HashMap<i64, f64> = HashMap::new();
    for (lo, hi, mass) in s.cells(depth) {
        let k_lo = (mf * lo).floor() as i64;
        let k_hi = (mf * hi).floor() as i64;
        if k_lo == k_hi || hi <= lo {
            *bins.entry(k_lo).or_default() += mass;
            continue;
        }
        for k in k_lo..=k_hi {
            let a = (k as f64 / mf).max(lo);
            let b = ((k + 1) as f64 / mf).min(hi);
            if b > a {
                *bins.entry(k).or_default() += mass * (b - a) / (hi - lo);
            }
        }
    }
    entropy_of(bins.into_values())
}

/// Non-Gaussianness in nats of the Gaussian with unit variance minus a law
/// with the given entropy; convenience for closed-form cross-checks.
pub fn gaussian_entropy(variance: f64) -> f64 {
    0.5 * (2.0 * PI * E * variance).ln()
}

/// `log 2 / log 3`.
pub fn cantor_dimension() -> f64 {
    LN_2 / 3f64.ln()
}
