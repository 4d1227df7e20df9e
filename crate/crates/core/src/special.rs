//! Special functions and one-dimensional numerical building blocks shared by
//! the analytic modules: normal distribution functions, entropies, adaptive
//! Gauss–Kronrod quadrature, Gauss–Hermite rules, deep normal tails and
//! golden-section search.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn norm_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Standard normal CDF, `0.5 * erfc(-x / sqrt 2)`.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)` without cancellation.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `log Φ(x)`, accurate in both tails.
pub fn norm_log_cdf(x: f64) -> f64 {
    if x > 5.0 {
        (-norm_sf(x)).ln_1p()
    } else if x > -35.0 {
        norm_cdf(x).ln()
    } else {
        // Asymptotic Mills-ratio series; the truncation error is below 1e-13 here.
        let z = 1.0 / (x * x);
        let series = 1.0 - z * (1.0 - z * (3.0 - z * (15.0 - 105.0 * z)));
        norm_log_pdf(x) - (-x).ln() + series.ln()
    }
}

/// `log(Φ(hi) - Φ(lo))` for `lo < hi`, stable when both arguments sit in the
/// same tail.
pub fn norm_log_diff_cdf(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if lo >= hi {
        return f64::NEG_INFINITY;
    }
    if lo >= 0.0 {
        // Φ(hi) - Φ(lo) = Φ(-lo) - Φ(-hi)
        let a = norm_log_cdf(-lo);
        let b = norm_log_cdf(-hi);
        a + log1mexp(b - a)
    } else if hi <= 0.0 {
        let a = norm_log_cdf(hi);
        let b = norm_log_cdf(lo);
        a + log1mexp(b - a)
    } else {
        // Straddles zero: the two erf values have opposite signs, so the
        // difference keeps full relative precision even for tiny intervals.
        (0.5 * (libm::erf(hi * FRAC_1_SQRT_2) - libm::erf(lo * FRAC_1_SQRT_2))).ln()
    }
}

/// `log(1 - exp(x))` for `x <= 0`.
pub fn log1mexp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

pub fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values
        .clone()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.into_iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `x log x` with the `0 log 0 = 0` convention.
pub fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    -xlogx(p) - xlogx(1.0 - p)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Pairwise summation; the result depends only on the order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// `n` points spaced uniformly in `log` between `lo` and `hi` (inclusive).
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// Adaptive Gauss–Kronrod (7/15) quadrature

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let kronrod = kronrod * h;
    let gauss = gauss * h;
    (kronrod, (kronrod - gauss).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, with the initial panels
/// split at every interior break point.
pub fn integrate_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<Quadrature> {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&mut f, w[0], w[1]);
            evaluations += 15;
            heap.push(Panel {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
    }
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if !value.is_finite() {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                tolerance: tol,
            });
        }
        if error <= tol {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                tolerance: tol,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point.
            return Err(Error::Quadrature {
                estimate: value,
                error,
                tolerance: tol,
            });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Quadrature> {
    integrate_breaks(f, &[a, b], opts)
}

// ---------------------------------------------------------------------------
// Gauss–Hermite rules for the standard normal weight

/// Nodes and weights of an `n`-point Gauss–Hermite rule for `E[f(N)]`,
/// `N ~ N(0,1)`. Weights sum to one.
#[derive(Debug, Clone)]
pub struct HermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl HermiteRule {
    /// Golub–Welsch on the Jacobi matrix of the probabilists' Hermite
    /// polynomials (zero diagonal, off-diagonal `sqrt(i)`).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            let b = (i as f64).sqrt();
            jacobi[(i, i - 1)] = b;
            jacobi[(i - 1, i)] = b;
        }
        let eig = jacobi.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|j| (eig.eigenvalues[j], eig.eigenvectors[(0, j)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Symmetrize: the exact rule is symmetric about zero.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (pairs[j].0 - pairs[i].0);
            let w = 0.5 * (pairs[j].1 + pairs[i].1);
            pairs[i] = (-x, w);
            pairs[j] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        HermiteRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        }
    }

    /// Cached rules for `n` in {64, 128, 256, 512, 1024}.
    pub fn cached(n: usize) -> &'static HermiteRule {
        static RULES: [OnceLock<HermiteRule>; 5] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        let idx = match n {
            64 => 0,
            128 => 1,
            256 => 2,
            512 => 3,
            1024 => 4,
            _ => panic!("no cached Gauss-Hermite rule with {n} nodes"),
        };
        RULES[idx].get_or_init(|| HermiteRule::new(n))
    }

    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// 20-point Gauss–Legendre rule on `[-1, 1]` as `(nodes, weights)`.
pub fn legendre_20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 20;
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            let k = i as f64;
            let b = k / (4.0 * k * k - 1.0).sqrt();
            jacobi[(i, i - 1)] = b;
            jacobi[(i - 1, i)] = b;
        }
        let eig = jacobi.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|j| (eig.eigenvalues[j], 2.0 * eig.eigenvectors[(0, j)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    })
}

/// Standardized arguments at or beyond this use [`normal_tail_moments`].
pub const DEEP_TAIL: f64 = 6.0;

/// 32-point Gauss–Laguerre rule for `∫₀^∞ e^{-t} f(t) dt`.
fn laguerre_32() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 32;
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            jacobi[(i, i)] = (2 * i + 1) as f64;
            if i > 0 {
                jacobi[(i, i - 1)] = i as f64;
                jacobi[(i - 1, i)] = i as f64;
            }
        }
        let eig = jacobi.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|j| (eig.eigenvalues[j], eig.eigenvectors[(0, j)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    })
}

/// `(ln R(a), E[Z − a | Z > a], Var(Z | Z > a))` for `a ≥ DEEP_TAIL`, where
/// `R = Φ̄/φ` is the Mills ratio.
///
/// With `Z = a + t/a` the conditional density is `∝ e^{-t} e^{-t²/2a²}`, so a
/// Laguerre rule gives all three without the `O(a²)` cancellation of the
/// closed forms.
pub fn normal_tail_moments(a: f64) -> (f64, f64, f64) {
    debug_assert!(a >= DEEP_TAIL);
    let (nodes, weights) = laguerre_32();
    let inv = 1.0 / (a * a);
    let g: Vec<f64> = nodes.iter().zip(weights).map(|(&t, &w)| w * (-0.5 * t * t * inv).exp()).collect();
    let i0: f64 = g.iter().sum();
    let m = nodes.iter().zip(&g).map(|(&t, &w)| w * t).sum::<f64>() / i0;
    let v = nodes.iter().zip(&g).map(|(&t, &w)| w * (t - m).powi(2)).sum::<f64>() / i0;
    ((i0 / a).ln(), m / a, v * inv)
}

/// `ln(Φ̄(x)/φ(x))`, accurate for all `x`.
pub fn log_mills(x: f64) -> f64 {
    if x >= DEEP_TAIL {
        normal_tail_moments(x).0
    } else {
        norm_log_cdf(-x) - norm_log_pdf(x)
    }
}

// ---------------------------------------------------------------------------
// Golden-section search

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimizes a unimodal `f` on `[a, b]` until the bracket is narrower than
/// `tol`. Returns `(argmin, min)`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let (mut best_x, mut best_f) = (x, fx);
    for (xx, ff) in [(c, fc), (d, fd)] {
        if ff < best_f {
            best_x = xx;
            best_f = ff;
        }
    }
    (best_x, best_f)
}

/// Global minimization on `[lo, hi]`: uniform scan with `step`, then
/// golden-section refinement inside the bracket around the best scan point.
pub fn scan_then_golden<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, step: f64, tol: f64) -> (f64, f64) {
    let n = ((hi - lo) / step).round() as usize;
    let mut best = (lo, f(lo));
    let mut best_i = 0;
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let a = lo + (hi - lo) * best_i.saturating_sub(1) as f64 / n as f64;
    let b = lo + (hi - lo) * (best_i + 1).min(n) as f64 / n as f64;
    let refined = golden_section(&mut f, a, b, tol);
    if refined.1 <= best.1 {
        refined
    } else {
        best
    }
}

pub fn sqrt_2pi() -> f64 {
    (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn deep_tail_moments_reference_values() {
        // (a, ln R(a), E[Z − a | Z > a], Var(Z | Z > a)) at 50 digits.
        let cases = [
            (6.0, -1.8178304167700329, 0.15848260454459892, 0.023987636789166771),
            (10.0, -2.3123466173077978, 0.098093233962511963, 0.0094453778256562612),
            (37.5, -3.6250507843025183, 0.026628874883653599, 0.00070809488542074585),
            (158.0, -5.062635086699278, 0.0063286069662993532, 4.004805856830787e-5),
            (1e3, -6.9077562789796371, 0.00099999800000999993, 9.9999400004999948e-7),
        ];
        for (a, lr, d, v) in cases {
            let (lr_, d_, v_) = normal_tail_moments(a);
            assert_relative_eq!(lr_, lr, max_relative = 1e-14);
            assert_relative_eq!(d_, d, max_relative = 1e-13);
            assert_relative_eq!(v_, v, max_relative = 1e-13);
        }
        // Both branches of log_mills meet at the switch.
        let below = norm_log_cdf(-DEEP_TAIL) - norm_log_pdf(DEEP_TAIL);
        assert_relative_eq!(log_mills(DEEP_TAIL), below, max_relative = 1e-13);
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert_relative_eq!(norm_cdf(0.0), 0.5, epsilon = 1e-16);
        assert_relative_eq!(norm_cdf(-1.0), 0.158_655_253_931_457_05, max_relative = 1e-15);
        assert_relative_eq!(norm_sf(5.0), 2.866_515_718_791_939e-7, max_relative = 1e-14);
        assert_relative_eq!(norm_cdf(-10.0), 7.619_853_024_160_527e-24, max_relative = 1e-13);
    }

    #[test]
    fn log_cdf_tails_are_continuous() {
        for &x in &[-34.9, -35.0, -35.1] {
            let direct = norm_cdf(x).ln();
            assert_relative_eq!(norm_log_cdf(x), direct, max_relative = 1e-12);
        }
        // Far tail against the leading asymptotic.
        let x = -200.0;
        let lead = norm_log_pdf(x) - (-x).ln();
        assert!((norm_log_cdf(x) - lead).abs() < 1e-4);
        assert!(norm_log_cdf(8.0).abs() < 1e-14);
    }

    #[test]
    fn log_diff_cdf_matches_direct_in_bulk_and_tails() {
        let direct = (norm_cdf(1.0) - norm_cdf(-0.5)).ln();
        assert_relative_eq!(norm_log_diff_cdf(-0.5, 1.0), direct, max_relative = 1e-14);
        let direct = (norm_sf(3.0) - norm_sf(4.0)).ln();
        assert_relative_eq!(norm_log_diff_cdf(3.0, 4.0), direct, max_relative = 1e-13);
        // Deep tail: interval [40, 41] ~ log φ(40)/40.
        let v = norm_log_diff_cdf(40.0, 41.0);
        let lead = norm_log_pdf(40.0) - 40f64.ln();
        assert!((v - lead).abs() < 1e-3);
    }

    #[test]
    fn gk_integrates_polynomials_and_gaussians() {
        let q = integrate(|x| x.powi(6), 0.0, 2.0, QuadOptions::default()).unwrap();
        assert_relative_eq!(q.value, 128.0 / 7.0, max_relative = 1e-13);
        let q = integrate(norm_pdf, -12.0, 12.0, QuadOptions::default()).unwrap();
        assert_relative_eq!(q.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn gk_handles_endpoint_singularity_with_enough_panels() {
        let q = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions::new(1e-9, 1e-9)).unwrap();
        assert_relative_eq!(q.value, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn hermite_rule_reproduces_normal_moments() {
        for &n in &[64usize, 128, 256] {
            let rule = HermiteRule::cached(n);
            assert_relative_eq!(rule.expect(|_| 1.0), 1.0, epsilon = 1e-14);
            assert!(rule.expect(|x| x).abs() < 1e-13);
            assert_relative_eq!(rule.expect(|x| x * x), 1.0, max_relative = 1e-12);
            assert_relative_eq!(rule.expect(|x| x.powi(4)), 3.0, max_relative = 1e-12);
            assert_relative_eq!(rule.expect(|x| x.powi(8)), 105.0, max_relative = 1e-11);
            // E[cos N] = e^{-1/2}
            assert_relative_eq!(rule.expect(f64::cos), (-0.5f64).exp(), max_relative = 1e-13);
        }
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = legendre_20();
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        let m38: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(38)).sum();
        assert_relative_eq!(m38, 2.0 / 39.0, max_relative = 1e-12);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(|x| (x - 1.3).powi(2), 0.0, 4.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-8);
        assert!(fx < 1e-16);
        let (x, _) = scan_then_golden(|x| (x - 7.77).powi(2), 0.0, 10.0, 1e-3, 1e-10);
        assert!((x - 7.77).abs() < 1e-8);
    }

    #[test]
    fn entropies() {
        assert_relative_eq!(binary_entropy(0.5), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
    }

    #[test]
    fn pairwise_sum_matches_naive_sum() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_relative_eq!(pairwise_sum(&v), v.iter().sum::<f64>(), max_relative = 1e-15);
    }
}
