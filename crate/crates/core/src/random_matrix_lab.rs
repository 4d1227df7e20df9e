//! Finite-n Monte Carlo with random sensing matrices: exact linear-MMSE
//! traces, soft-threshold AMP, and least singular values against Edelman's
//! density bound.
//!
//! Matrices use the row-normalized convention: entries have variance `1/n`, so
//! the encoded signal has unit power per measurement.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algo_thresholds::r_pm;
use crate::dist::{ContinuousComponent, MixtureDistribution};
use crate::error::{Error, Result};
use crate::special::{ln_gamma, log_sum_exp, pairwise_sum};
use crate::state_evolution::soft_threshold;

pub const GENERATOR: &str = "ChaCha8Rng seeded from master_seed, stream = trial index";
pub const NORMAL_METHOD: &str = "rand_distr::StandardNormal (ziggurat)";
/// AMP stops when `‖x_{t+1} − x_t‖ ≤ AMP_STALL · ‖x_{t+1}‖`.
pub const AMP_STALL: f64 = 1e-9;
/// AMP reports divergence once `‖x‖/√n` exceeds this.
pub const AMP_DIVERGENCE: f64 = 1e6;
/// Per-coordinate error below which a noiseless AMP run counts as recovery.
pub const RECOVERY_MSE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    #[default]
    Gaussian,
    Rademacher,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// Gaussian input, optimal (linear) estimator: `(1/n) Tr((I + σ⁻² AᵀA)⁻¹)`.
    #[default]
    LinearMmse,
    /// Soft-threshold AMP on `(1 − γ)δ₀ + γ N(0, 1/γ)`; α defaults to the
    /// noiseless threshold minimizer.
    Amp { gamma: f64, alpha: Option<f64>, max_iters: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub rate: f64,
    pub noise_var: f64,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub ensemble: Ensemble,
    #[serde(default)]
    pub experiment: Experiment,
}

impl SimConfig {
    pub fn new(n: usize, rate: f64, noise_var: f64, trials: usize, master_seed: u64) -> Self {
        SimConfig {
            n,
            rate,
            noise_var,
            trials,
            master_seed,
            ensemble: Ensemble::Gaussian,
            experiment: Experiment::LinearMmse,
        }
    }

    /// `floor(R n)`.
    pub fn k(&self) -> usize {
        (self.rate * self.n as f64).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n < 8 {
            return bad(format!("n must be at least 8, got {}", self.n));
        }
        if !(self.rate > 0.0) || !self.rate.is_finite() {
            return bad(format!("rate must be positive, got {}", self.rate));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.k() == 0 {
            return bad("floor(rate * n) must be at least 1".into());
        }
        if !(self.noise_var >= 0.0) || !self.noise_var.is_finite() {
            return bad(format!("noise variance must be nonnegative, got {}", self.noise_var));
        }
        match self.experiment {
            Experiment::LinearMmse if self.noise_var == 0.0 => {
                bad("the linear-MMSE experiment needs positive noise variance".into())
            }
            Experiment::Amp { gamma, .. } if !(gamma > 0.0 && gamma < 1.0) => {
                bad(format!("gamma must lie in (0, 1), got {gamma}"))
            }
            _ => Ok(()),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = crate::config::parse_toml(text, "simulation")?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub mean_mse: f64,
    pub stderr: f64,
    pub per_trial: Vec<f64>,
    /// Trials where AMP diverged (always zero for the linear experiment).
    pub diverged: usize,
    pub generator: String,
    pub normal_method: String,
    /// Wall-clock time; not serialized so reports stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl PartialEq for SimReport {
    fn eq(&self, other: &Self) -> bool {
        self.mean_mse.to_bits() == other.mean_mse.to_bits()
            && self.stderr.to_bits() == other.stderr.to_bits()
            && self.per_trial.len() == other.per_trial.len()
            && self.per_trial.iter().zip(&other.per_trial).all(|(a, b)| a.to_bits() == b.to_bits())
            && self.diverged == other.diverged
            && self.generator == other.generator
            && self.normal_method == other.normal_method
    }
}

/// Independent stream for one trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// `rows × cols` matrix with i.i.d. entries of variance `var`.
pub fn sample_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, var: f64, ensemble: Ensemble) -> DMatrix<f64> {
    let sd = var.sqrt();
    match ensemble {
        Ensemble::Gaussian => DMatrix::from_fn(rows, cols, |_, _| sd * rng.sample::<f64, _>(StandardNormal)),
        Ensemble::Rademacher => DMatrix::from_fn(rows, cols, |_, _| if rng.random::<bool>() { sd } else { -sd }),
    }
}

pub fn sample_normal_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> DVector<f64> {
    DVector::from_iterator(len, (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// `(1/n) Tr((I + σ⁻² HᵀH)⁻¹)` for a `k × n` matrix, through the eigenvalues
/// of the smaller Gram matrix.
pub fn exact_linear_mmse_trace(h: &DMatrix<f64>, noise_var: f64) -> Result<f64> {
    if !(noise_var > 0.0) {
        return Err(Error::InvalidArgument(format!("noise variance must be positive, got {noise_var}")));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let (k, n) = h.shape();
    let gram = if k < n { h * h.transpose() } else { h.transpose() * h };
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let terms: Vec<f64> = eig.iter().map(|&l| 1.0 / (1.0 + l.max(0.0) / noise_var)).collect();
    let zeros = n - eig.len();
    Ok((pairwise_sum(&terms) + zeros as f64) / n as f64)
}

fn summarize(per_trial: Vec<f64>, diverged: usize, start: Instant) -> SimReport {
    let t = per_trial.len() as f64;
    let mean = pairwise_sum(&per_trial) / t;
    let dev: Vec<f64> = per_trial.iter().map(|v| (v - mean).powi(2)).collect();
    let var = if per_trial.len() > 1 { pairwise_sum(&dev) / (t - 1.0) } else { 0.0 };
    SimReport {
        mean_mse: mean,
        stderr: (var / t).sqrt(),
        per_trial,
        diverged,
        generator: GENERATOR.into(),
        normal_method: NORMAL_METHOD.into(),
        elapsed: start.elapsed(),
    }
}

/// Monte Carlo estimate of the random-linear-encoder MMSE for a Gaussian input.
pub fn empirical_dl_gaussian(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let start = Instant::now();
    let (n, k) = (cfg.n, cfg.k());
    let per_trial: Vec<f64> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.master_seed, trial);
            let a = sample_matrix(&mut rng, k, n, 1.0 / n as f64, cfg.ensemble);
            exact_linear_mmse_trace(&a, cfg.noise_var)
        })
        .collect::<Result<_>>()?;
    Ok(summarize(per_trial, 0, start))
}

// ---------------------------------------------------------------------------
// AMP

#[derive(Debug, Clone, PartialEq)]
pub struct AmpResult {
    pub estimate: DVector<f64>,
    /// Per-coordinate squared error after each iteration (empty without truth).
    pub mse_trace: Vec<f64>,
    pub iterations: usize,
    pub diverged: bool,
}

impl AmpResult {
    pub fn final_mse(&self) -> f64 {
        self.mse_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Soft-threshold AMP with Onsager correction.
///
/// `matrix` is row-normalized (variance `1/n`). The iteration runs in the
/// column-normalized convention (variance `1/k`), reached by dividing matrix
/// and measurements by `s = √(k/n)`, i.e. `√R`. The threshold at step `t` is
/// `α τ_t` with `τ_t = ‖z_t‖/√k`.
pub fn amp_decode(
    matrix: &DMatrix<f64>,
    y: &DVector<f64>,
    alpha: f64,
    max_iters: usize,
    truth: Option<&DVector<f64>>,
) -> Result<AmpResult> {
    let (k, n) = matrix.shape();
    if y.len() != k {
        return Err(Error::InvalidArgument(format!("measurement length {} does not match {k} rows", y.len())));
    }
    if let Some(x0) = truth {
        if x0.len() != n {
            return Err(Error::InvalidArgument(format!("truth length {} does not match {n} columns", x0.len())));
        }
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
    }
    let s = (k as f64 / n as f64).sqrt();
    let inv_s = 1.0 / s;
    let delta = k as f64 / n as f64;
    let y_t = y * inv_s;
    let mut x = DVector::<f64>::zeros(n);
    let mut z = y_t.clone();
    let mut trace = Vec::new();
    let mut diverged = false;
    let mut iterations = 0;
    for _ in 0..max_iters {
        iterations += 1;
        let tau = z.norm() / (k as f64).sqrt();
        let theta = alpha * tau;
        // Pseudo-data x + Ãᵀz with Ã = A / s.
        let pseudo = &x + matrix.tr_mul(&z) * inv_s;
        let mut active = 0usize;
        let x_new = pseudo.map(|v| {
            let e = soft_threshold(v, theta);
            if e != 0.0 {
                active += 1;
            }
            e
        });
        let onsager = active as f64 / (n as f64 * delta);
        z = &y_t - (matrix * &x_new) * inv_s + &z * onsager;
        let change = (&x_new - &x).norm();
        x = x_new;
        if let Some(x0) = truth {
            trace.push((&x - x0).norm_squared() / n as f64);
        }
        if !(x.norm() / (n as f64).sqrt() <= AMP_DIVERGENCE) {
            diverged = true;
            break;
        }
        if change <= AMP_STALL * x.norm() {
            break;
        }
    }
    Ok(AmpResult { estimate: x, mse_trace: trace, iterations, diverged })
}

/// `(1 − γ)δ₀ + γ N(0, 1/γ)`, unit variance.
pub fn standard_sparse_prior(gamma: f64) -> Result<MixtureDistribution> {
    MixtureDistribution::sparse(gamma, ContinuousComponent::gaussian(0.0, 1.0 / gamma))
}

fn amp_trial(
    cfg: &SimConfig,
    prior: &MixtureDistribution,
    alpha: f64,
    max_iters: usize,
    trial: u64,
) -> Result<AmpResult> {
    let mut rng = trial_rng(cfg.master_seed, trial);
    let (n, k) = (cfg.n, cfg.k());
    let a = sample_matrix(&mut rng, k, n, 1.0 / n as f64, cfg.ensemble);
    let x0 = DVector::from_iterator(n, (0..n).map(|_| prior.sample(&mut rng)));
    let mut y = &a * &x0;
    if cfg.noise_var > 0.0 {
        y += sample_normal_vector(&mut rng, k) * cfg.noise_var.sqrt();
    }
    amp_decode(&a, &y, alpha, max_iters, Some(&x0))
}

pub const DEFAULT_AMP_ITERS: usize = 1000;

/// AMP Monte Carlo for [`Experiment::Amp`] configurations.
pub fn empirical_amp(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let Experiment::Amp { gamma, alpha, max_iters } = cfg.experiment else {
        return Err(Error::InvalidArgument("configuration is not an AMP experiment".into()));
    };
    let start = Instant::now();
    let prior = standard_sparse_prior(gamma)?;
    let alpha = match alpha {
        Some(a) => a,
        None => r_pm(gamma)?.alpha,
    };
    let iters = max_iters.unwrap_or(DEFAULT_AMP_ITERS);
    let runs: Vec<AmpResult> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| amp_trial(cfg, &prior, alpha, iters, t))
        .collect::<Result<_>>()?;
    let diverged = runs.iter().filter(|r| r.diverged).count();
    let per_trial = runs.iter().map(|r| if r.diverged { f64::INFINITY } else { r.final_mse() }).collect();
    Ok(summarize(per_trial, diverged, start))
}

/// Dispatches on the configured experiment.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimReport> {
    match cfg.experiment {
        Experiment::LinearMmse => empirical_dl_gaussian(cfg),
        Experiment::Amp { .. } => empirical_amp(cfg),
    }
}

/// Noiseless AMP success fractions; `result[i][j]` is for `gammas[i]`,
/// `rates[j]`. Each cell uses α from the noiseless threshold minimizer.
pub fn noiseless_pt_scan(gammas: &[f64], rates: &[f64], n: usize, trials: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n > 4000 {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds the desk-scale limit 4000")));
    }
    let mut out = Vec::with_capacity(gammas.len());
    for (gi, &g) in gammas.iter().enumerate() {
        let mut row = Vec::with_capacity(rates.len());
        for (ri, &r) in rates.iter().enumerate() {
            let cfg = SimConfig {
                n,
                rate: r,
                noise_var: 0.0,
                trials,
                // Distinct master seed per cell.
                master_seed: seed ^ ((gi as u64) << 32 | ri as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                ensemble: Ensemble::Gaussian,
                experiment: Experiment::Amp { gamma: g, alpha: None, max_iters: None },
            };
            let rep = empirical_amp(&cfg)?;
            let ok = rep.per_trial.iter().filter(|&&m| m < RECOVERY_MSE).count();
            row.push(ok as f64 / trials as f64);
        }
        out.push(row);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Least singular value

/// `ln E_{k,m}` in Edelman's density bound for the least eigenvalue of an
/// `m × m` Wishart matrix with `k` degrees of freedom.
pub fn log_edelman_constant(k: usize, m: usize) -> f64 {
    let (k, m) = (k as f64, m as f64);
    let d = k - m + 1.0;
    0.5 * std::f64::consts::PI.ln() - 0.5 * d * std::f64::consts::LN_2 + ln_gamma(0.5 * (k + 1.0))
        - ln_gamma(0.5 * m)
        - ln_gamma(0.5 * d)
        - ln_gamma(0.5 * (d + 1.0))
}

/// `ln` of `2 k^{(k−m+1)/2} E_{k,m} t^{k−m+1} / (k−m+1)`, an upper bound on
/// `P(σ_min ≤ t)` for a `k × m` matrix with variance-`1/k` entries.
pub fn log_min_singular_bound(k: usize, m: usize, t: f64) -> f64 {
    let d = (k - m + 1) as f64;
    std::f64::consts::LN_2 + 0.5 * d * (k as f64).ln() + log_edelman_constant(k, m) - d.ln() + d * t.ln()
}

/// Large-deviation exponent lower bound for `−(1/k) log P(σ_min ≤ t)` when
/// `m/k → α`.
pub fn min_singular_exponent(alpha: f64, t: f64) -> f64 {
    let q = 1.0 - alpha;
    0.5 * q * (q * q / (std::f64::consts::E * t * t)).ln() + 0.5 * alpha * alpha.ln()
}

/// `P(Bin(trials, p) ≥ count)`.
pub fn binomial_upper_tail(trials: usize, p: f64, count: usize) -> f64 {
    if count == 0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let nf = trials as f64;
    let ln_n = ln_gamma(nf + 1.0);
    let terms = (count..=trials).map(|j| {
        let jf = j as f64;
        ln_n - ln_gamma(jf + 1.0) - ln_gamma(nf - jf + 1.0) + jf * p.ln() + (nf - jf) * (-p).ln_1p()
    });
    log_sum_exp(terms.collect::<Vec<_>>()).exp().min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularRow {
    pub t: f64,
    pub count: usize,
    pub empirical: f64,
    /// The finite-k bound; may exceed 1.
    pub bound: f64,
    pub log_bound: f64,
    pub exponent: f64,
    /// `P(Bin(trials, min(bound, 1)) ≥ count)`.
    pub p_value: f64,
    /// Count exceeds the bound beyond 99% binomial confidence.
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularReport {
    pub k: usize,
    pub m: usize,
    pub trials: usize,
    pub rows: Vec<SingularRow>,
}

pub fn min_singular_experiment(k: usize, m: usize, t_grid: &[f64], trials: usize, seed: u64) -> Result<SingularReport> {
    if !(k > m && m >= 1) {
        return Err(Error::InvalidArgument(format!("need k > m >= 1, got k = {k}, m = {m}")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let smin: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let b = sample_matrix(&mut rng, k, m, 1.0 / k as f64, Ensemble::Gaussian);
            let eig = SymmetricEigen::new(b.transpose() * &b).eigenvalues;
            eig.iter().copied().fold(f64::INFINITY, f64::min).max(0.0).sqrt()
        })
        .collect();
    let alpha = m as f64 / k as f64;
    let rows = t_grid
        .iter()
        .map(|&t| {
            let count = smin.iter().filter(|&&s| s <= t).count();
            let log_bound = log_min_singular_bound(k, m, t);
            let bound = log_bound.exp();
            let p_value = binomial_upper_tail(trials, bound.min(1.0), count);
            SingularRow {
                t,
                count,
                empirical: count as f64 / trials as f64,
                bound,
                log_bound,
                exponent: min_singular_exponent(alpha, t),
                p_value,
                violated: p_value < 0.01,
            }
        })
        .collect();
    Ok(SingularReport { k, m, trials, rows })
}
