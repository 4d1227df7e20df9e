//! End-to-end acceptance checks. Each test writes one `PASS`/`FAIL` line
//! straight to stderr (so it shows even when the harness captures output)
//! and then asserts the verdict.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use csdim::algo_thresholds::{lasso_sensitivity, r_pm, r_simple};
use csdim::bounds::{lipschitz_constant, lipschitz_constant_sparse, sensitivity_upper_bound};
use csdim::dist::{cantor_dimension, info_dimension, Atom, ContinuousComponent, Distribution, MixtureDistribution};
use csdim::gaussian_closedform::{d_l_gaussian, d_star_gaussian, d_star_linear_gaussian, gaussian_curves, mp_integral};
use csdim::random_matrix_lab::{
    empirical_dl_gaussian, min_singular_experiment, noiseless_pt_scan, run_simulation, standard_sparse_prior,
    Experiment, SimConfig,
};
use csdim::replica::{find_roots, replica_mse};
use csdim::scalar_channel::{mmse, mutual_info_increment, ScalarChannel};
use csdim::special::{lin_space, log_space};
use csdim::state_evolution::optimize_alpha;

struct Check {
    ok: bool,
    note: String,
}

fn check(ok: bool, note: impl Into<String>) -> Check {
    Check { ok, note: note.into() }
}

fn verdict(id: u32, name: &str, started: Instant, limit: Option<Duration>, checks: Vec<Check>) {
    let elapsed = started.elapsed();
    let mut notes: Vec<String> = checks.iter().map(|c| c.note.clone()).collect();
    let mut pass = checks.iter().all(|c| c.ok);
    if let Some(l) = limit {
        pass &= elapsed <= l;
        notes.push(format!("{:.2} s of {} s", elapsed.as_secs_f64(), l.as_secs()));
    } else {
        notes.push(format!("{:.2} s", elapsed.as_secs_f64()));
    }
    let line = format!(
        "acceptance {id:>2} {name}: {} ({})",
        if pass { "PASS" } else { "FAIL" },
        notes.join("; ")
    );
    let _ = writeln!(std::io::stderr(), "{line}");
    let failed: Vec<&str> = checks.iter().filter(|c| !c.ok).map(|c| c.note.as_str()).collect();
    assert!(pass, "{line}\nfailed checks: {failed:?}");
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

#[test]
fn criterion_01_gaussian_triangle() {
    const TOL: f64 = 1e-6;
    let t0 = Instant::now();
    let g = Distribution::standard_gaussian();
    let rates = log_space(0.1, 5.0, 20);
    let noises = log_space(1e-6, 10.0, 20);
    let (mut worst_cf, mut worst_mp) = (0.0f64, 0.0f64);
    for (i, &r) in rates.iter().enumerate() {
        // Pair rates and noise levels in scrambled order.
        let s2 = noises[(7 * i) % 20];
        let dl = replica_mse(&g, r, s2).unwrap().dl_mse;
        worst_cf = worst_cf.max((dl - d_l_gaussian(r, s2)).abs());
        worst_mp = worst_mp.max((dl - mp_integral(r, s2).unwrap()).abs());
    }
    verdict(
        1,
        "gaussian triangle",
        t0,
        secs(30),
        vec![
            check(worst_cf <= TOL, format!("max |replica - closed form| {worst_cf:.2e}")),
            check(worst_mp <= TOL, format!("max |replica - spectral integral| {worst_mp:.2e}")),
        ],
    );
}

#[test]
fn criterion_02_finite_n_convergence() {
    let t0 = Instant::now();
    let mut checks = Vec::new();
    for (r, s2) in [(0.3, 1.0), (1.0, 1.0), (5.0, 1.0)] {
        let rep = empirical_dl_gaussian(&SimConfig::new(400, r, s2, 50, 20240601)).unwrap();
        let target = d_l_gaussian(r, s2);
        let z = (rep.mean_mse - target).abs() / rep.stderr;
        checks.push(check(
            z <= 3.0,
            format!("R={r}: {:.5} vs {:.5}, {z:.2} se", rep.mean_mse, target),
        ));
    }
    verdict(2, "finite-n convergence", t0, secs(120), checks);
}

#[test]
fn criterion_03_lasso_threshold_ratio() {
    let t0 = Instant::now();
    let ratio = r_pm(0.1).unwrap().rate / 0.1;
    verdict(
        3,
        "lasso threshold ratio",
        t0,
        secs(1),
        vec![check((3.2..=3.4).contains(&ratio), format!("r_pm(0.1)/0.1 = {ratio:.4}"))],
    );
}

#[test]
fn criterion_04_simple_signal_threshold() {
    let t0 = Instant::now();
    let grid = lin_space(0.0, 1.0, 101);
    let bad = grid.iter().filter(|&&g| r_simple(g).unwrap() != (g + 1.0) / 2.0).count();
    verdict(
        4,
        "simple-signal threshold",
        t0,
        None,
        vec![check(bad == 0, format!("{bad} of {} grid points differ", grid.len()))],
    );
}

#[test]
fn criterion_05_very_sparse_asymptote() {
    let t0 = Instant::now();
    let ratio = |g: f64| r_pm(g).unwrap().rate / (2.0 * g * (1.0 / g).ln());
    let (small, large) = (ratio(1e-6), ratio(1e-3));
    verdict(
        5,
        "very-sparse asymptote",
        t0,
        None,
        vec![
            check((0.75..=1.25).contains(&small), format!("ratio at 1e-6 = {small:.4}")),
            check(
                (small - 1.0).abs() < (large - 1.0).abs(),
                format!("ratio at 1e-3 = {large:.4}"),
            ),
        ],
    );
}

#[test]
fn criterion_06_replica_sensitivity_law() {
    const REL: f64 = 0.10;
    let t0 = Instant::now();
    let d = Distribution::standard_sparse_gaussian(0.1);
    let s2 = 1e-8;
    let mut checks = Vec::new();
    for r in [0.2, 0.3, 0.5, 1.0] {
        let ratio = replica_mse(&d, r, s2).unwrap().dl_mse / s2;
        let target = 0.1 / (r - 0.1);
        let rel = (ratio / target - 1.0).abs();
        checks.push(check(rel <= REL, format!("R={r}: {ratio:.4} vs {target:.4}")));
    }
    let below = replica_mse(&d, 0.05, s2).unwrap().dl_mse / s2;
    checks.push(check(below > 1e3, format!("R=0.05: {below:.3e}")));
    verdict(6, "replica sensitivity law", t0, secs(120), checks);
}

#[test]
fn criterion_07_state_evolution_threshold_consistency() {
    const REL: f64 = 0.02;
    let t0 = Instant::now();
    let prior = standard_sparse_prior(0.1).unwrap();
    let s2 = 1e-8;
    let mut checks = Vec::new();
    for r in [0.4, 0.5, 0.7, 1.0] {
        let ratio = optimize_alpha(&prior, r, s2).unwrap().mse / s2;
        let target = lasso_sensitivity(0.1, r).unwrap();
        let rel = (ratio / target - 1.0).abs();
        checks.push(check(rel <= REL, format!("R={r}: {ratio:.4} vs {target:.4}")));
    }
    verdict(7, "state evolution vs threshold law", t0, None, checks);
}

#[test]
fn criterion_08_cantor_dimensions() {
    let t0 = Instant::now();
    let d = Distribution::standard_cantor();
    let dim = info_dimension(&d);
    let exact = 2f64.ln() / 3f64.ln();
    // One period of the oscillation is a factor 9 in snr.
    let n = 72;
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            let snr = 1e6 * 9f64.powf(i as f64 / n as f64);
            snr * mmse(&d, snr).unwrap()
        })
        .collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    verdict(
        8,
        "cantor dimensions",
        t0,
        None,
        vec![
            check((dim - exact).abs() <= 1e-12 && (cantor_dimension() - exact).abs() <= 1e-12, format!("d = {dim:.15}")),
            check((0.615..=0.625).contains(&lo), format!("min snr*mmse {lo:.4}")),
            check((0.635..=0.645).contains(&hi), format!("max snr*mmse {hi:.4}")),
        ],
    );
}

#[test]
fn criterion_09_cantor_root_multiplicity() {
    let t0 = Instant::now();
    let d = Distribution::standard_cantor();
    let counts: Vec<usize> = [6, 10, 14]
        .iter()
        .map(|&e| find_roots(&d, 0.632, 3f64.powi(-e)).unwrap().len())
        .collect();
    verdict(
        9,
        "cantor root multiplicity",
        t0,
        None,
        vec![
            check(counts[2] >= 3, format!("{} roots at 3^-14", counts[2])),
            check(counts.windows(2).all(|w| w[1] >= w[0]), format!("counts {counts:?}")),
        ],
    );
}

#[test]
fn criterion_10_amp_vs_state_evolution() {
    const REL: f64 = 0.15;
    let t0 = Instant::now();
    let prior = standard_sparse_prior(0.1).unwrap();
    let se = optimize_alpha(&prior, 0.5, 1e-4).unwrap();
    let cfg = SimConfig {
        experiment: Experiment::Amp {
            gamma: 0.1,
            alpha: Some(se.alpha),
            max_iters: None,
        },
        ..SimConfig::new(2000, 0.5, 1e-4, 20, 2024)
    };
    let rep = run_simulation(&cfg).unwrap();
    let rel = (rep.mean_mse / se.mse - 1.0).abs();
    let above = noiseless_pt_scan(&[0.1], &[0.5], 2000, 20, 7).unwrap()[0][0];
    let below = noiseless_pt_scan(&[0.1], &[0.15], 2000, 20, 7).unwrap()[0][0];
    verdict(
        10,
        "amp vs state evolution",
        t0,
        secs(300),
        vec![
            check(rel <= REL, format!("mse {:.4e} vs {:.4e}", rep.mean_mse, se.mse)),
            check(above >= 0.9, format!("success {above:.2} at R=0.5")),
            check(below <= 0.1, format!("success {below:.2} at R=0.15")),
        ],
    );
}

#[test]
fn criterion_11_edelman_bound() {
    let t0 = Instant::now();
    let rep = min_singular_experiment(50, 25, &[0.02, 0.05, 0.1], 10_000, 11).unwrap();
    let checks = rep
        .rows
        .iter()
        .map(|r| {
            check(
                !r.violated,
                format!("t={}: {} hits, bound {:.2e}, p {:.3}", r.t, r.count, r.bound, r.p_value),
            )
        })
        .collect();
    verdict(11, "edelman bound", t0, None, checks);
}

#[test]
fn criterion_12_bound_identities() {
    const REL: f64 = 1e-12;
    let t0 = Instant::now();
    let gammas = lin_space(0.02, 0.9, 50);
    let (mut worst_l, mut worst_s) = (0.0f64, 0.0f64);
    for (i, &g) in gammas.iter().enumerate() {
        let r = g + (1.0 - g) * (i as f64 + 0.5) / 50.0 + 0.05;
        let l = lipschitz_constant(g, 0.0, r).unwrap();
        worst_l = worst_l.max((l / lipschitz_constant_sparse(g, r).unwrap() - 1.0).abs());
        for h in [0.0, 0.7] {
            let l = lipschitz_constant(g, h, r).unwrap();
            worst_s = worst_s.max((sensitivity_upper_bound(g, h, r).unwrap() / (r * l * l) - 1.0).abs());
        }
    }
    verdict(
        12,
        "bound identities",
        t0,
        None,
        vec![
            check(worst_l <= REL, format!("lipschitz forms {worst_l:.1e}")),
            check(worst_s <= REL, format!("sensitivity = R L^2 {worst_s:.1e}")),
        ],
    );
}

/// Mean squared error of the posterior mean over `samples` draws, with its
/// standard error.
fn monte_carlo_mmse(dist: &Distribution, snr: f64, samples: usize, seed: u64) -> (f64, f64) {
    let ch = ScalarChannel::new(dist, snr).unwrap();
    let r = snr.sqrt();
    let chunks = 100;
    let per = samples / chunks;
    let sums: Vec<(f64, f64)> = (0..chunks as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..per {
                let x = dist.sample(&mut rng);
                let n: f64 = rng.sample(StandardNormal);
                let e = (ch.posterior_mean(r * x + n) - x).powi(2);
                s += e;
                s2 += e * e;
            }
            (s, s2)
        })
        .collect();
    let m = (chunks * per) as f64;
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let mean = s / m;
    (mean, ((s2 / m - mean * mean) / (m - 1.0)).sqrt())
}

#[test]
fn criterion_13_property_suites() {
    let t0 = Instant::now();
    let mut checks = Vec::new();

    // Ordering of the three Gaussian distortions.
    let rates = log_space(0.05, 10.0, 40);
    let noises = log_space(1e-8, 100.0, 40);
    let mut misordered = 0;
    for &r in &rates {
        for &s2 in &noises {
            let p = gaussian_curves(r, s2).unwrap();
            let le = |a: f64, b: f64| a <= b * (1.0 + 1e-12);
            if !(le(p.d_star, p.d_star_linear) && le(p.d_star_linear, p.d_l) && le(p.d_l, 1.0)) {
                misordered += 1;
            }
        }
    }
    checks.push(check(misordered == 0, format!("ordering: {misordered} violations of 1600")));

    // Decreasing and convex along uniform grids in R and in snr.
    let mut worst_slope = f64::NEG_INFINITY;
    let mut worst_curv = f64::INFINITY;
    let mut scan = |v: &[f64]| {
        for w in v.windows(2) {
            worst_slope = worst_slope.max(w[1] - w[0]);
        }
        for w in v.windows(3) {
            worst_curv = worst_curv.min(w[0] - 2.0 * w[1] + w[2]);
        }
    };
    let r_axis = lin_space(0.05, 5.0, 200);
    let snr_axis = lin_space(0.01, 50.0, 200);
    for &s2 in &[1e-4, 0.1, 1.0, 10.0] {
        scan(&r_axis.iter().map(|&r| d_star_gaussian(r, s2)).collect::<Vec<_>>());
        scan(&r_axis.iter().map(|&r| d_star_linear_gaussian(r, s2)).collect::<Vec<_>>());
    }
    for &r in &[0.3, 1.0, 2.5] {
        scan(&snr_axis.iter().map(|&s| d_star_gaussian(r, 1.0 / s)).collect::<Vec<_>>());
        scan(&snr_axis.iter().map(|&s| d_star_linear_gaussian(r, 1.0 / s)).collect::<Vec<_>>());
    }
    checks.push(check(
        worst_slope <= 1e-12 && worst_curv >= -1e-9,
        format!("monotone/convex: max step {worst_slope:.1e}, min second difference {worst_curv:.1e}"),
    ));

    // MMSE strictly decreasing and I-MMSE consistent.
    let laws: Vec<(&str, Distribution)> = vec![
        ("gaussian", Distribution::standard_gaussian()),
        ("sparse 0.1", Distribution::standard_sparse_gaussian(0.1)),
        ("cantor", Distribution::standard_cantor()),
        (
            "ternary+laplace",
            Distribution::Mixture(
                MixtureDistribution::new(
                    vec![Atom::new(-1.0, 0.3), Atom::new(0.0, 0.2), Atom::new(1.0, 0.3)],
                    vec![csdim::dist::WeightedComponent {
                        weight: 0.2,
                        component: ContinuousComponent::laplace(0.0, 0.5),
                    }],
                )
                .unwrap(),
            )
            .standardize()
            .unwrap()
            .0,
        ),
    ];
    let snrs = log_space(0.05, 200.0, 25);
    let mut not_decreasing = 0;
    let mut worst_immse = 0.0f64;
    for (_, d) in &laws {
        let m: Vec<f64> = snrs.iter().map(|&s| mmse(d, s).unwrap()).collect();
        not_decreasing += m.windows(2).filter(|w| !(w[1] < w[0])).count();
        for (&s, &mm) in snrs.iter().zip(&m).skip(1).take(snrs.len() - 2) {
            let h = 1e-3 * s;
            let deriv = mutual_info_increment(d, s - h, s + h).unwrap() / (2.0 * h);
            worst_immse = worst_immse.max((deriv - 0.5 * mm).abs());
        }
    }
    checks.push(check(not_decreasing == 0, format!("mmse monotone: {not_decreasing} violations")));
    checks.push(check(worst_immse <= 1e-4, format!("I-MMSE max error {worst_immse:.1e}")));

    // Quadrature against 10^7-sample Monte Carlo at 5 seeded random points.
    let mut rng = ChaCha8Rng::seed_from_u64(1303);
    let mut zs = Vec::new();
    for k in 0..5u64 {
        let d = if k % 2 == 0 {
            Distribution::standard_sparse_gaussian(rng.random_range(0.05..0.9))
        } else {
            laws[3].1.clone()
        };
        let snr = 10f64.powf(rng.random_range(-1.0..2.0));
        let q = mmse(&d, snr).unwrap();
        let (mc, se) = monte_carlo_mmse(&d, snr, 10_000_000, 77 + k);
        zs.push((q - mc) / se);
    }
    let zs_text: Vec<String> = zs.iter().map(|z| format!("{z:+.2}")).collect();
    checks.push(check(
        zs.iter().all(|z| z.abs() <= 3.0),
        format!("quadrature vs Monte Carlo z [{}]", zs_text.join(" ")),
    ));

    verdict(13, "property suites", t0, None, checks);
}
