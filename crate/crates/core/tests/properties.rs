use proptest::prelude::*;

use csdim::algo_thresholds::{r_pm, r_plus, threshold_objective, SignalFamily};
use csdim::bounds::{lipschitz_constant, lipschitz_constant_sparse, sensitivity_upper_bound};
use csdim::dist::{discrete_entropy, info_dimension, Atom, ContinuousComponent, Distribution, MixtureDistribution, WeightedComponent};
use csdim::gaussian_closedform::{d_star_gaussian, d_star_linear_gaussian, gaussian_curves};
use csdim::scalar_channel::{mmse, mutual_info_increment};
use csdim::state_evolution::solve_se;

/// Mixtures with up to three atoms and one continuous component.
fn arb_mixture() -> impl Strategy<Value = MixtureDistribution> {
    (
        prop::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 1..=3),
        0.05f64..0.95,
        0usize..3,
        -1.0f64..1.0,
        0.2f64..3.0,
    )
        .prop_map(|(atoms, gamma, family, loc, spread)| {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let atoms: Vec<Atom> = atoms
                .iter()
                .map(|&(v, m)| Atom::new(v, (1.0 - gamma) * m / total))
                .collect();
            let component = match family {
                0 => ContinuousComponent::gaussian(loc, spread),
                1 => ContinuousComponent::uniform(loc - spread, loc + spread),
                _ => ContinuousComponent::laplace(loc, spread),
            };
            MixtureDistribution::new(atoms, vec![WeightedComponent { weight: gamma, component }]).unwrap()
        })
        .prop_filter("atoms must be distinct", |m| {
            let mut v: Vec<f64> = m.atoms().iter().map(|a| a.value).collect();
            v.sort_by(f64::total_cmp);
            v.windows(2).all(|w| w[1] - w[0] > 1e-3)
        })
}

fn standardized(m: &MixtureDistribution) -> Distribution {
    Distribution::Mixture(m.clone()).standardize().unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn standardizing_keeps_dimension_and_entropy(m in arb_mixture()) {
        let total: f64 = m.atoms().iter().map(|a| a.mass).sum::<f64>()
            + m.components().iter().map(|c| c.weight).sum::<f64>();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let s = standardized(&m);
        prop_assert!(s.is_standardized(1e-9));
        prop_assert_eq!(info_dimension(&s), m.gamma());
        let Distribution::Mixture(sm) = &s else { unreachable!() };
        prop_assert!((discrete_entropy(sm) - discrete_entropy(&m)).abs() < 1e-12);
    }

    #[test]
    fn mmse_strictly_decreasing(m in arb_mixture(), lo in -2.0f64..1.0) {
        let d = standardized(&m);
        let snrs: Vec<f64> = (0..8).map(|i| 10f64.powf(lo + 0.4 * i as f64)).collect();
        let v: Vec<f64> = snrs.iter().map(|&s| mmse(&d, s).unwrap()).collect();
        prop_assert!(v.windows(2).all(|w| w[1] < w[0]), "{:?}", v);
        prop_assert!(v.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn information_slope_is_half_mmse(m in arb_mixture(), log_snr in -1.5f64..2.0) {
        let d = standardized(&m);
        let s = 10f64.powf(log_snr);
        let h = 1e-3 * s;
        let slope = mutual_info_increment(&d, s - h, s + h).unwrap() / (2.0 * h);
        let half = 0.5 * mmse(&d, s).unwrap();
        prop_assert!((slope - half).abs() < 1e-4, "{} vs {}", slope, half);
    }

    #[test]
    fn gaussian_distortions_ordered(rate in 0.01f64..20.0, log_s2 in -10.0f64..3.0) {
        let p = gaussian_curves(rate, 10f64.powf(log_s2)).unwrap();
        prop_assert!(p.d_star > 0.0);
        prop_assert!(p.d_star <= p.d_star_linear * (1.0 + 1e-12));
        prop_assert!(p.d_star_linear <= p.d_l * (1.0 + 1e-12));
        prop_assert!(p.d_l <= 1.0);
    }

    #[test]
    fn optimal_distortions_convex_in_rate(log_s2 in -6.0f64..2.0, start in 0.05f64..3.0, step in 0.001f64..0.2) {
        let s2 = 10f64.powf(log_s2);
        for f in [d_star_gaussian as fn(f64, f64) -> f64, d_star_linear_gaussian] {
            let (a, b, c) = (f(start, s2), f(start + step, s2), f(start + 2.0 * step, s2));
            prop_assert!(b <= a + 1e-15 && c <= b + 1e-15);
            prop_assert!(a - 2.0 * b + c >= -1e-9);
        }
    }

    #[test]
    fn optimal_distortions_convex_in_snr(rate in 0.05f64..5.0, start in 0.01f64..100.0, step in 0.001f64..10.0) {
        for f in [d_star_gaussian as fn(f64, f64) -> f64, d_star_linear_gaussian] {
            let g = |snr: f64| f(rate, 1.0 / snr);
            let (a, b, c) = (g(start), g(start + step), g(start + 2.0 * step));
            prop_assert!(b <= a + 1e-15 && c <= b + 1e-15);
            prop_assert!(a - 2.0 * b + c >= -1e-9);
        }
    }

    #[test]
    fn sign_information_lowers_threshold(gamma in 0.001f64..0.999) {
        let pm = r_pm(gamma).unwrap();
        let plus = r_plus(gamma).unwrap();
        prop_assert!(plus.rate < pm.rate);
        prop_assert!(pm.rate >= gamma && pm.rate <= 1.0);
        for (f, t) in [(SignalFamily::Pm, pm), (SignalFamily::Plus, plus)] {
            let h = 1e-5;
            let d = (threshold_objective(f, gamma, t.alpha + h) - threshold_objective(f, gamma, t.alpha - h)) / (2.0 * h);
            prop_assert!(d.abs() < 1e-6, "{:?} slope {}", f, d);
        }
    }

    #[test]
    fn lipschitz_forms_agree(gamma in 0.01f64..0.95, gap in 0.001f64..3.0, h in 0.0f64..2.0) {
        let r = gamma + gap;
        let l0 = lipschitz_constant(gamma, 0.0, r).unwrap();
        let ls = lipschitz_constant_sparse(gamma, r).unwrap();
        prop_assert!((l0 / ls - 1.0).abs() < 1e-12);
        let l = lipschitz_constant(gamma, h, r).unwrap();
        if l.is_finite() && l * l * r < f64::MAX {
            prop_assert!((sensitivity_upper_bound(gamma, h, r).unwrap() / (r * l * l) - 1.0).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn state_evolution_degrades_with_noise(rate in 0.4f64..1.5, alpha in 0.8f64..2.5) {
        let prior = csdim::random_matrix_lab::standard_sparse_prior(0.1).unwrap();
        let mut prev = 0.0;
        for s2 in [1e-6, 1e-4, 1e-3, 1e-2, 0.1, 1.0] {
            let sol = solve_se(&prior, rate, s2, alpha).unwrap();
            if !sol.converged {
                prop_assert!(sol.mse.is_infinite());
                prev = f64::INFINITY;
                continue;
            }
            prop_assert!(sol.residual.abs() < 1e-10, "residual {}", sol.residual);
            prop_assert!(sol.mse >= prev, "{} < {}", sol.mse, prev);
            prev = sol.mse;
        }
    }
}
