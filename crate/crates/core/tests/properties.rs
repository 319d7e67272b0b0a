use logweyl::asymptotics::{fit_basis, level_tags, zeta_partial, BasisTag};
use logweyl::cornerflow::{
    conserved_angle, flow_closed, flow_numeric, return_time, trajectory_numeric, CornerState,
};
use logweyl::spectrum::{
    assemble_model_matrix, compute_spectrum, counting_function, DiscretizationConfig, SchemeOrder,
    SpectralData,
};
use logweyl::symbols::{corner_expansion, japanese_bracket, model_symbol};
use logweyl::traces::{digamma, gamma1_closed, gamma1_finite_sum};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn state(d: usize, seed: u64) -> CornerState {
    CornerState::sample(d, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn unit_vec(angle: f64, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[0] = angle.cos();
    if d > 1 {
        v[1] = angle.sin();
    } else {
        v[0] = v[0].signum();
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn digamma_recurrence(x in 0.1f64..50.0) {
        let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x;
        prop_assert!(lhs.abs() <= 1e-12, "residual {lhs:e} at x = {x}");
    }

    #[test]
    fn gamma1_finite_sum_agrees(d in 1usize..=20) {
        let a = gamma1_closed(d).unwrap();
        let b = gamma1_finite_sum(d).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn corner_expansion_reproduces_product(r in 3.0f64..200.0, rho in 3.0f64..200.0) {
        let exact = japanese_bracket(&[r]) * japanese_bracket(&[rho]);
        let approx = corner_expansion(r, rho, 6, 6);
        prop_assert!(((approx - exact) / exact).abs() <= 1e-6);
    }

    #[test]
    fn compatibility_limit(r in 10.0f64..1e4, a in 0.0f64..6.3, b in 0.0f64..6.3, d in 1usize..=3) {
        let sym = model_symbol(d).unwrap();
        let (w, t) = (unit_vec(a, d), unit_vec(b, d));
        let x: Vec<f64> = w.iter().map(|v| r * v).collect();
        let gap = (sym.p_psi(&x, &t) / r - sym.p_psie(&w, &t)).abs();
        prop_assert!(gap <= 2.0 / r);
    }

    #[test]
    fn flow_group_property(seed in any::<u64>(), d in 1usize..=3, s in -20.0f64..20.0, t in -20.0f64..20.0) {
        let z = state(d, seed);
        let two_steps = flow_closed(&flow_closed(&z, s), t);
        prop_assert!(two_steps.distance(&flow_closed(&z, s + t)) <= 1e-10);
    }

    #[test]
    fn flow_returns_exactly_and_not_early(seed in any::<u64>(), d in 2usize..=3) {
        let z = state(d, seed);
        let c = conserved_angle(&z);
        prop_assume!(c * c < 1.0 && c != 0.0);
        let p = return_time(&z).value();
        prop_assert!(flow_closed(&z, p).distance(&z) <= 1e-10);
        prop_assert!(flow_closed(&z, p / 2.0).distance(&z) > 0.1);
    }

    #[test]
    fn numeric_flow_matches_closed(seed in any::<u64>(), d in 1usize..=3, t in 0.0f64..(4.0 * std::f64::consts::PI)) {
        let tol = 1e-9;
        let z = state(d, seed);
        let gap = flow_numeric(&z, t, tol).unwrap().distance(&flow_closed(&z, t));
        prop_assert!(gap <= 1e3 * tol, "gap {gap:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn numeric_flow_conserves_invariants(seed in any::<u64>(), d in 2usize..=3) {
        let tol = 1e-9;
        let z = state(d, seed);
        let c0 = conserved_angle(&z);
        prop_assume!(c0.abs() <= 0.99);
        let p = return_time(&z).value();
        for (_, s) in trajectory_numeric(&z, 10.0 * p, tol, 40).unwrap() {
            prop_assert!((conserved_angle(&s) - c0).abs() <= 100.0 * tol);
            prop_assert!(s.norm_defect() <= 100.0 * tol);
        }
    }

    #[test]
    fn counting_is_monotone_with_multiplicity_jumps(
        levels in prop::collection::vec((1u32..60, 1usize..4), 1..20),
        probes in prop::collection::vec(0.5f64..70.0, 2..30),
    ) {
        let mut eig = Vec::new();
        for &(v, m) in &levels {
            eig.extend(std::iter::repeat_n(v as f64, m));
        }
        let spec = SpectralData::from_exact(eig.clone()).unwrap();
        let mut probes = probes;
        probes.sort_by(f64::total_cmp);
        let counts: Vec<usize> = probes.iter().map(|&l| counting_function(&spec, l).unwrap()).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        for &(v, _) in &levels {
            let v = v as f64;
            let m = eig.iter().filter(|&&e| e == v).count();
            let jump = counting_function(&spec, v + 1e-9).unwrap() - counting_function(&spec, v).unwrap();
            prop_assert_eq!(jump, m);
        }
    }

    #[test]
    fn model_matrix_is_exactly_symmetric(d in 1usize..=2, n in 8usize..24, l in 0.5f64..8.0, fourth in any::<bool>()) {
        let order = if fourth { SchemeOrder::Fourth } else { SchemeOrder::Second };
        let cfg = DiscretizationConfig::new(d, l, n, order).unwrap();
        let a = assemble_model_matrix(&cfg).unwrap().to_dense();
        prop_assert_eq!(a.clone(), a.transpose());
    }

    #[test]
    fn discrete_model_is_bounded_below_by_one(n in 8usize..40, l in 0.5f64..8.0, fourth in any::<bool>()) {
        let order = if fourth { SchemeOrder::Fourth } else { SchemeOrder::Second };
        let cfg = DiscretizationConfig::new(1, l, n, order).unwrap();
        let s = compute_spectrum(&cfg, 3).unwrap();
        prop_assert!(s.eigenvalues().iter().all(|&v| v >= 1.0 - 1e-6));
    }

    #[test]
    fn fit_recovers_planted_expansion(
        a in 0.5f64..3.0,
        coeffs in prop::collection::vec(-2.0f64..2.0, 4),
        lo in 5.0f64..20.0,
    ) {
        let tags = level_tags(2).unwrap();
        let planted: Vec<(BasisTag, f64)> = tags.iter().copied().zip(coeffs.iter().copied()).collect();
        let exact = |lam: f64| -> f64 {
            planted
                .iter()
                .map(|(t, c)| c * lam.powf(a - t.k as f64) * lam.ln().powi(t.j as i32))
                .sum()
        };
        let sample = |lo: f64| -> Vec<(f64, f64)> {
            (0..200).map(|i| lo * (20.0f64).powf(i as f64 / 199.0)).map(|l| (l, exact(l))).collect()
        };
        let fit = fit_basis(&sample(lo), a, &tags).unwrap();
        for (t, c) in &planted {
            let got = fit.coefficient(t.k, t.j).unwrap();
            prop_assert!((got - c).abs() <= 1e-8 * c.abs().max(1.0), "{:?}: {got} vs {c}", t);
        }
        // shifting the window by 1.5 must not move the leading coefficient
        let shifted = fit_basis(&sample(1.5 * lo), a, &tags).unwrap();
        let g = |f: &logweyl::asymptotics::WeylFit| f.coefficient(0, 1).unwrap();
        prop_assert!((g(&fit) - g(&shifted)).abs() <= 1e-8 * g(&fit).abs().max(1.0));
    }

    #[test]
    fn zeta_partial_decreases_in_s(
        eig in prop::collection::vec(1.01f64..1e3, 1..50),
        s in 0.1f64..5.0,
        ds in 0.01f64..2.0,
    ) {
        let spec = SpectralData::from_exact(eig).unwrap();
        let z1 = zeta_partial(&spec, s, None).unwrap();
        let z2 = zeta_partial(&spec, s + ds, None).unwrap();
        prop_assert!(z2 < z1);
    }
}
