//! Invariants of the analytic layer, checked on random parameters.

use num_complex::Complex64;
use proptest::prelude::*;
use radar_sg::interference::{
    cdf_levy_closed, cf_ppp, interference_cdf, laplace_bl, mean_bl, mean_ppp, CfSpec, CfTable, LaneTerm,
};
use radar_sg::model::{FadingModel, GeometryKind, Lane, MediumAccess, Scenario};
use radar_sg::performance::{
    beta_of_lambda, expected_optimal_duty_cycle, optimal_duty_cycle, p_success, p_success_il, p_success_wc, sinr,
};

fn scenario(offset: f64, density: f64, xi: f64) -> Scenario {
    let mut s = Scenario::reference();
    s.lanes = vec![Lane::new(offset, density)];
    s.access = MediumAccess { duty_cycle: xi };
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cf_is_bounded_and_hermitian(offset in 0.5f64..30.0, density in 0.005f64..0.5, xi in 0.01f64..1.0, w in 1e-2f64..1e6) {
        let spec = CfSpec::from_scenario(&scenario(offset, density, xi)).unwrap();
        let a = cf_ppp(&spec, w).unwrap();
        let b = cf_ppp(&spec, -w).unwrap();
        prop_assert!(a.norm() <= 1.0 + 1e-12);
        prop_assert!((a - b.conj()).norm() < 1e-13);
    }

    #[test]
    fn lattice_transform_is_a_laplace_transform(offset in 0.0f64..20.0, density in 0.01f64..0.3, xi in 0.05f64..1.0, s in 1e-2f64..1e5) {
        let mut sc = scenario(offset, density, xi);
        sc.geometry = GeometryKind::BernoulliLattice;
        let spec = CfSpec::from_scenario(&sc).unwrap();
        let l1 = laplace_bl(&spec, Complex64::new(s, 0.0)).unwrap();
        let l2 = laplace_bl(&spec, Complex64::new(2.0 * s, 0.0)).unwrap();
        prop_assert!(l1.im.abs() < 1e-12);
        prop_assert!(l1.re > 0.0 && l1.re <= 1.0 + 1e-12);
        prop_assert!(l2.re <= l1.re + 1e-12);
    }

    #[test]
    fn means_agree_without_offset(density in 1e-3f64..1.0, xi in 0.01f64..1.0, guard in 1.0f64..200.0) {
        let mut s = scenario(0.0, density, xi);
        s.lanes[0] = s.lanes[0].with_guard_distance(guard);
        let d = s.derive(0).unwrap();
        let a = mean_ppp(&d, &s.lanes[0], &s.access).unwrap();
        let b = mean_bl(&d, &s.lanes[0], &s.access).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
        // α = 2: the mean is inversely proportional to δ₀.
        let mut s2 = s.clone();
        s2.lanes[0] = s2.lanes[0].with_guard_distance(0.5 * guard);
        let d2 = s2.derive(0).unwrap();
        let a2 = mean_ppp(&d2, &s2.lanes[0], &s2.access).unwrap();
        prop_assert!((a2 - 2.0 * a).abs() <= 1e-12 * a2);
    }

    #[test]
    fn mean_grows_with_intensity(offset in 0.0f64..20.0, density in 1e-3f64..0.5, xi in 0.01f64..0.5) {
        let s = scenario(offset, density, xi);
        let mut t = s.clone();
        t.access.duty_cycle = 2.0 * xi;
        let d = s.derive(0).unwrap();
        if d.delta_o > 0.0 {
            let a = mean_ppp(&d, &s.lanes[0], &s.access).unwrap();
            let b = mean_ppp(&d, &t.lanes[0], &t.access).unwrap();
            prop_assert!((b - 2.0 * a).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn success_decreases_with_range(density in 1e-3f64..0.5, xi in 1e-3f64..1.0, r in 1.0f64..400.0, noise in 0.0f64..1e-9) {
        let s = scenario(10.0, density, xi);
        let d = s.derive(0).unwrap();
        let lane = &s.lanes[0];
        let a = p_success_il(&d, r, &s.access, lane).unwrap();
        let b = p_success_il(&d, 1.1 * r, &s.access, lane).unwrap();
        prop_assert!((0.0..=1.0).contains(&a) && b <= a);
        let w0 = p_success_wc(&d, r, &s.access, lane, 0.0).unwrap();
        prop_assert!((w0 - a).abs() < 1e-12);
        let wn = p_success_wc(&d, r, &s.access, lane, noise).unwrap();
        prop_assert!(wn <= a + 1e-15);
    }

    #[test]
    fn levy_curve_bounds_the_cdf_of_success(density in 1e-3f64..0.5, xi in 1e-3f64..1.0, r in 5.0f64..300.0) {
        let mut s = scenario(0.0, density, xi);
        s.lanes[0] = s.lanes[0].with_guard_distance(0.0);
        let spec = CfSpec::worst_case(&s).unwrap();
        let d = s.derive(0).unwrap();
        let x = radar_sg::performance::ranging_signal(&d, r).unwrap() / d.sinr_threshold;
        let curve = cdf_levy_closed(&spec, &[x]).unwrap();
        let via_cdf = p_success(&curve, &d, r, 0.0).unwrap();
        let il = p_success_il(&d, r, &s.access, &s.lanes[0]).unwrap();
        prop_assert!((via_cdf - il).abs() < 1e-12);
    }

    #[test]
    fn optimum_is_a_maximum(density in 1e-3f64..1.0, r in 10.0f64..300.0) {
        let s = scenario(10.0, density, 0.1);
        let d = s.derive(0).unwrap();
        let opt = optimal_duty_cycle(&s.lanes[0], &d, r).unwrap();
        prop_assert!(opt.xi_star > 0.0 && opt.xi_star <= 1.0);
        for f in [0.5, 0.9, 1.1, 2.0] {
            let li = (opt.lambda_i_star * f).min(density);
            prop_assert!(beta_of_lambda(&d, r, li) <= opt.beta_star * (1.0 + 1e-12));
        }
    }

    #[test]
    fn expected_duty_cycle_falls_with_n(density in 1e-3f64..0.2, n in 1u32..40) {
        let s = scenario(10.0, density, 0.1);
        let d = s.derive(0).unwrap();
        let a = expected_optimal_duty_cycle(&s.lanes[0], &d, n).unwrap();
        let b = expected_optimal_duty_cycle(&s.lanes[0], &d, n + 1).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0 + 1e-12);
        prop_assert!(b <= a + 1e-12);
    }

    #[test]
    fn sinr_scales(sig in 1e-12f64..1.0, i in 0.0f64..1.0, n in 1e-15f64..1.0) {
        let v = sinr(sig, i, n).unwrap();
        prop_assert!((v * (i + n) - sig).abs() <= 1e-12 * sig);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn table_tracks_direct_cf(offset in 0.0f64..20.0, guard in 0.0f64..100.0, density in 0.01f64..0.3, xi in 0.01f64..1.0, shape in prop::option::of(0.5f64..4.0)) {
        let fading = shape.map_or(FadingModel::Unit, |m| FadingModel::Gamma { shape: m });
        let spec = CfSpec {
            geometry: GeometryKind::Ppp,
            lanes: vec![LaneTerm { offset, delta_o: guard, density, duty_cycle: xi }],
            gamma1_p0: 0.973,
            alpha: 2.0,
            fading,
        };
        prop_assume!(offset > 0.0 || guard > 0.0);
        let t = CfTable::for_spec(&spec).unwrap();
        let (lo, hi) = t.range();
        let mut w = lo * 1.37;
        while w < hi {
            let a = t.exponent(w).unwrap();
            let b = radar_sg::interference::cf_ppp_exponent(&spec, w).unwrap();
            prop_assert!((a - b).norm() < 1e-8 * b.norm().max(1.0), "w={w}: {a} vs {b}");
            w *= 9.7;
        }
    }
}

proptest! {
    // Lattice inversions cost seconds per case.
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn analytic_cdfs_are_monotone(offset in 1.0f64..20.0, density in 0.01f64..0.3, xi in 0.02f64..0.5, lattice in any::<bool>()) {
        let mut s = scenario(offset, density, xi);
        if lattice {
            s.geometry = GeometryKind::BernoulliLattice;
        }
        let m = radar_sg::interference::mean_interference(&s).unwrap();
        let grid: Vec<f64> = (0..24).map(|k| m * 10f64.powf(-1.5 + 3.0 * k as f64 / 23.0)).collect();
        let c = interference_cdf(&s, &grid).unwrap();
        for w in c.cdf.windows(2) {
            prop_assert!(w[1] >= w[0] - c.tolerance);
        }
        prop_assert!(c.cdf.iter().all(|f| (0.0..=1.0).contains(f)));
    }
}
