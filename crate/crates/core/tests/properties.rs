use num_complex::Complex64;
use proptest::prelude::*;

use conelab::asymptotics_fit::{fit_deviation_exponent, TipConstant, WindowPolicy};
use conelab::config::RunConfig;
use conelab::field::ModeField;
use conelab::geometry::{build_profile, eval_metric_coeffs, CrossSectionSpectrum, OuterBc, ProfileSpec, SurfaceOfRevolution, WarpProfile};
use conelab::grid::{build_grid, gregory_weights, RadialGrid, XMinPolicy};
use conelab::mellin_analysis::{admissible_weights, bilaplacian_asymptotics, WeightPath};
use conelab::mellin_norms::{mellin_norm, MellinNormConfig};
use conelab::pipeline::simulate;

fn profile_strategy() -> impl Strategy<Value = ProfileSpec> {
    prop_oneof![
        (0.1..3.0f64).prop_map(|rho0| ProfileSpec::ConstantCone { rho0, collar_length: 1.0 }),
        (0.5..3.0f64).prop_map(|radius| ProfileSpec::RoundSphere { radius }),
        (0.5..2.0f64, 0.5..2.0f64).prop_map(|(equatorial, polar)| ProfileSpec::Spheroid { equatorial, polar }),
        (0.2..2.0f64, 0.5..2.0f64).prop_map(|(beta, rho_outer)| ProfileSpec::Teardrop { beta, collar_length: 1.0, rho_outer }),
    ]
}

fn cone_grid(rho0: f64, n: usize) -> (SurfaceOfRevolution, RadialGrid) {
    let surface = SurfaceOfRevolution::collar(WarpProfile::constant_cone(rho0, 1.0).unwrap(), OuterBc::Dirichlet);
    let grid = build_grid(&surface, n, XMinPolicy::Fraction(1e-4)).unwrap();
    (surface, grid)
}

fn short_sim_config(seed: u64, k_max: usize) -> RunConfig {
    RunConfig::from_toml_str(
        &format!(
            r#"
            [geometry]
            profile = {{ kind = "constant-cone", rho0 = 0.5, collar_length = 1.0 }}
            [discretization]
            n = 64
            k_max = {k_max}
            [dynamics]
            initial = {{ kind = "random", amplitude = 0.3, seed = {seed} }}
            dt = 1e-3
            t_end = 0.02
            [output]
            snapshot_every = 0.01
            "#
        ),
        "inline",
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn warp_exponent_matches_finite_difference(spec in profile_strategy(), s in 0.05..0.9f64) {
        let profile = build_profile(&spec).unwrap();
        let x = s * profile.collar_length();
        let e = 1e-5 * x;
        let lr = |y: f64| profile.rho(y).unwrap().ln();
        let fd = x * (lr(x + e) - lr(x - e)) / (2.0 * e);
        let h = eval_metric_coeffs(&profile, x).unwrap().h;
        prop_assert!((h - fd).abs() <= 1e-6 * (1.0 + h.abs()), "H = {h}, finite difference {fd}");
    }

    #[test]
    fn window_emptiness_and_nesting(n in 1usize..4, p in 1.1..20.0f64, q in 1.1..20.0f64, lambda1 in -50.0..-0.001f64) {
        let lap = admissible_weights(n, p, q, lambda1, WeightPath::Laplacian).unwrap();
        let nl = admissible_weights(n, p, q, lambda1, WeightPath::Nonlinear).unwrap();
        prop_assert_eq!(nl.is_empty(), !(nl.gamma_min < nl.gamma_max));
        prop_assert!(lap.gamma_min <= nl.gamma_min && lap.gamma_max == nl.gamma_max);
        prop_assert!(lap.gamma_max <= 0.5 * (n as f64 + 1.0));
        prop_assert_eq!(nl.q_constraint, !nl.is_empty());
        let gamma = 0.5 * (nl.gamma_min + nl.gamma_max);
        prop_assert_eq!(nl.contains(gamma), !nl.is_empty());
    }

    #[test]
    fn template_terms_lie_in_the_strip(rho0 in 0.12..1.5f64, frac in 0.01..0.99f64, k_max in 0usize..6) {
        let spec = CrossSectionSpectrum::circle(rho0, k_max);
        let lo = -1.0;
        let hi = conelab::mellin_analysis::gamma_upper(1, spec.lambda1());
        prop_assume!(hi > lo);
        let gamma = lo + frac * (hi - lo);
        let t = bilaplacian_asymptotics(&spec, gamma).unwrap();
        for term in &t.terms {
            prop_assert!(t.strip[0] <= term.rho && term.rho < t.strip[1], "{term:?} outside {:?}", t.strip);
        }
        prop_assert!(t.terms.iter().any(|term| term.mode == 0));
    }

    #[test]
    fn gregory_rule_integrates_septics_exactly(n in 16usize..200, coeffs in prop::collection::vec(-1.0..1.0f64, 8)) {
        let w = gregory_weights(n);
        let len = (n - 1) as f64;
        let f = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x / len + c);
        let quad: f64 = w.iter().enumerate().map(|(j, wj)| wj * f(j as f64)).sum();
        let exact: f64 = coeffs.iter().enumerate().map(|(d, c)| c * len / (d as f64 + 1.0)).sum();
        prop_assert!((quad - exact).abs() <= 1e-11 * len, "{quad} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norms_are_absolutely_homogeneous(
        a in 0.3..3.0f64,
        b in -2.0..2.0f64,
        c in -5.0..5.0f64,
        s in 0usize..3,
        p in 1.5..8.0f64,
        gamma in -0.5..1.0f64,
    ) {
        let (_, grid) = cone_grid(0.5, 128);
        let mut u = ModeField::zeros(2, grid.len());
        for (j, x) in grid.x().iter().enumerate() {
            u.mode_mut(0)[j] = Complex64::new(x.powf(a), 0.0);
            u.mode_mut(2)[j] = Complex64::new(b * x.powf(a + 1.0), 0.0);
        }
        let cfg = MellinNormConfig::new(s, gamma, p);
        let n1 = mellin_norm(&u, &grid, 1.0, &cfg).unwrap();
        let n2 = mellin_norm(&u.scale(c), &grid, 1.0, &cfg).unwrap();
        prop_assert!((n2 - c.abs() * n1).abs() <= 1e-12 * (1.0 + n2));
    }

    #[test]
    fn fitted_exponent_is_robust_to_a_one_shell_window_shift(alpha in 0.75..2.5f64, c0 in -1.0..1.0f64, amp in 0.1..2.0f64) {
        let (_, grid) = cone_grid(0.5, 512);
        let u = ModeField::radial(&grid.x().iter().map(|x| c0 + amp * x.powf(alpha)).collect::<Vec<_>>());
        let tip = TipConstant { value: c0, inconclusive: false };
        let ratio = grid.x()[1] / grid.x()[0];
        let base = WindowPolicy::default();
        let shifted = [
            WindowPolicy { lo_factor: base.lo_factor * ratio, ..base },
            WindowPolicy { hi_fraction: base.hi_fraction / ratio, ..base },
            WindowPolicy { lo_factor: base.lo_factor * ratio, hi_fraction: base.hi_fraction * ratio, ..base },
        ];
        let fit = |policy: &WindowPolicy| fit_deviation_exponent(&u, &grid, 1.0, 0.0, tip, policy).0.alpha_dev.unwrap();
        let reference = fit(&base);
        prop_assert!((reference - alpha).abs() < 0.05, "fitted {reference} for {alpha}");
        for policy in &shifted {
            prop_assert!((fit(policy) - reference).abs() < 0.05);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn runs_stay_real_and_are_deterministic(seed in any::<u64>(), k_max in 1usize..5) {
        let cfg = short_sim_config(seed, k_max);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        prop_assert!(a.max_imaginary_residue < 1e-12, "imaginary residue {}", a.max_imaginary_residue);
        prop_assert_eq!(a.snapshots.len(), b.snapshots.len());
        for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
            prop_assert_eq!(x.t.to_bits(), y.t.to_bits());
            prop_assert!(x.u == y.u);
        }
        prop_assert_eq!(a.monitor, b.monitor);
    }
}
