use std::path::Path;

use conelab::config::RunConfig;
use conelab::geometry::{OuterBc, SurfaceOfRevolution, WarpProfile};
use conelab::grid::XMinPolicy;
use conelab::integrator::{Nonlinearity, Scheme};
use conelab::mellin_norms::MellinNormConfig;
use conelab::mms::{mms_single, Manufactured, ManufacturedMode, MmsProblem, Profile};
use conelab::pipeline::{fit_snapshot, simulate};

fn load(name: &str) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    RunConfig::load(&path, &[]).unwrap()
}

fn cone_problem(rate: f64, modes: Vec<ManufacturedMode>, nl: Nonlinearity, k_max: usize) -> MmsProblem {
    MmsProblem {
        surface: SurfaceOfRevolution::collar(WarpProfile::constant_cone(0.4, 1.0).unwrap(), OuterBc::Dirichlet),
        exact: Manufactured { rate, modes },
        nl,
        scheme: Scheme::ImexBdf2,
        t_end: 0.05,
        k_max,
        x_min: XMinPolicy::Fraction(1e-3),
        norm: MellinNormConfig::new(1, 0.5, 2.0),
    }
}

#[test]
fn manufactured_k1_mode_excites_no_other_mode() {
    let mode = ManufacturedMode { k: 1, profile: Profile::Powers { terms: vec![[2.5, 1.0], [4.5, -0.5]] } };
    for nl in [Nonlinearity::polynomial(&[0.0, 1.0]), Nonlinearity::polynomial(&[0.0, 0.5, 0.0, -0.1])] {
        let row = mms_single(&cone_problem(1.0, vec![mode.clone()], nl, 4), 128, 1e-3).unwrap();
        assert!(row.spurious <= 1e-10, "spurious amplitude {}", row.spurious);
        assert!(row.linf_error < 1e-4, "error {}", row.linf_error);
    }
}

#[test]
fn manufactured_constant_is_reproduced_on_the_cone() {
    let mode = ManufacturedMode { k: 0, profile: Profile::Constant { value: 0.7 } };
    let row = mms_single(&cone_problem(0.0, vec![mode], Nonlinearity::swift_hohenberg(), 2), 128, 1e-2).unwrap();
    assert!(row.linf_error < 1e-10, "error {}", row.linf_error);
}

#[test]
fn decay_verdicts_are_stable_under_refinement() {
    for name in ["constant_data_cone.toml", "k1_rho040.toml", "k1_rho060.toml", "k1_rho080.toml"] {
        let base = load(name);
        let verdicts: Vec<_> = [base.discretization.n, 2 * base.discretization.n]
            .into_iter()
            .map(|n| {
                let mut cfg = base.clone();
                cfg.discretization.n = n;
                let sim = simulate(&cfg).unwrap();
                let snap = sim.last();
                fit_snapshot(&cfg, &sim.analysis, &sim.disc, snap.t, &snap.u).report.verdict
            })
            .collect();
        assert_eq!(verdicts[0], verdicts[1], "{name}: {verdicts:?}");
    }
}

#[test]
fn mean_follows_the_scalar_ode_on_the_sphere() {
    let cfg = RunConfig::from_toml_str(
        r#"
        [geometry]
        profile = { kind = "round-sphere", radius = 1.0 }
        [discretization]
        n = 128
        k_max = 4
        [dynamics]
        initial = { kind = "random", amplitude = 0.2, seed = 11 }
        nonlinearity = { alpha = [] }
        dt = 1e-3
        t_end = 1.0
        [output]
        snapshot_every = 0.25
        "#,
        "inline",
    )
    .unwrap();
    let sim = simulate(&cfg).unwrap();
    let w = sim.disc.grid.area_weights();
    let mean = |u: &conelab::field::ModeField| -> f64 { u.mode(0).iter().zip(&w).map(|(v, w)| v.re * w).sum() };
    let m0 = mean(&sim.snapshots[0].u);
    assert!(m0.abs() > 1e-3);
    // the scalar ODE m' = -m under the same Euler-started BDF2 scheme
    let dt = cfg.dynamics.dt;
    let mut ode = vec![m0, m0 / (1.0 + dt)];
    while ode.len() <= sim.steps {
        let n = ode.len();
        ode.push((4.0 * ode[n - 1] - ode[n - 2]) / (3.0 + 2.0 * dt));
    }
    for s in &sim.snapshots[1..] {
        let step = (s.t / dt).round() as usize;
        let err = (mean(&s.u) - ode[step]).abs() / m0.abs();
        assert!(err <= 1e-6 * s.t, "t = {}: relative error {err}", s.t);
        assert!((ode[step] - m0 * (-s.t).exp()).abs() / m0.abs() < 1e-6);
    }
}

#[test]
fn shifted_run_reproduces_the_unshifted_trajectory() {
    let base = load("constant_data_cone.toml");
    let mut cfg = base.clone();
    cfg.discretization.n = 128;
    cfg.dynamics.t_end = 0.2;
    cfg.output.snapshot_every = 0.1;
    let plain = simulate(&cfg).unwrap();
    let mut half = cfg.clone();
    half.dynamics.dt /= 2.0;
    let refined = simulate(&half).unwrap();
    let max_diff = |a: &conelab::field::ModeField, b: &conelab::field::ModeField| {
        a.modes().iter().flatten().zip(b.modes().iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    };
    let tolerance = plain.snapshots.iter().zip(&refined.snapshots).map(|(a, b)| max_diff(&a.u, &b.u)).fold(0.0, f64::max);
    assert!(tolerance > 0.0 && tolerance < 1e-5);
    for c in [0.5, 3.0] {
        let mut shifted = cfg.clone();
        shifted.dynamics.shift = c;
        let sim = simulate(&shifted).unwrap();
        for (a, b) in plain.snapshots.iter().zip(&sim.snapshots) {
            let diff = max_diff(&a.u, &b.u);
            assert!(diff <= 5.0 * tolerance, "shift {c}, t = {}: {diff} vs solver tolerance {tolerance}", a.t);
        }
    }
}

#[test]
fn second_step_follows_the_bdf2_recursion() {
    let cfg = RunConfig::from_toml_str(
        r#"
        [geometry]
        profile = { kind = "round-sphere", radius = 1.0 }
        [discretization]
        n = 64
        [dynamics]
        initial = { kind = "constant", value = 0.4 }
        nonlinearity = { alpha = [] }
        dt = 0.01
        t_end = 0.02
        [output]
        snapshot_every = 0.01
        "#,
        "inline",
    )
    .unwrap();
    let sim = simulate(&cfg).unwrap();
    let y: Vec<f64> = sim.snapshots.iter().map(|s| s.u.mode(0)[10].re).collect();
    let dt = cfg.dynamics.dt;
    let euler = y[0] / (1.0 + dt);
    let bdf2 = (4.0 * y[1] - y[0]) / (3.0 + 2.0 * dt);
    assert!((y[1] - euler).abs() < 1e-13);
    assert!((y[2] - bdf2).abs() < 1e-13);
    let local = |h: f64| ((4.0 * (-h).exp() - 1.0) / (3.0 + 2.0 * h) - (-2.0 * h).exp()).abs();
    let ratio = local(dt) / local(dt / 2.0);
    assert!((ratio - 8.0).abs() < 0.5, "local error ratio {ratio}");
}
