//! IMEX time stepping of `u′ + (Δ+1)²u = F(t, u) + g(t)` per Fourier mode.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics_fit::extract_tip_constant;
use crate::banded::BandedLu;
use crate::error::{Error, Result};
use crate::field::{dealiased_points, AngularTransform, ModeField};
use crate::grid::RadialGrid;
use crate::mellin_norms::{mellin_norm, MellinNormConfig};
use crate::operator::ModeOperator;

/// A Lipschitz coefficient `α(t)`: a constant or a piecewise-linear table
/// (held constant outside its range).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Coefficient {
    Constant(f64),
    Table { times: Vec<f64>, values: Vec<f64> },
}

impl Coefficient {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Table { times, values } => {
                if t <= times[0] {
                    return values[0];
                }
                let i = times.partition_point(|&s| s <= t);
                if i >= times.len() {
                    return values[values.len() - 1];
                }
                let w = (t - times[i - 1]) / (times[i] - times[i - 1]);
                values[i - 1] + w * (values[i] - values[i - 1])
            }
        }
    }

    /// Exact Lipschitz constant of the interpolant.
    pub fn slope_bound(&self) -> f64 {
        match self {
            Coefficient::Constant(_) => 0.0,
            Coefficient::Table { times, values } => times
                .windows(2)
                .zip(values.windows(2))
                .map(|(t, v)| ((v[1] - v[0]) / (t[1] - t[0])).abs())
                .fold(0.0, f64::max),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Constant(c) => *c == 0.0,
            Coefficient::Table { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        match self {
            Coefficient::Constant(c) if !c.is_finite() => {
                Err(Error::config(format!("alpha[{index}]"), "coefficient must be finite"))
            }
            Coefficient::Table { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::config(
                        format!("alpha[{index}]"),
                        "table needs matching non-empty times and values",
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::config(format!("alpha[{index}]"), "times must increase"));
                }
                if values.iter().chain(times).any(|v| !v.is_finite()) {
                    return Err(Error::config(format!("alpha[{index}]"), "table must be finite"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// `F(t, u) = Σ_k α_k(t) u^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nonlinearity {
    pub alpha: Vec<Coefficient>,
    /// Declared Lipschitz bounds of the coefficients; defaults to the exact
    /// slopes of the tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<Vec<f64>>,
}

impl Nonlinearity {
    pub fn polynomial(coefficients: &[f64]) -> Self {
        Nonlinearity {
            alpha: coefficients.iter().map(|&c| Coefficient::Constant(c)).collect(),
            lipschitz: None,
        }
    }

    pub fn zero() -> Self {
        Self::polynomial(&[])
    }

    /// `u − u³`.
    pub fn swift_hohenberg() -> Self {
        Self::polynomial(&[0.0, 1.0, 0.0, -1.0])
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.alpha.iter().enumerate() {
            c.validate(i)?;
        }
        if let Some(l) = &self.lipschitz {
            if l.len() != self.alpha.len() {
                return Err(Error::config("lipschitz", "one bound per coefficient"));
            }
            for (i, (c, bound)) in self.alpha.iter().zip(l).enumerate() {
                if c.slope_bound() > bound * (1.0 + 1e-12) {
                    return Err(Error::config(
                        format!("lipschitz[{i}]"),
                        format!("declared {bound} below the table slope {}", c.slope_bound()),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn lipschitz_bounds(&self) -> Vec<f64> {
        match &self.lipschitz {
            Some(l) => l.clone(),
            None => self.alpha.iter().map(|c| c.slope_bound()).collect(),
        }
    }

    /// Spot-check `|α(t₁) − α(t₂)| ≤ L|t₁ − t₂|` on random pairs in `[0, T]`.
    pub fn spot_check_lipschitz(&self, t_end: f64, pairs: usize, seed: u64) -> Result<()> {
        let bounds = self.lipschitz_bounds();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..pairs {
            let (a, b) = (rng.gen_range(0.0..=t_end), rng.gen_range(0.0..=t_end));
            for (i, (c, l)) in self.alpha.iter().zip(&bounds).enumerate() {
                if (c.eval(a) - c.eval(b)).abs() > l * (a - b).abs() * (1.0 + 1e-9) + 1e-15 {
                    return Err(Error::config(
                        format!("lipschitz[{i}]"),
                        format!("violated between t = {a} and t = {b}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.alpha.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().all(|c| c.is_zero())
    }

    pub fn coefficients_at(&self, t: f64) -> Vec<f64> {
        self.alpha.iter().map(|c| c.eval(t)).collect()
    }

    pub fn eval(&self, t: f64, u: f64) -> f64 {
        horner(&self.coefficients_at(t), u)
    }
}

fn horner(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * u + a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    ImexBdf2,
    ImexEuler,
}

/// `K(T) = a·e^{bT}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KThreshold {
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

impl Default for KThreshold {
    fn default() -> Self {
        KThreshold { a: 1e6, b: 0.0 }
    }
}

impl KThreshold {
    pub fn eval(&self, t: f64) -> f64 {
        self.a * (self.b * t).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub shift: f64,
    /// Monitor exponent `q`.
    pub q: f64,
    pub norm: MellinNormConfig,
    pub threshold: KThreshold,
    pub blowup_bound: f64,
    /// Collar length used by the monitor norm's cut-off.
    pub collar: f64,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64, collar: f64) -> Self {
        SolverConfig {
            scheme: Scheme::ImexBdf2,
            dt,
            t_end,
            shift: 0.0,
            q: 4.0,
            norm: MellinNormConfig::new(0, 0.5, 2.0),
            threshold: KThreshold::default(),
            blowup_bound: 1e8,
            collar,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", "must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("t_end", "must be positive"));
        }
        if !(self.shift >= 0.0) {
            return Err(Error::config("shift", "must be non-negative"));
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            return Err(Error::config("q", "must lie in (1, ∞)"));
        }
        if !(self.threshold.a > 0.0) {
            return Err(Error::config("threshold.a", "must be positive"));
        }
        Ok(())
    }

    /// Number of steps covering `[0, T]`; `Δt` is shrunk to divide `T`.
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Continue,
    HaltGraceful,
}

/// Running `(∫₀ᵗ‖F(s,u(s))‖^q ds)^{1/q}` by the trapezoid rule.
#[derive(Debug, Clone, PartialEq)]
pub struct KMonitor {
    q: f64,
    acc: f64,
    last: Option<(f64, f64)>,
}

impl KMonitor {
    pub fn new(q: f64) -> Self {
        KMonitor { q, acc: 0.0, last: None }
    }

    pub fn record(&mut self, t: f64, norm: f64) {
        let v = norm.powf(self.q);
        if let Some((t0, v0)) = self.last {
            self.acc += 0.5 * (t - t0) * (v + v0);
        }
        self.last = Some((t, v));
    }

    pub fn accumulator(&self) -> f64 {
        self.acc
    }

    pub fn k_running(&self) -> f64 {
        self.acc.powf(1.0 / self.q)
    }

    pub fn verdict(&self, threshold: &KThreshold, t: f64) -> Verdict {
        let k = self.k_running();
        if k.is_finite() && k <= threshold.eval(t) {
            Verdict::Continue
        } else {
            Verdict::HaltGraceful
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING-KEBAB-CASE")]
pub enum RunStatus {
    Running,
    Completed,
    HaltGraceful { t: f64, reason: String },
}

/// Inhomogeneous data on the right-hand side and in the closure rows.
pub trait Source: Sync {
    /// Interior forcing `g(t)` on the grid.
    fn forcing(&self, t: f64) -> ModeField;
    /// Closure data `(B u, B (Δ_k+1) u)` at `(tip, end)` for mode `k`.
    fn closure_data(&self, t: f64, k: usize) -> ([Complex64; 2], [Complex64; 2]);
}

#[derive(Debug, Clone)]
pub struct RunState {
    pub t: f64,
    pub u: ModeField,
    /// `F(t, u(t))` at the current time.
    pub f: ModeField,
    prev: Option<(f64, ModeField, ModeField)>,
    pub monitor: KMonitor,
    pub f_norm: f64,
    pub tip_trace: Vec<(f64, f64)>,
    pub status: RunStatus,
    pub steps: usize,
    pub max_imaginary_residue: f64,
    pub sup_norm: f64,
}

impl RunState {
    pub fn k_running(&self) -> f64 {
        self.monitor.k_running()
    }
}

/// Pointwise `F` in physical space, transformed back and truncated to the
/// kept modes. Also returns `‖u‖_∞`.
pub fn evaluate_f(u: &ModeField, t: f64, nl: &Nonlinearity, transform: &AngularTransform) -> (ModeField, f64) {
    let c = nl.coefficients_at(t);
    let phys = transform.to_physical(u);
    let sup = phys.iter().flatten().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
    if nl.is_zero() {
        return (ModeField::zeros(u.k_max(), u.n_r()), sup);
    }
    let fp: Vec<Vec<f64>> = phys.iter().map(|r| r.iter().map(|&v| horner(&c, v)).collect()).collect();
    (transform.to_modes(&fp), sup)
}

struct Factors {
    sigma: f64,
    per_mode: Vec<(BandedLu, BandedLu)>,
}

pub struct Solver<'a> {
    grid: &'a RadialGrid,
    ops: Vec<ModeOperator>,
    cfg: SolverConfig,
    nl: Nonlinearity,
    transform: AngularTransform,
    source: Option<&'a dyn Source>,
    factors: Vec<Factors>,
}

impl<'a> Solver<'a> {
    pub fn new(grid: &'a RadialGrid, ops: Vec<ModeOperator>, cfg: SolverConfig, nl: Nonlinearity) -> Result<Self> {
        cfg.validate()?;
        nl.validate()?;
        if ops.is_empty() || ops.iter().enumerate().any(|(k, op)| op.mode() != k || op.len() != grid.len()) {
            return Err(Error::Precondition("need one operator per mode 0..=K on this grid".into()));
        }
        let k_max = ops.len() - 1;
        let transform = AngularTransform::new(k_max, dealiased_points(k_max, nl.degree()));
        Ok(Solver { grid, ops, cfg, nl, transform, source: None, factors: Vec::new() })
    }

    pub fn with_source(mut self, source: &'a dyn Source) -> Self {
        self.source = Some(source);
        self
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn k_max(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn transform(&self) -> &AngularTransform {
        &self.transform
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nl
    }

    fn monitor_norm(&self, f: &ModeField) -> f64 {
        mellin_norm(f, self.grid, self.cfg.collar, &self.cfg.norm).unwrap_or(f64::NAN)
    }

    pub fn initial_state(&self, u0: ModeField) -> Result<RunState> {
        if u0.k_max() != self.k_max() || u0.n_r() != self.grid.len() {
            return Err(Error::Precondition("initial field does not match the solver".into()));
        }
        let (f, sup) = evaluate_f(&u0, 0.0, &self.nl, &self.transform);
        let mut monitor = KMonitor::new(self.cfg.q);
        let f_norm = self.monitor_norm(&f);
        monitor.record(0.0, f_norm);
        let c0 = extract_tip_constant(&u0, self.grid).value;
        let status = if u0.is_finite() { RunStatus::Running } else {
            return Err(Error::Precondition("initial field is not finite".into()));
        };
        Ok(RunState {
            t: 0.0,
            u: u0,
            f,
            prev: None,
            monitor,
            f_norm,
            tip_trace: vec![(0.0, c0)],
            status,
            steps: 0,
            max_imaginary_residue: 0.0,
            sup_norm: sup,
        })
    }

    fn factors_for(&mut self, sigma: f64) -> Result<usize> {
        if let Some(i) = self.factors.iter().position(|f| f.sigma == sigma) {
            return Ok(i);
        }
        let beta = sigma.sqrt();
        let per_mode = self
            .ops
            .par_iter()
            .map(|op| {
                Ok((
                    op.factor_shifted(Complex64::new(1.0, -beta))?,
                    op.factor_shifted(Complex64::new(1.0, beta))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        if self.factors.len() >= 2 {
            self.factors.remove(0);
        }
        self.factors.push(Factors { sigma, per_mode });
        Ok(self.factors.len() - 1)
    }

    /// One IMEX step of size `dt`; `dt = 0` leaves the state untouched.
    pub fn step(&mut self, state: &mut RunState, dt: f64) -> Result<()> {
        if dt == 0.0 || state.status != RunStatus::Running {
            return Ok(());
        }
        let c = self.cfg.shift;
        let t0 = state.t;
        let t1 = t0 + dt;
        let e0 = (-c * t0).exp();
        let e1 = (-c * t1).exp();
        let bdf2 = self.cfg.scheme == Scheme::ImexBdf2
            && matches!(&state.prev, Some((tp, _, _)) if ((t0 - tp) - dt).abs() <= 1e-12 * dt);
        let sigma = if bdf2 { c + 1.5 / dt } else { c + 1.0 / dt };
        let fi = self.factors_for(sigma)?;
        let beta = sigma.sqrt();
        let forcing = self.source.map(|s| s.forcing(t1));
        let k_max = self.k_max();
        let n = self.grid.len();

        let rhs: Vec<Vec<Complex64>> = (0..=k_max)
            .map(|k| {
                let u = state.u.mode(k);
                let f = state.f.mode(k);
                let mut r: Vec<Complex64> = if bdf2 {
                    let (tp, up, fp) = state.prev.as_ref().expect("history");
                    let ep = (-c * tp).exp();
                    (0..n)
                        .map(|j| {
                            (4.0 * e0 * u[j] - ep * up.mode(k)[j]) / (2.0 * dt) + 2.0 * e0 * f[j]
                                - ep * fp.mode(k)[j]
                        })
                        .collect()
                } else {
                    (0..n).map(|j| e0 * u[j] / dt + e0 * f[j]).collect()
                };
                if let Some(g) = &forcing {
                    for (rj, gj) in r.iter_mut().zip(g.mode(k)) {
                        *rj += e1 * gj;
                    }
                }
                r
            })
            .collect();

        let factors = &self.factors[fi].per_mode;
        let source = self.source;
        let solved: Vec<Vec<Complex64>> = rhs
            .into_par_iter()
            .enumerate()
            .map(|(k, mut r)| {
                let (bu, bau) = match source {
                    Some(s) => s.closure_data(t1, k),
                    None => ([Complex64::new(0.0, 0.0); 2], [Complex64::new(0.0, 0.0); 2]),
                };
                let ib = Complex64::new(0.0, beta);
                r[0] = e1 * (bau[0] + ib * bu[0]);
                r[n - 1] = e1 * (bau[1] + ib * bu[1]);
                factors[k].0.solve_in_place(&mut r);
                r[0] = e1 * bu[0];
                r[n - 1] = e1 * bu[1];
                factors[k].1.solve_in_place(&mut r);
                let scale = 1.0 / e1;
                r.iter_mut().for_each(|v| *v *= scale);
                r
            })
            .collect();
        let mut u_new = ModeField::from_modes(solved);

        if !u_new.is_finite() {
            state.status = RunStatus::HaltGraceful { t: t0, reason: "non-finite value in the next step".into() };
            return Ok(());
        }
        let residue = u_new.imaginary_residue();
        state.max_imaginary_residue = state.max_imaginary_residue.max(residue);
        u_new.project_real();

        let (f_new, sup) = evaluate_f(&u_new, t1, &self.nl, &self.transform);
        let prev_u = std::mem::replace(&mut state.u, u_new);
        let prev_f = std::mem::replace(&mut state.f, f_new);
        state.prev = Some((t0, prev_u, prev_f));
        state.t = t1;
        state.steps += 1;
        state.sup_norm = sup;
        let c0 = extract_tip_constant(&state.u, self.grid).value;
        state.tip_trace.push((t1, c0));

        if !(sup <= self.cfg.blowup_bound) {
            state.status = RunStatus::HaltGraceful {
                t: t1,
                reason: format!("sup norm {sup:e} exceeds the blow-up bound {:e}", self.cfg.blowup_bound),
            };
            return Ok(());
        }
        if !state.f.is_finite() {
            state.status = RunStatus::HaltGraceful { t: t1, reason: "nonlinearity overflowed".into() };
            return Ok(());
        }
        state.f_norm = self.monitor_norm(&state.f);
        state.monitor.record(t1, state.f_norm);
        if state.monitor.verdict(&self.cfg.threshold, t1) == Verdict::HaltGraceful {
            state.status = RunStatus::HaltGraceful {
                t: t1,
                reason: format!(
                    "K(T) = {:e} exceeds the threshold {:e}",
                    state.monitor.k_running(),
                    self.cfg.threshold.eval(t1)
                ),
            };
        }
        Ok(())
    }

    /// Step to `t_end`, calling `observe` after the initial state and every
    /// `cadence` steps, and on the final or halting state.
    pub fn run(&mut self, state: &mut RunState, cadence: usize, mut observe: impl FnMut(&RunState)) -> Result<()> {
        let (steps, dt) = self.cfg.steps();
        let cadence = cadence.max(1);
        observe(state);
        for i in 1..=steps {
            self.step(state, dt)?;
            if state.status != RunStatus::Running {
                observe(state);
                return Ok(());
            }
            if i % cadence == 0 || i == steps {
                observe(state);
            }
        }
        state.status = RunStatus::Completed;
        Ok(())
    }
}

/// `(K_running, verdict)` for the state under `cfg`.
pub fn monitor_kt(state: &RunState, cfg: &SolverConfig) -> (f64, Verdict) {
    (state.monitor.k_running(), state.monitor.verdict(&cfg.threshold, state.t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{OuterBc, SurfaceOfRevolution, WarpProfile};
    use crate::grid::{build_grid, XMinPolicy};
    use crate::operator::assemble_mode_laplacian;

    fn setup(outer: OuterBc, n: usize, k_max: usize) -> (SurfaceOfRevolution, RadialGrid, Vec<ModeOperator>) {
        let s = SurfaceOfRevolution::collar(WarpProfile::constant_cone(0.4, 1.0).unwrap(), outer);
        let g = build_grid(&s, n, XMinPolicy::Default).unwrap();
        let ops = (0..=k_max).map(|k| assemble_mode_laplacian(&g, &s, k).unwrap()).collect();
        (s, g, ops)
    }

    #[test]
    fn constant_shell_arithmetic() {
        let t = AngularTransform::new(2, 8);
        let u = ModeField::radial(&[0.5; 4]);
        let u = ModeField::from_modes(vec![u.mode(0).to_vec(), vec![Complex64::new(0.0, 0.0); 4], vec![Complex64::new(0.0, 0.0); 4]]);
        let (f, _) = evaluate_f(&u, 0.0, &Nonlinearity::swift_hohenberg(), &t);
        assert!(f.mode(0).iter().all(|v| (v - 0.375).norm() < 1e-15));
        let (z, _) = evaluate_f(&u, 0.0, &Nonlinearity::polynomial(&[0.0, 0.0]), &t);
        assert!(z.modes().iter().flatten().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn euler_step_of_constant_data_follows_the_scalar_ode() {
        let (_, g, ops) = setup(OuterBc::Neumann, 64, 0);
        let dt = 1e-3;
        let mut cfg = SolverConfig::new(dt, 1.0, 1.0);
        cfg.scheme = Scheme::ImexEuler;
        let mut solver = Solver::new(&g, ops, cfg, Nonlinearity::swift_hohenberg()).unwrap();
        let u0 = 0.5;
        let mut st = solver.initial_state(ModeField::radial(&vec![u0; g.len()])).unwrap();
        solver.step(&mut st, dt).unwrap();
        let exact = u0 + dt * (u0 - u0.powi(3) - u0);
        for v in st.u.mode(0) {
            assert!((v.re - exact).abs() < 2.0 * dt * dt, "{} vs {exact}", v.re);
            assert!((v.re - st.u.mode(0)[0].re).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let (_, g, ops) = setup(OuterBc::Dirichlet, 32, 1);
        let mut solver = Solver::new(&g, ops, SolverConfig::new(0.01, 1.0, 1.0), Nonlinearity::swift_hohenberg()).unwrap();
        let mut u0 = ModeField::zeros(1, g.len());
        for (j, x) in g.x().iter().enumerate() {
            u0.mode_mut(1)[j] = Complex64::new(x * (1.0 - x), 0.0);
        }
        let mut st = solver.initial_state(u0.clone()).unwrap();
        solver.step(&mut st, 0.0).unwrap();
        assert_eq!(st.u, u0);
        assert_eq!(st.t, 0.0);
    }

    #[test]
    fn monitor_of_constant_norm() {
        let mut m = KMonitor::new(4.0);
        let beta = 0.7;
        for i in 0..=100 {
            m.record(i as f64 * 0.02, beta);
        }
        assert!((m.k_running() - beta * 2f64.powf(0.25)).abs() < 1e-12);
        let z = KMonitor::new(2.0);
        assert_eq!(z.k_running(), 0.0);
    }

    #[test]
    fn lipschitz_tables() {
        let nl = Nonlinearity {
            alpha: vec![Coefficient::Table { times: vec![0.0, 1.0, 2.0], values: vec![0.0, 2.0, 1.0] }],
            lipschitz: Some(vec![2.0]),
        };
        nl.validate().unwrap();
        nl.spot_check_lipschitz(2.0, 200, 1).unwrap();
        let bad = Nonlinearity { lipschitz: Some(vec![1.0]), ..nl };
        assert!(bad.validate().is_err());
    }
}
