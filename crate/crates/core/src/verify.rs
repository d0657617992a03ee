//! Acceptance checks and the suite runner behind `conelab verify`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics_fit::{ordering_check, FitVerdict};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::field::ModeField;
use crate::geometry::{CrossSectionSpectrum, OuterBc, SurfaceOfRevolution, WarpProfile};
use crate::grid::{build_grid, RadialGrid, XMinPolicy};
use crate::integrator::RunStatus;
use crate::io::{self, CsvOut};
use crate::mellin_analysis::{admissible_weights, curvature_condition, laplacian_poles, WeightPath};
use crate::mellin_norms::{pointwise_bound_check, MellinNormConfig};
use crate::operator::{assemble_mode_laplacian, spectrum_diagnostics};
use crate::pipeline::{fit_snapshot, mms, simulate};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub runtime_s: f64,
    pub runtime_limit_s: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}] {}: {} ({:.2} s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.runtime_s
        )
    }
}

pub const CRITERIA: [(u8, &str, usize, f64); 9] = [
    (1, "symbol oracle equivalence", 0, 1.0),
    (2, "weight-window table", 0, 60.0),
    (3, "curvature-condition boundary", 0, 60.0),
    (4, "manufactured-solution convergence", 1, 120.0),
    (5, "constant-data decay rate", 1, 180.0),
    (6, "geometry effect on the k=1 exponent", 3, 600.0),
    (7, "weighted pointwise bound", 0, 60.0),
    (8, "sectoriality and smoothing diagnostics", 0, 60.0),
    (9, "K(T) monitor", 3, 120.0),
];

fn criterion_entry(id: u8) -> Option<(u8, &'static str, usize, f64)> {
    CRITERIA.iter().copied().find(|c| c.0 == id)
}

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Result<Check> {
    Ok(Check { pass, detail: detail.into() })
}

/// Run criterion `id` on already loaded scenario configurations.
pub fn run_criterion(id: u8, scenarios: &[RunConfig]) -> Result<CriterionResult> {
    let (_, name, needed, limit) =
        criterion_entry(id).ok_or_else(|| Error::Suite { entry: format!("id {id}"), message: "unknown criterion".into() })?;
    if scenarios.len() != needed {
        return Err(Error::Suite {
            entry: format!("id {id}"),
            message: format!("needs {needed} scenario file(s), got {}", scenarios.len()),
        });
    }
    let started = Instant::now();
    let c = match id {
        1 => symbol_oracle()?,
        2 => window_table()?,
        3 => curvature_boundary()?,
        4 => mms_convergence(&scenarios[0])?,
        5 => constant_data_decay(&scenarios[0])?,
        6 => geometry_effect(scenarios)?,
        7 => pointwise_bound()?,
        8 => sectoriality()?,
        9 => k_monitor(scenarios)?,
        _ => unreachable!(),
    };
    let runtime_s = started.elapsed().as_secs_f64();
    let within = runtime_s < limit;
    let detail = if within { c.detail } else { format!("{}; runtime over {limit} s", c.detail) };
    Ok(CriterionResult { id, name, pass: c.pass && within, detail, runtime_s, runtime_limit_s: limit })
}

fn symbol_oracle() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n: usize = rng.gen_range(1..=4);
        let lambda: f64 = -rng.gen_range(1e-9..50.0);
        let spec = CrossSectionSpectrum::from_table(n, &[0.0, lambda])?;
        let report = laplacian_poles(&spec);
        let entry = &report.entries[1];
        // companion matrix of z² − (n−1)z + λ
        let companion = Matrix2::new(n as f64 - 1.0, -lambda, 1.0, 0.0);
        let mut oracle: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();
        let mut got: Vec<Complex64> = entry
            .poles
            .iter()
            .flat_map(|p| std::iter::repeat(p.location()).take(p.multiplicity))
            .collect();
        let key = |z: &Complex64| (z.re, z.im);
        oracle.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        if got.len() != 2 {
            return check(false, format!("n = {n}, λ = {lambda}: {} poles", got.len()));
        }
        for (a, b) in got.iter().zip(&oracle) {
            worst = worst.max((a - b).norm());
        }
    }
    check(worst <= 1e-10, format!("max deviation from companion-matrix roots {worst:.2e}"))
}

/// Closed interval with one-ulp outward rounding per operation.
#[derive(Debug, Clone, Copy)]
struct Interval(f64, f64);

impl Interval {
    fn point(v: f64) -> Self {
        Interval(v, v)
    }
    fn widen(lo: f64, hi: f64) -> Self {
        Interval(lo.next_down(), hi.next_up())
    }
    fn add(self, o: Self) -> Self {
        Self::widen(self.0 + o.0, self.1 + o.1)
    }
    fn sub(self, o: Self) -> Self {
        Self::widen(self.0 - o.1, self.1 - o.0)
    }
    fn div_pos(self, o: Self) -> Self {
        Self::widen(self.0 / o.1, self.1 / o.0)
    }
    fn mul_pos(self, o: Self) -> Self {
        Self::widen(self.0 * o.0, self.1 * o.1)
    }
    fn sqrt(self) -> Self {
        Self::widen(self.0.max(0.0).sqrt(), self.1.sqrt())
    }
    fn min(self, o: Self) -> Self {
        Interval(self.0.min(o.0), self.1.min(o.1))
    }
    fn contains(self, v: f64) -> bool {
        self.0 <= v && v <= self.1
    }
    fn certainly_below(self, o: Self) -> bool {
        self.1 < o.0
    }
    fn certainly_not_below(self, o: Self) -> bool {
        self.0 >= o.1
    }
}

/// `((n−3)/2 + 2/q, min{−1 + √(((n−1)/2)² − λ₁), (n+1)/2})` in intervals.
fn window_oracle(n: usize, q: f64, lambda1: f64) -> (Interval, Interval) {
    let nf = Interval::point(n as f64);
    let half = Interval::point(0.5);
    let one = Interval::point(1.0);
    let base = nf.sub(Interval::point(3.0)).mul_signed(half);
    let lo = base.add(Interval::point(2.0).div_pos(Interval::point(q)));
    let c = nf.sub(one).mul_pos(half);
    let root = c.mul_pos(c).sub(Interval::point(lambda1)).sqrt();
    let hi = root.sub(one).min(nf.add(one).mul_pos(half));
    (lo, hi)
}

impl Interval {
    fn mul_signed(self, o: Self) -> Self {
        let p = [self.0 * o.0, self.0 * o.1, self.1 * o.0, self.1 * o.1];
        Self::widen(p.iter().cloned().fold(f64::INFINITY, f64::min), p.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
    }
}

fn window_table() -> Result<Check> {
    let mut notes = Vec::new();
    let mut pass = true;

    let w = admissible_weights(1, 8.0, 4.0, -9.0, WeightPath::Nonlinear)?;
    let (lo, hi) = window_oracle(1, 4.0, -9.0);
    let ok = w.gamma_min == -0.5 && w.gamma_max == 1.0 && lo.contains(w.gamma_min) && hi.contains(w.gamma_max);
    pass &= ok;
    notes.push(format!("rho0=1/3,q=4: ({}, {})", w.gamma_min, w.gamma_max));

    let ok = w.p_constraint && w.q_constraint && 2.0 / 4.0 + 2.0 / 8.0 < 2.0;
    pass &= ok;
    notes.push(format!("p=8 constraint {}", w.p_constraint && w.q_constraint));

    let e = admissible_weights(1, 8.0, 4.0, -0.01, WeightPath::Nonlinear)?;
    let (lo, hi) = window_oracle(1, 4.0, -0.01);
    let ok = e.is_empty() && hi.certainly_below(lo) && (e.gamma_max - -0.9).abs() < 1e-12;
    pass &= ok;
    notes.push(format!("lambda1=-0.01: empty={} gamma_max={:.6}", e.is_empty(), e.gamma_max));

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut disagreements = 0;
    let mut undecided = 0;
    for _ in 0..200 {
        let n: usize = rng.gen_range(1..=4);
        let lambda1: f64 = -rng.gen_range(1e-6..50.0);
        let q: f64 = rng.gen_range(1.0001..20.0);
        let p: f64 = rng.gen_range(1.0001..20.0);
        let w = admissible_weights(n, p, q, lambda1, WeightPath::Nonlinear)?;
        let (lo, hi) = window_oracle(n, q, lambda1);
        let oracle_empty = if lo.certainly_below(hi) {
            false
        } else if lo.certainly_not_below(hi) {
            true
        } else {
            undecided += 1;
            continue;
        };
        if oracle_empty != w.is_empty() {
            disagreements += 1;
        }
    }
    pass &= disagreements == 0;
    notes.push(format!("200 random: {disagreements} disagreements, {undecided} undecided"));
    check(pass, notes.join("; "))
}

fn curvature_boundary() -> Result<Check> {
    let at = CrossSectionSpectrum::circle(0.5, 1).lambda1().expect("k = 1");
    let past = CrossSectionSpectrum::circle(0.5 + 1e-6, 1).lambda1().expect("k = 1");
    let (a, b) = (curvature_condition(1, at), curvature_condition(1, past));
    check(a && !b, format!("rho0=0.5 -> {a}, rho0=0.5+1e-6 -> {b}"))
}

fn mms_convergence(cfg: &RunConfig) -> Result<Check> {
    let r = mms(cfg)?;
    let (s, t) = (r.spatial_order.unwrap_or(f64::NAN), r.temporal_order.unwrap_or(f64::NAN));
    check(s >= 3.7 && (t - 2.0).abs() <= 0.2, format!("spatial order {s:.3}, temporal order {t:.3}"))
}

fn constant_data_decay(cfg: &RunConfig) -> Result<Check> {
    let sim = simulate(cfg)?;
    let last = sim.last();
    let fit = fit_snapshot(cfg, &sim.analysis, &sim.disc, last.t, &last.u);
    let a = fit.report.alpha_dev.unwrap_or(f64::NAN);
    let pred = sim.analysis.prediction.as_ref().map_or(f64::NAN, |p| p.alpha_pred);
    check(
        fit.report.verdict == FitVerdict::Pass && (a - 2.0).abs() <= 0.15,
        format!("alpha_dev {a:.4} (R² {:.5}), alpha_pred {pred:.4}, verdict {:?}", fit.report.r2.unwrap_or(f64::NAN), fit.report.verdict),
    )
}

fn geometry_effect(cfgs: &[RunConfig]) -> Result<Check> {
    let mut pass = true;
    let mut points = Vec::new();
    let mut notes = Vec::new();
    for cfg in cfgs {
        let sim = simulate(cfg)?;
        let last = sim.last();
        let fit = fit_snapshot(cfg, &sim.analysis, &sim.disc, last.t, &last.u);
        let rho0 = sim.disc.tip_rho();
        let a1 = fit.report.modes.get(1).and_then(|m| m.alpha).unwrap_or(f64::NAN);
        let oracle = 1.0 / rho0;
        let ok = fit.report.verdict == FitVerdict::Pass && (a1 - oracle).abs() <= cfg.fit.tolerance;
        pass &= ok;
        points.push((rho0, a1));
        notes.push(format!("rho0 {rho0}: alpha_1 {a1:.4} vs {oracle:.4} ±{} {:?}", cfg.fit.tolerance, fit.report.verdict));
    }
    let ordered = ordering_check(&points);
    pass &= ordered;
    notes.push(format!("decreasing {ordered}"));
    check(pass, notes.join("; "))
}

fn localized_field(grid: &RadialGrid, collar: f64, cfg: &MellinNormConfig, terms: &[(usize, f64, f64, f64)]) -> ModeField {
    let k_max = terms.iter().map(|t| t.0).max().unwrap_or(0);
    let mut u = ModeField::zeros(k_max, grid.len());
    for &(k, m, re, im) in terms {
        let w = if k == 0 { 1.0 } else { 0.5 };
        for (j, &x) in grid.x().iter().enumerate() {
            let v = w * cfg.cutoff.eval(x, collar) * x.powf(m);
            u.mode_mut(k)[j] += Complex64::new(v * re, if k == 0 { 0.0 } else { v * im });
        }
    }
    u
}

fn pointwise_bound() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut worst: f64 = 1.0;
    let mut pass = true;
    for _ in 0..10 {
        let rho0 = rng.gen_range(0.3..1.0);
        let lambda1 = -1.0 / (rho0 * rho0);
        let window = admissible_weights(1, 4.0, 4.0, lambda1, WeightPath::Laplacian)?;
        let gamma = rng.gen_range(window.gamma_min + 0.05..window.gamma_max - 0.05);
        let cfg = MellinNormConfig::new(1, gamma, 4.0);
        let terms: Vec<(usize, f64, f64, f64)> = (0..3)
            .map(|k| (k, gamma - 1.0 + rng.gen_range(0.0..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let surface = SurfaceOfRevolution::collar(WarpProfile::constant_cone(rho0, 1.0)?, OuterBc::Dirichlet);
        let coarse = build_grid(&surface, 256, XMinPolicy::Default)?;
        let fine = build_grid(&surface, 512, XMinPolicy::Default)?;
        let uc = localized_field(&coarse, 1.0, &cfg, &terms);
        let uf = localized_field(&fine, 1.0, &cfg, &terms);
        let b = pointwise_bound_check((&uc, &coarse), (&uf, &fine), 1.0, &cfg)?;
        pass &= b.pass && b.applicable;
        worst = worst.max(b.drift);
    }
    check(pass, format!("10 fields, worst drift {worst:.4}"))
}

fn sectoriality() -> Result<Check> {
    let surface = SurfaceOfRevolution::collar(WarpProfile::constant_cone(0.4, 1.0)?, OuterBc::Dirichlet);
    let grid = build_grid(&surface, 128, XMinPolicy::Default)?;
    let mut min_re = f64::INFINITY;
    let mut worst_sup: f64 = 0.0;
    for k in 0..=8 {
        let op = assemble_mode_laplacian(&grid, &surface, k)?;
        for a in [0.25, 0.5, 0.75] {
            let r = spectrum_diagnostics(&op, 0.0, a)?;
            min_re = min_re.min(r.min_real_part);
            worst_sup = worst_sup.max((r.smoothing_sup - r.smoothing_expected).abs());
        }
    }
    check(min_re >= -1e-8 && worst_sup <= 1e-10, format!("min Re {min_re:.4e}, smoothing sup error {worst_sup:.2e}"))
}

fn k_monitor(cfgs: &[RunConfig]) -> Result<Check> {
    let mut notes = Vec::new();
    let zero = simulate(&cfgs[0])?;
    let k_zero = zero.monitor.iter().all(|r| r.k_running == 0.0);
    notes.push(format!("F=0: K identically zero {k_zero}"));

    let constant = simulate(&cfgs[1])?;
    let first = constant.monitor.first().expect("initial row");
    let last = constant.monitor.last().expect("final row");
    let beta = first.f_norm;
    let steady = constant.monitor.iter().all(|r| (r.f_norm - beta).abs() <= 1e-12 * beta);
    let expected = beta * last.t.powf(1.0 / constant.solver_config.q);
    let rel = (last.k_running - expected).abs() / expected;
    let k_const = steady && rel <= 1e-6;
    notes.push(format!("constant |F|: K(T) relative error {rel:.2e}"));

    let focus = simulate(&cfgs[2])?;
    let finite = focus.monitor.iter().all(|r| r.k_running.is_finite() && r.sup_norm.is_finite())
        && focus.snapshots.iter().all(|s| s.u.is_finite());
    let halted = match &focus.status {
        RunStatus::HaltGraceful { t, reason } => {
            notes.push(format!("focusing: HALT-GRACEFUL at t = {t:.4} ({reason})"));
            true
        }
        s => {
            notes.push(format!("focusing: status {s:?}"));
            false
        }
    };
    check(k_zero && k_const && halted && finite, notes.join("; "))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteEntry {
    id: u8,
    #[serde(default)]
    scenarios: Vec<String>,
}

/// Entries of a suite file: `[[criterion]]` tables with an `id` and the
/// scenario files it runs on, relative to the suite file.
pub fn load_suite(path: &Path) -> Result<Vec<(u8, Vec<RunConfig>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse { path: origin.clone(), message: e.to_string() })?;
    let entries = match table.remove("criterion") {
        Some(toml::Value::Array(a)) => a,
        Some(_) => return Err(Error::Suite { entry: "criterion".into(), message: "must be an array of tables".into() }),
        None => return Err(Error::Suite { entry: "criterion".into(), message: "suite lists no criteria".into() }),
    };
    if let Some(extra) = table.keys().next() {
        return Err(Error::Suite { entry: extra.clone(), message: "unknown top-level key".into() });
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut out = Vec::new();
    for (i, value) in entries.into_iter().enumerate() {
        let name = format!("criterion[{i}]");
        let entry: SuiteEntry = value.try_into().map_err(|e: toml::de::Error| Error::Suite { entry: name.clone(), message: e.to_string() })?;
        let (_, _, needed, _) = criterion_entry(entry.id)
            .ok_or_else(|| Error::Suite { entry: name.clone(), message: format!("unknown criterion id {}", entry.id) })?;
        if entry.scenarios.len() != needed {
            return Err(Error::Suite {
                entry: name,
                message: format!("criterion {} needs {needed} scenario file(s), got {}", entry.id, entry.scenarios.len()),
            });
        }
        let configs = entry
            .scenarios
            .iter()
            .map(|s| {
                let p: PathBuf = base.join(s);
                if !p.exists() {
                    return Err(Error::Suite { entry: name.clone(), message: format!("missing scenario file {}", p.display()) });
                }
                RunConfig::load(&p, &[]).map_err(|e| Error::Suite { entry: name.clone(), message: e.to_string() })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((entry.id, configs));
    }
    Ok(out)
}

/// Run a suite file, write `verify.json` and `verify.csv` under `out`.
pub fn cmd_verify(suite: &Path, out: &Path) -> Result<Vec<CriterionResult>> {
    let entries = load_suite(suite)?;
    io::ensure_dir(out)?;
    let mut results = Vec::new();
    for (id, configs) in &entries {
        let r = run_criterion(*id, configs)?;
        log::info!("{}", r.line());
        results.push(r);
    }
    let text = std::fs::read_to_string(suite).map_err(|e| Error::io(suite, e))?;
    let hash = {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(text.as_bytes()))
    };
    io::write_json(&out.join("verify.json"), &serde_json::json!({ "manifest_hash": hash, "results": results }))?;
    let mut csv = CsvOut::create(&out.join("verify.csv"), &hash, &["id", "name", "pass", "detail", "runtime_s"])?;
    for r in &results {
        csv.row([r.id.to_string(), r.name.to_string(), r.pass.to_string(), r.detail.clone(), format!("{:.3}", r.runtime_s)])?;
    }
    csv.finish()?;
    Ok(results)
}
