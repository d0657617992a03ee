//! Configuration-driven analysis, simulation, fitting and manufactured
//! solution runs, in memory and as artifact-writing commands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics_fit::{compare_with_prediction, extract_tip_constant, fit_deviation_exponent, DecayFitReport, FitVerdict, Shell};
use crate::config::{GammaChoice, GammaKeyword, InitialData, RunConfig, AUTO_MAX_OFFSET};
use crate::error::{Error, Result};
use crate::field::{AngularTransform, ModeField};
use crate::geometry::{build_profile, cross_section_spectrum, CrossSectionSpectrum, SurfaceOfRevolution, Topology};
use crate::grid::{build_grid, GridMap, RadialGrid};
use crate::io::{self, CsvOut, SnapshotRecord};
use crate::mellin_analysis::{
    admissible_weights_for, bilaplacian_asymptotics, curvature_condition, laplacian_poles, predicted_deviation_exponent,
    AsymptoticsTemplate, DecayPrediction, PoleReport, WeightWindow,
};
use crate::mellin_norms::mellin_norm;
use crate::mms::{mms_run, MmsProblem, MmsReport};
use crate::operator::{assemble_mode_laplacian, tip_closure, ModeOperator};
use crate::integrator::{RunStatus, Solver, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnalysisStatus {
    Ok,
    EmptyWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub status: AnalysisStatus,
    pub spectrum: CrossSectionSpectrum,
    pub poles: PoleReport,
    pub window: WeightWindow,
    pub curvature_condition: Option<bool>,
    pub gamma: Option<f64>,
    pub gamma_source: &'static str,
    pub template: Option<AsymptoticsTemplate>,
    pub prediction: Option<DecayPrediction>,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    pub fn summary(&self) -> String {
        let gamma = self.gamma.map_or("none".to_string(), |g| format!("{g:.6}"));
        let status = match self.status {
            AnalysisStatus::Ok => "OK",
            AnalysisStatus::EmptyWindow => "EMPTY_WINDOW",
        };
        format!(
            "status={status} window=({:.6}, {:.6}) gamma={gamma} curvature_condition={}",
            self.window.gamma_min,
            self.window.gamma_max,
            self.curvature_condition.map_or("n/a".to_string(), |c| c.to_string())
        )
    }
}

pub fn spectrum_for(cfg: &RunConfig) -> Result<CrossSectionSpectrum> {
    let a = &cfg.analysis;
    match &a.spectrum {
        Some(table) => CrossSectionSpectrum::from_table(a.n, table),
        None => cross_section_spectrum(&build_profile(&cfg.geometry.profile)?, a.n, a.k_max),
    }
}

/// Modes the decay comparison treats as excited.
pub fn active_modes(cfg: &RunConfig) -> Vec<i64> {
    cfg.analysis
        .active_modes
        .clone()
        .unwrap_or_else(|| cfg.dynamics.initial.modes(cfg.discretization.k_max))
}

pub fn analyze(cfg: &RunConfig) -> Result<AnalysisReport> {
    let a = &cfg.analysis;
    let spectrum = spectrum_for(cfg)?;
    let poles = laplacian_poles(&spectrum);
    let window = admissible_weights_for(&spectrum, a.p, a.q, a.path)?;
    let curvature = spectrum.lambda1().map(|l| curvature_condition(spectrum.n, l));
    let mut notes = Vec::new();
    let status = if window.is_empty() { AnalysisStatus::EmptyWindow } else { AnalysisStatus::Ok };
    let (gamma, gamma_source) = match a.gamma {
        GammaChoice::Keyword(GammaKeyword::AutoMax) if window.is_empty() => (None, "auto-max"),
        GammaChoice::Keyword(GammaKeyword::AutoMax) => (Some(window.gamma_max - AUTO_MAX_OFFSET), "auto-max"),
        GammaChoice::Value(g) => {
            if !window.contains(g) {
                notes.push(format!("gamma = {g} lies outside the weight window"));
            }
            (Some(g), "explicit")
        }
    };
    let template = match gamma {
        Some(g) => match bilaplacian_asymptotics(&spectrum, g) {
            Ok(t) => Some(t),
            Err(e) => {
                notes.push(e.to_string());
                None
            }
        },
        None => None,
    };
    let prediction = match (&template, gamma) {
        (Some(t), Some(g)) => Some(predicted_deviation_exponent(t, g, a.q, a.epsilon, &active_modes(cfg))),
        _ => None,
    };
    Ok(AnalysisReport {
        status,
        spectrum,
        poles,
        window,
        curvature_condition: curvature,
        gamma,
        gamma_source,
        template,
        prediction,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub n: usize,
    pub map: &'static str,
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
    pub collar_length: f64,
    pub k_max: usize,
    pub n_theta: usize,
}

/// Surface, grid and closed mode operators of a configuration.
pub struct Discretization {
    pub surface: SurfaceOfRevolution,
    pub grid: RadialGrid,
    pub ops: Vec<ModeOperator>,
}

impl Discretization {
    pub fn new(cfg: &RunConfig, window: Option<&WeightWindow>) -> Result<Self> {
        let surface = cfg.geometry.surface()?;
        let d = &cfg.discretization;
        let grid = build_grid(&surface, d.n, d.x_min)?;
        let ops = (0..=d.k_max)
            .map(|k| tip_closure(assemble_mode_laplacian(&grid, &surface, k)?, &grid, d.extension, window))
            .collect::<Result<Vec<_>>>()?;
        Ok(Discretization { surface, grid, ops })
    }

    pub fn collar(&self) -> f64 {
        self.surface.collar_length()
    }

    pub fn tip_rho(&self) -> f64 {
        self.surface.north().tip_rho()
    }

    pub fn summary(&self, n_theta: usize) -> GridSummary {
        GridSummary {
            n: self.grid.len(),
            map: match self.grid.map() {
                GridMap::Log => "log",
                GridMap::Polar { .. } => "polar",
            },
            x_min: self.grid.x_min(),
            x_max: self.grid.x_max(),
            h: self.grid.h(),
            collar_length: self.collar(),
            k_max: self.ops.len() - 1,
            n_theta,
        }
    }
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (4.0 * t * (1.0 - t)).powi(3)
    }
}

/// Sample `u₀` on the grid.
pub fn initial_field(data: &InitialData, grid: &RadialGrid, length: f64, k_max: usize) -> ModeField {
    let n = grid.len();
    let mut u = ModeField::zeros(k_max, n);
    match *data {
        InitialData::Constant { value } => {
            u.mode_mut(0).iter_mut().for_each(|v| *v = Complex64::new(value, 0.0));
        }
        InitialData::BumpMode { k, amplitude, center, width, base } => {
            let scale = if k == 0 { amplitude } else { 0.5 * amplitude };
            for (j, x) in grid.x().iter().enumerate() {
                let b = bump((x / length - center) / width + 0.5);
                u.mode_mut(0)[j] += Complex64::new(base, 0.0);
                u.mode_mut(k)[j] += Complex64::new(scale * b, 0.0);
            }
        }
        InitialData::Random { amplitude, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let centers = [0.25, 0.5, 0.75];
            for k in 0..=k_max {
                for c in centers {
                    let re = amplitude * rng.gen_range(-1.0..1.0);
                    let im = if k == 0 { 0.0 } else { amplitude * rng.gen_range(-1.0..1.0) };
                    let w = if k == 0 { 1.0 } else { 0.5 };
                    for (j, x) in grid.x().iter().enumerate() {
                        let b = bump((x / length - c) / 0.5 + 0.5);
                        u.mode_mut(k)[j] += Complex64::new(w * re * b, w * im * b);
                    }
                }
            }
        }
    }
    u
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorRow {
    pub t: f64,
    pub k_running: f64,
    pub f_norm: f64,
    pub sup_norm: f64,
    pub c0: f64,
    pub norms: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: ModeField,
}

pub struct Simulation {
    pub analysis: AnalysisReport,
    pub disc: Discretization,
    pub solver_config: SolverConfig,
    pub n_theta: usize,
    pub snapshots: Vec<Snapshot>,
    pub monitor: Vec<MonitorRow>,
    pub status: RunStatus,
    pub steps: usize,
    pub max_imaginary_residue: f64,
    /// Solver failure that cut the run short.
    pub failure: Option<String>,
    pub wall_time_s: f64,
}

impl Simulation {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("initial snapshot is always kept")
    }

    pub fn halted(&self) -> bool {
        matches!(self.status, RunStatus::HaltGraceful { .. })
    }
}

pub fn solver_config(cfg: &RunConfig, gamma: f64, collar: f64) -> SolverConfig {
    let dy = &cfg.dynamics;
    SolverConfig {
        scheme: dy.scheme,
        dt: dy.dt,
        t_end: dy.t_end,
        shift: dy.shift,
        q: cfg.analysis.q,
        norm: dy.monitor.resolve(gamma, cfg.analysis.p),
        threshold: dy.threshold,
        blowup_bound: dy.blowup_bound,
        collar,
    }
}

/// Snapshot spacing in steps for an effective step `dt`.
fn snapshot_cadence(every: f64, dt: f64) -> Result<usize> {
    if every == 0.0 {
        return Ok(usize::MAX);
    }
    let ratio = every / dt;
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > 1e-6 * ratio {
        return Err(Error::config(
            "output.snapshot_every",
            format!("{every} is not a multiple of the effective step {dt}"),
        ));
    }
    Ok(steps as usize)
}

pub fn simulate(cfg: &RunConfig) -> Result<Simulation> {
    let started = Instant::now();
    let analysis = analyze(cfg)?;
    let gamma = analysis.gamma.ok_or_else(|| {
        Error::config("analysis.gamma", "the weight window is empty; give an explicit gamma to simulate")
    })?;
    let disc = Discretization::new(cfg, Some(&analysis.window))?;
    let solver_config = solver_config(cfg, gamma, disc.collar());
    let (total, dt) = solver_config.steps();
    let cadence = snapshot_cadence(cfg.output.snapshot_every, dt)?;
    let k_max = cfg.discretization.k_max;
    let u0 = initial_field(&cfg.dynamics.initial, &disc.grid, disc.surface.meridian_length(), k_max);
    let norms = cfg.output.norms.clone();
    let collar = disc.collar();

    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut monitor: Vec<MonitorRow> = Vec::new();
    let (status, steps, residue, failure, n_theta) = {
        let grid = &disc.grid;
        let mut solver = Solver::new(grid, disc.ops.clone(), solver_config.clone(), cfg.dynamics.nonlinearity.clone())?;
        let n_theta = solver.transform().n_theta();
        let mut state = solver.initial_state(u0)?;
        let result = solver.run(&mut state, 1, |st| {
            if monitor.last().is_some_and(|m| m.t == st.t) {
                return;
            }
            monitor.push(MonitorRow {
                t: st.t,
                k_running: st.k_running(),
                f_norm: st.f_norm,
                sup_norm: st.sup_norm,
                c0: st.tip_trace.last().map_or(f64::NAN, |p| p.1),
                norms: norms.iter().map(|n| mellin_norm(&st.u, grid, collar, n).unwrap_or(f64::NAN)).collect(),
            });
            if st.steps % cadence == 0 || st.steps == total || st.status != RunStatus::Running {
                snapshots.push(Snapshot { t: st.t, u: st.u.clone() });
            }
        });
        let failure = result.err().map(|e| e.to_string());
        if failure.is_none() && snapshots.last().is_none_or(|s| s.t != state.t) {
            snapshots.push(Snapshot { t: state.t, u: state.u.clone() });
        }
        (state.status.clone(), state.steps, state.max_imaginary_residue, failure, n_theta)
    };
    Ok(Simulation {
        analysis,
        disc,
        solver_config,
        n_theta,
        snapshots,
        monitor,
        status,
        steps,
        max_imaginary_residue: residue,
        failure,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitOutcome {
    pub report: DecayFitReport,
    #[serde(skip)]
    pub shells: Vec<Shell>,
}

/// Tip constant, decay fit and comparison with the analysis prediction.
pub fn fit_snapshot(cfg: &RunConfig, analysis: &AnalysisReport, disc: &Discretization, t: f64, u: &ModeField) -> FitOutcome {
    let c0 = extract_tip_constant(u, &disc.grid);
    let (mut report, shells) = fit_deviation_exponent(u, &disc.grid, disc.collar(), t, c0, &cfg.fit.window);
    if let Some(pred) = &analysis.prediction {
        report = compare_with_prediction(report, pred, disc.tip_rho(), cfg.fit.tolerance, cfg.fit.window.min_r2);
    } else {
        report.notes.push("no decay prediction for this configuration".into());
        report.verdict = FitVerdict::Inconclusive;
    }
    FitOutcome { report, shells }
}

/// Manufactured-solution refinement study of `cfg.mms`.
pub fn mms(cfg: &RunConfig) -> Result<MmsReport> {
    let m = cfg.mms.as_ref().ok_or_else(|| Error::config("mms", "missing [mms] block"))?;
    let analysis = analyze(cfg)?;
    let gamma = analysis.gamma.unwrap_or(0.5);
    let problem = MmsProblem {
        surface: cfg.geometry.surface()?,
        exact: m.exact.clone(),
        nl: cfg.dynamics.nonlinearity.clone(),
        scheme: cfg.dynamics.scheme,
        t_end: cfg.dynamics.t_end,
        k_max: cfg.discretization.k_max.max(m.exact.k_max()),
        x_min: cfg.discretization.x_min,
        norm: cfg.dynamics.monitor.resolve(gamma, cfg.analysis.p),
    };
    mms_run(&problem, &m.ladder)
}

fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

pub fn cmd_analyze(cfg: &RunConfig, out: &Path) -> Result<AnalysisReport> {
    io::ensure_dir(out)?;
    let report = analyze(cfg)?;
    let hash = io::manifest_hash(cfg);
    io::write_json(&out_path(out, "analysis.json"), &Tagged { manifest_hash: &hash, body: &report })?;
    Ok(report)
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    manifest_hash: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Serialize)]
struct Manifest<'a> {
    manifest_hash: &'a str,
    version: &'static str,
    config: &'a RunConfig,
    gamma: Option<f64>,
    gamma_source: &'static str,
    grid: GridSummary,
    topology: &'static str,
    dt_effective: f64,
    steps: usize,
    status: &'a RunStatus,
    failure: Option<&'a str>,
    max_imaginary_residue: f64,
    snapshots: usize,
    files: Vec<&'static str>,
    wall_time_s: f64,
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<Simulation> {
    io::ensure_dir(out)?;
    let sim = simulate(cfg)?;
    let hash = io::manifest_hash(cfg);
    let x = sim.disc.grid.x();

    let mut snap = CsvOut::create(&out_path(out, "snapshots.csv"), &hash, &io::SNAPSHOT_HEADER)?;
    for s in &sim.snapshots {
        io::write_snapshot_rows(&mut snap, s.t, x, &s.u)?;
    }
    snap.finish()?;

    let mut header = vec!["t".to_string(), "K_running".into(), "F_norm".into(), "sup_norm".into(), "c0".into()];
    header.extend((0..cfg.output.norms.len()).map(|i| format!("norm_{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut mon = CsvOut::create(&out_path(out, "monitor.csv"), &hash, &header_refs)?;
    for r in &sim.monitor {
        let mut row = vec![io::fmt_f64(r.t), io::fmt_f64(r.k_running), io::fmt_f64(r.f_norm), io::fmt_f64(r.sup_norm), io::fmt_f64(r.c0)];
        row.extend(r.norms.iter().map(|v| io::fmt_f64(*v)));
        mon.row(row)?;
    }
    mon.finish()?;

    let mut files = vec!["snapshots.csv", "monitor.csv"];
    if cfg.output.gridded {
        let k_max = cfg.discretization.k_max;
        let n_theta = cfg.output.n_theta.unwrap_or(if k_max == 0 { 1 } else { 4 * (k_max + 1) });
        let transform = AngularTransform::new(k_max, n_theta);
        let thetas = transform.thetas();
        let mut field = CsvOut::create(&out_path(out, "field.csv"), &hash, &["t", "x", "theta", "u"])?;
        for s in &sim.snapshots {
            for (j, row) in transform.to_physical(&s.u).iter().enumerate() {
                for (th, v) in thetas.iter().zip(row) {
                    field.row([io::fmt_f64(s.t), io::fmt_f64(x[j]), io::fmt_f64(*th), io::fmt_f64(*v)])?;
                }
            }
        }
        field.finish()?;
        files.push("field.csv");
    }
    files.push("manifest.json");
    let manifest = Manifest {
        manifest_hash: &hash,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        gamma: sim.analysis.gamma,
        gamma_source: sim.analysis.gamma_source,
        grid: sim.disc.summary(sim.n_theta),
        topology: match sim.disc.surface.topology() {
            Topology::Closed => "closed",
            Topology::Collar(_) => "collar",
        },
        dt_effective: sim.solver_config.steps().1,
        steps: sim.steps,
        status: &sim.status,
        failure: sim.failure.as_deref(),
        max_imaginary_residue: sim.max_imaginary_residue,
        snapshots: sim.snapshots.len(),
        files,
        wall_time_s: sim.wall_time_s,
    };
    io::write_json(&out_path(out, "manifest.json"), &manifest)?;
    if let Some(f) = &sim.failure {
        return Err(Error::Precondition(format!("solver failed, partial outputs written: {f}")));
    }
    Ok(sim)
}

/// Fit a snapshot read back from disk; the grid is rebuilt from `cfg` and
/// must match the file's abscissae.
pub fn fit_from_records(cfg: &RunConfig, records: &[SnapshotRecord]) -> Result<(AnalysisReport, FitOutcome)> {
    let analysis = analyze(cfg)?;
    let disc = Discretization::new(cfg, Some(&analysis.window))?;
    let record = match cfg.fit.time {
        Some(t) => records
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("non-empty"),
        None => records.last().expect("non-empty"),
    };
    let x = disc.grid.x();
    let matches = record.x.len() == x.len()
        && record.x.iter().zip(x).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs());
    if !matches {
        return Err(Error::config("discretization", "snapshot abscissae do not match the configured grid"));
    }
    if record.u.k_max() != cfg.discretization.k_max {
        return Err(Error::config("discretization.k_max", "snapshot mode count differs from the configuration"));
    }
    let outcome = fit_snapshot(cfg, &analysis, &disc, record.t, &record.u);
    Ok((analysis, outcome))
}

#[derive(Serialize)]
struct FitFile<'a> {
    manifest_hash: &'a str,
    rho0: f64,
    prediction: Option<&'a DecayPrediction>,
    report: &'a DecayFitReport,
}

pub fn write_fit(cfg: &RunConfig, analysis: &AnalysisReport, outcome: &FitOutcome, out: &Path) -> Result<()> {
    io::ensure_dir(out)?;
    let hash = io::manifest_hash(cfg);
    let rho0 = build_profile(&cfg.geometry.profile)?.tip_rho();
    io::write_json(
        &out_path(out, "fit_report.json"),
        &FitFile { manifest_hash: &hash, rho0, prediction: analysis.prediction.as_ref(), report: &outcome.report },
    )?;
    let k_max = outcome.shells.first().map_or(0, |s| s.modes.len().saturating_sub(1));
    let mut header = vec!["x".to_string(), "in_window".into(), "deviation".into()];
    header.extend((0..=k_max).map(|k| format!("mode_{k}")));
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvOut::create(&out_path(out, "shells.csv"), &hash, &refs)?;
    for s in &outcome.shells {
        let mut row = vec![io::fmt_f64(s.x), (s.in_window as u8).to_string(), io::fmt_f64(s.deviation)];
        row.extend(s.modes.iter().map(|v| io::fmt_f64(*v)));
        csv.row(row)?;
    }
    csv.finish()
}

pub fn cmd_fit(cfg: &RunConfig, out: &Path) -> Result<FitOutcome> {
    let path = match &cfg.fit.snapshots {
        Some(p) => PathBuf::from(p),
        None => out_path(out, "snapshots.csv"),
    };
    let records = io::read_snapshots(&path)?;
    let (analysis, outcome) = fit_from_records(cfg, &records)?;
    write_fit(cfg, &analysis, &outcome, out)?;
    Ok(outcome)
}

pub fn cmd_mms(cfg: &RunConfig, out: &Path) -> Result<MmsReport> {
    io::ensure_dir(out)?;
    let report = mms(cfg)?;
    let hash = io::manifest_hash(cfg);
    io::write_json(&out_path(out, "mms_report.json"), &Tagged { manifest_hash: &hash, body: &report })?;
    let mut csv = CsvOut::create(&out_path(out, "mms.csv"), &hash, &["ladder", "n", "dt", "h", "linf_error", "norm_error", "spurious"])?;
    for (name, rows) in [("spatial", &report.spatial), ("temporal", &report.temporal)] {
        for r in rows {
            csv.row([
                name.to_string(),
                r.n.to_string(),
                io::fmt_f64(r.dt),
                io::fmt_f64(r.h),
                io::fmt_f64(r.linf_error),
                io::fmt_f64(r.norm_error),
                io::fmt_f64(r.spurious),
            ])?;
        }
    }
    csv.finish()?;
    Ok(report)
}
