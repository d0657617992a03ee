//! Run configuration: a TOML file with strict key checking, plus
//! `KEY=VALUE` overrides on dotted paths.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asymptotics_fit::WindowPolicy;
use crate::error::{Error, Result};
use crate::geometry::{build_profile, OuterBc, ProfileSpec, SurfaceOfRevolution};
use crate::grid::XMinPolicy;
use crate::integrator::{KThreshold, Nonlinearity, Scheme};
use crate::mellin_analysis::WeightPath;
use crate::mellin_norms::{Cutoff, MellinNormConfig};
use crate::mms::{Manufactured, MmsLadder};
use crate::operator::TipExtension;

/// Distance below `γ_max` at which `auto-max` settles.
pub const AUTO_MAX_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mms: Option<MmsConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    Collar,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub profile: ProfileSpec,
    /// Defaults to `closed` for round spheres and spheroids, `collar`
    /// otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyKind>,
    #[serde(default = "default_outer")]
    pub outer_bc: OuterBc,
    /// South cap of a closed surface built from two profiles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub south: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meridian_length: Option<f64>,
}

fn default_outer() -> OuterBc {
    OuterBc::Dirichlet
}

impl GeometryConfig {
    pub fn topology(&self) -> TopologyKind {
        self.topology.unwrap_or(match self.profile {
            ProfileSpec::RoundSphere { .. } | ProfileSpec::Spheroid { .. } => TopologyKind::Closed,
            _ => TopologyKind::Collar,
        })
    }

    pub fn surface(&self) -> Result<SurfaceOfRevolution> {
        match (self.topology(), &self.profile) {
            (TopologyKind::Collar, _) => Ok(SurfaceOfRevolution::collar(build_profile(&self.profile)?, self.outer_bc)),
            (TopologyKind::Closed, ProfileSpec::RoundSphere { radius }) if self.south.is_none() => {
                SurfaceOfRevolution::round_sphere(*radius)
            }
            (TopologyKind::Closed, ProfileSpec::Spheroid { equatorial, polar }) if self.south.is_none() => {
                SurfaceOfRevolution::spheroid(*equatorial, *polar)
            }
            (TopologyKind::Closed, north) => {
                let south = self
                    .south
                    .as_ref()
                    .ok_or_else(|| Error::config("geometry.south", "closed surfaces of this kind need a south cap"))?;
                let length = self
                    .meridian_length
                    .ok_or_else(|| Error::config("geometry.meridian_length", "required with a south cap"))?;
                SurfaceOfRevolution::closed(build_profile(north)?, build_profile(south)?, length)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationConfig {
    pub n: usize,
    pub k_max: usize,
    pub x_min: XMinPolicy,
    pub extension: TipExtension,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig { n: 256, k_max: 0, x_min: XMinPolicy::Default, extension: TipExtension::Chosen }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaKeyword {
    #[serde(rename = "auto-max")]
    AutoMax,
}

/// A fixed weight or `"auto-max"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaChoice {
    Value(f64),
    Keyword(GammaKeyword),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Cross-section dimension.
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub gamma: GammaChoice,
    pub epsilon: f64,
    pub path: WeightPath,
    /// Cross-section modes `0..=k_max` enter the symbol analysis.
    pub k_max: usize,
    /// Eigenvalue table for `n > 1`, starting with 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
    /// Modes the decay comparison treats as excited; defaults to the modes
    /// present in the initial data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub active_modes: Option<Vec<i64>>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            n: 1,
            p: 8.0,
            q: 4.0,
            gamma: GammaChoice::Keyword(GammaKeyword::AutoMax),
            epsilon: 0.05,
            path: WeightPath::Nonlinear,
            k_max: 4,
            spectrum: None,
            active_modes: None,
        }
    }
}

/// Initial data `u₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    Constant {
        value: f64,
    },
    /// `base + amplitude·b(x) cos(kθ)` with `b(x) = (4t(1−t))³` on
    /// `t = (x/L − center)/width + 1/2 ∈ [0, 1]`, `L` the meridian length.
    BumpMode {
        k: usize,
        amplitude: f64,
        #[serde(default = "half")]
        center: f64,
        #[serde(default = "half")]
        width: f64,
        #[serde(default)]
        base: f64,
    },
    /// Bumps of random amplitude in `[−amplitude, amplitude]` on every kept
    /// mode and a few radial positions.
    Random {
        amplitude: f64,
        seed: u64,
    },
}

fn half() -> f64 {
    0.5
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Constant { value: 0.0 }
    }
}

impl InitialData {
    /// Fourier modes the data excites, up to `k_max`.
    pub fn modes(&self, k_max: usize) -> Vec<i64> {
        match self {
            InitialData::Constant { .. } => vec![0],
            InitialData::BumpMode { k, base, .. } => {
                let mut m = vec![*k as i64];
                if *base != 0.0 && *k != 0 {
                    m.insert(0, 0);
                }
                m
            }
            InitialData::Random { .. } => (0..=k_max as i64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorNorm {
    pub s: usize,
    /// Defaults to the resolved analysis weight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Defaults to the analysis `p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub cutoff: Cutoff,
}

impl Default for MonitorNorm {
    fn default() -> Self {
        MonitorNorm { s: 0, gamma: None, p: None, cutoff: Cutoff::default() }
    }
}

impl MonitorNorm {
    pub fn resolve(&self, gamma: f64, p: f64) -> MellinNormConfig {
        MellinNormConfig { s: self.s, gamma: self.gamma.unwrap_or(gamma), p: self.p.unwrap_or(p), cutoff: self.cutoff }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    pub nonlinearity: Nonlinearity,
    pub initial: InitialData,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub shift: f64,
    pub threshold: KThreshold,
    pub blowup_bound: f64,
    /// Norm in which `‖F‖` enters the `K(T)` monitor.
    pub monitor: MonitorNorm,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            nonlinearity: Nonlinearity::swift_hohenberg(),
            initial: InitialData::default(),
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::ImexBdf2,
            shift: 0.0,
            threshold: KThreshold::default(),
            blowup_bound: 1e8,
            monitor: MonitorNorm::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
    /// Snapshot spacing in simulated time; `0` keeps only the first and
    /// last states.
    pub snapshot_every: f64,
    /// Also write the field on an `(x, θ)` grid.
    pub gridded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_theta: Option<usize>,
    /// Extra Mellin norms of `u` reported in the monitor file.
    pub norms: Vec<MellinNormConfig>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: "out".into(), snapshot_every: 0.0, gridded: false, n_theta: None, norms: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub window: WindowPolicy,
    pub tolerance: f64,
    /// Snapshot time to fit; defaults to the last one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    /// Snapshot file; defaults to `snapshots.csv` in the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<String>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { window: WindowPolicy::default(), tolerance: 0.15, time: None, snapshots: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmsConfig {
    pub exact: Manufactured,
    pub ladder: MmsLadder,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse { path: origin.into(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load `path` and apply `KEY=VALUE` overrides in order.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let origin = path.display().to_string();
        if overrides.is_empty() {
            return Self::from_toml_str(&text, &origin);
        }
        let mut table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| Error::Parse { path: origin.clone(), message: e.to_string() })?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parse { path: origin, message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.discretization;
        if d.n < 16 {
            return Err(Error::config("discretization.n", "needs at least 16 nodes"));
        }
        let a = &self.analysis;
        if a.n != 1 && a.spectrum.is_none() {
            return Err(Error::config("analysis.spectrum", "dimensions n > 1 need a supplied eigenvalue table"));
        }
        for (name, v) in [("analysis.p", a.p), ("analysis.q", a.q)] {
            if !(v > 1.0 && v.is_finite()) {
                return Err(Error::config(name, "must lie in (1, ∞)"));
            }
        }
        if !(a.epsilon > 0.0) {
            return Err(Error::config("analysis.epsilon", "must be positive"));
        }
        let dy = &self.dynamics;
        if !(dy.dt > 0.0 && dy.dt.is_finite()) {
            return Err(Error::config("dynamics.dt", "must be positive"));
        }
        if !(dy.t_end > 0.0 && dy.t_end.is_finite()) {
            return Err(Error::config("dynamics.t_end", "must be positive"));
        }
        if !(dy.shift >= 0.0) {
            return Err(Error::config("dynamics.shift", "must be non-negative"));
        }
        if let InitialData::BumpMode { k, width, .. } = dy.initial {
            if k > d.k_max {
                return Err(Error::config("dynamics.initial.k", format!("mode {k} exceeds discretization.k_max = {}", d.k_max)));
            }
            if !(width > 0.0) {
                return Err(Error::config("dynamics.initial.width", "must be positive"));
            }
        }
        if !(self.output.snapshot_every >= 0.0) {
            return Err(Error::config("output.snapshot_every", "must be non-negative"));
        }
        if let Some(nt) = self.output.n_theta {
            if nt <= 2 * d.k_max && d.k_max > 0 {
                return Err(Error::config("output.n_theta", format!("must exceed 2·k_max = {}", 2 * d.k_max)));
            }
        }
        if !(self.fit.tolerance > 0.0) {
            return Err(Error::config("fit.tolerance", "must be positive"));
        }
        Ok(())
    }
}

/// Set `a.b.c = value` in `table`. The value is read as a TOML literal and
/// falls back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must read KEY=VALUE"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "empty path segment"));
    }
    let mut node = table;
    for p in &parts[..parts.len() - 1] {
        let entry = node.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{p}` is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONE: &str = r#"
[geometry]
profile = { kind = "constant-cone", rho0 = 0.4, collar_length = 4.0 }

[discretization]
n = 128
x_min = { fraction = 1e-4 }

[dynamics]
initial = { kind = "constant", value = 0.5 }
nonlinearity = { alpha = [0, 1, 0, -1] }
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_toml_str(CONE, "cone").unwrap();
        assert_eq!(cfg.discretization.x_min, XMinPolicy::Fraction(1e-4));
        assert_eq!(cfg.analysis.gamma, GammaChoice::Keyword(GammaKeyword::AutoMax));
        let back = RunConfig::from_toml_str(&cfg.to_toml(), "round-trip").unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_name() {
        let bad = CONE.replace("n = 128", "n = 128\nnodes = 3");
        let err = RunConfig::from_toml_str(&bad, "bad").unwrap_err().to_string();
        assert!(err.contains("nodes"), "{err}");
    }

    #[test]
    fn overrides_edit_nested_keys() {
        let mut t: toml::Table = CONE.parse().unwrap();
        apply_override(&mut t, "dynamics.dt=5e-4").unwrap();
        apply_override(&mut t, "analysis.gamma=0.25").unwrap();
        apply_override(&mut t, "geometry.outer_bc=neumann").unwrap();
        let cfg: RunConfig = t.try_into().unwrap();
        assert_eq!(cfg.dynamics.dt, 5e-4);
        assert_eq!(cfg.analysis.gamma, GammaChoice::Value(0.25));
        assert_eq!(cfg.geometry.outer_bc, OuterBc::Neumann);
        assert!(apply_override(&mut CONE.parse().unwrap(), "dynamics").is_err());
    }

    #[test]
    fn sphere_defaults_to_closed() {
        let cfg = RunConfig::from_toml_str("[geometry]\nprofile = { kind = \"round-sphere\", radius = 1.0 }\n", "s").unwrap();
        assert_eq!(cfg.geometry.topology(), TopologyKind::Closed);
        assert!(cfg.geometry.surface().is_ok());
    }
}
