//! Manufactured solutions and refinement ladders.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics_fit::loglog_fit;
use crate::error::{Error, Result};
use crate::field::{dealiased_points, AngularTransform, ModeField};
use crate::geometry::{SurfaceOfRevolution, Topology};
use crate::grid::{build_grid, RadialGrid, XMinPolicy};
use crate::integrator::{evaluate_f, Nonlinearity, Scheme, Solver, SolverConfig, Source};
use crate::mellin_norms::{mellin_norm, MellinNormConfig};
use crate::operator::{assemble_mode_laplacian, ModeOperator};

/// Radial profile of one manufactured mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Constant { value: f64 },
    /// `cos(x/R)` on the round sphere of radius `R` (axisymmetric).
    Zonal { radius: f64 },
    /// `Σ c·x^m` on a straight cone, given as `[m, c]` pairs.
    Powers { terms: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedMode {
    pub k: usize,
    pub profile: Profile,
}

/// `u(t, x, θ) = e^{−rate·t} Σ_k φ_k(x) cos(kθ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manufactured {
    #[serde(default)]
    pub rate: f64,
    pub modes: Vec<ManufacturedMode>,
}

fn powers_laplacian(terms: &[[f64; 2]], k: usize, rho0: f64) -> Vec<[f64; 2]> {
    let mu2 = (k as f64 / rho0).powi(2);
    terms
        .iter()
        .map(|&[m, c]| [m - 2.0, c * (m * m - mu2)])
        .filter(|t| t[1] != 0.0)
        .collect()
}

fn plus_identity(lap: Vec<[f64; 2]>, base: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = lap;
    out.extend_from_slice(base);
    out
}

fn powers_eval(terms: &[[f64; 2]], x: f64) -> f64 {
    terms.iter().map(|&[m, c]| c * x.powf(m)).sum()
}

impl Manufactured {
    fn tau(&self, t: f64) -> (f64, f64) {
        let e = (-self.rate * t).exp();
        (e, -self.rate * e)
    }

    /// `(φ, (Δ_k+1)φ, (Δ_k+1)²φ)` of every mode, sampled at `xs`.
    fn stacks(&self, xs: &[f64], rho0: f64) -> Vec<(usize, [Vec<f64>; 3])> {
        self.modes
            .iter()
            .map(|m| {
                let s = match &m.profile {
                    Profile::Constant { value } => {
                        let v = vec![*value; xs.len()];
                        [v.clone(), v.clone(), v]
                    }
                    Profile::Zonal { radius } => {
                        let a = 1.0 - 2.0 / (radius * radius);
                        let v: Vec<f64> = xs.iter().map(|x| (x / radius).cos()).collect();
                        [v.clone(), v.iter().map(|y| a * y).collect(), v.iter().map(|y| a * a * y).collect()]
                    }
                    Profile::Powers { terms } => {
                        let a1 = plus_identity(powers_laplacian(terms, m.k, rho0), terms);
                        let a2 = plus_identity(powers_laplacian(&a1, m.k, rho0), &a1);
                        [
                            xs.iter().map(|&x| powers_eval(terms, x)).collect(),
                            xs.iter().map(|&x| powers_eval(&a1, x)).collect(),
                            xs.iter().map(|&x| powers_eval(&a2, x)).collect(),
                        ]
                    }
                };
                (m.k, s)
            })
            .collect()
    }

    pub fn k_max(&self) -> usize {
        self.modes.iter().map(|m| m.k).max().unwrap_or(0)
    }

    /// Mode amplitudes of `φ_k cos kθ` are `φ_k/2` for `k ≥ 1`.
    fn to_field(&self, parts: &[(usize, Vec<f64>)], k_max: usize, n: usize, scale: f64) -> ModeField {
        let mut f = ModeField::zeros(k_max, n);
        for (k, v) in parts {
            let w = if *k == 0 { scale } else { 0.5 * scale };
            for (dst, src) in f.mode_mut(*k).iter_mut().zip(v) {
                *dst += Complex64::new(w * src, 0.0);
            }
        }
        f
    }

    pub fn check(&self, surface: &SurfaceOfRevolution) -> Result<()> {
        for m in &self.modes {
            match &m.profile {
                Profile::Constant { .. } if m.k != 0 => {
                    return Err(Error::config("mms.modes", "constant profiles live on k = 0"));
                }
                Profile::Zonal { radius } => {
                    let sphere = matches!(surface.topology(), Topology::Closed)
                        && (surface.meridian_length() - std::f64::consts::PI * radius).abs() < 1e-9 * radius;
                    if m.k != 0 || !sphere {
                        return Err(Error::config("mms.modes", "zonal profile needs k = 0 on the matching round sphere"));
                    }
                }
                Profile::Powers { .. } => {
                    let straight = matches!(surface.north().spec(), crate::geometry::ProfileSpec::ConstantCone { .. });
                    if !straight || matches!(surface.topology(), Topology::Closed) {
                        return Err(Error::config("mms.modes", "power profiles need a straight-cone collar"));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// The manufactured solution on one grid: exact nodal values and the
/// inhomogeneous data that make it a solution.
pub struct ManufacturedSource<'a> {
    exact: &'a Manufactured,
    stacks: Vec<(usize, [Vec<f64>; 3])>,
    ops: Vec<ModeOperator>,
    nl: Nonlinearity,
    transform: AngularTransform,
    k_max: usize,
    n: usize,
}

impl<'a> ManufacturedSource<'a> {
    pub fn new(exact: &'a Manufactured, grid: &RadialGrid, rho0: f64, ops: &[ModeOperator], nl: &Nonlinearity) -> Self {
        let k_max = ops.len() - 1;
        ManufacturedSource {
            exact,
            stacks: exact.stacks(grid.x(), rho0),
            ops: ops.to_vec(),
            nl: nl.clone(),
            transform: AngularTransform::new(k_max, dealiased_points(k_max, nl.degree())),
            k_max,
            n: grid.len(),
        }
    }

    fn part(&self, level: usize) -> Vec<(usize, Vec<f64>)> {
        self.stacks.iter().map(|(k, s)| (*k, s[level].clone())).collect()
    }

    pub fn exact(&self, t: f64) -> ModeField {
        self.exact.to_field(&self.part(0), self.k_max, self.n, self.exact.tau(t).0)
    }
}

impl Source for ManufacturedSource<'_> {
    fn forcing(&self, t: f64) -> ModeField {
        let (tau, dtau) = self.exact.tau(t);
        let u = self.exact(t);
        let (f, _) = evaluate_f(&u, t, &self.nl, &self.transform);
        let ut = self.exact.to_field(&self.part(0), self.k_max, self.n, dtau);
        let a2 = self.exact.to_field(&self.part(2), self.k_max, self.n, tau);
        let mut g = ModeField::zeros(self.k_max, self.n);
        for k in 0..=self.k_max {
            for j in 0..self.n {
                g.mode_mut(k)[j] = ut.mode(k)[j] + a2.mode(k)[j] - f.mode(k)[j];
            }
        }
        g
    }

    fn closure_data(&self, t: f64, k: usize) -> ([Complex64; 2], [Complex64; 2]) {
        let tau = self.exact.tau(t).0;
        let u = self.exact.to_field(&self.part(0), self.k_max, self.n, tau);
        let au = self.exact.to_field(&self.part(1), self.k_max, self.n, tau);
        let op = &self.ops[k];
        (
            [op.tip().residual(u.mode(k)), op.end().residual(u.mode(k))],
            [op.tip().residual(au.mode(k)), op.end().residual(au.mode(k))],
        )
    }
}

#[derive(Debug, Clone)]
pub struct MmsProblem {
    pub surface: SurfaceOfRevolution,
    pub exact: Manufactured,
    pub nl: Nonlinearity,
    pub scheme: Scheme,
    pub t_end: f64,
    pub k_max: usize,
    pub x_min: XMinPolicy,
    pub norm: MellinNormConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmsLadder {
    pub spatial_n: Vec<usize>,
    pub spatial_dt: f64,
    pub spatial_t_end: f64,
    pub temporal_dt: Vec<f64>,
    pub temporal_n: usize,
    pub temporal_t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsRow {
    pub n: usize,
    pub dt: f64,
    pub h: f64,
    pub linf_error: f64,
    pub norm_error: f64,
    /// Largest amplitude on modes the exact solution leaves empty.
    pub spurious: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsReport {
    pub spatial: Vec<MmsRow>,
    pub temporal: Vec<MmsRow>,
    pub spatial_order: Option<f64>,
    pub temporal_order: Option<f64>,
}

/// Integrate the manufactured problem on one `(N, Δt)` pair.
pub fn mms_single(problem: &MmsProblem, n: usize, dt: f64) -> Result<MmsRow> {
    problem.exact.check(&problem.surface)?;
    let grid = build_grid(&problem.surface, n, problem.x_min)?;
    let ops = (0..=problem.k_max)
        .map(|k| assemble_mode_laplacian(&grid, &problem.surface, k))
        .collect::<Result<Vec<_>>>()?;
    let rho0 = problem.surface.north().tip_rho();
    let source = ManufacturedSource::new(&problem.exact, &grid, rho0, &ops, &problem.nl);
    let collar = problem.surface.collar_length();
    let mut cfg = SolverConfig::new(dt, problem.t_end, collar);
    cfg.scheme = problem.scheme;
    cfg.norm = problem.norm;
    cfg.threshold.a = f64::INFINITY;
    let mut solver = Solver::new(&grid, ops, cfg, problem.nl.clone())?.with_source(&source);
    let mut state = solver.initial_state(source.exact(0.0))?;
    solver.run(&mut state, usize::MAX, |_| {})?;
    let exact = source.exact(state.t);
    let err = ModeField::from_modes(
        state
            .u
            .modes()
            .iter()
            .zip(exact.modes())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect(),
    );
    let linf = err.modes().iter().flatten().fold(0.0f64, |m, v| m.max(v.norm()));
    let norm_error = mellin_norm(&err, &grid, collar, &problem.norm)?;
    let present: Vec<usize> = problem.exact.modes.iter().map(|m| m.k).collect();
    let spurious = (0..=problem.k_max)
        .filter(|k| !present.contains(k))
        .flat_map(|k| state.u.mode(k).iter().map(|v| v.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    Ok(MmsRow { n, dt, h: 1.0 / (n - 1) as f64, linf_error: linf, norm_error, spurious })
}

pub fn mms_run(problem: &MmsProblem, ladder: &MmsLadder) -> Result<MmsReport> {
    let leg = |t_end: f64| MmsProblem { t_end, ..problem.clone() };
    let (sp, tp) = (leg(ladder.spatial_t_end), leg(ladder.temporal_t_end));
    let spatial = ladder
        .spatial_n
        .iter()
        .map(|&n| mms_single(&sp, n, ladder.spatial_dt))
        .collect::<Result<Vec<_>>>()?;
    let temporal = ladder
        .temporal_dt
        .iter()
        .map(|&dt| mms_single(&tp, ladder.temporal_n, dt))
        .collect::<Result<Vec<_>>>()?;
    let order = |rows: &[MmsRow], key: fn(&MmsRow) -> f64| {
        let xs: Vec<f64> = rows.iter().map(key).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.linf_error).collect();
        if rows.len() == 2 {
            Some((ys[0] / ys[1]).ln() / (xs[0] / xs[1]).ln())
        } else {
            loglog_fit(&xs, &ys).map(|f| f.slope)
        }
    };
    Ok(MmsReport {
        spatial_order: order(&spatial, |r| r.h),
        temporal_order: order(&temporal, |r| r.dt),
        spatial,
        temporal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_solution_is_reproduced_to_round_off() {
        let problem = MmsProblem {
            surface: SurfaceOfRevolution::round_sphere(1.0).unwrap(),
            exact: Manufactured { rate: 0.0, modes: vec![ManufacturedMode { k: 0, profile: Profile::Constant { value: 0.3 } }] },
            nl: Nonlinearity::swift_hohenberg(),
            scheme: Scheme::ImexBdf2,
            t_end: 0.1,
            k_max: 0,
            x_min: XMinPolicy::Default,
            norm: MellinNormConfig::new(0, 0.5, 2.0),
        };
        let row = mms_single(&problem, 64, 0.01).unwrap();
        assert!(row.linf_error < 1e-13, "{row:?}");
    }
}
