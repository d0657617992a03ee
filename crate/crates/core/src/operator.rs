//! Per-mode discretization of the cone Laplacian with tip and outer closures.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::{BandMatrix, BandedLu};
use crate::error::{Error, Result};
use crate::geometry::{OuterBc, SurfaceOfRevolution, Topology};
use crate::grid::{GridMap, RadialGrid};
use crate::mellin_analysis::WeightWindow;
use crate::stencil::first_derivative;

/// Which closed extension the tip rows realize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TipExtension {
    /// Constants adjoined: `k = 0` keeps the bounded branch.
    #[default]
    Chosen,
    /// No constants: `k = 0` is pinned to zero at the tip.
    Minimal,
}

/// The condition imposed by a closure row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ClosureKind {
    /// `x∂ₓw − μw` at the north tip, `−y∂_yw·… ` mirrored at a south pole.
    Robin { mu: f64 },
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone)]
pub struct Closure {
    pub kind: ClosureKind,
    row: Vec<(usize, f64)>,
}

impl Closure {
    pub fn residual<T>(&self, u: &[T]) -> Complex64
    where
        T: Copy + Into<Complex64>,
    {
        self.row.iter().map(|&(j, w)| u[j].into() * w).sum()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.row
    }
}

/// Δ_k on one Fourier mode. Rows `0` and `N−1` hold closures; the interior
/// rows hold the fourth-order conservative stencil.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    k: usize,
    rows: Vec<Vec<(usize, f64)>>,
    weights: Vec<f64>,
    tip: Closure,
    end: Closure,
    tip_rho: f64,
    south_rho: Option<f64>,
    shift: f64,
}

const CENTERED: [f64; 4] = [1.0, -27.0, 27.0, -1.0];

struct Nodes {
    x: f64,
    dxds: f64,
}

fn half_point(grid: &RadialGrid, j: usize) -> Nodes {
    let s = 0.5 * (grid.s()[j] + grid.s()[j + 1]);
    match grid.map() {
        GridMap::Polar { length, .. } if s > 0.0 => {
            let (x, d) = grid.map().x_of_s(-s);
            Nodes { x: length - x, dxds: d }
        }
        map => {
            let (x, d) = map.x_of_s(s);
            Nodes { x, dxds: d }
        }
    }
}

pub fn assemble_mode_laplacian(
    grid: &RadialGrid,
    surface: &SurfaceOfRevolution,
    k: usize,
) -> Result<ModeOperator> {
    let n = grid.len();
    let h = grid.h();
    let kk = (k * k) as f64;

    // flux coefficients a = R/X' at half nodes
    let mut a = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let p = half_point(grid, j);
        let (big_r, _) = surface.radius(p.x)?;
        a.push(big_r / p.dxds);
    }
    // gradient stencils at half nodes
    let grad: Vec<Vec<(usize, f64)>> = (0..n - 1)
        .map(|j| {
            if j == 0 {
                indexed(0, &first_derivative(0.5, 6, h))
            } else if j == n - 2 {
                indexed(n - 6, &first_derivative(4.5, 6, h))
            } else {
                indexed(j - 1, &CENTERED.map(|c| c / (24.0 * h)))
            }
        })
        .collect();

    let mut weights = vec![0.0; n];
    let mut rows = vec![Vec::new(); n];
    for i in 0..n {
        let (big_r, _) = surface.radius(grid.x()[i])?;
        weights[i] = big_r * grid.dxds()[i];
        if i == 0 || i == n - 1 {
            continue;
        }
        let div = if i == 1 {
            indexed(0, &first_derivative(0.5, 5, h))
        } else if i == n - 2 {
            indexed(n - 6, &first_derivative(3.5, 5, h))
        } else {
            indexed(i - 2, &CENTERED.map(|c| c / (24.0 * h)))
        };
        let mut row: Vec<(usize, f64)> = Vec::new();
        for &(j, dw) in &div {
            for &(l, gw) in &grad[j] {
                push_entry(&mut row, l, dw * a[j] * gw / weights[i]);
            }
        }
        push_entry(&mut row, i, -kk / (big_r * big_r));
        row.sort_by_key(|e| e.0);
        rows[i] = row;
    }

    let tip_rho = surface.north().tip_rho();
    let south_rho = surface.south().map(|s| s.tip_rho());
    let tip = tip_row(grid, robin_mu(k, tip_rho));
    let end = match surface.topology() {
        Topology::Collar(bc) => outer_row(grid, bc),
        Topology::Closed => south_row(grid, surface.meridian_length(), robin_mu(k, south_rho.unwrap_or(tip_rho))),
    };
    Ok(ModeOperator {
        k,
        rows,
        weights,
        tip,
        end,
        tip_rho,
        south_rho,
        shift: 0.0,
    })
}

fn robin_mu(k: usize, rho0: f64) -> f64 {
    k as f64 / rho0
}

fn indexed(start: usize, w: &[f64]) -> Vec<(usize, f64)> {
    w.iter().enumerate().map(|(i, &v)| (start + i, v)).collect()
}

fn push_entry(row: &mut Vec<(usize, f64)>, col: usize, v: f64) {
    match row.iter_mut().find(|e| e.0 == col) {
        Some(e) => e.1 += v,
        None => row.push((col, v)),
    }
}

fn tip_row(grid: &RadialGrid, mu: f64) -> Closure {
    let d = first_derivative(0.0, 5, grid.h());
    let scale = grid.x()[0] / grid.dxds()[0];
    let mut row = indexed(0, &d.iter().map(|w| w * scale).collect::<Vec<_>>());
    row[0].1 -= mu;
    Closure { kind: ClosureKind::Robin { mu }, row }
}

fn pinned_tip_row() -> Closure {
    Closure { kind: ClosureKind::Dirichlet, row: vec![(0, 1.0)] }
}

fn outer_row(grid: &RadialGrid, bc: OuterBc) -> Closure {
    let n = grid.len();
    match bc {
        OuterBc::Dirichlet => Closure { kind: ClosureKind::Dirichlet, row: vec![(n - 1, 1.0)] },
        OuterBc::Neumann => {
            let d = first_derivative(4.0, 5, grid.h());
            let scale = 1.0 / grid.dxds()[n - 1];
            Closure {
                kind: ClosureKind::Neumann,
                row: indexed(n - 5, &d.iter().map(|w| w * scale).collect::<Vec<_>>()),
            }
        }
    }
}

fn south_row(grid: &RadialGrid, length: f64, mu: f64) -> Closure {
    let n = grid.len();
    let d = first_derivative(4.0, 5, grid.h());
    let scale = -(length - grid.x()[n - 1]) / grid.dxds()[n - 1];
    let mut row = indexed(n - 5, &d.iter().map(|w| w * scale).collect::<Vec<_>>());
    row[4].1 -= mu;
    Closure { kind: ClosureKind::Robin { mu }, row }
}

/// Replace the tip rows by the closure realizing `extension`. The minimal
/// extension needs a non-empty weight window.
pub fn tip_closure(
    op: ModeOperator,
    grid: &RadialGrid,
    extension: TipExtension,
    window: Option<&WeightWindow>,
) -> Result<ModeOperator> {
    let mut op = op;
    match extension {
        TipExtension::Chosen => {
            op.tip = tip_row(grid, robin_mu(op.k, op.tip_rho));
        }
        TipExtension::Minimal => {
            match window {
                Some(w) if !w.is_empty() => {}
                Some(w) => {
                    return Err(Error::Precondition(format!(
                        "minimal extension needs a non-empty weight window, got ({}, {})",
                        w.gamma_min, w.gamma_max
                    )))
                }
                None => {
                    return Err(Error::Precondition(
                        "minimal extension needs a weight window".into(),
                    ))
                }
            }
            op.tip = if op.k == 0 { pinned_tip_row() } else { tip_row(grid, robin_mu(op.k, op.tip_rho)) };
        }
    }
    Ok(op)
}

impl ModeOperator {
    pub fn mode(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn with_shift(mut self, c: f64) -> Self {
        self.shift = c;
        self
    }

    /// Indicial exponent imposed at the north tip.
    pub fn tip_exponent(&self) -> f64 {
        match self.tip.kind {
            ClosureKind::Robin { mu } => mu,
            _ => f64::NAN,
        }
    }

    pub fn south_tip_rho(&self) -> Option<f64> {
        self.south_rho
    }

    pub fn tip(&self) -> &Closure {
        &self.tip
    }

    pub fn end(&self) -> &Closure {
        &self.end
    }

    /// `R·dx/ds` at the nodes: the weights making the interior rows symmetric.
    pub fn symmetry_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Δ_k on the interior rows; the two closure rows are left at zero.
    pub fn apply<T>(&self, u: &[T]) -> Vec<Complex64>
    where
        T: Copy + Into<Complex64>,
    {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, w)| u[j].into() * w).sum())
            .collect()
    }

    pub fn apply_real(&self, u: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, w)| u[j] * w).sum())
            .collect()
    }

    /// Factor the system whose interior rows are `Δ_k + z` and whose end rows
    /// are the closures.
    pub fn factor_shifted(&self, z: Complex64) -> Result<BandedLu> {
        let n = self.len();
        let mut kl = 0;
        let mut ku = 0;
        let all = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, _)| (i, j)))
            .chain(self.tip.row.iter().map(|&(j, _)| (0, j)))
            .chain(self.end.row.iter().map(|&(j, _)| (n - 1, j)));
        for (i, j) in all {
            kl = kl.max(i.saturating_sub(j));
            ku = ku.max(j.saturating_sub(i));
        }
        let mut m = BandMatrix::zeros(n, kl, ku);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                m.add(i, j, Complex64::new(w, 0.0));
            }
            if i != 0 && i != n - 1 {
                m.add(i, i, z);
            }
        }
        for &(j, w) in &self.tip.row {
            m.add(0, j, Complex64::new(w, 0.0));
        }
        for &(j, w) in &self.end.row {
            m.add(n - 1, j, Complex64::new(w, 0.0));
        }
        m.factor()
    }

    /// Dense `Δ_k + 1` on the interior unknowns after eliminating the two
    /// homogeneous closure rows.
    pub fn reduced_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.len();
        let m = n - 2;
        // boundary values as combinations of interior values
        let express = |c: &Closure, node: usize| -> Vec<(usize, f64)> {
            let diag = c.row.iter().find(|e| e.0 == node).map(|e| e.1).unwrap_or(0.0);
            c.row
                .iter()
                .filter(|e| e.0 != node)
                .map(|&(j, w)| (j, -w / diag))
                .collect()
        };
        let u0 = express(&self.tip, 0);
        let un = express(&self.end, n - 1);
        let mut dense = nalgebra::DMatrix::<f64>::zeros(m, m);
        for i in 1..n - 1 {
            for &(j, w) in &self.rows[i] {
                let targets: Vec<(usize, f64)> = if j == 0 {
                    u0.clone()
                } else if j == n - 1 {
                    un.clone()
                } else {
                    vec![(j, 1.0)]
                };
                for (l, c) in targets {
                    dense[(i - 1, l - 1)] += w * c;
                }
            }
            dense[(i - 1, i - 1)] += 1.0;
        }
        dense
    }
}

/// Eigenvalue diagnostics of `(Δ_k+1)² + c`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub mode: usize,
    pub shift: f64,
    pub power: f64,
    pub eigenvalue_count: usize,
    pub min_real_part: f64,
    pub max_imag_part: f64,
    pub smoothing_sup: f64,
    pub smoothing_expected: f64,
}

/// `sup_{t>0} (t|μ|)^a e^{−t Re μ}` by golden-section search in `log t`.
pub fn smoothing_sup(mu: Complex64, a: f64) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    let re = mu.re;
    if !(re > 0.0) {
        return f64::INFINITY;
    }
    let f = |lt: f64| {
        let t = lt.exp();
        a * (t * mu.norm()).ln() - t * re
    };
    let centre = (a / re).ln();
    let (mut lo, mut hi) = (centre - 10.0, centre + 10.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-9 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    f(0.5 * (lo + hi)).exp()
}

pub fn spectrum_diagnostics(op: &ModeOperator, c: f64, a: f64) -> Result<SpectrumReport> {
    if !(c >= 0.0) || !(a >= 0.0) {
        return Err(Error::Precondition(format!("need c ≥ 0 and a ≥ 0, got c = {c}, a = {a}")));
    }
    let dense = op.reduced_dense();
    if dense.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("operator has non-finite entries".into()));
    }
    let eig = dense.complex_eigenvalues();
    let mut min_re = f64::INFINITY;
    let mut max_im: f64 = 0.0;
    let mut sup: f64 = 0.0;
    for lam in eig.iter() {
        if !lam.re.is_finite() || !lam.im.is_finite() {
            return Err(Error::Eigen("non-finite eigenvalue".into()));
        }
        let mu = lam * lam + c;
        min_re = min_re.min(mu.re);
        max_im = max_im.max(mu.im.abs());
        if mu.norm() > 0.0 {
            sup = sup.max(smoothing_sup(mu, a));
        }
    }
    let expected = if a == 0.0 { 1.0 } else { (a / std::f64::consts::E).powf(a) };
    Ok(SpectrumReport {
        mode: op.k,
        shift: c,
        power: a,
        eigenvalue_count: eig.len(),
        min_real_part: min_re,
        max_imag_part: max_im,
        smoothing_sup: sup,
        smoothing_expected: expected,
    })
}
