//! Log-graded radial grids and their quadrature.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{SurfaceOfRevolution, Topology};

/// How the innermost node is placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum XMinPolicy {
    /// `10⁻³` times the collar length.
    #[default]
    Default,
    /// Given fraction of the collar length.
    Fraction(f64),
    Absolute(f64),
}

impl XMinPolicy {
    pub fn resolve(&self, collar_length: f64) -> f64 {
        match *self {
            XMinPolicy::Default => 1e-3 * collar_length,
            XMinPolicy::Fraction(f) => f * collar_length,
            XMinPolicy::Absolute(x) => x,
        }
    }
}

/// Computational coordinate `s` and the map `s ↦ x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridMap {
    /// `x = e^s`.
    Log,
    /// `s = ln(x/(L−x)) + b(2x/L − 1)`: logarithmic at both poles, graded
    /// towards uniform-in-x in the bulk.
    Polar { length: f64, bulk: f64 },
}

/// Bulk stretching of the two-pole map.
pub const POLAR_BULK: f64 = 3.0;

impl GridMap {
    pub fn s_of_x(&self, x: f64) -> f64 {
        match *self {
            GridMap::Log => x.ln(),
            GridMap::Polar { length, bulk } => {
                (x / (length - x)).ln() + bulk * (2.0 * x / length - 1.0)
            }
        }
    }

    /// `x(s)` and `dx/ds`.
    pub fn x_of_s(&self, s: f64) -> (f64, f64) {
        match *self {
            GridMap::Log => {
                let x = s.exp();
                (x, x)
            }
            GridMap::Polar { length, bulk } => {
                let dsdx = |x: f64| 1.0 / x + 1.0 / (length - x) + 2.0 * bulk / length;
                // exact for bulk = 0; Newton from there, safeguarded by bisection
                let mut x = length / (1.0 + (-s).exp());
                let (mut lo, mut hi) = (0.0, length);
                for _ in 0..100 {
                    let f = self.s_of_x(x) - s;
                    if f > 0.0 {
                        hi = x;
                    } else {
                        lo = x;
                    }
                    let mut next = x - f / dsdx(x);
                    if !(next > lo && next < hi) {
                        next = 0.5 * (lo + hi);
                    }
                    if (next - x).abs() <= 1e-16 * x.min(length - x) {
                        x = next;
                        break;
                    }
                    x = next;
                }
                (x, 1.0 / dsdx(x))
            }
        }
    }
}

/// Result of a tip-aware quadrature in the measure `dx/x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipQuadrature {
    pub value: f64,
    /// Power-law estimate of the contribution of `(0, x_min)`.
    pub tail: f64,
    /// The integrand does not decay towards the tip, so the tail was dropped.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    map: GridMap,
    h: f64,
    s: Vec<f64>,
    x: Vec<f64>,
    dxds: Vec<f64>,
    rho: Vec<f64>,
    /// Gregory weights in `s`, multiplied by `h`.
    sweights: Vec<f64>,
    closed: bool,
}

pub fn build_grid(surface: &SurfaceOfRevolution, n: usize, policy: XMinPolicy) -> Result<RadialGrid> {
    if n < 16 {
        return Err(Error::Grid(format!("need at least 16 nodes, got {n}")));
    }
    let collar = surface.collar_length();
    let x_min = policy.resolve(collar);
    let (map, s0, s1, closed) = match surface.topology() {
        Topology::Collar(_) => {
            if !(x_min > 0.0 && x_min < collar) {
                return Err(Error::Grid(format!("x_min = {x_min} must lie in (0, {collar})")));
            }
            (GridMap::Log, x_min.ln(), collar.ln(), false)
        }
        Topology::Closed => {
            let length = surface.meridian_length();
            if !(x_min > 0.0 && x_min < 0.5 * length) {
                return Err(Error::Grid(format!(
                    "x_min = {x_min} must lie in (0, {})",
                    0.5 * length
                )));
            }
            let map = GridMap::Polar { length, bulk: POLAR_BULK };
            let s = map.s_of_x(x_min);
            (map, s, -s, true)
        }
    };
    let h = (s1 - s0) / (n - 1) as f64;
    let s: Vec<f64> = (0..n)
        .map(|j| {
            if closed && 2 * j + 1 > n {
                -(s0 + h * (n - 1 - j) as f64)
            } else {
                s0 + h * j as f64
            }
        })
        .collect();
    let mut x = Vec::with_capacity(n);
    let mut dxds = Vec::with_capacity(n);
    let mut rho = Vec::with_capacity(n);
    for (j, &sj) in s.iter().enumerate() {
        let (xj, dj) = if closed && 2 * j + 1 > n {
            // mirror the north half so that the node set is exactly symmetric
            let (xm, dm) = map.x_of_s(-sj);
            (surface.meridian_length() - xm, dm)
        } else {
            map.x_of_s(sj)
        };
        let xj = if !closed && j == n - 1 { collar } else { xj };
        let (big_r, _) = surface.radius(xj)?;
        x.push(xj);
        dxds.push(dj);
        rho.push(big_r / xj);
    }
    for w in x.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Grid("nodes are not strictly increasing".into()));
        }
    }
    let sweights = gregory_weights(n).into_iter().map(|w| w * h).collect();
    Ok(RadialGrid {
        map,
        h,
        s,
        x,
        dxds,
        rho,
        sweights,
        closed,
    })
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn map(&self) -> GridMap {
        self.map
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Uniform spacing in the computational coordinate.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    pub fn dxds(&self) -> &[f64] {
        &self.dxds
    }

    /// `√det h(x) = R(x)/x` at the nodes.
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Weights of `∫ f √det h(x) dx/x` over `[x_min, x_max]`.
    pub fn weights(&self) -> Vec<f64> {
        (0..self.len())
            .map(|j| self.sweights[j] * self.dxds[j] / self.x[j] * self.rho[j])
            .collect()
    }

    /// Weights of `∫ f dx/x`.
    pub fn log_weights(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.sweights[j] * self.dxds[j] / self.x[j]).collect()
    }

    /// Weights of `∫ f dx`.
    pub fn dx_weights(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.sweights[j] * self.dxds[j]).collect()
    }

    /// Weights of the area element `R(x) dx` (without the `2π`).
    pub fn area_weights(&self) -> Vec<f64> {
        (0..self.len())
            .map(|j| self.sweights[j] * self.dxds[j] * self.x[j] * self.rho[j])
            .collect()
    }

    /// `∫₀^{x_max} f dx/x`, with the missing `(0, x_min)` piece estimated
    /// from the power law through the two innermost samples.
    pub fn integrate_from_tip(&self, f: &[f64]) -> TipQuadrature {
        let body: f64 = self.log_weights().iter().zip(f).map(|(w, v)| w * v).sum();
        let (f0, f1) = (f[0], f[1]);
        let (x0, x1) = (self.x[0], self.x[1]);
        if f0 == 0.0 {
            return TipQuadrature { value: body, tail: 0.0, truncated: false };
        }
        if f1 == 0.0 || f0.signum() != f1.signum() {
            return TipQuadrature { value: body, tail: 0.0, truncated: true };
        }
        let m = (f1 / f0).ln() / (x1 / x0).ln();
        if m > 1e-8 {
            let tail = f0 / m;
            TipQuadrature { value: body + tail, tail, truncated: false }
        } else {
            TipQuadrature { value: body, tail: 0.0, truncated: true }
        }
    }
}

const GREGORY_ORDER: usize = 8;

/// Bernoulli numbers `B₂, B₄, …`.
const BERNOULLI: [f64; 5] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];

fn gregory_end() -> &'static [f64] {
    static END: OnceLock<Vec<f64>> = OnceLock::new();
    END.get_or_init(|| {
        // end weights w_0..w_{M-1}, interior weights 1: exactness on t^d,
        // d < M, using Euler–Maclaurin for the (formally infinite) remainder
        let m = GREGORY_ORDER;
        let mut a = nalgebra::DMatrix::<f64>::zeros(m, m);
        let mut b = nalgebra::DVector::<f64>::zeros(m);
        let mf = m as f64;
        for d in 0..m {
            for j in 0..m {
                a[(d, j)] = (j as f64).powi(d as i32);
            }
            let p = |t: f64| t.powi(d as i32);
            let mut rhs = mf.powi(d as i32 + 1) / (d as f64 + 1.0) - 0.5 * p(mf);
            for (i, bern) in BERNOULLI.iter().enumerate() {
                let order = 2 * i + 1;
                if order > d {
                    break;
                }
                let mut deriv = 1.0;
                for q in 0..order {
                    deriv *= (d - q) as f64;
                }
                deriv *= mf.powi((d - order) as i32);
                let fact: f64 = (1..=2 * (i + 1)).map(|v| v as f64).product();
                rhs += bern / fact * deriv;
            }
            b[d] = rhs;
        }
        let w = a.lu().solve(&b).expect("Gregory system is nonsingular");
        w.iter().copied().collect()
    })
}

/// Gregory end-corrected trapezoid weights on `n ≥ 16` unit-spaced nodes.
pub fn gregory_weights(n: usize) -> Vec<f64> {
    let end = gregory_end();
    let mut w = vec![1.0; n];
    for (j, &e) in end.iter().enumerate() {
        w[j] = e;
        w[n - 1 - j] = e;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{OuterBc, WarpProfile};

    fn unit_collar() -> SurfaceOfRevolution {
        SurfaceOfRevolution::collar(WarpProfile::constant_cone(1.0, 1.0).unwrap(), OuterBc::Neumann)
    }

    #[test]
    fn default_collar_grid_is_log_uniform() {
        let g = build_grid(&unit_collar(), 256, XMinPolicy::Default).unwrap();
        assert!((g.x_min() - 1e-3).abs() < 1e-15);
        assert_eq!(g.x_max(), 1.0);
        let r0 = g.x()[1] / g.x()[0];
        for w in g.x().windows(2) {
            assert!((w[1] / w[0] - r0).abs() < 1e-12);
        }
    }

    #[test]
    fn gregory_weights_are_high_order() {
        let w = gregory_weights(40);
        let h = 1.0 / 39.0;
        let approx: f64 = w.iter().enumerate().map(|(j, w)| w * h * (j as f64 * h).powi(7)).sum();
        assert!((approx - 0.125).abs() < 1e-13);
        let approx: f64 = w.iter().enumerate().map(|(j, w)| w * h * (3.0 * j as f64 * h).exp()).sum();
        assert!((approx - (3f64.exp() - 1.0) / 3.0).abs() < 1e-9);
    }

    #[test]
    fn monomials_in_the_log_measure() {
        let g = build_grid(&unit_collar(), 256, XMinPolicy::Default).unwrap();
        for m in [1, 2] {
            let f: Vec<f64> = g.x().iter().map(|x| x.powi(m)).collect();
            let q = g.integrate_from_tip(&f);
            let exact = 1.0 / m as f64;
            assert!((q.value - exact).abs() < 1e-8 * exact, "m = {m}: {}", q.value);
            assert!(!q.truncated);
        }
        let ones = vec![1.0; g.len()];
        let body: f64 = g.weights().iter().sum();
        assert!((body - 1e3f64.ln()).abs() < 1e-8 * 1e3f64.ln());
        assert!(g.integrate_from_tip(&ones).truncated);
    }

    #[test]
    fn closed_sphere_nodes_are_symmetric() {
        let s = SurfaceOfRevolution::round_sphere(1.0).unwrap();
        let g = build_grid(&s, 129, XMinPolicy::Default).unwrap();
        let l = std::f64::consts::PI;
        let n = g.len();
        for j in 0..n {
            assert!((g.x()[j] + g.x()[n - 1 - j] - l).abs() < 1e-13);
        }
        // area of the unit sphere over 2π
        let area: f64 = g.area_weights().iter().sum();
        let missing = 2.0 * (1.0 - g.x_min().cos());
        assert!((area + missing - 2.0).abs() < 1e-9);
    }

    #[test]
    fn grid_errors() {
        assert!(build_grid(&unit_collar(), 8, XMinPolicy::Default).is_err());
        assert!(build_grid(&unit_collar(), 64, XMinPolicy::Absolute(2.0)).is_err());
    }

    #[test]
    fn polar_map_inverts() {
        let map = GridMap::Polar { length: 2.0, bulk: POLAR_BULK };
        for s in [-9.0, -1.0, 0.0, 0.3, 7.5] {
            let (x, d) = map.x_of_s(s);
            assert!((map.s_of_x(x) - s).abs() < 1e-12);
            let e = 1e-6;
            let fd = (map.x_of_s(s + e).0 - map.x_of_s(s - e).0) / (2.0 * e);
            assert!((fd - d).abs() < 1e-7 * d.max(1e-3));
        }
    }
}
