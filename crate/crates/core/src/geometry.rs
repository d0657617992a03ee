//! Warped-cone collars and closed surfaces of revolution in geodesic polar
//! coordinates.
//!
//! Near a pole or conical tip the metric reads `dx² + x²ρ(x)²dθ²`, so a
//! profile is fully described by the warp function `ρ` on the collar
//! `[0, r)`. The cone Laplacian only sees `ρ` through the coefficient
//! `H(x) = x ρ'(x) / ρ(x)` and the tip value `ρ(0)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// Serializable description of a warp profile, as it appears in run
/// configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// Straight cone, `ρ ≡ rho0`.
    ConstantCone { rho0: f64, collar_length: f64 },
    /// Geodesic polar coordinates around a point of the round sphere of
    /// radius `radius`. The collar is the whole meridian `[0, πR)`.
    RoundSphere { radius: f64 },
    /// Ellipsoid of revolution with equatorial semi-axis `equatorial` and
    /// polar semi-axis `polar`, seen from the north pole.
    Spheroid { equatorial: f64, polar: f64 },
    /// `ρ(x) = β + (ρ_outer − β)·s(x/r)` with a quintic blend `s`.
    Teardrop {
        beta: f64,
        collar_length: f64,
        #[serde(default = "one")]
        rho_outer: f64,
    },
    /// Samples `(x, ρ)` interpolated by a cubic spline.
    Tabulated {
        samples: Vec<[f64; 2]>,
        collar_length: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone)]
enum Warp {
    Constant(f64),
    Sphere(f64),
    Teardrop { beta: f64, rho_outer: f64, r: f64 },
    Spline(CubicSpline),
}

/// Radius function `ρ` of the warped metric `dx² + x²ρ(x)²dθ²` on `[0, r)`.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct WarpProfile {
    spec: ProfileSpec,
    collar: f64,
    warp: Warp,
}

/// `ρ(x)` together with `H(x) = x·ρ'(x)/ρ(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricCoeffs {
    pub rho: f64,
    pub h: f64,
}

/// Quintic smoothstep, `s(0)=0, s(1)=1` with vanishing first and second
/// derivatives at both ends.
pub(crate) fn smoothstep5(t: f64) -> (f64, f64) {
    let t = t.clamp(0.0, 1.0);
    let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    (s, ds)
}

impl WarpProfile {
    pub fn constant_cone(rho0: f64, collar_length: f64) -> Result<Self> {
        build_profile(&ProfileSpec::ConstantCone {
            rho0,
            collar_length,
        })
    }

    pub fn round_sphere(radius: f64) -> Result<Self> {
        build_profile(&ProfileSpec::RoundSphere { radius })
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    /// Collar length `r`.
    pub fn collar_length(&self) -> f64 {
        self.collar
    }

    /// `ρ(0)`, the frozen cross-section radius at the tip.
    pub fn tip_rho(&self) -> f64 {
        match &self.warp {
            Warp::Constant(r) => *r,
            Warp::Sphere(_) => 1.0,
            Warp::Teardrop { beta, .. } => *beta,
            Warp::Spline(s) => s.eval(0.0).0,
        }
    }

    /// Total angle of the tip, `2πρ(0)`.
    pub fn cone_angle(&self) -> f64 {
        2.0 * PI * self.tip_rho()
    }

    /// `(ρ(x), ρ'(x))` without domain checks.
    pub(crate) fn rho_and_derivative(&self, x: f64) -> (f64, f64) {
        match &self.warp {
            Warp::Constant(r) => (*r, 0.0),
            Warp::Sphere(big_r) => {
                let z = x / big_r;
                if z.abs() < 1e-3 {
                    let z2 = z * z;
                    let rho = 1.0 - z2 / 6.0 + z2 * z2 / 120.0 - z2 * z2 * z2 / 5040.0;
                    let d = (-z / 3.0 + z * z2 / 30.0 - z * z2 * z2 / 840.0) / big_r;
                    (rho, d)
                } else {
                    let rho = z.sin() / z;
                    let d = (z * z.cos() - z.sin()) / (z * z) / big_r;
                    (rho, d)
                }
            }
            Warp::Teardrop { beta, rho_outer, r } => {
                let (s, ds) = smoothstep5(x / r);
                (beta + (rho_outer - beta) * s, (rho_outer - beta) * ds / r)
            }
            Warp::Spline(s) => s.eval(x),
        }
    }

    pub fn rho(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let (rho, _) = self.rho_and_derivative(x);
        if !(rho > 0.0) {
            return Err(Error::DegenerateMetric { x, rho });
        }
        Ok(rho)
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !(0.0..self.collar).contains(&x) {
            return Err(Error::Domain {
                x,
                collar: self.collar,
            });
        }
        Ok(())
    }
}

/// Evaluates `ρ(x)` and `H(x) = x ρ'(x)/ρ(x)`, the `n = 1` form of
/// `x∂ₓ det h / (2 det h)` with `det h = ρ²`.
pub fn eval_metric_coeffs(profile: &WarpProfile, x: f64) -> Result<MetricCoeffs> {
    profile.check_domain(x)?;
    if let Warp::Sphere(big_r) = profile.warp {
        // z cot z − 1 loses digits to cancellation near the pole.
        let z = x / big_r;
        let h = if z.abs() < 1e-2 {
            let z2 = z * z;
            -z2 / 3.0 - z2 * z2 / 45.0 - 2.0 * z2 * z2 * z2 / 945.0
        } else {
            z / z.tan() - 1.0
        };
        let rho = profile.rho(x)?;
        return Ok(MetricCoeffs { rho, h });
    }
    let (rho, d) = profile.rho_and_derivative(x);
    if !(rho > 0.0) {
        return Err(Error::DegenerateMetric { x, rho });
    }
    Ok(MetricCoeffs {
        rho,
        h: x * d / rho,
    })
}

/// Builds a profile from its description.
pub fn build_profile(spec: &ProfileSpec) -> Result<WarpProfile> {
    let positive = |name: &str, v: f64| -> Result<()> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::Profile(format!("{name} must be positive, got {v}")))
        }
    };
    let (collar, warp) = match spec {
        ProfileSpec::ConstantCone {
            rho0,
            collar_length,
        } => {
            positive("rho0", *rho0)?;
            positive("collar_length", *collar_length)?;
            (*collar_length, Warp::Constant(*rho0))
        }
        ProfileSpec::RoundSphere { radius } => {
            positive("radius", *radius)?;
            (PI * radius, Warp::Sphere(*radius))
        }
        ProfileSpec::Spheroid { equatorial, polar } => {
            positive("equatorial", *equatorial)?;
            positive("polar", *polar)?;
            let (length, spline) = spheroid_spline(*equatorial, *polar)?;
            (length, Warp::Spline(spline))
        }
        ProfileSpec::Teardrop {
            beta,
            collar_length,
            rho_outer,
        } => {
            positive("beta", *beta)?;
            positive("collar_length", *collar_length)?;
            positive("rho_outer", *rho_outer)?;
            (
                *collar_length,
                Warp::Teardrop {
                    beta: *beta,
                    rho_outer: *rho_outer,
                    r: *collar_length,
                },
            )
        }
        ProfileSpec::Tabulated {
            samples,
            collar_length,
        } => {
            positive("collar_length", *collar_length)?;
            if samples.len() < 4 {
                return Err(Error::Profile(
                    "tabulated profile needs at least 4 samples".into(),
                ));
            }
            if samples[0][0] != 0.0 {
                return Err(Error::Profile("first sample must sit at x = 0".into()));
            }
            if samples.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                return Err(Error::Profile(
                    "sample abscissae must be strictly increasing".into(),
                ));
            }
            if samples[samples.len() - 1][0] < *collar_length {
                return Err(Error::Profile(format!(
                    "samples end before the collar length {collar_length}"
                )));
            }
            if let Some(bad) = samples.iter().find(|s| !(s[1] > 0.0)) {
                return Err(Error::DegenerateMetric {
                    x: bad[0],
                    rho: bad[1],
                });
            }
            let xs: Vec<f64> = samples.iter().map(|s| s[0]).collect();
            let ys: Vec<f64> = samples.iter().map(|s| s[1]).collect();
            let d0 = one_sided_slope(&xs, &ys);
            (*collar_length, Warp::Spline(CubicSpline::clamped_left(xs, ys, d0)?))
        }
    };
    Ok(WarpProfile {
        spec: spec.clone(),
        collar,
        warp,
    })
}

/// Derivative at the first abscissa from the cubic through the first four
/// samples (exact for cubics, nonuniform spacing allowed).
fn one_sided_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let x0 = xs[0];
    let mut d = 0.0;
    for j in 0..4 {
        // derivative of the j-th Lagrange basis polynomial at x0
        let mut w = 0.0;
        for m in 0..4 {
            if m == j {
                continue;
            }
            let mut prod = 1.0 / (xs[j] - xs[m]);
            for l in 0..4 {
                if l != j && l != m {
                    prod *= (x0 - xs[l]) / (xs[j] - xs[l]);
                }
            }
            w += prod;
        }
        d += w * ys[j];
    }
    d
}

/// Tabulates `ρ(s) = R(s)/s` against meridian arclength for the ellipsoid
/// of revolution `(a sin φ, c cos φ)`.
fn spheroid_spline(a: f64, c: f64) -> Result<(f64, CubicSpline)> {
    const PANELS: usize = 4096;
    // 5-point Gauss-Legendre per panel
    const GL_X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const GL_W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let speed = |phi: f64| ((a * phi.cos()).powi(2) + (c * phi.sin()).powi(2)).sqrt();
    let dphi = PI / PANELS as f64;
    let mut xs = Vec::with_capacity(PANELS + 1);
    let mut ys = Vec::with_capacity(PANELS + 1);
    xs.push(0.0);
    ys.push(1.0);
    let mut s = 0.0;
    for i in 0..PANELS {
        let mid = (i as f64 + 0.5) * dphi;
        let half = 0.5 * dphi;
        s += GL_X
            .iter()
            .zip(GL_W.iter())
            .map(|(x, w)| w * half * speed(mid + half * x))
            .sum::<f64>();
        let phi = (i + 1) as f64 * dphi;
        xs.push(s);
        ys.push(a * phi.sin() / s);
    }
    let length = s;
    // drop the degenerate south pole sample
    xs.pop();
    ys.pop();
    let d0 = one_sided_slope(&xs, &ys);
    Ok((length, CubicSpline::clamped_left(xs, ys, d0)?))
}

/// Boundary condition carried by the outer end of a collar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OuterBc {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Closed,
    Collar(OuterBc),
}

/// A 2-D surface in geodesic polar coordinates around its north pole.
#[derive(Debug, Clone)]
pub struct SurfaceOfRevolution {
    north: WarpProfile,
    south: Option<WarpProfile>,
    meridian_length: f64,
    topology: Topology,
}

impl SurfaceOfRevolution {
    /// Collar `[0, r)` of a warped cone whose outer end carries `outer`.
    pub fn collar(profile: WarpProfile, outer: OuterBc) -> Self {
        let meridian_length = profile.collar_length();
        SurfaceOfRevolution {
            north: profile,
            south: None,
            meridian_length,
            topology: Topology::Collar(outer),
        }
    }

    /// Closed surface glued at the equator `x = L/2` from a north and a
    /// south cap. The two radius functions must match to first order there.
    pub fn closed(north: WarpProfile, south: WarpProfile, meridian_length: f64) -> Result<Self> {
        let half = 0.5 * meridian_length;
        if !(meridian_length > 0.0) || north.collar_length() < half || south.collar_length() < half
        {
            return Err(Error::Profile(format!(
                "caps must cover half the meridian length {meridian_length}"
            )));
        }
        let (rn, drn) = north.rho_and_derivative(half);
        let (rs, drs) = south.rho_and_derivative(half);
        let (big_n, big_s) = (half * rn, half * rs);
        let (slope_n, slope_s) = (rn + half * drn, rs + half * drs);
        let scale = big_n.abs().max(1.0);
        if (big_n - big_s).abs() > 1e-8 * scale || (slope_n - slope_s).abs() > 1e-6 * scale {
            return Err(Error::Profile(format!(
                "caps do not match at the equator: R = {big_n} vs {big_s}, R' = {slope_n} vs {}",
                -slope_s
            )));
        }
        let surface = SurfaceOfRevolution {
            north,
            south: Some(south),
            meridian_length,
            topology: Topology::Closed,
        };
        Ok(surface)
    }

    pub fn round_sphere(radius: f64) -> Result<Self> {
        let cap = WarpProfile::round_sphere(radius)?;
        Self::closed(cap.clone(), cap, PI * radius)
    }

    pub fn spheroid(equatorial: f64, polar: f64) -> Result<Self> {
        let cap = build_profile(&ProfileSpec::Spheroid { equatorial, polar })?;
        let length = cap.collar_length();
        Self::closed(cap.clone(), cap, length)
    }

    pub fn north(&self) -> &WarpProfile {
        &self.north
    }

    pub fn south(&self) -> Option<&WarpProfile> {
        self.south.as_ref()
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn meridian_length(&self) -> f64 {
        self.meridian_length
    }

    /// Length of the north collar used for Mellin weights and cut-offs.
    pub fn collar_length(&self) -> f64 {
        match self.topology {
            Topology::Closed => self.north.collar_length().min(0.5 * self.meridian_length),
            Topology::Collar(_) => self.north.collar_length(),
        }
    }

    /// Circumferential radius `R(x)` (circumference / 2π) and `dR/dx`.
    pub fn radius(&self, x: f64) -> Result<(f64, f64)> {
        let (big_r, d) = self.radius_unchecked(x);
        let inside = match self.topology {
            Topology::Closed => x < self.meridian_length,
            Topology::Collar(_) => x <= self.meridian_length,
        };
        if !(big_r > 0.0) || !(x > 0.0 && inside) {
            return Err(Error::DegenerateMetric { x, rho: big_r });
        }
        Ok((big_r, d))
    }

    pub(crate) fn radius_unchecked(&self, x: f64) -> (f64, f64) {
        match (&self.topology, &self.south) {
            (Topology::Closed, Some(south)) if x > 0.5 * self.meridian_length => {
                let y = self.meridian_length - x;
                let (rho, d) = south.rho_and_derivative(y);
                (y * rho, -(rho + y * d))
            }
            _ => {
                let (rho, d) = self.north.rho_and_derivative(x);
                (x * rho, rho + x * d)
            }
        }
    }
}

/// One eigenspace of the cross-section Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMode {
    /// Fourier index `k` for circles, eigenvalue index otherwise.
    pub label: i64,
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

/// Spectrum `0 = λ₀ > λ₁ ≥ λ₂ ≥ …` of the (non-positive) Laplacian of the
/// frozen cross section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionSpectrum {
    pub n: usize,
    pub modes: Vec<SpectrumMode>,
}

impl CrossSectionSpectrum {
    /// Spectrum from a supplied eigenvalue table (any `n ≥ 1`). Values equal
    /// to within 1e-12 are merged into one eigenspace.
    pub fn from_table(n: usize, eigenvalues: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Spectrum("dimension n must be at least 1".into()));
        }
        if eigenvalues.is_empty() || eigenvalues[0] != 0.0 {
            return Err(Error::Spectrum("first eigenvalue must be exactly 0".into()));
        }
        let mut rest: Vec<f64> = eigenvalues[1..].to_vec();
        if let Some(bad) = rest.iter().find(|l| !(**l < 0.0)) {
            return Err(Error::Spectrum(format!(
                "non-zero eigenvalues must be negative, got {bad}"
            )));
        }
        rest.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut modes = vec![SpectrumMode {
            label: 0,
            eigenvalue: 0.0,
            multiplicity: 1,
        }];
        for l in rest {
            match modes.last_mut() {
                Some(m) if m.label > 0 && (m.eigenvalue - l).abs() <= 1e-12 * l.abs().max(1.0) => {
                    m.multiplicity += 1
                }
                _ => {
                    let label = modes.len() as i64;
                    modes.push(SpectrumMode {
                        label,
                        eigenvalue: l,
                        multiplicity: 1,
                    })
                }
            }
        }
        Ok(CrossSectionSpectrum { n, modes })
    }

    /// Circle of radius `rho0`: `λ_k = −k²/ρ₀²`, `k = 0..=k_max`.
    pub fn circle(rho0: f64, k_max: usize) -> Self {
        let modes = (0..=k_max)
            .map(|k| SpectrumMode {
                label: k as i64,
                eigenvalue: if k == 0 { 0.0 } else { -((k * k) as f64) / (rho0 * rho0) },
                multiplicity: if k == 0 { 1 } else { 2 },
            })
            .collect();
        CrossSectionSpectrum { n: 1, modes }
    }

    /// All eigenvalues repeated by multiplicity, in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes
            .iter()
            .flat_map(|m| std::iter::repeat(m.eigenvalue).take(m.multiplicity))
            .collect()
    }

    /// The greatest non-zero eigenvalue.
    pub fn lambda1(&self) -> Option<f64> {
        self.modes.get(1).map(|m| m.eigenvalue)
    }
}

/// Spectrum of the tip cross section `Δ_{h(0)}`. Only the circle (`n = 1`)
/// has an analytic path; other dimensions go through
/// [`CrossSectionSpectrum::from_table`].
pub fn cross_section_spectrum(
    profile: &WarpProfile,
    n: usize,
    k_max: usize,
) -> Result<CrossSectionSpectrum> {
    if n != 1 {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(CrossSectionSpectrum::circle(profile.tip_rho(), k_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_cone_has_zero_h() {
        let p = WarpProfile::constant_cone(0.4, 1.0).unwrap();
        for x in [1e-6, 0.1, 0.5, 0.999] {
            let c = eval_metric_coeffs(&p, x).unwrap();
            assert_eq!(c.rho, 0.4);
            assert_eq!(c.h, 0.0);
        }
    }

    #[test]
    fn sphere_coefficients_match_closed_form_and_differences() {
        let p = WarpProfile::round_sphere(1.0).unwrap();
        let c = eval_metric_coeffs(&p, 0.5).unwrap();
        assert_relative_eq!(c.rho, 0.5f64.sin() / 0.5, max_relative = 1e-14);
        assert_relative_eq!(c.h, 0.5 / 0.5f64.tan() - 1.0, max_relative = 1e-13);
        // centered difference of x d/dx log rho
        let h = 1e-6;
        let lr = |x: f64| (x.sin() / x).ln();
        let fd = 0.5 * (lr(0.5 + h) - lr(0.5 - h)) / (2.0 * h);
        assert_relative_eq!(c.h, fd, max_relative = 1e-7);
    }

    #[test]
    fn sphere_h_vanishes_quadratically_at_pole() {
        let p = WarpProfile::round_sphere(1.0).unwrap();
        for x in [1e-2, 1e-3, 1e-4] {
            let c = eval_metric_coeffs(&p, x).unwrap();
            // Taylor: sin(x)/x = 1 − x²/6 + … gives H ≈ −x²/3
            assert_relative_eq!(c.h, -x * x / 3.0, max_relative = 1e-3);
        }
        assert_eq!(eval_metric_coeffs(&p, 0.0).unwrap().h, 0.0);
    }

    #[test]
    fn sphere_pole_is_smooth() {
        let p = WarpProfile::round_sphere(2.0).unwrap();
        assert_eq!(p.tip_rho(), 1.0);
        assert_eq!(p.rho(0.0).unwrap(), 1.0);
    }

    #[test]
    fn cone_angle_from_small_circle_circumference() {
        let p = WarpProfile::constant_cone(0.5, 1.0).unwrap();
        // circumference of the metric circle at radius x, by trapezoid in θ
        let x = 1e-4;
        let m = 64;
        let circumference: f64 = (0..m)
            .map(|_| x * p.rho(x).unwrap() * 2.0 * PI / m as f64)
            .sum();
        assert_relative_eq!(circumference / x, PI, max_relative = 1e-12);
        assert_relative_eq!(p.cone_angle(), PI, max_relative = 1e-15);
    }

    #[test]
    fn teardrop_constructor_contract() {
        let p = build_profile(&ProfileSpec::Teardrop {
            beta: 0.4,
            collar_length: 1.0,
            rho_outer: 1.0,
        })
        .unwrap();
        assert_eq!(p.tip_rho(), 0.4);
        let (rho_r, d_r) = p.rho_and_derivative(1.0);
        assert_relative_eq!(rho_r, 1.0);
        assert!(d_r.abs() < 1e-14);
        let (_, d0) = p.rho_and_derivative(0.0);
        assert!(d0.abs() < 1e-14);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(WarpProfile::round_sphere(0.0).is_err());
        assert!(WarpProfile::constant_cone(-1.0, 1.0).is_err());
        let bad = ProfileSpec::Tabulated {
            samples: vec![[0.0, 1.0], [0.5, 1.0], [0.4, 1.0], [1.0, 1.0]],
            collar_length: 1.0,
        };
        assert!(build_profile(&bad).is_err());
    }

    #[test]
    fn domain_and_degeneracy_errors() {
        let p = WarpProfile::constant_cone(0.4, 1.0).unwrap();
        assert!(matches!(
            eval_metric_coeffs(&p, 1.0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            eval_metric_coeffs(&p, -0.1),
            Err(Error::Domain { .. })
        ));
        let t = build_profile(&ProfileSpec::Tabulated {
            samples: vec![[0.0, 1.0], [0.3, 0.5], [0.6, 0.1], [1.0, 0.05]],
            collar_length: 1.0,
        })
        .unwrap();
        // the spline undershoots zero between samples somewhere or not; only
        // check that evaluation is consistent with the sign rule
        for x in [0.1, 0.7, 0.95] {
            match eval_metric_coeffs(&t, x) {
                Ok(c) => assert!(c.rho > 0.0),
                Err(e) => assert!(matches!(e, Error::DegenerateMetric { .. })),
            }
        }
    }

    #[test]
    fn tabulated_profile_reproduces_smooth_data() {
        let f = |x: f64| 0.5 + 0.25 * x * x;
        let samples: Vec<[f64; 2]> = (0..=200).map(|i| i as f64 / 200.0).map(|x| [x, f(x)]).collect();
        let p = build_profile(&ProfileSpec::Tabulated {
            samples,
            collar_length: 1.0,
        })
        .unwrap();
        for x in [0.013, 0.2, 0.77] {
            let c = eval_metric_coeffs(&p, x).unwrap();
            assert_relative_eq!(c.rho, f(x), max_relative = 1e-8);
            assert_relative_eq!(c.h, x * 0.5 * x / f(x), max_relative = 1e-5, epsilon = 1e-9);
        }
    }

    #[test]
    fn spheroid_reduces_to_sphere() {
        let p = build_profile(&ProfileSpec::Spheroid {
            equatorial: 1.0,
            polar: 1.0,
        })
        .unwrap();
        assert_relative_eq!(p.collar_length(), PI, max_relative = 1e-12);
        for x in [0.05, 0.7, 1.5, 2.5] {
            let (rho, _) = p.rho_and_derivative(x);
            assert_relative_eq!(rho, x.sin() / x, max_relative = 1e-9);
        }
        let s = SurfaceOfRevolution::spheroid(1.3, 0.7).unwrap();
        assert_eq!(s.topology(), Topology::Closed);
        assert_relative_eq!(s.north().tip_rho(), 1.0, max_relative = 1e-6);
    }

    #[test]
    fn closed_sphere_radius_is_sine() {
        let s = SurfaceOfRevolution::round_sphere(1.0).unwrap();
        for x in [0.1, 1.0, 2.0, 3.0] {
            let (r, d) = s.radius(x).unwrap();
            assert_relative_eq!(r, x.sin(), max_relative = 1e-12);
            assert_relative_eq!(d, x.cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn circle_spectrum() {
        let p = WarpProfile::constant_cone(0.5, 1.0).unwrap();
        let s = cross_section_spectrum(&p, 1, 2).unwrap();
        assert_eq!(s.eigenvalues(), vec![0.0, -4.0, -4.0, -16.0, -16.0]);
        let smooth = WarpProfile::round_sphere(1.0).unwrap();
        assert_eq!(cross_section_spectrum(&smooth, 1, 1).unwrap().lambda1(), Some(-1.0));
        assert_eq!(cross_section_spectrum(&p, 1, 0).unwrap().eigenvalues(), vec![0.0]);
        assert!(matches!(
            cross_section_spectrum(&p, 2, 3),
            Err(Error::UnsupportedDimension(2))
        ));
    }

    /// Oracle: Fourier collocation second-derivative matrix on the circle of
    /// circumference 2πρ₀, diagonalized densely.
    #[test]
    fn circle_spectrum_matches_fourier_collocation() {
        let rho0 = 0.5;
        let m = 32usize;
        let h = 2.0 * PI / m as f64;
        let mut d2 = nalgebra::DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                d2[(i, j)] = if i == j {
                    -PI * PI / (3.0 * h * h) - 1.0 / 6.0
                } else {
                    let d = (i as f64 - j as f64) * h;
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    -sign / (2.0 * (0.5 * d).sin().powi(2))
                } / (rho0 * rho0);
            }
        }
        let mut eig: Vec<f64> = d2.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let analytic = cross_section_spectrum(&WarpProfile::constant_cone(rho0, 1.0).unwrap(), 1, 2)
            .unwrap()
            .eigenvalues();
        for (a, b) in analytic.iter().zip(eig.iter()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn curvature_threshold_in_terms_of_rho0() {
        for (rho0, expect) in [(0.25, true), (0.5, true), (0.5 + 1e-6, false), (1.0, false)] {
            let l1 = CrossSectionSpectrum::circle(rho0, 1).lambda1().unwrap();
            assert_eq!(-l1 >= 4.0, expect, "rho0 = {rho0}");
        }
    }

    #[test]
    fn table_spectrum_merges_and_sorts() {
        let s = CrossSectionSpectrum::from_table(2, &[0.0, -6.0, -2.0, -2.0, -2.0]).unwrap();
        assert_eq!(s.lambda1(), Some(-2.0));
        assert_eq!(s.modes[1].multiplicity, 3);
        assert!(CrossSectionSpectrum::from_table(2, &[0.0, 1.0]).is_err());
        assert!(CrossSectionSpectrum::from_table(2, &[-1.0]).is_err());
    }
}
