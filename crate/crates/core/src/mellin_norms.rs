//! Discrete Mellin–Sobolev norms and the weighted pointwise bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{AngularTransform, ModeField};
use crate::geometry::smoothstep5;
use crate::grid::RadialGrid;

/// Tip cut-off `ω`: 1 on `[0, inner·r]`, 0 beyond `outer·r`, quintic
/// smoothstep in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff { inner: 0.5, outer: 1.0 }
    }
}

impl Cutoff {
    /// `ω ≡ 1` on the whole collar.
    pub fn whole_collar() -> Self {
        Cutoff { inner: 1.0, outer: 1.0 }
    }

    pub fn eval(&self, x: f64, collar: f64) -> f64 {
        let t = x / collar;
        if t <= self.inner {
            1.0
        } else if t >= self.outer {
            0.0
        } else {
            1.0 - smoothstep5((t - self.inner) / (self.outer - self.inner)).0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MellinNormConfig {
    pub s: usize,
    pub gamma: f64,
    pub p: f64,
    #[serde(default)]
    pub cutoff: Cutoff,
}

impl MellinNormConfig {
    pub fn new(s: usize, gamma: f64, p: f64) -> Self {
        MellinNormConfig { s, gamma, p, cutoff: Cutoff::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.s > 2 {
            return Err(Error::NormOrder(self.s));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::Precondition(format!("p must lie in (1, ∞), got {}", self.p)));
        }
        let c = self.cutoff;
        if !(c.inner > 0.0 && c.inner <= c.outer && c.outer <= 1.0) {
            return Err(Error::Precondition(format!(
                "cut-off needs 0 < inner ≤ outer ≤ 1, got ({}, {})",
                c.inner, c.outer
            )));
        }
        Ok(())
    }
}

/// Cross-section dimension of every surface handled here.
const N_DIM: f64 = 1.0;

fn angular_points(k_max: usize) -> usize {
    if k_max == 0 {
        1
    } else {
        (8 * (k_max + 1)).next_power_of_two()
    }
}

/// `∫|u(x_j, θ)|^p dθ` at every node.
fn angular_profile(field: &ModeField, p: f64, transform: &AngularTransform) -> Vec<f64> {
    let dtheta = 2.0 * std::f64::consts::PI / transform.n_theta() as f64;
    transform
        .to_physical(field)
        .iter()
        .map(|row| dtheta * row.iter().map(|v| v.abs().powf(p)).sum::<f64>())
        .collect()
}

fn weighted(field: &ModeField, w: &[f64]) -> ModeField {
    ModeField::from_modes(
        field.modes().iter().map(|m| m.iter().zip(w).map(|(v, c)| v * c).collect()).collect(),
    )
}

/// Sum over `k + |α| ≤ s` of `‖x^{(n+1)/2−γ}(x∂ₓ)ᵏ∂_θ^α(ωu)‖_{L^p}` in the
/// measure `√det h dx/x dθ`, plus the ordinary `H^s_p` norm of `(1−ω)u`.
pub fn mellin_norm(field: &ModeField, grid: &RadialGrid, collar: f64, cfg: &MellinNormConfig) -> Result<f64> {
    cfg.validate()?;
    if field.n_r() != grid.len() {
        return Err(Error::Precondition("field and grid sizes differ".into()));
    }
    let transform = AngularTransform::new(field.k_max(), angular_points(field.k_max()));
    let omega: Vec<f64> = grid.x().iter().map(|&x| cfg.cutoff.eval(x, collar)).collect();
    let tip = weighted(field, &omega);
    let rest = weighted(field, &omega.iter().map(|w| 1.0 - w).collect::<Vec<_>>());

    // ρ x^{((n+1)/2−γ)p}: the quadrature supplies dx/x and the tip tail
    let expo = 0.5 * (N_DIM + 1.0) - cfg.gamma;
    let tip_weights: Vec<f64> = grid
        .rho()
        .iter()
        .zip(grid.x())
        .map(|(r, x)| r * x.powf(expo * cfg.p))
        .collect();
    let mut total = 0.0;
    let mut radial = tip;
    for k in 0..=cfg.s {
        let mut term = radial.clone();
        for a in 0..=cfg.s - k {
            let profile: Vec<f64> = angular_profile(&term, cfg.p, &transform)
                .iter()
                .zip(&tip_weights)
                .map(|(v, w)| v * w)
                .collect();
            total += grid.integrate_from_tip(&profile).value.powf(1.0 / cfg.p);
            if a < cfg.s - k {
                term = term.angular_derivative();
            }
        }
        if k < cfg.s {
            radial = radial.radial_derivative(grid, true);
        }
    }

    if rest.modes().iter().flatten().any(|v| v.norm() > 0.0) {
        let area = grid.area_weights();
        let inv_r: Vec<f64> = grid.x().iter().zip(grid.rho()).map(|(x, r)| 1.0 / (x * r)).collect();
        let mut radial = rest;
        for k in 0..=cfg.s {
            let mut term = radial.clone();
            for a in 0..=cfg.s - k {
                let profile = angular_profile(&term, cfg.p, &transform);
                let body: f64 = profile.iter().zip(&area).map(|(v, w)| v * w).sum();
                total += body.powf(1.0 / cfg.p);
                if a < cfg.s - k {
                    term = weighted(&term.angular_derivative(), &inv_r);
                }
            }
            if k < cfg.s {
                radial = radial.radial_derivative(grid, false);
            }
        }
    }
    Ok(total)
}

/// `sup |u|·x^{(n+1)/2−γ} / ‖u‖` over the collar nodes.
pub fn bound_constant(field: &ModeField, grid: &RadialGrid, collar: f64, cfg: &MellinNormConfig) -> Result<f64> {
    let norm = mellin_norm(field, grid, collar, cfg)?;
    let transform = AngularTransform::new(field.k_max(), angular_points(field.k_max()));
    let phys = transform.to_physical(field);
    let expo = 0.5 * (N_DIM + 1.0) - cfg.gamma;
    let sup = phys
        .iter()
        .zip(grid.x())
        .filter(|(_, &x)| x <= collar)
        .map(|(row, x)| row.iter().fold(0.0f64, |m, v| m.max(v.abs())) * x.powf(expo))
        .fold(0.0f64, f64::max);
    Ok(if norm > 0.0 { sup / norm } else { f64::INFINITY })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub l_coarse: f64,
    pub l_fine: f64,
    pub drift: f64,
    /// The embedding hypothesis `s > (n+1)/p` holds.
    pub applicable: bool,
    pub pass: bool,
}

/// Weighted sup bound on two nested resolutions of the same field.
pub fn pointwise_bound_check(
    coarse: (&ModeField, &RadialGrid),
    fine: (&ModeField, &RadialGrid),
    collar: f64,
    cfg: &MellinNormConfig,
) -> Result<BoundCheck> {
    let applicable = cfg.s as f64 > (N_DIM + 1.0) / cfg.p;
    if !applicable {
        log::warn!(
            "pointwise bound needs s > (n+1)/p; s = {}, p = {}",
            cfg.s,
            cfg.p
        );
    }
    let l_coarse = bound_constant(coarse.0, coarse.1, collar, cfg)?;
    let l_fine = bound_constant(fine.0, fine.1, collar, cfg)?;
    let drift = (l_fine / l_coarse).max(l_coarse / l_fine);
    let pass = l_coarse.is_finite() && l_fine.is_finite() && drift < 2.0;
    Ok(BoundCheck { l_coarse, l_fine, drift, applicable, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{OuterBc, SurfaceOfRevolution, WarpProfile};
    use crate::grid::{build_grid, XMinPolicy};
    use std::f64::consts::PI;

    fn cone_grid(rho0: f64, n: usize) -> RadialGrid {
        let s = SurfaceOfRevolution::collar(WarpProfile::constant_cone(rho0, 1.0).unwrap(), OuterBc::Neumann);
        build_grid(&s, n, XMinPolicy::Default).unwrap()
    }

    #[test]
    fn constant_field_against_closed_form() {
        let g = cone_grid(0.4, 512);
        let mut cfg = MellinNormConfig::new(0, 0.5, 2.0);
        cfg.cutoff = Cutoff::whole_collar();
        let f = ModeField::radial(&vec![1.0; g.len()]);
        let got = mellin_norm(&f, &g, 1.0, &cfg).unwrap();
        // ∫₀¹ x^{2−2γ} ρ₀ dx/x · 2π = 2π·0.4 for γ = 1/2
        let exact = (2.0 * PI * 0.4).sqrt();
        assert!((got - exact).abs() < 1e-6 * exact, "{got} vs {exact}");
    }

    #[test]
    fn zero_field_and_order_error() {
        let g = cone_grid(0.4, 64);
        let f = ModeField::zeros(2, g.len());
        assert_eq!(mellin_norm(&f, &g, 1.0, &MellinNormConfig::new(2, 0.5, 2.0)).unwrap(), 0.0);
        assert!(matches!(
            mellin_norm(&f, &g, 1.0, &MellinNormConfig::new(3, 0.5, 2.0)),
            Err(Error::NormOrder(3))
        ));
    }

    #[test]
    fn quadratic_field_first_order_norm() {
        let g = cone_grid(1.0, 512);
        let mut cfg = MellinNormConfig::new(1, 1.0, 2.0);
        cfg.cutoff = Cutoff::whole_collar();
        let f = ModeField::radial(&g.x().iter().map(|x| x * x).collect::<Vec<_>>());
        let got = mellin_norm(&f, &g, 1.0, &cfg).unwrap();
        // ‖x²‖ = (2π∫x⁴dx/x)^{1/2} = (π/2)^{1/2}; ‖(x∂ₓ)x²‖ = 2(π/2)^{1/2}
        let exact = 3.0 * (PI / 2.0).sqrt();
        assert!((got - exact).abs() < 1e-6 * exact, "{got} vs {exact}");
    }
}
