//! Conormal-symbol analysis of the cone Laplacian and bi-Laplacian.
//!
//! On the eigenspace of the cross-section Laplacian with eigenvalue `λᵢ`
//! the conormal symbol of `Δ` is the quadratic `z² − (n−1)z + λᵢ`, acting on
//! `x^{−z}`. Everything here (pole sets, admissible weights, the
//! bi-Laplacian asymptotics and the predicted decay near the tip) is a
//! closed-form consequence of that quadratic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CrossSectionSpectrum;

/// Roots closer than this are merged into one pole of higher multiplicity.
pub const ROOT_MERGE_TOL: f64 = 1e-9;

/// `z² − (n−1)z + λ`, the conormal symbol of `Δ` restricted to one
/// cross-section eigenspace.
pub fn conormal_symbol(n: usize, eigenvalue: f64, z: Complex64) -> Complex64 {
    z * z - (n as f64 - 1.0) * z + eigenvalue
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

impl Pole {
    pub fn location(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleEntry {
    pub mode: i64,
    pub eigenvalue: f64,
    pub poles: Vec<Pole>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub n: usize,
    pub entries: Vec<PoleEntry>,
}

/// Roots `(n−1)/2 ± √(((n−1)/2)² − λ)` of the quadratic symbol, merged when
/// they coincide.
fn quadratic_roots(n: usize, eigenvalue: f64) -> Vec<Pole> {
    let c = 0.5 * (n as f64 - 1.0);
    let disc = Complex64::new(c * c - eigenvalue, 0.0).sqrt();
    let plus = c + disc;
    let minus = c - disc;
    if (plus - minus).norm() < ROOT_MERGE_TOL {
        vec![Pole {
            re: c,
            im: 0.0,
            multiplicity: 2,
        }]
    } else {
        [plus, minus]
            .iter()
            .map(|z| Pole {
                re: z.re,
                im: z.im,
                multiplicity: 1,
            })
            .collect()
    }
}

/// Poles of `σ_M(Δ)(z)⁻¹` per cross-section eigenspace.
pub fn laplacian_poles(spec: &CrossSectionSpectrum) -> PoleReport {
    let entries = spec
        .modes
        .iter()
        .map(|m| PoleEntry {
            mode: m.label,
            eigenvalue: m.eigenvalue,
            poles: quadratic_roots(spec.n, m.eigenvalue),
        })
        .collect();
    PoleReport { n: spec.n, entries }
}

/// Which weight window to compute: the one making the Laplacian extension
/// `H^{s+2,γ+2} ⊕ ℂ` sectorial, or the narrower one used for the nonlinear
/// problem, which also absorbs the time-trace loss `2/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightPath {
    #[serde(rename = "laplacian")]
    Laplacian,
    #[serde(rename = "nonlinear")]
    Nonlinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightWindow {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub lambda1: Option<f64>,
    pub path: WeightPath,
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// `2/q < γ_max − (n−3)/2`, equivalently a nonempty nonlinear window.
    pub q_constraint: bool,
    /// `2/q + (n+1)/p < 2`.
    pub p_constraint: bool,
}

impl WeightWindow {
    pub fn is_empty(&self) -> bool {
        !(self.gamma_min < self.gamma_max)
    }

    pub fn contains(&self, gamma: f64) -> bool {
        self.gamma_min < gamma && gamma < self.gamma_max
    }
}

/// `min{−1 + √(((n−1)/2)² − λ₁), (n+1)/2}`; without a non-zero eigenvalue
/// only the second bound remains.
pub fn gamma_upper(n: usize, lambda1: Option<f64>) -> f64 {
    let nf = n as f64;
    let cap = 0.5 * (nf + 1.0);
    match lambda1 {
        Some(l) => {
            let c = 0.5 * (nf - 1.0);
            (-1.0 + (c * c - l).sqrt()).min(cap)
        }
        None => cap,
    }
}

/// Admissible Mellin weights `γ` for the chosen Laplacian extension.
pub fn admissible_weights(
    n: usize,
    p: f64,
    q: f64,
    lambda1: f64,
    path: WeightPath,
) -> Result<WeightWindow> {
    if !(lambda1 < 0.0) {
        return Err(Error::Spectrum(format!(
            "greatest non-zero eigenvalue must be negative, got {lambda1}"
        )));
    }
    window(n, p, q, Some(lambda1), path)
}

/// As [`admissible_weights`], reading `λ₁` off a spectrum (which may have no
/// non-zero eigenvalue at all).
pub fn admissible_weights_for(
    spec: &CrossSectionSpectrum,
    p: f64,
    q: f64,
    path: WeightPath,
) -> Result<WeightWindow> {
    window(spec.n, p, q, spec.lambda1(), path)
}

fn window(n: usize, p: f64, q: f64, lambda1: Option<f64>, path: WeightPath) -> Result<WeightWindow> {
    if n == 0 {
        return Err(Error::Precondition("dimension n must be at least 1".into()));
    }
    for (name, v) in [("p", p), ("q", q)] {
        if !(v > 1.0 && v.is_finite()) {
            return Err(Error::Precondition(format!("{name} must lie in (1, ∞), got {v}")));
        }
    }
    let nf = n as f64;
    let base = 0.5 * (nf - 3.0);
    let gamma_max = gamma_upper(n, lambda1);
    let gamma_min = match path {
        WeightPath::Laplacian => base,
        WeightPath::Nonlinear => base + 2.0 / q,
    };
    Ok(WeightWindow {
        n,
        p,
        q,
        lambda1,
        path,
        gamma_min,
        gamma_max,
        q_constraint: 2.0 / q < gamma_max - base,
        p_constraint: 2.0 / q + (nf + 1.0) / p < 2.0,
    })
}

/// Large-curvature hypothesis `−λ₁ ≥ 2(n+1)` under which the weight window
/// reaches its cap `(n+1)/2`.
pub fn curvature_condition(n: usize, lambda1: f64) -> bool {
    -lambda1 >= 2.0 * (n as f64 + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTerm {
    /// `ρ` in `x^{−ρ} logᵏ x`.
    pub rho: f64,
    pub log_power: u8,
    pub mode: i64,
}

impl AsymptoticTerm {
    /// Power of `x`, i.e. `−ρ`.
    pub fn power(&self) -> f64 {
        -self.rho
    }
}

/// Terms `c(y) x^{−ρ} logᵏ x` that can appear in the bi-Laplacian domain on
/// top of the minimal domain, plus the constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsTemplate {
    pub n: usize,
    pub gamma: f64,
    /// Half-open strip `[lo, hi)` for `Re ρ`.
    pub strip: [f64; 2],
    pub constants: bool,
    pub terms: Vec<AsymptoticTerm>,
    pub diagnostics: Vec<String>,
}

/// Zeros of `σ(z)·σ(z+2)` on one eigenspace, with total order.
fn bilaplacian_zeros(n: usize, eigenvalue: f64) -> Vec<(f64, usize)> {
    let mut zeros: Vec<(f64, usize)> = Vec::new();
    let first = quadratic_roots(n, eigenvalue);
    let shifted = first.iter().map(|p| Pole {
        re: p.re - 2.0,
        ..*p
    });
    for pole in first.iter().copied().chain(shifted) {
        match zeros
            .iter_mut()
            .find(|(z, _)| (z - pole.re).abs() < ROOT_MERGE_TOL)
        {
            Some(entry) => entry.1 += pole.multiplicity,
            None => zeros.push((pole.re, pole.multiplicity)),
        }
    }
    zeros.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    zeros
}

/// Asymptotics template of the bi-Laplacian domain, from the factorization
/// `σ_M(Δ²)(z) = σ_M(Δ)(z)·σ_M(Δ)(z+2)`.
///
/// `γ` must lie in the Laplacian weight window of `spec`.
pub fn bilaplacian_asymptotics(spec: &CrossSectionSpectrum, gamma: f64) -> Result<AsymptoticsTemplate> {
    let upper = gamma_upper(spec.n, spec.lambda1());
    let lower = 0.5 * (spec.n as f64 - 3.0);
    if !(lower < gamma && gamma < upper) {
        return Err(Error::Precondition(format!(
            "gamma = {gamma} outside the weight window ({lower}, {upper})"
        )));
    }
    let top = 0.5 * (spec.n as f64 + 1.0) - gamma;
    let strip = [top - 4.0, top - 2.0];
    let mut terms = Vec::new();
    let mut diagnostics = Vec::new();
    for mode in &spec.modes {
        for (z, order) in bilaplacian_zeros(spec.n, mode.eigenvalue) {
            if !(strip[0] <= z && z < strip[1]) {
                continue;
            }
            if order >= 3 {
                diagnostics.push(format!(
                    "mode {}: zero of order {order} at {z} has no log-order ≤ 1 description; dropped",
                    mode.label
                ));
                continue;
            }
            terms.push(AsymptoticTerm {
                rho: z,
                log_power: 0,
                mode: mode.label,
            });
            if order == 2 {
                terms.push(AsymptoticTerm {
                    rho: z,
                    log_power: 1,
                    mode: mode.label,
                });
            }
        }
    }
    Ok(AsymptoticsTemplate {
        n: spec.n,
        gamma,
        strip,
        constants: true,
        terms,
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeExponent {
    pub mode: i64,
    /// Smallest positive power of `x` the template allows on this mode.
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayPrediction {
    pub n: usize,
    pub gamma: f64,
    pub q: f64,
    pub epsilon: f64,
    /// `2/q + ε` for `q ≤ 2`, otherwise 0.
    pub delta: f64,
    /// Guaranteed exponent `γ − (n−3)/2 − δ` in `|u − c₀| ≤ C x^α`.
    pub alpha_pred: f64,
    pub active_modes: Vec<i64>,
    pub mode_exponents: Vec<ModeExponent>,
    /// Minimum of the per-mode exponents over the active modes.
    pub leading_exponent: Option<f64>,
}

impl DecayPrediction {
    pub fn mode_exponent(&self, mode: i64) -> Option<f64> {
        self.mode_exponents
            .iter()
            .find(|m| m.mode == mode)
            .and_then(|m| m.exponent)
    }
}

pub fn trace_loss(q: f64, epsilon: f64) -> f64 {
    if q <= 2.0 {
        2.0 / q + epsilon
    } else {
        0.0
    }
}

/// Exponent bound for the deviation `|u − c₀|` near the tip, together with
/// the sharper per-mode exponents read off the template.
pub fn predicted_deviation_exponent(
    template: &AsymptoticsTemplate,
    gamma: f64,
    q: f64,
    epsilon: f64,
    active_modes: &[i64],
) -> DecayPrediction {
    let delta = trace_loss(q, epsilon);
    let alpha_pred = gamma - 0.5 * (template.n as f64 - 3.0) - delta;
    let mut modes: Vec<i64> = template.terms.iter().map(|t| t.mode).collect();
    modes.extend_from_slice(active_modes);
    modes.sort_unstable();
    modes.dedup();
    let mode_exponents: Vec<ModeExponent> = modes
        .iter()
        .map(|&mode| ModeExponent {
            mode,
            exponent: template
                .terms
                .iter()
                .filter(|t| t.mode == mode && t.log_power == 0 && t.power() > 0.0)
                .map(|t| t.power())
                .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.min(p)))),
        })
        .collect();
    let leading_exponent = mode_exponents
        .iter()
        .filter(|m| active_modes.contains(&m.mode))
        .filter_map(|m| m.exponent)
        .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.min(p))));
    DecayPrediction {
        n: template.n,
        gamma,
        q,
        epsilon,
        delta,
        alpha_pred,
        active_modes: active_modes.to_vec(),
        mode_exponents,
        leading_exponent,
    }
}

/// Positive indicial root `√(((n−1)/2)² − λ) − (n−1)/2` of the tip operator
/// on one eigenspace: `x^μ` is the bounded Frobenius branch (`k/ρ₀` for
/// circles).
pub fn decaying_indicial_root(n: usize, eigenvalue: f64) -> f64 {
    let c = 0.5 * (n as f64 - 1.0);
    (c * c - eigenvalue).sqrt() - c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CrossSectionSpectrum;

    fn poles_of(n: usize, l: f64) -> Vec<Pole> {
        let spec = CrossSectionSpectrum::from_table(n, &[0.0, l]).unwrap();
        laplacian_poles(&spec).entries[1].poles.clone()
    }

    #[test]
    fn circle_mode_poles() {
        // ρ₀ = 0.5, k = 1: λ = −4; roots of z² − 4
        let p = poles_of(1, -4.0);
        let mut re: Vec<f64> = p.iter().map(|p| p.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(re, vec![-2.0, 2.0]);
        assert!(p.iter().all(|p| p.multiplicity == 1 && p.im == 0.0));
    }

    #[test]
    fn zero_eigenvalue_poles() {
        let spec = CrossSectionSpectrum::circle(0.5, 0);
        let e = &laplacian_poles(&spec).entries[0];
        assert_eq!(e.poles.len(), 1);
        assert_eq!(e.poles[0].multiplicity, 2);
        assert_eq!(e.poles[0].re, 0.0);

        let spec3 = CrossSectionSpectrum::from_table(3, &[0.0]).unwrap();
        let mut re: Vec<f64> = laplacian_poles(&spec3).entries[0]
            .poles
            .iter()
            .map(|p| p.re)
            .collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(re, vec![0.0, 2.0]);
    }

    #[test]
    fn weight_windows_of_worked_cases() {
        // ρ₀ = 1/3: λ₁ = −9
        let w = admissible_weights(1, 8.0, 4.0, -9.0, WeightPath::Nonlinear).unwrap();
        assert_eq!((w.gamma_min, w.gamma_max), (-0.5, 1.0));
        assert!(w.q_constraint && w.p_constraint && !w.is_empty());

        let w = admissible_weights(1, 8.0, 4.0, -0.01, WeightPath::Nonlinear).unwrap();
        assert!(w.is_empty());
        assert!((w.gamma_max + 0.9).abs() < 1e-15);
        assert!(!w.q_constraint);

        let w = admissible_weights(1, 8.0, 4.0, -9.0, WeightPath::Laplacian).unwrap();
        assert_eq!(w.gamma_min, -1.0);

        assert!(matches!(
            admissible_weights(1, 8.0, 4.0, 0.0, WeightPath::Nonlinear),
            Err(Error::Spectrum(_))
        ));
        assert!(admissible_weights(1, 1.0, 4.0, -1.0, WeightPath::Nonlinear).is_err());
    }

    #[test]
    fn curvature_condition_cases() {
        assert!(curvature_condition(1, -4.0));
        assert!(!curvature_condition(1, -1.0));
        assert!(curvature_condition(3, -8.0));
        assert!(!curvature_condition(3, -7.999));
    }

    #[test]
    fn template_for_rho_08() {
        let spec = CrossSectionSpectrum::circle(0.8, 1);
        let t = bilaplacian_asymptotics(&spec, 0.2).unwrap();
        assert!((t.strip[0] + 3.2).abs() < 1e-12 && (t.strip[1] + 1.2).abs() < 1e-12);
        let powers: Vec<(f64, i64)> = t
            .terms
            .iter()
            .filter(|t| t.log_power == 0)
            .map(|t| (t.power(), t.mode))
            .collect();
        assert!(powers.iter().any(|&(p, m)| m == 1 && (p - 1.25).abs() < 1e-12));
        assert!(!powers.iter().any(|&(p, _)| (p - 0.75).abs() < 1e-9));
        assert!(t.terms.iter().all(|t| t.rho >= t.rho.min(t.rho) && t.rho >= -3.2 && t.rho < -1.2));
    }

    #[test]
    fn template_near_gamma_max_has_quadratic_family() {
        for rho0 in [0.3, 0.4, 0.5] {
            let spec = CrossSectionSpectrum::circle(rho0, 0);
            let gmax = gamma_upper(1, spec.lambda1());
            let t = bilaplacian_asymptotics(&spec, gmax - 0.01).unwrap();
            assert!(t.constants);
            let k0: Vec<&AsymptoticTerm> = t.terms.iter().filter(|t| t.mode == 0).collect();
            assert_eq!(k0.len(), 2, "x² and x² log x");
            assert!(k0.iter().all(|t| (t.power() - 2.0).abs() < 1e-12));
            assert_eq!(t.terms.len(), 2);
        }
        let spec = CrossSectionSpectrum::circle(0.4, 3);
        let t = bilaplacian_asymptotics(&spec, 1.0 - 1e-6).unwrap();
        assert!(t
            .terms
            .iter()
            .any(|t| t.mode == 0 && t.log_power == 0 && (t.power() - 2.0).abs() < 1e-12));
    }

    #[test]
    fn template_rejects_gamma_outside_window() {
        let spec = CrossSectionSpectrum::circle(0.8, 2);
        assert!(bilaplacian_asymptotics(&spec, 0.3).is_err());
        assert!(bilaplacian_asymptotics(&spec, -1.0).is_err());
    }

    #[test]
    fn prediction_examples() {
        let spec = CrossSectionSpectrum::circle(0.4, 2);
        let gamma = 1.0 - 1e-6;
        let t = bilaplacian_asymptotics(&spec, gamma).unwrap();
        let p = predicted_deviation_exponent(&t, gamma, 4.0, 0.05, &[0]);
        assert_eq!(p.delta, 0.0);
        assert!((p.alpha_pred - 2.0).abs() < 1e-5);
        assert_eq!(p.leading_exponent, Some(2.0));

        let spec = CrossSectionSpectrum::circle(0.4, 1);
        let t = bilaplacian_asymptotics(&spec, 0.5).unwrap();
        let p = predicted_deviation_exponent(&t, 0.5, 2.0, 0.1, &[0]);
        assert!((p.alpha_pred - 0.4).abs() < 1e-12);

        let spec = CrossSectionSpectrum::circle(0.8, 1);
        let t = bilaplacian_asymptotics(&spec, 0.2).unwrap();
        let p = predicted_deviation_exponent(&t, 0.2, 4.0, 0.05, &[1]);
        assert_eq!(p.leading_exponent, Some(1.25));
        assert_eq!(p.mode_exponent(1), Some(1.25));
    }

    #[test]
    fn indicial_roots() {
        assert_eq!(decaying_indicial_root(1, -1.0 / (0.8f64 * 0.8)), 1.25);
        assert_eq!(decaying_indicial_root(1, 0.0), 0.0);
        assert_eq!(decaying_indicial_root(3, 0.0), 0.0);
    }
}
