//! Fourier-mode fields on a radial grid and their angular transforms.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::RadialGrid;
use crate::stencil::first_derivative;

/// `u(x_j, θ) = Σ_{|k|≤K} û_k(x_j) e^{ikθ}` with `û_{−k} = conj(û_k)`; only
/// `k = 0..=K` is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    modes: Vec<Vec<Complex64>>,
}

impl ModeField {
    pub fn zeros(k_max: usize, n_r: usize) -> Self {
        ModeField { modes: vec![vec![Complex64::new(0.0, 0.0); n_r]; k_max + 1] }
    }

    pub fn from_modes(modes: Vec<Vec<Complex64>>) -> Self {
        assert!(!modes.is_empty());
        ModeField { modes }
    }

    /// Axisymmetric field.
    pub fn radial(values: &[f64]) -> Self {
        ModeField { modes: vec![values.iter().map(|&v| Complex64::new(v, 0.0)).collect()] }
    }

    pub fn k_max(&self) -> usize {
        self.modes.len() - 1
    }

    pub fn n_r(&self) -> usize {
        self.modes[0].len()
    }

    pub fn mode(&self, k: usize) -> &[Complex64] {
        &self.modes[k]
    }

    pub fn mode_mut(&mut self, k: usize) -> &mut Vec<Complex64> {
        &mut self.modes[k]
    }

    pub fn modes(&self) -> &[Vec<Complex64>] {
        &self.modes
    }

    pub fn into_modes(self) -> Vec<Vec<Complex64>> {
        self.modes
    }

    pub fn scale(&self, c: f64) -> ModeField {
        self.map_modes(|_, v| v * c)
    }

    pub fn map_modes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> ModeField {
        ModeField {
            modes: self
                .modes
                .iter()
                .enumerate()
                .map(|(k, m)| m.iter().map(|&v| f(k, v)).collect())
                .collect(),
        }
    }

    /// Largest `|Im û₀|`: the only place a real field can pick up an
    /// imaginary part.
    pub fn imaginary_residue(&self) -> f64 {
        self.modes[0].iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    pub fn project_real(&mut self) {
        for v in &mut self.modes[0] {
            v.im = 0.0;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.modes.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Mode-wise `x∂ₓ` (`mellin = true`) or `∂ₓ`.
    pub fn radial_derivative(&self, grid: &RadialGrid, mellin: bool) -> ModeField {
        let d = DerivativeStencil::new(grid);
        ModeField {
            modes: self
                .modes
                .iter()
                .map(|m| {
                    let ds = d.apply(m);
                    ds.iter()
                        .enumerate()
                        .map(|(j, v)| {
                            let scale = if mellin { grid.x()[j] } else { 1.0 } / grid.dxds()[j];
                            v * scale
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// `∂_θ`.
    pub fn angular_derivative(&self) -> ModeField {
        self.map_modes(|k, v| v * Complex64::new(0.0, k as f64))
    }
}

/// Fourth-order first derivative in the computational coordinate.
pub struct DerivativeStencil {
    centered: Vec<f64>,
    edge: Vec<Vec<f64>>,
}

impl DerivativeStencil {
    pub fn new(grid: &RadialGrid) -> Self {
        let h = grid.h();
        DerivativeStencil {
            centered: first_derivative(2.0, 5, h),
            edge: (0..2).map(|z| first_derivative(z as f64, 5, h)).collect(),
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        (0..n)
            .map(|j| {
                if j < 2 {
                    self.edge[j].iter().enumerate().map(|(i, w)| v[i] * w).sum()
                } else if j >= n - 2 {
                    // mirror of the left edge stencil
                    let e = &self.edge[n - 1 - j];
                    e.iter().enumerate().map(|(i, w)| -v[n - 1 - i] * w).sum()
                } else {
                    self.centered.iter().enumerate().map(|(i, w)| v[j + i - 2] * w).sum()
                }
            })
            .collect()
    }
}

/// Angular sample count that resolves products of degree `m` of a field
/// with modes up to `k_max` without aliasing into the kept modes.
pub fn dealiased_points(k_max: usize, degree: usize) -> usize {
    if k_max == 0 {
        return 1;
    }
    let need = (degree.max(1) + 1) * k_max + 1;
    // even sizes keep the transform cheap
    need + need % 2
}

/// Forward/inverse transforms between `k = 0..=K` coefficients and `N_θ`
/// equispaced angles.
#[derive(Clone)]
pub struct AngularTransform {
    n_theta: usize,
    k_max: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for AngularTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AngularTransform")
            .field("n_theta", &self.n_theta)
            .field("k_max", &self.k_max)
            .finish()
    }
}

impl AngularTransform {
    pub fn new(k_max: usize, n_theta: usize) -> Self {
        assert!(n_theta > 2 * k_max || (k_max == 0 && n_theta >= 1), "N_θ = {n_theta} cannot carry K = {k_max}");
        let mut planner = FftPlanner::new();
        AngularTransform {
            n_theta,
            k_max,
            forward: planner.plan_fft_forward(n_theta),
            inverse: planner.plan_fft_inverse(n_theta),
        }
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta)
            .map(|l| 2.0 * std::f64::consts::PI * l as f64 / self.n_theta as f64)
            .collect()
    }

    /// Samples `u(x_j, θ_l)`, indexed `[j][l]`.
    pub fn to_physical(&self, field: &ModeField) -> Vec<Vec<f64>> {
        let n = self.n_theta;
        let kk = field.k_max().min(self.k_max);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut out = Vec::with_capacity(field.n_r());
        for j in 0..field.n_r() {
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            buf[0] = Complex64::new(field.mode(0)[j].re, 0.0);
            for k in 1..=kk {
                let c = field.mode(k)[j];
                buf[k] += c;
                buf[n - k] += c.conj();
            }
            if n > 1 {
                self.inverse.process(&mut buf);
            }
            out.push(buf.iter().map(|v| v.re).collect());
        }
        out
    }

    pub fn to_modes(&self, physical: &[Vec<f64>]) -> ModeField {
        let n = self.n_theta;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut modes = vec![Vec::with_capacity(physical.len()); self.k_max + 1];
        for row in physical {
            for (b, v) in buf.iter_mut().zip(row) {
                *b = Complex64::new(*v, 0.0);
            }
            if n > 1 {
                self.forward.process(&mut buf);
            }
            for (k, m) in modes.iter_mut().enumerate() {
                m.push(buf[k] / n as f64);
            }
        }
        ModeField { modes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_of_cosine_has_the_trigonometric_mode_content() {
        let k_max = 2;
        let t = AngularTransform::new(k_max, dealiased_points(k_max, 2));
        let mut f = ModeField::zeros(k_max, 1);
        f.mode_mut(1)[0] = Complex64::new(0.5, 0.0);
        let phys = t.to_physical(&f);
        let sq: Vec<Vec<f64>> = phys.iter().map(|r| r.iter().map(|v| v * v).collect()).collect();
        let m = t.to_modes(&sq);
        assert!((m.mode(0)[0] - 0.5).norm() < 1e-15);
        assert!(m.mode(1)[0].norm() < 1e-15);
        assert!((m.mode(2)[0] - 0.25).norm() < 1e-15);
    }

    #[test]
    fn round_trip_and_realness() {
        let t = AngularTransform::new(3, 16);
        let modes = vec![
            vec![Complex64::new(1.0, 0.0)],
            vec![Complex64::new(0.2, -0.3)],
            vec![Complex64::new(0.0, 0.1)],
            vec![Complex64::new(-0.05, 0.0)],
        ];
        let f = ModeField::from_modes(modes);
        let back = t.to_modes(&t.to_physical(&f));
        for k in 0..=3 {
            assert!((back.mode(k)[0] - f.mode(k)[0]).norm() < 1e-15);
        }
        assert_eq!(back.imaginary_residue(), 0.0);
    }

    #[test]
    fn dealiasing_rule() {
        assert_eq!(dealiased_points(0, 3), 1);
        assert!(dealiased_points(4, 3) > 16);
    }
}
