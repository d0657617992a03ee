use crate::error::{Error, Result};

/// Cubic spline with a clamped first derivative at the left end and a
/// natural (zero curvature) right end.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn clamped_left(xs: Vec<f64>, ys: Vec<f64>, slope0: f64) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::Profile("spline needs matching abscissae and values".into()));
        }
        // tridiagonal system for the second derivatives m_i
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let h0 = xs[1] - xs[0];
        diag[0] = h0 / 3.0;
        sup[0] = h0 / 6.0;
        rhs[0] = (ys[1] - ys[0]) / h0 - slope0;
        for i in 1..n - 1 {
            let hl = xs[i] - xs[i - 1];
            let hr = xs[i + 1] - xs[i];
            sub[i] = hl / 6.0;
            diag[i] = (hl + hr) / 3.0;
            sup[i] = hr / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / hr - (ys[i] - ys[i - 1]) / hl;
        }
        diag[n - 1] = 1.0;
        rhs[n - 1] = 0.0;
        // Thomas algorithm
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        Ok(CubicSpline { xs, ys, m })
    }

    /// Value and first derivative. Outside the sample range the end cubic is
    /// extended.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let y = a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dy = (self.ys[i + 1] - self.ys[i]) / h
            + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (y, dy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_clamped_slope_and_knots() {
        let xs: Vec<f64> = (0..20).map(|i| (i as f64 * 0.1).powf(1.3)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let s = CubicSpline::clamped_left(xs.clone(), ys.clone(), 1.0).unwrap();
        for (x, y) in xs.iter().zip(ys.iter()) {
            assert!((s.eval(*x).0 - y).abs() < 1e-14);
        }
        assert!((s.eval(0.0).1 - 1.0).abs() < 1e-12);
    }
}
