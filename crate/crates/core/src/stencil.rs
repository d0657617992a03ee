/// Finite-difference weights for derivatives `0..=order` at `z` from the
/// nodes `xs` (Fornberg's recursion). `w[d][j]` multiplies `f(xs[j])` in the
/// approximation of the `d`-th derivative.
pub fn fornberg(z: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Weights of the first derivative at offset `z` (in units of the spacing)
/// from equispaced nodes `0, 1, …, count−1`, scaled by `1/h`.
pub fn first_derivative(z: f64, count: usize, h: f64) -> Vec<f64> {
    let xs: Vec<f64> = (0..count).map(|i| i as f64).collect();
    fornberg(z, &xs, 1)[1].iter().map(|w| w / h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_staggered_weights() {
        let w = first_derivative(1.5, 4, 1.0);
        let expect = [1.0 / 24.0, -27.0 / 24.0, 27.0 / 24.0, -1.0 / 24.0];
        for (a, b) in w.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn one_sided_is_exact_on_quartics() {
        let w = first_derivative(0.0, 5, 0.1);
        let f = |x: f64| 1.0 + x - 2.0 * x * x + x.powi(3) - 0.5 * x.powi(4);
        let df = 1.0;
        let approx: f64 = w.iter().enumerate().map(|(j, w)| w * f(0.1 * j as f64)).sum();
        assert!((approx - df).abs() < 1e-11);
    }
}
