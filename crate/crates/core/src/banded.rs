//! Complex banded LU with partial pivoting.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square banded matrix with `kl` sub- and `ku` super-diagonals. Storage
/// reserves `kl` extra super-diagonals for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![Complex64::new(0.0, 0.0); n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= r && c <= r + self.kl + self.ku);
        r * self.width + c + self.kl - r
    }

    pub fn in_band(&self, r: usize, c: usize) -> bool {
        c + self.kl >= r && c <= r + self.ku
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        assert!(self.in_band(r, c), "({r}, {c}) outside band");
        let i = self.idx(r, c);
        self.data[i] = v;
    }

    pub fn add(&mut self, r: usize, c: usize, v: Complex64) {
        assert!(self.in_band(r, c), "({r}, {c}) outside band");
        let i = self.idx(r, c);
        self.data[i] += v;
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        if c + self.kl >= r && c <= r + self.kl + self.ku {
            self.data[self.idx(r, c)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.kl);
                let hi = (r + self.ku).min(self.n - 1);
                (lo..=hi).map(|c| self.get(r, c) * x[c]).sum()
            })
            .collect()
    }

    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut piv = vec![0usize; n];
        for c in 0..n {
            let last = (c + kl).min(n - 1);
            let mut p = c;
            let mut best = self.get(c, c).norm();
            for r in c + 1..=last {
                let v = self.get(r, c).norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(c));
            }
            piv[c] = p;
            let right = (c + kl + ku).min(n - 1);
            if p != c {
                for col in c..=right {
                    let (a, b) = (self.idx(c, col), self.idx(p, col));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(c, c);
            for r in c + 1..=last {
                let i = self.idx(r, c);
                if self.data[i] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let l = self.data[i] / pivot;
                self.data[i] = l;
                for col in c + 1..=right {
                    let u = self.data[self.idx(c, col)];
                    let j = self.idx(r, col);
                    self.data[j] -= l * u;
                }
            }
        }
        Ok(BandedLu { m: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.m.n;
        let (kl, ku) = (self.m.kl, self.m.ku);
        for c in 0..n {
            let p = self.piv[c];
            if p != c {
                b.swap(c, p);
            }
            let bc = b[c];
            for r in c + 1..=(c + kl).min(n - 1) {
                b[r] -= self.m.data[self.m.idx(r, c)] * bc;
            }
        }
        for r in (0..n).rev() {
            let mut acc = b[r];
            for col in r + 1..=(r + kl + ku).min(n - 1) {
                acc -= self.m.data[self.m.idx(r, col)] * b[col];
            }
            b[r] = acc / self.m.data[self.m.idx(r, r)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_banded_system_against_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (n, kl, ku) = (40, 3, 5);
        let mut a = BandMatrix::zeros(n, kl, ku);
        let mut dense = nalgebra::DMatrix::<Complex64>::zeros(n, n);
        for r in 0..n {
            for c in r.saturating_sub(kl)..=(r + ku).min(n - 1) {
                // small diagonal forces pivoting
                let scale = if r == c { 0.01 } else { 1.0 };
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
                a.set(r, c, v);
                dense[(r, c)] = v;
            }
        }
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let mut b = a.mul_vec(&x);
        let lu = a.factor().unwrap();
        lu.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(x.iter()) {
            assert!((u - v).norm() < 1e-9, "{u} vs {v}");
        }
        let _ = dense.lu();
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = BandMatrix::zeros(4, 1, 1);
        assert!(matches!(a.factor(), Err(Error::Singular(0))));
    }
}
