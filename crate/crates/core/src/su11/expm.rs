//! Matrix exponential of a real tridiagonal generator.
//!
//! Scaling and squaring around a plain Taylor polynomial: the generator is
//! scaled by `2^-s` until its 1-norm is at most [`THETA`], the Taylor series
//! is summed until terms drop below machine precision, and the result is
//! squared `s` times. Taylor terms exploit the band structure (O(n^2) each);
//! only the squarings are dense products.

use nalgebra::DMatrix;

/// 1-norm bound on the scaled generator.
pub const THETA: f64 = 0.5;
const MAX_TAYLOR_TERMS: usize = 64;

/// Real tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    /// `sub[i]` is entry `(i + 1, i)`.
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    /// `sup[i]` is entry `(i, i + 1)`.
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn norm1(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|j| {
                let mut s = self.diag[j].abs();
                if j > 0 {
                    s += self.sup[j - 1].abs();
                }
                if j + 1 < n {
                    s += self.sub[j].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    fn scaled(&self, factor: f64) -> Self {
        let f = |v: &[f64]| v.iter().map(|x| x * factor).collect();
        Self {
            sub: f(&self.sub),
            diag: f(&self.diag),
            sup: f(&self.sup),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i + 1, i)] = self.sub[i];
                m[(i, i + 1)] = self.sup[i];
            }
        }
        m
    }

    /// `x * self`.
    fn right_mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(x.nrows(), n);
        for j in 0..n {
            let mut col = x.column(j) * self.diag[j];
            if j > 0 {
                col += x.column(j - 1) * self.sup[j - 1];
            }
            if j + 1 < n {
                col += x.column(j + 1) * self.sub[j];
            }
            out.set_column(j, &col);
        }
        out
    }
}

/// `exp(t)` for a real tridiagonal `t`.
pub fn expm_tridiagonal(t: &Tridiagonal) -> DMatrix<f64> {
    let n = t.dim();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let norm = t.norm1();
    let squarings = if norm > THETA {
        (norm / THETA).log2().ceil() as u32
    } else {
        0
    };
    let scaled = t.scaled(0.5f64.powi(squarings as i32));

    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for m in 1..=MAX_TAYLOR_TERMS {
        term = scaled.right_mul(&term) / m as f64;
        sum += &term;
        if term.amax() <= f64::EPSILON * 1e-2 * sum.amax() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_tridiagonal(n: usize, seed: u64) -> Tridiagonal {
        // xorshift; no need for a full RNG here
        let mut s = seed;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        Tridiagonal {
            sub: (0..n - 1).map(|_| 3.0 * next()).collect(),
            diag: (0..n).map(|_| next()).collect(),
            sup: (0..n - 1).map(|_| 3.0 * next()).collect(),
        }
    }

    #[test]
    fn matches_nalgebra_pade() {
        for (n, seed) in [(1, 3), (2, 5), (7, 11), (30, 17)] {
            let t = random_tridiagonal(n.max(2), seed);
            let ours = expm_tridiagonal(&t);
            let reference = t.to_dense().exp();
            let scale = reference.amax();
            assert!((ours - reference).amax() < 1e-12 * scale, "n = {n}");
        }
    }

    #[test]
    fn zero_generator_is_identity() {
        let t = Tridiagonal {
            sub: vec![0.0; 4],
            diag: vec![0.0; 5],
            sup: vec![0.0; 4],
        };
        assert_eq!(expm_tridiagonal(&t), DMatrix::identity(5, 5));
    }

    #[test]
    fn antisymmetric_generator_gives_orthogonal() {
        let mut t = random_tridiagonal(40, 99);
        t.diag.iter_mut().for_each(|d| *d = 0.0);
        t.sup = t.sub.iter().map(|x| -x).collect();
        let e = expm_tridiagonal(&t);
        let gram = e.transpose() * &e;
        assert!((gram - DMatrix::identity(40, 40)).amax() < 1e-12);
    }
}
