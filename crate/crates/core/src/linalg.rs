//! Fixed-size 2×2 complex matrices for transfer-matrix products.

use core::ops::Mul;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    #[inline]
    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    #[inline]
    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().flatten().map(|c| c.norm_sqr()).sum()
    }

    /// Largest singular value, from the closed form for 2×2 matrices.
    pub fn norm2(&self) -> f64 {
        let f = self.frobenius_sq();
        let d = self.det().norm();
        // σ₁² + σ₂² = f, σ₁σ₂ = |det|
        let disc = (f * f - 4.0 * d * d).max(0.0).sqrt();
        let s1_sq = 0.5 * (f + disc);
        s1_sq.sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for c in out.0.iter_mut().flatten() {
            *c *= s;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    #[inline]
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm2_of_diagonal() {
        let m = Mat2::new(
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
        );
        assert!((m.norm2() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn norm2_of_rank_one() {
        // u v* with |u| = √2, |v| = √5
        let m = Mat2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
        );
        assert!((m.norm2() - 10f64.sqrt()).abs() < 1e-13);
    }
}
