//! Small dense complex matrices for per-node work.
//!
//! Bundles in the numeric lab have rank at most a handful, and the hot loops
//! evaluate millions of tiny products and inverses, so storage is inline.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use smallvec::SmallVec;

pub type C64 = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    m: usize,
    data: SmallVec<[C64; 9]>,
}

impl CMat {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self { n, m, data: SmallVec::from_elem(C64::new(0.0, 0.0), n * m) }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = C64::new(1.0, 0.0);
        }
        a
    }

    pub fn scalar(c: f64) -> Self {
        Self::from_rows(&[&[C64::new(c, 0.0)]])
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        let mut a = Self::zeros(n, m);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), m, "ragged rows");
            for (j, &v) in r.iter().enumerate() {
                a[(i, j)] = v;
            }
        }
        a
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        let mut a = Self::zeros(n, m);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                a[(i, j)] = C64::new(v, 0.0);
            }
        }
        a
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut a = Self::zeros(entries.len(), entries.len());
        for (i, &v) in entries.iter().enumerate() {
            a[(i, i)] = v;
        }
        a
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    pub fn is_square(&self) -> bool {
        self.n == self.m
    }

    pub fn adjoint(&self) -> Self {
        let mut a = Self::zeros(self.m, self.n);
        for i in 0..self.n {
            for j in 0..self.m {
                a[(j, i)] = self[(i, j)].conj();
            }
        }
        a
    }

    pub fn trace(&self) -> C64 {
        (0..self.n.min(self.m)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut a = self.clone();
        a.data.iter_mut().for_each(|v| *v *= c);
        a
    }

    pub fn scale_c(&self, c: C64) -> Self {
        let mut a = self.clone();
        a.data.iter_mut().for_each(|v| *v *= c);
        a
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &Self) {
        assert_eq!((self.n, self.m), (other.n, other.m), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut a = Self::zeros(self.n + other.n, self.m + other.m);
        for i in 0..self.n {
            for j in 0..self.m {
                a[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..other.n {
            for j in 0..other.m {
                a[(self.n + i, self.m + j)] = other[(i, j)];
            }
        }
        a
    }

    /// Columns of `self` followed by columns of `other`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "row mismatch");
        let mut a = Self::zeros(self.n, self.m + other.m);
        for i in 0..self.n {
            for j in 0..self.m {
                a[(i, j)] = self[(i, j)];
            }
            for j in 0..other.m {
                a[(i, self.m + j)] = other[(i, j)];
            }
        }
        a
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))?;
            let p = a[(pivot, col)];
            if p.norm() == 0.0 || !p.norm().is_finite() {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let pinv = p.inv();
            for j in 0..n {
                a[(col, j)] *= pinv;
                inv[(col, j)] *= pinv;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f.norm() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(i, j)] -= f * ac;
                    inv[(i, j)] -= f * ic;
                }
            }
        }
        Some(inv)
    }

    /// Whether the matrix is hermitian (to `tol`) and positive definite,
    /// tested by a Cholesky factorization.
    pub fn is_hermitian_positive_definite(&self, tol: f64) -> bool {
        if !self.is_square() || !self.is_finite() {
            return false;
        }
        let n = self.n;
        let scale = self.max_abs().max(1.0);
        for i in 0..n {
            for j in 0..n {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol * scale {
                    return false;
                }
            }
        }
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if d <= 0.0 {
                return false;
            }
            let djj = d.sqrt();
            l[(j, j)] = C64::new(djj, 0.0);
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        true
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.m + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.m + j]
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!((self.n, self.m), (rhs.n, rhs.m), "shape mismatch");
        let mut a = self.clone();
        for (x, y) in a.data.iter_mut().zip(&rhs.data) {
            *x += y;
        }
        a
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!((self.n, self.m), (rhs.n, rhs.m), "shape mismatch");
        let mut a = self.clone();
        for (x, y) in a.data.iter_mut().zip(&rhs.data) {
            *x -= y;
        }
        a
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.m, rhs.n, "shape mismatch");
        let mut a = CMat::zeros(self.n, rhs.m);
        for i in 0..self.n {
            for k in 0..self.m {
                let x = self[(i, k)];
                if x.re == 0.0 && x.im == 0.0 {
                    continue;
                }
                for j in 0..rhs.m {
                    a[(i, j)] += x * rhs[(k, j)];
                }
            }
        }
        a
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn inverse_round_trip() {
        let a = CMat::from_rows(&[&[c(2.0, 0.0), c(0.5, 1.0)], &[c(0.5, -1.0), c(3.0, 0.0)]]);
        let inv = a.inverse().unwrap();
        let id = &a * &inv;
        assert!((&id - &CMat::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let a = CMat::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let inv = a.inverse().unwrap();
        assert_eq!(inv, a);
        assert!(CMat::zeros(2, 2).inverse().is_none());
    }

    #[test]
    fn positive_definiteness() {
        let a = CMat::from_rows(&[&[c(2.0, 0.0), c(0.5, 1.0)], &[c(0.5, -1.0), c(3.0, 0.0)]]);
        assert!(a.is_hermitian_positive_definite(1e-12));
        let b = CMat::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(!b.is_hermitian_positive_definite(1e-12));
        let nh = CMat::from_real_rows(&[&[1.0, 0.1], &[0.0, 1.0]]);
        assert!(!nh.is_hermitian_positive_definite(1e-12));
    }

    #[test]
    fn stacking() {
        let a = CMat::identity(1);
        let b = CMat::scalar(2.0);
        let s = a.direct_sum(&b);
        assert_eq!(s.trace(), c(3.0, 0.0));
        assert_eq!(a.hstack(&b).cols(), 2);
    }
}
