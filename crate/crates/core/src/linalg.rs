//! Small dense complex linear algebra: just what zero-forcing, scheduling and
//! the dual-MAC bound need.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[allow(unused_imports)] // inherent once std is in the graph
use num_traits::Float;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data. Panics if the length does not match.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [C64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, values: &[C64]) {
        debug_assert_eq!(values.len(), self.rows);
        for (r, v) in values.iter().enumerate() {
            self[(r, c)] = *v;
        }
    }

    /// Matrix made of the listed rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self { rows: rows.len(), cols: self.cols, data }
    }

    /// Matrix made of the column range `start..end`.
    pub fn column_block(&self, start: usize, end: usize) -> Self {
        Self::from_fn(self.rows, end - start, |r, c| self[(r, start + c)])
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &CMat) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = out.row_mut(r);
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// `sum_i conj(a_i) b_i`
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm_sq(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    norm_sq(a).sqrt()
}

/// LQ factorization `A = L Q` of a wide (or square) matrix with linearly
/// independent rows: `L` is lower triangular with real positive diagonal and
/// `Q` has orthonormal rows.
#[derive(Debug, Clone)]
pub struct Lq {
    pub l: CMat,
    pub q: CMat,
}

/// Classical Gram-Schmidt with one full reorthogonalization pass ("twice is
/// enough"), which keeps `Q` orthonormal to working precision for any matrix
/// whose condition number is well below `1/eps`.
///
/// Returns `None` when a row has no component outside the span of the
/// previous rows.
pub fn lq(a: &CMat) -> Option<Lq> {
    let (k, m) = (a.rows(), a.cols());
    if k > m {
        return None;
    }
    let mut q = CMat::zeros(k, m);
    let mut l = CMat::zeros(k, k);
    let mut v = vec![ZERO; m];
    for i in 0..k {
        v.copy_from_slice(a.row(i));
        let original = norm(&v);
        for _pass in 0..2 {
            for j in 0..i {
                let c = dot(q.row(j), &v);
                l[(i, j)] += c;
                for (vi, qj) in v.iter_mut().zip(q.row(j)) {
                    *vi -= c * qj;
                }
            }
        }
        let r = norm(&v);
        if !(r > 0.0) || r <= original * 1e-15 {
            return None;
        }
        l[(i, i)] = C64::new(r, 0.0);
        for (qi, vi) in q.row_mut(i).iter_mut().zip(&v) {
            *qi = vi / r;
        }
    }
    Some(Lq { l, q })
}

/// Inverse of a nonsingular lower-triangular matrix.
pub fn lower_triangular_inverse(l: &CMat) -> CMat {
    let n = l.rows();
    let mut inv = CMat::zeros(n, n);
    for c in 0..n {
        inv[(c, c)] = ONE / l[(c, c)];
        for r in c + 1..n {
            let mut s = ZERO;
            for j in c..r {
                s += l[(r, j)] * inv[(j, c)];
            }
            inv[(r, c)] = -s / l[(r, r)];
        }
    }
    inv
}

/// LU factorization with partial pivoting of a square matrix, stored in place.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMat,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(mut a: CMat) -> Option<Self> {
        let n = a.rows();
        assert_eq!(n, a.cols(), "LU needs a square matrix");
        let mut perm: Vec<usize> = (0..n).collect();
        for c in 0..n {
            let (p, best) = (c..n)
                .map(|r| (r, a[(r, c)].norm()))
                .fold((c, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(best > 0.0) {
                return None;
            }
            if p != c {
                perm.swap(p, c);
                for j in 0..n {
                    let t = a[(p, j)];
                    a[(p, j)] = a[(c, j)];
                    a[(c, j)] = t;
                }
            }
            let pivot = a[(c, c)];
            for r in c + 1..n {
                let f = a[(r, c)] / pivot;
                a[(r, c)] = f;
                if f == ZERO {
                    continue;
                }
                for j in c + 1..n {
                    let t = a[(c, j)];
                    a[(r, j)] -= f * t;
                }
            }
        }
        Some(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.rows();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for j in 0..r {
                let t = self.lu[(r, j)] * x[j];
                x[r] -= t;
            }
        }
        for r in (0..n).rev() {
            for j in r + 1..n {
                let t = self.lu[(r, j)] * x[j];
                x[r] -= t;
            }
            x[r] /= self.lu[(r, r)];
        }
        x
    }
}

/// Natural log of the determinant of a Hermitian positive definite matrix, via
/// Cholesky. `None` if the matrix is not numerically positive definite.
pub fn hermitian_logdet(a: &CMat) -> Option<f64> {
    let n = a.rows();
    let mut l = CMat::zeros(n, n);
    let mut logdet = 0.0;
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        logdet += 2.0 * djj.ln();
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(logdet)
}
