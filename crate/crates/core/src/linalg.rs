//! Fixed-capacity vectors and matrices for the ambient spaces R^2 and R^3.
//!
//! Everything in this crate lives in dimension at most three, so the
//! containers are stack arrays with a runtime dimension tag. Operations
//! between values of different dimension are programming errors and panic
//! in debug builds.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::Real;

pub const MAX_DIM: usize = 3;

#[derive(Clone, Copy, PartialEq)]
pub struct Vector<T> {
    data: [T; MAX_DIM],
    dim: usize,
}

impl<T: Real> Vector<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        Self { data: [T::zero(); MAX_DIM], dim }
    }

    pub fn from_slice(values: &[T]) -> Self {
        let mut v = Self::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        v
    }

    pub fn from_f64(values: &[f64]) -> Self {
        let mut v = Self::zeros(values.len());
        for (dst, &src) in v.data.iter_mut().zip(values) {
            *dst = T::lit(src);
        }
        v
    }

    /// The k-th standard basis vector.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = T::one();
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data[..self.dim]
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.as_slice().iter().map(|x| x.to_f64_lossy()).collect()
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = T::zero();
        for i in 0..self.dim {
            acc = acc + self.data[i] * other.data[i];
        }
        acc
    }

    #[inline]
    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(*self * (T::one() / n))
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    pub fn outer(&self, other: &Self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] = self.data[i] * other.data[j];
            }
        }
        m
    }

    /// Cross product; only meaningful in R^3.
    pub fn cross(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, 3);
        let (a, b) = (&self.data, &other.data);
        Self {
            data: [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ],
            dim: 3,
        }
    }

    pub fn distance(&self, other: &Self) -> T {
        (*self - *other).norm()
    }

    pub fn max_abs(&self) -> T {
        self.as_slice().iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn cast<U: Real>(&self) -> Vector<U> {
        let mut v = Vector::zeros(self.dim);
        for i in 0..self.dim {
            v.data[i] = U::lit(self.data[i].to_f64_lossy());
        }
        v
    }
}

impl<T: fmt::Debug> fmt::Debug for Vector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.data[..self.dim]).finish()
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        debug_assert!(i < self.dim);
        &self.data[i]
    }
}

impl<T> IndexMut<usize> for Vector<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        debug_assert!(i < self.dim);
        &mut self.data[i]
    }
}

impl<T: Real> Add for Vector<T> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            self.data[i] = self.data[i] + rhs.data[i];
        }
        self
    }
}

impl<T: Real> AddAssign for Vector<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real> Sub for Vector<T> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            self.data[i] = self.data[i] - rhs.data[i];
        }
        self
    }
}

impl<T: Real> SubAssign for Vector<T> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Real> Neg for Vector<T> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        for i in 0..self.dim {
            self.data[i] = -self.data[i];
        }
        self
    }
}

impl<T: Real> Mul<T> for Vector<T> {
    type Output = Self;
    #[inline]
    fn mul(mut self, s: T) -> Self {
        for i in 0..self.dim {
            self.data[i] = self.data[i] * s;
        }
        self
    }
}

/// Square matrix of the same dimension as the vectors it acts on.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix<T> {
    data: [[T; MAX_DIM]; MAX_DIM],
    dim: usize,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        Self { data: [[T::zero(); MAX_DIM]; MAX_DIM], dim }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i][i] = T::one();
        }
        m
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(cols: &[Vector<T>]) -> Self {
        let dim = cols[0].dim();
        let mut m = Self::zeros(dim);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..dim {
                m.data[i][j] = c[i];
            }
        }
        m
    }

    pub fn from_rows_f64(rows: &[&[f64]]) -> Self {
        let mut m = Self::zeros(rows.len());
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                m.data[i][j] = T::lit(x);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, j: usize) -> Vector<T> {
        let mut v = Vector::zeros(self.dim);
        for i in 0..self.dim {
            v[i] = self.data[i][j];
        }
        v
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] = self.data[j][i];
            }
        }
        m
    }

    #[inline]
    pub fn mul_vec(&self, v: &Vector<T>) -> Vector<T> {
        debug_assert_eq!(self.dim, v.dim());
        let mut out = Vector::zeros(self.dim);
        for i in 0..self.dim {
            let mut acc = T::zero();
            for j in 0..self.dim {
                acc = acc + self.data[i][j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn scale(mut self, s: T) -> Self {
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i][j] = self.data[i][j] * s;
            }
        }
        self
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.data[i][i]).sum()
    }

    pub fn determinant(&self) -> T {
        let a = &self.data;
        match self.dim {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    pub fn frobenius_norm(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc = acc + self.data[i][j] * self.data[i][j];
            }
        }
        acc.sqrt()
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max(self.data[i][j].abs());
            }
        }
        m
    }

    /// Solves `self * x = b` by Gaussian elimination with partial pivoting.
    /// Returns `None` when a pivot underflows.
    pub fn solve(&self, b: &Vector<T>) -> Option<Vector<T>> {
        let n = self.dim;
        let mut a = self.data;
        let mut rhs = *b;
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[r][col].abs() > a[piv][col].abs() {
                    piv = r;
                }
            }
            if a[piv][col].abs() <= T::min_positive_value().sqrt() {
                return None;
            }
            a.swap(col, piv);
            let tmp = rhs[col];
            rhs[col] = rhs[piv];
            rhs[piv] = tmp;
            for r in col + 1..n {
                let factor = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] = a[r][c] - factor * a[col][c];
                }
                rhs[r] = rhs[r] - factor * rhs[col];
            }
        }
        let mut x = Vector::zeros(n);
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for j in i + 1..n {
                acc = acc - a[i][j] * x[j];
            }
            x[i] = acc / a[i][i];
        }
        x.is_finite().then_some(x)
    }

    /// Matrix product `self * other` column by column, so `solve` can be reused
    /// for `self^{-1} * other`.
    pub fn solve_matrix(&self, other: &Self) -> Option<Self> {
        let cols: Option<Vec<_>> = (0..self.dim).map(|j| self.solve(&other.column(j))).collect();
        cols.map(|c| Self::from_columns(&c))
    }

    /// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
    pub fn symmetric_eigenvalues(&self) -> Vec<T> {
        let n = self.dim;
        let mut a = self.data;
        for _sweep in 0..64 {
            let mut off = T::zero();
            for i in 0..n {
                for j in i + 1..n {
                    off = off + a[i][j] * a[i][j];
                }
            }
            if off <= T::epsilon() * T::epsilon() * T::lit(1e-4) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q] == T::zero() {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (T::two() * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<T> = (0..n).map(|i| a[i][i]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        eig
    }

    /// Singular values in ascending order.
    pub fn singular_values(&self) -> Vec<T> {
        (self.transpose() * *self)
            .symmetric_eigenvalues()
            .into_iter()
            .map(|l| l.max(T::zero()).sqrt())
            .collect()
    }

    /// Spectral (operator) norm.
    pub fn operator_norm(&self) -> T {
        self.singular_values().last().copied().unwrap_or_else(T::zero)
    }

    pub fn symmetrized(&self) -> Self {
        (*self + self.transpose()).scale(T::half())
    }

    pub fn cast<U: Real>(&self) -> Matrix<U> {
        let mut m = Matrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] = U::lit(self.data[i][j].to_f64_lossy());
            }
        }
        m
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = (0..self.dim).map(|i| &self.data[i][..self.dim]).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i][j]
    }
}

impl<T: Real> Add for Matrix<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i][j] = self.data[i][j] + rhs.data[i][j];
            }
        }
        self
    }
}

impl<T: Real> Sub for Matrix<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i][j] = self.data[i][j] - rhs.data[i][j];
            }
        }
        self
    }
}

impl<T: Real> Mul for Matrix<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut acc = T::zero();
                for k in 0..self.dim {
                    acc = acc + self.data[i][k] * rhs.data[k][j];
                }
                out.data[i][j] = acc;
            }
        }
        out
    }
}

/// Orthonormal basis of the orthogonal complement of the unit vector `u`,
/// oriented so that `(u, e_1, ..., e_{d-1})` is positively oriented.
pub fn complement_frame<T: Real>(u: &Vector<T>) -> Vec<Vector<T>> {
    match u.dim() {
        2 => vec![Vector::from_slice(&[-u[1], u[0]])],
        3 => {
            // Pick the axis least aligned with u to seed Gram-Schmidt.
            let mut k = 0;
            for i in 1..3 {
                if u[i].abs() < u[k].abs() {
                    k = i;
                }
            }
            let seed = Vector::basis(3, k);
            let e1 = (seed - *u * u.dot(&seed)).normalized().expect("seed independent of u");
            let e2 = u.cross(&e1);
            vec![e1, e2]
        }
        d => panic!("no tangent frame in dimension {d}"),
    }
}

/// Gram-Schmidt on the columns of `m`; the result is orthogonal with the
/// sign of the last column chosen so the determinant is +1.
pub fn orthonormalize<T: Real>(m: &Matrix<T>) -> Option<Matrix<T>> {
    let dim = m.dim();
    let mut cols: Vec<Vector<T>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut c = m.column(j);
        for prev in &cols {
            c = c - *prev * prev.dot(&c);
        }
        cols.push(c.normalized()?);
    }
    let mut q = Matrix::from_columns(&cols);
    if q.determinant() < T::zero() {
        let last = -cols[dim - 1];
        cols[dim - 1] = last;
        q = Matrix::from_columns(&cols);
    }
    Some(q)
}
