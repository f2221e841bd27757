//! Dense matrices, compressed-row products and an LU solver.
//!
//! Grids here stay in the hundreds of nodes, so operators are assembled
//! densely and then compressed: finite-difference operators and their LU
//! factors are banded and the compressed form makes the per-step work linear
//! in the grid size, while RBF operators stay effectively dense.

use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("singular matrix: pivot {pivot:e} at column {column} (pivot ratio {ratio:e})")]
    Singular { column: usize, pivot: f64, ratio: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows).map(|i| self.row(i).iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b)).collect()
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: T, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + s * b).collect(),
        }
    }

    /// Every row satisfies `|a_ii| > Σ_{j≠i} |a_ij|`.
    pub fn is_strictly_diagonally_dominant(&self) -> bool {
        (0..self.rows).all(|i| {
            let off =
                self.row(i).iter().enumerate().filter(|&(j, _)| j != i).fold(T::zero(), |acc, (_, &a)| acc + a.abs());
            self[(i, i)].abs() > off
        })
    }

    pub fn to_sparse(&self) -> SparseMatrix<T> {
        SparseMatrix::from_dense(self)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Compressed sparse row matrix; exact zeros are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn from_dense(m: &Matrix<T>) -> Self {
        let mut row_ptr = Vec::with_capacity(m.rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..m.rows {
            for (j, &a) in m.row(i).iter().enumerate() {
                if a != T::zero() {
                    col_idx.push(j);
                    values.push(a);
                }
            }
            row_ptr.push(values.len());
        }
        Self { rows: m.rows, cols: m.cols, row_ptr, col_idx, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_dot(&self, i: usize, x: &[T]) -> T {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi].iter().zip(&self.values[lo..hi]).fold(T::zero(), |acc, (&j, &a)| acc + a * x[j])
    }

    pub fn mul_vec_into(&self, x: &[T], out: &mut [T]) {
        assert_eq!(x.len(), self.cols, "sparse product dimension mismatch");
        assert_eq!(out.len(), self.rows, "sparse product output mismatch");
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row_dot(i, x);
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }
}

/// `P·A = L·U` with partial pivoting; `L` has an implicit unit diagonal.
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    n: usize,
    perm: Vec<usize>,
    lower: SparseMatrix<T>,
    upper: SparseMatrix<T>,
    diag: Vec<T>,
}

impl<T: Scalar> LuFactors<T> {
    pub fn factor(a: &Matrix<T>) -> Result<Self, LinalgError> {
        if a.rows != a.cols {
            return Err(LinalgError::Dimension { expected: a.rows, got: a.cols });
        }
        let n = a.rows;
        let mut m = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = m.data.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
        let tiny = T::epsilon() * T::from_count(n.max(1)) * scale;
        let (mut max_pivot, mut min_pivot) = (T::zero(), T::infinity());

        for k in 0..n {
            let (p, pivot_abs) =
                (k..n)
                    .map(|i| (i, m[(i, k)].abs()))
                    .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            max_pivot = max_pivot.max(pivot_abs);
            min_pivot = min_pivot.min(pivot_abs);
            if !(pivot_abs > tiny) {
                let ratio = if pivot_abs > T::zero() { max_pivot / pivot_abs } else { T::infinity() };
                return Err(LinalgError::Singular {
                    column: k,
                    pivot: pivot_abs.to_f64().unwrap_or(f64::NAN),
                    ratio: ratio.to_f64().unwrap_or(f64::INFINITY),
                });
            }
            if p != k {
                for j in 0..n {
                    m.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = m[(k, k)];
            for i in k + 1..n {
                let factor = m[(i, k)] / pivot;
                if factor == T::zero() {
                    continue;
                }
                m[(i, k)] = factor;
                for j in k + 1..n {
                    let u = m[(k, j)];
                    if u != T::zero() {
                        m[(i, j)] = m[(i, j)] - factor * u;
                    }
                }
            }
        }

        let lower = Matrix::from_fn(n, n, |i, j| if j < i { m[(i, j)] } else { T::zero() });
        let upper = Matrix::from_fn(n, n, |i, j| if j > i { m[(i, j)] } else { T::zero() });
        let diag = (0..n).map(|i| m[(i, i)]).collect();
        Ok(Self { n, perm, lower: lower.to_sparse(), upper: upper.to_sparse(), diag })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Ratio of the largest to the smallest pivot magnitude, a cheap
    /// lower-bound proxy for the condition number.
    pub fn pivot_ratio(&self) -> T {
        let (lo, hi) =
            self.diag.iter().fold((T::infinity(), T::zero()), |(lo, hi), &d| (lo.min(d.abs()), hi.max(d.abs())));
        hi / lo
    }

    pub fn solve_into(&self, b: &[T], x: &mut [T]) {
        assert_eq!(b.len(), self.n, "rhs dimension mismatch");
        assert_eq!(x.len(), self.n, "solution dimension mismatch");
        for (xi, &p) in x.iter_mut().zip(&self.perm) {
            *xi = b[p];
        }
        for i in 0..self.n {
            let s = self.lower.row_dot(i, x);
            x[i] = x[i] - s;
        }
        for i in (0..self.n).rev() {
            let s = self.upper.row_dot(i, x);
            x[i] = (x[i] - s) / self.diag[i];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = vec![T::zero(); self.n];
        self.solve_into(b, &mut x);
        x
    }
}
