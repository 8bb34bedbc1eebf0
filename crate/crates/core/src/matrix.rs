//! Small dense row-major matrices over a [`Scalar`].

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{Precision, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize, prec: Precision) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(prec); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: Precision) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)] = T::one(prec);
        }
        m
    }

    pub fn diagonal(d: &[T]) -> Self {
        let n = d.len();
        let prec = d.first().map(|x| x.precision()).unwrap_or(Precision::F64);
        let mut m = Self::zeros(n, n, prec);
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows)
            .map(|i| {
                let mut acc = self.data[i * self.cols].clone();
                for v in &self.row(i)[1..] {
                    acc += v;
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let mut acc = T::zero(row[0].precision());
                for (a, v) in row.iter().zip(x) {
                    if !a.is_zero() {
                        acc.mul_add_assign(a, v);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Self {
        assert_eq!(self.cols, other.rows);
        let prec = self.precision();
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = T::zero(prec);
            for k in 0..self.cols {
                acc.mul_add_assign(&self[(i, k)], &other[(k, j)]);
            }
            acc
        })
    }

    pub fn sub(&self, other: &Matrix<T>) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.clone() * s).collect(),
        }
    }

    pub fn precision(&self) -> Precision {
        self.data.first().map(|x| x.precision()).unwrap_or(Precision::F64)
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)].is_zero()))
    }

    /// First strictly-upper nonzero entry, if any.
    pub fn first_upper_nonzero(&self) -> Option<(usize, usize)> {
        (0..self.rows)
            .flat_map(|i| (i + 1..self.cols).map(move |j| (i, j)))
            .find(|&(i, j)| !self[(i, j)].is_zero())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        let mut m = T::zero(self.precision());
        for v in &self.data {
            let a = v.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_f64())
    }

    pub fn convert<U: Scalar>(&self, prec: Precision) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|v| convert_scalar::<T, U>(v, prec))
                .collect(),
        }
    }
}

impl Matrix<f64> {
    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// Converts between scalar types through the decimal representation, so that
/// widening a [`crate::Real`] to another `Real` keeps every digit.
pub fn convert_scalar<T: Scalar, U: Scalar>(v: &T, prec: Precision) -> U {
    if T::from_f64(0.0, prec).precision() == Precision::F64 {
        return U::from_f64(v.to_f64(), prec);
    }
    U::parse_decimal(&v.to_full_string(), prec).unwrap_or_else(|_| U::from_f64(v.to_f64(), prec))
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

/// Solves `L x = rhs` for a lower-triangular `L` by forward substitution.
pub fn solve_lower<T: Scalar>(l: &Matrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    let n = l.rows();
    let mut x: Vec<T> = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = rhs[i].clone();
        for (j, xj) in x.iter().enumerate() {
            let a = &l[(i, j)];
            if !a.is_zero() {
                acc -= a.clone() * xj;
            }
        }
        let d = &l[(i, i)];
        if d.is_zero() {
            return Err(Error::Singular(format!("zero pivot in row {i}")));
        }
        x.push(acc / d);
    }
    Ok(x)
}

/// Doolittle factorization `M = L U` with unit-diagonal `L`, no pivoting.
pub fn lu_doolittle<T: Scalar>(m: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let n = m.rows();
    let prec = m.precision();
    let mut l: Matrix<T> = Matrix::identity(n, prec);
    let mut u: Matrix<T> = Matrix::zeros(n, n, prec);
    for i in 0..n {
        for k in i..n {
            let mut acc = m[(i, k)].clone();
            for j in 0..i {
                acc -= l[(i, j)].clone() * &u[(j, k)];
            }
            u[(i, k)] = acc;
        }
        if u[(i, i)].is_zero() {
            return Err(Error::Singular(format!("zero pivot {i} in LU factorization")));
        }
        for k in i + 1..n {
            let mut acc = m[(k, i)].clone();
            for j in 0..i {
                acc -= l[(k, j)].clone() * &u[(j, i)];
            }
            l[(k, i)] = acc / &u[(i, i)];
        }
    }
    Ok((l, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_reconstructs() {
        let m = Matrix::from_rows(vec![
            vec![4.0, 3.0, 1.0],
            vec![6.0, 3.0, 2.0],
            vec![2.0, 5.0, 7.0],
        ])
        .unwrap();
        let (l, u) = lu_doolittle(&m).unwrap();
        assert!(l.diag().iter().all(|&d| d == 1.0));
        let back = l.matmul(&u);
        assert!(back.sub(&m).max_abs() < 1e-12);
    }

    #[test]
    fn forward_substitution() {
        let l = Matrix::from_rows(vec![vec![2.0, 0.0], vec![1.0, 4.0]]).unwrap();
        let x = solve_lower(&l, &[2.0, 9.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
        let sing = Matrix::from_rows(vec![vec![0.0, 0.0], vec![1.0, 4.0]]).unwrap();
        assert!(solve_lower(&sing, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Matrix::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
