//! Small dense linear algebra: pivoted elimination and power iteration.
//!
//! Matrices are square, row-major and at most [`MAX_ORDER`] wide. Every
//! solve in the crate goes through [`solve_linear`], so the singularity
//! threshold is uniform.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

/// Largest supported matrix order.
pub const MAX_ORDER: usize = 16;

/// Relative pivot threshold below which a system is reported singular.
pub const SINGULAR_RTOL: f64 = 1e-13;

const POWER_MAX_ITER: usize = 100_000;
const POWER_LAMBDA_RTOL: f64 = 1e-14;
const POWER_RESIDUAL: f64 = 1e-12;

/// Errors raised by the kernel.
#[derive(Clone, Debug, PartialEq)]
pub enum LinalgError {
    /// Pivot magnitude fell below `SINGULAR_RTOL * ||A||_inf` at this column.
    Singular { pivot: usize },
    /// Power iteration did not settle; carries the last eigenvalue estimate.
    NoConvergence { eigenvalue: f64, iterations: usize },
    /// Right-hand side or matrix shape does not match.
    Dimension { expected: usize, found: usize },
    /// A non-finite entry was supplied.
    NonFinite,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::Singular { pivot } => {
                write!(f, "matrix is singular to working precision at pivot {pivot}")
            }
            LinalgError::NoConvergence { eigenvalue, iterations } => write!(
                f,
                "power iteration did not converge after {iterations} iterations (last estimate {eigenvalue})"
            ),
            LinalgError::Dimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            LinalgError::NonFinite => f.write_str("non-finite matrix entry"),
        }
    }
}

impl core::error::Error for LinalgError {}

/// Square row-major matrix of order `n <= MAX_ORDER`.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Zero matrix of order `n`.
    pub fn zeros(n: usize) -> Self {
        assert!(n <= MAX_ORDER, "matrix order {n} exceeds {MAX_ORDER}");
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from rows; every row must have `rows.len()` entries.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if n > MAX_ORDER {
            return Err(LinalgError::Dimension { expected: MAX_ORDER, found: n });
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(LinalgError::Dimension { expected: n, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        (0..self.n).map(|i| self[(i, j)]).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        Matrix::from_fn(self.n, |i, j| (0..self.n).map(|k| self[(i, k)] * other[(k, j)]).sum())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self[(j, i)])
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

fn norm_inf_vec(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = a.order();
    if b.len() != n {
        return Err(LinalgError::Dimension { expected: n, found: b.len() });
    }
    if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let threshold = SINGULAR_RTOL * a.norm_inf();
    let mut m = a.data.clone();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs()))
            .unwrap_or(k);
        if !(m[p * n + k].abs() >= threshold) || m[p * n + k] == 0.0 {
            return Err(LinalgError::Singular { pivot: k });
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            rhs.swap(k, p);
        }
        let pivot = m[k * n + k];
        for i in k + 1..n {
            let factor = m[i * n + k] / pivot;
            if factor == 0.0 {
                continue;
            }
            m[i * n + k] = 0.0;
            for j in k + 1..n {
                m[i * n + j] -= factor * m[k * n + j];
            }
            rhs[i] -= factor * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i * n + j] * x[j]).sum();
        x[i] = (rhs[i] - s) / m[i * n + i];
    }
    Ok(x)
}

/// Determinant by the same pivoted elimination; exact zero pivots give 0.
pub fn determinant(a: &Matrix) -> f64 {
    let n = a.order();
    let mut m = a.data.clone();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs()))
            .unwrap_or(k);
        if m[p * n + k] == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = m[k * n + k];
        det *= pivot;
        for i in k + 1..n {
            let factor = m[i * n + k] / pivot;
            for j in k + 1..n {
                m[i * n + j] -= factor * m[k * n + j];
            }
        }
    }
    det
}

/// Perron pair of a nonnegative matrix by power iteration from the all-ones vector.
///
/// The returned vector has unit Euclidean norm and a positive first component.
pub fn dominant_eigenpair(a: &Matrix) -> Result<(f64, Vec<f64>), LinalgError> {
    let n = a.order();
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if n == 0 {
        return Err(LinalgError::Dimension { expected: 1, found: 0 });
    }
    let mut x = vec![1.0 / libm::sqrt(n as f64); n];
    let mut lambda = 0.0;
    for it in 1..=POWER_MAX_ITER {
        let mut y = a.mul_vec(&x);
        let norm = libm::sqrt(y.iter().map(|v| v * v).sum());
        if norm == 0.0 || !norm.is_finite() {
            return Err(LinalgError::NoConvergence { eigenvalue: norm, iterations: it });
        }
        y.iter_mut().for_each(|v| *v /= norm);
        let step = x.iter().zip(&y).fold(0.0, |m, (p, q)| f64::max(m, (p - q).abs()));
        let settled = (norm - lambda).abs() <= POWER_LAMBDA_RTOL * norm && step <= 1e-13;
        lambda = norm;
        x = y;
        if settled {
            break;
        }
        if it == POWER_MAX_ITER {
            return Err(LinalgError::NoConvergence { eigenvalue: lambda, iterations: it });
        }
    }
    if x[0] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let ax = a.mul_vec(&x);
    let residual = norm_inf_vec(&ax.iter().zip(&x).map(|(p, q)| p - lambda * q).collect::<Vec<_>>());
    if residual > POWER_RESIDUAL * f64::max(1.0, lambda) {
        return Err(LinalgError::NoConvergence { eigenvalue: lambda, iterations: POWER_MAX_ITER });
    }
    Ok((lambda, x))
}
