//! Small dense matrices and an LU solve with partial pivoting.

use crate::scalar::Scalar;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![S::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> S {
        self.data[row * self.n + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: S) {
        self.data[row * self.n + col] = v;
    }

    /// Returns `self + factor * other`.
    pub fn add_scaled(&self, factor: S, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + factor * b)
                .collect(),
        }
    }

    /// Solves `self * x = rhs`. Returns `None` if a pivot vanishes or the
    /// result is not finite.
    pub fn solve(&self, rhs: &[S]) -> Option<Vec<S>> {
        let n = self.n;
        assert_eq!(rhs.len(), n, "right-hand side length mismatch");
        let mut a = self.data.clone();
        let mut x = rhs.to_vec();

        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&i, &j| {
                    a[i * n + col]
                        .abs()
                        .partial_cmp(&a[j * n + col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("non-empty range");
            let pivot = a[pivot_row * n + col];
            if pivot == S::zero() || !pivot.is_finite() {
                return None;
            }
            if pivot_row != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot_row * n + k);
                }
                x.swap(col, pivot_row);
            }
            for row in col + 1..n {
                let factor = a[row * n + col] / pivot;
                if factor == S::zero() {
                    continue;
                }
                for k in col..n {
                    a[row * n + k] = a[row * n + k] - factor * a[col * n + k];
                }
                x[row] = x[row] - factor * x[col];
            }
        }

        for row in (0..n).rev() {
            let mut acc = x[row];
            for k in row + 1..n {
                acc = acc - a[row * n + k] * x[k];
            }
            x[row] = acc / a[row * n + row];
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}
