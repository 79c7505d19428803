//! Tridiagonal systems (Thomas algorithm).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row `i` reads `lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1]`;
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<S> {
    pub lower: Vec<S>,
    pub diag: Vec<S>,
    pub upper: Vec<S>,
}

impl<S: Real> Tridiagonal<S> {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![S::zero(); n],
            diag: vec![S::zero(); n],
            upper: vec![S::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Makes row `i` the identity row `x[i] = rhs[i]`.
    pub fn pin(&mut self, i: usize) {
        self.lower[i] = S::zero();
        self.diag[i] = S::one();
        self.upper[i] = S::zero();
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.upper[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Overwrites `rhs` with the solution. `work` must have length `n`.
    pub fn solve_in_place(&self, rhs: &mut [S], work: &mut [S]) -> Result<()> {
        let n = self.len();
        debug_assert!(rhs.len() == n && work.len() == n);
        let mut beta = self.diag[0];
        if beta == S::zero() {
            return Err(Error::Solver("zero pivot in tridiagonal solve".into()));
        }
        rhs[0] /= beta;
        for i in 1..n {
            work[i] = self.upper[i - 1] / beta;
            beta = self.diag[i] - self.lower[i] * work[i];
            if beta == S::zero() || !beta.is_finite() {
                return Err(Error::Solver(format!(
                    "zero pivot in tridiagonal solve at row {i}"
                )));
            }
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] -= work[i + 1] * next;
        }
        Ok(())
    }

    pub fn solve(&self, rhs: &[S]) -> Result<Vec<S>> {
        let mut x = rhs.to_vec();
        let mut work = vec![S::zero(); self.len()];
        self.solve_in_place(&mut x, &mut work)?;
        Ok(x)
    }

    /// Solves with the transposed matrix.
    pub fn solve_transpose(&self, rhs: &[S]) -> Result<Vec<S>> {
        let n = self.len();
        let mut t = Self::zeros(n);
        for i in 0..n {
            t.diag[i] = self.diag[i];
            if i + 1 < n {
                // (A^T)[i][i+1] = A[i+1][i]
                t.upper[i] = self.lower[i + 1];
                t.lower[i + 1] = self.upper[i];
            }
        }
        t.solve(rhs)
    }
}

/// LU factors of a tridiagonal matrix, for repeated solves with one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredTridiagonal<S> {
    lower: Vec<S>,
    inv_pivot: Vec<S>,
    ratio: Vec<S>,
}

impl<S: Real> FactoredTridiagonal<S> {
    pub fn new(a: &Tridiagonal<S>) -> Result<Self> {
        let n = a.len();
        let mut inv_pivot = vec![S::zero(); n];
        let mut ratio = vec![S::zero(); n];
        let mut beta = a.diag[0];
        for i in 0..n {
            if i > 0 {
                ratio[i] = a.upper[i - 1] * inv_pivot[i - 1];
                beta = a.diag[i] - a.lower[i] * ratio[i];
            }
            if beta == S::zero() || !beta.is_finite() {
                return Err(Error::Solver(format!(
                    "zero pivot in tridiagonal factorization at row {i}"
                )));
            }
            inv_pivot[i] = S::one() / beta;
        }
        Ok(Self {
            lower: a.lower.clone(),
            inv_pivot,
            ratio,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    pub fn solve_in_place(&self, rhs: &mut [S]) {
        let n = self.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] -= self.ratio[i + 1] * next;
        }
    }
}
