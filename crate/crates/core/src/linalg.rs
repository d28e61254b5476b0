//! Dense LU factorization with a reciprocal condition estimate.
//!
//! The factorization is computed once and reused for any number of
//! right-hand sides, against either `A` or `Aᵀ`.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;

use crate::error::{Error, Result};

/// Below this reciprocal condition estimate a solve is refused.
pub const RCOND_FLOOR: f64 = 1e-13;

pub struct Lu {
    factor: PartialPivLu<f64>,
    dim: usize,
    rcond: f64,
}

impl Lu {
    /// Factors `a` and estimates its reciprocal 1-norm condition number.
    /// `what` names the matrix in the error raised when it is too close to singular.
    pub fn new(a: &Mat<f64>, what: &'static str) -> Result<Self> {
        let lu = Self::new_unguarded(a, what)?;
        if !(lu.rcond >= RCOND_FLOOR) {
            return Err(Error::IllConditioned {
                what,
                rcond: lu.rcond,
            });
        }
        Ok(lu)
    }

    /// Like [`Lu::new`] but only reports the condition estimate. For systems
    /// whose small estimate comes from column scaling, which partial pivoting
    /// does not feel.
    pub fn new_unguarded(a: &Mat<f64>, what: &'static str) -> Result<Self> {
        let dim = a.nrows();
        if a.ncols() != dim {
            return Err(Error::DimensionMismatch {
                what: "LU factorization of a non-square matrix",
                expected: dim,
                actual: a.ncols(),
            });
        }
        if !a.as_ref().is_all_finite() {
            return Err(Error::NonFinite(what));
        }
        let factor = a.partial_piv_lu();
        let mut lu = Lu {
            factor,
            dim,
            rcond: 0.0,
        };
        let anorm = norm_one(a);
        let inv_norm = lu.estimate_inverse_norm_one();
        lu.rcond = if anorm == 0.0 || !inv_norm.is_finite() {
            0.0
        } else {
            1.0 / (anorm * inv_norm)
        };
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// Solves `A X = B`.
    pub fn solve(&self, rhs: &Mat<f64>) -> Mat<f64> {
        self.factor.solve(rhs)
    }

    /// Solves `Aᵀ X = B`.
    pub fn solve_transpose(&self, rhs: &Mat<f64>) -> Mat<f64> {
        self.factor.solve_transpose(rhs)
    }

    pub fn solve_vec(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = self.solve(&b);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }

    fn solve_vec_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = self.solve_transpose(&b);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Hager's estimator with Higham's alternating-sign safeguard.
    fn estimate_inverse_norm_one(&self) -> f64 {
        let n = self.dim;
        if n == 0 {
            return 0.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve_vec(&x);
            estimate = y.iter().map(|v| v.abs()).sum::<f64>();
            let signs: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_vec_transpose(&signs);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bj, bv), (i, v)| {
                    if v.abs() > bv {
                        (i, v.abs())
                    } else {
                        (bj, bv)
                    }
                });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x.iter_mut().for_each(|v| *v = 0.0);
            x[j] = 1.0;
        }
        let alt: Vec<f64> = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * (1.0 + i as f64 / (n.max(2) - 1) as f64)
            })
            .collect();
        let y = self.solve_vec(&alt);
        let alt_est = 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        estimate.max(alt_est)
    }
}

pub fn norm_one(a: &Mat<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm_inf(a: &Mat<f64>) -> f64 {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm_fro(a: &Mat<f64>) -> f64 {
    a.norm_l2()
}

pub fn mat_vec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.ncols(), x.len());
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

/// Copies the `rows × cols` block of `a` starting at `(r0, c0)`.
pub fn block(a: &Mat<f64>, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat<f64> {
    Mat::from_fn(rows, cols, |i, j| a[(r0 + i, c0 + j)])
}

/// Assembles `[[a, b], [c, d]]` from four equally sized square blocks.
pub fn from_blocks(a: &Mat<f64>, b: &Mat<f64>, c: &Mat<f64>, d: &Mat<f64>) -> Mat<f64> {
    let n = a.nrows();
    Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => a[(i, j)],
        (true, false) => b[(i, j - n)],
        (false, true) => c[(i - n, j)],
        (false, false) => d[(i - n, j - n)],
    })
}
