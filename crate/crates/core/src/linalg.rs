//! Thin helpers over faer's dense kernels.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Col, Mat, MatRef};

use crate::error::{Error, Result};

/// 1-norm condition numbers above this are treated as singular.
pub const SINGULAR_COND: f64 = 1e15;

/// Maximum absolute column sum.
pub fn norm1(m: MatRef<'_, f64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(m: MatRef<'_, f64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].abs());
        }
    }
    best
}

/// Dense inverse by partial-pivot LU, with the exact 1-norm condition number.
pub fn inverse_with_cond(m: MatRef<'_, f64>, what: &str) -> Result<(Mat<f64>, f64)> {
    let inv = m.partial_piv_lu().inverse();
    let cond = norm1(m) * norm1(inv.as_ref());
    if !cond.is_finite() || cond > SINGULAR_COND {
        return Err(Error::Singular(format!("{what} (condition number {cond:e})")));
    }
    Ok((inv, cond))
}

/// Solves `m x = b` with one step of iterative refinement.
pub fn solve_refined(m: MatRef<'_, f64>, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let lu = m.partial_piv_lu();
    let rhs = Col::from_fn(n, |i| b[i]);
    let mut x = lu.solve(&rhs);
    let r = Col::from_fn(n, |i| {
        let mut acc = b[i];
        for j in 0..n {
            acc -= m[(i, j)] * x[j];
        }
        acc
    });
    let dx = lu.solve(&r);
    for i in 0..n {
        x[i] += dx[i];
    }
    (0..n).map(|i| x[i]).collect()
}

/// `max |m - m^T|`.
pub fn asymmetry(m: MatRef<'_, f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Nested row-major copy, mostly for tests and reports.
pub fn to_rows(m: MatRef<'_, f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
