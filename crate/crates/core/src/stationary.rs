//! Invariant distribution of an irreducible chain.
//!
//! Solved directly from `(P^T - I) phi = 0` with the last balance equation
//! replaced by `sum(phi) = 1`. A direct solve does not care whether the chain
//! is periodic, which power iteration would.

use faer::Mat;

use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;
use crate::linalg::solve_refined;

/// Maximum allowed `|P^T phi - phi|_inf`.
pub const BALANCE_TOL: f64 = 1e-10;
/// Round-off negatives at most this large are clamped; larger ones fail.
pub const NEGATIVE_CLAMP: f64 = 1e-13;

/// A strictly positive probability vector with `P^T phi = phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    phi: Vec<f64>,
}

impl StationaryDistribution {
    /// Wraps a vector that is already known to be stationary (e.g. an
    /// analytic value). Only positivity and normalization are checked.
    pub fn from_vec(phi: Vec<f64>) -> Result<Self> {
        if phi.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain("stationary weights must be positive".into()));
        }
        let total: f64 = phi.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("stationary weights sum to {total}")));
        }
        Ok(Self { phi })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phi
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.phi
    }
}

impl std::ops::Index<usize> for StationaryDistribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.phi[i]
    }
}

/// `max_j |(P^T phi)_j - phi_j|`.
pub fn balance_residual(p: &TransitionMatrix, phi: &[f64]) -> f64 {
    let n = p.n();
    let pm = p.p();
    (0..n)
        .map(|j| {
            let flow: f64 = (0..n).map(|i| pm[(i, j)] * phi[i]).sum();
            (flow - phi[j]).abs()
        })
        .fold(0.0, f64::max)
}

pub fn stationary_distribution(p: &TransitionMatrix) -> Result<StationaryDistribution> {
    let n = p.n();
    let pm = p.p();
    let a = Mat::from_fn(n, n, |r, c| {
        if r == n - 1 {
            1.0
        } else {
            pm[(c, r)] - if r == c { 1.0 } else { 0.0 }
        }
    });
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let mut phi = solve_refined(a.as_ref(), &b);

    if let Some(bad) = phi.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            what: format!("stationary solve produced a non-finite weight at state {bad}"),
            residual: f64::INFINITY,
        });
    }
    for (i, v) in phi.iter_mut().enumerate() {
        if *v <= 0.0 {
            if *v < -NEGATIVE_CLAMP {
                return Err(Error::Numerical {
                    what: format!("stationary weight of state {i} is negative"),
                    residual: *v,
                });
            }
            *v = 1e-300;
        }
    }
    let total: f64 = phi.iter().sum();
    phi.iter_mut().for_each(|v| *v /= total);

    let residual = balance_residual(p, &phi);
    if residual > BALANCE_TOL {
        return Err(Error::Numerical {
            what: "stationary distribution does not balance".into(),
            residual,
        });
    }
    Ok(StationaryDistribution { phi })
}
