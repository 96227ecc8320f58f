use faer::Mat;
use rayon::prelude::*;

use super::{ratio, HittingProbabilities};
use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;
use crate::linalg::inverse_with_cond;

/// `M(j) = I - P + e_j e_j^T P`. Row `j` collapses to `e_j^T`.
pub(crate) fn m_of(p: &TransitionMatrix, j: usize) -> Mat<f64> {
    let pm = p.p();
    Mat::from_fn(p.n(), p.n(), |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        if r == j {
            id
        } else {
            id - pm[(r, c)]
        }
    })
}

/// Column `j` of `Q` from its own factorization of `M(j)`.
pub fn hitting_reference(p: &TransitionMatrix, j: usize) -> Result<Vec<f64>> {
    let n = p.n();
    if j >= n {
        return Err(Error::Domain(format!("state {j} out of range for {n} states")));
    }
    let (inv, _) = inverse_with_cond(m_of(p, j).as_ref(), &format!("M({j})"))?;
    Ok((0..n)
        .map(|i| if i == j { 0.0 } else { ratio(inv[(i, j)], inv[(i, i)]) })
        .collect())
}

/// Every column via [`hitting_reference`]. O(n^4); meant for validation.
pub fn hitting_reference_matrix(p: &TransitionMatrix) -> Result<HittingProbabilities> {
    let cols = (0..p.n())
        .into_par_iter()
        .map(|j| hitting_reference(p, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(HittingProbabilities::from_columns(cols, 0))
}
