//! One inverse, then O(n) per column.
//!
//! Write `M(j) = M(0) + U V^T` with `U = [e_j, -e_0]` and
//! `V^T = [e_j^T P; e_0^T P]`. With `B = M(0)^{-1}` and `r = e_0^T P B`,
//! Woodbury gives
//!
//! ```text
//! M(j)^{-1} = B - [B e_j, -B e_0] K^{-1} [e_j^T P B; r],   K = I_2 + V^T B U.
//! ```
//!
//! Since `P = I + e_0 e_0^T P - M(0)`, for `j != 0` the row `e_j^T P B`
//! equals `e_j^T B - e_j^T`, so the 2x2 capacitance `K` reads four entries
//! of `B` and `r`, and each needed entry of `M(j)^{-1}` costs O(1).

use rayon::prelude::*;

use super::reference::{hitting_reference, m_of};
use super::{ratio, HittingProbabilities};
use crate::error::Result;
use crate::graph::TransitionMatrix;
use crate::linalg::inverse_with_cond;

/// Above this condition number of `M(0)`, every column is solved directly.
pub const FAST_PATH_COND_LIMIT: f64 = 1e12;

/// `|det K|` below this (relative to `K`'s scale) triggers a per-column fallback.
const CAPACITANCE_TOL: f64 = 1e-12;

enum Column {
    Fast(Vec<f64>),
    Fallback(Vec<f64>),
}

/// Full `Q` in O(n^3). Columns are independent once `B` is known and are
/// computed in parallel; the result does not depend on the thread count.
pub fn hitting_fast(p: &TransitionMatrix) -> Result<HittingProbabilities> {
    let n = p.n();
    let (b, cond) = inverse_with_cond(m_of(p, 0).as_ref(), "M(0)")?;
    if cond > FAST_PATH_COND_LIMIT {
        let cols = (0..n)
            .into_par_iter()
            .map(|j| hitting_reference(p, j))
            .collect::<Result<Vec<_>>>()?;
        return Ok(HittingProbabilities::from_columns(cols, n));
    }

    let pm = p.p();
    // r = e_0^T P B
    let r: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|m| pm[(0, m)] * b[(m, k)]).sum())
        .collect();

    let col0: Vec<f64> = (0..n)
        .map(|i| if i == 0 { 0.0 } else { ratio(b[(i, 0)], b[(i, i)]) })
        .collect();

    let rest = (1..n)
        .into_par_iter()
        .map(|j| -> Result<Column> {
            // K = I + V^T B U = I + [[s_j, -s_0], [r_j, -r_0]] with s = e_j^T B - e_j^T
            let k11 = b[(j, j)];
            let k12 = -b[(j, 0)];
            let k21 = r[j];
            let k22 = 1.0 - r[0];
            let det = k11 * k22 - k12 * k21;
            let scale = k11.abs().max(k12.abs()).max(k21.abs()).max(k22.abs()).max(1.0);
            if !det.is_finite() || det.abs() <= CAPACITANCE_TOL * scale * scale {
                return Ok(Column::Fallback(hitting_reference(p, j)?));
            }
            let (i11, i12, i21, i22) = (k22 / det, -k12 / det, -k21 / det, k11 / det);

            // Entry (i, c) of M(j)^{-1} for c in {i, j}:
            //   B_ic - [B_ij, -B_i0] K^{-1} [s_c; r_c]
            let entry = |i: usize, c: usize, s_c: f64| -> f64 {
                let y1 = i11 * s_c + i12 * r[c];
                let y2 = i21 * s_c + i22 * r[c];
                b[(i, c)] - (b[(i, j)] * y1 - b[(i, 0)] * y2)
            };
            let s_j = b[(j, j)] - 1.0;
            let col = (0..n)
                .map(|i| {
                    if i == j {
                        return 0.0;
                    }
                    let num = entry(i, j, s_j);
                    let den = entry(i, i, b[(j, i)]);
                    ratio(num, den)
                })
                .collect();
            Ok(Column::Fast(col))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut fallback = 0;
    let mut cols = Vec::with_capacity(n);
    cols.push(col0);
    for c in rest {
        cols.push(match c {
            Column::Fast(v) => v,
            Column::Fallback(v) => {
                fallback += 1;
                v
            }
        });
    }
    Ok(HittingProbabilities::from_columns(cols, fallback))
}
