use faer::{Mat, MatRef};
use serde::Serialize;

use crate::error::{Error, Result};

/// Principal-component coordinates of the rows of a matrix.
#[derive(Debug, Clone)]
pub struct Embedding {
    /// `n x dims`.
    pub coords: Mat<f64>,
    /// Share of total variance carried by each returned component.
    pub explained: Vec<f64>,
    /// Set when fewer than `dims` components carry any variance.
    pub rank_deficient: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingSummary {
    pub dims: usize,
    pub explained: Vec<f64>,
    pub rank_deficient: bool,
}

impl Embedding {
    pub fn summary(&self) -> EmbeddingSummary {
        EmbeddingSummary {
            dims: self.coords.ncols(),
            explained: self.explained.clone(),
            rank_deficient: self.rank_deficient,
        }
    }
}

/// PCA with rows as observations: center the columns, take the thin SVD,
/// and return `U_k S_k`. Each component's sign is fixed so that its
/// largest-magnitude loading is positive.
pub fn pca_embed(m: MatRef<'_, f64>, dims: usize) -> Result<Embedding> {
    let (n, p) = (m.nrows(), m.ncols());
    if dims == 0 || dims > n.min(p) {
        return Err(Error::Domain(format!(
            "cannot embed a {n}x{p} matrix into {dims} dimensions"
        )));
    }
    let means: Vec<f64> = (0..p).map(|j| (0..n).map(|i| m[(i, j)]).sum::<f64>() / n as f64).collect();
    let centered = Mat::from_fn(n, p, |i, j| m[(i, j)] - means[j]);
    let svd = centered
        .thin_svd()
        .map_err(|e| Error::Numerical {
            what: format!("SVD did not converge: {e:?}"),
            residual: f64::NAN,
        })?;
    let s = svd.S().column_vector();
    let total: f64 = (0..s.nrows()).map(|k| s[k] * s[k]).sum();
    let smax = if s.nrows() > 0 { s[0].abs() } else { 0.0 };
    let cutoff = smax * (n.max(p) as f64) * f64::EPSILON;
    let (u, v) = (svd.U(), svd.V());
    let mut coords = Mat::zeros(n, dims);
    let mut explained = Vec::with_capacity(dims);
    let mut rank_deficient = false;
    for k in 0..dims {
        if s[k] <= cutoff || total == 0.0 {
            rank_deficient = true;
            explained.push(0.0);
            continue;
        }
        let mut pivot = 0;
        for j in 1..p {
            if v[(j, k)].abs() > v[(pivot, k)].abs() {
                pivot = j;
            }
        }
        let sign = if v[(pivot, k)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[(i, k)] = sign * u[(i, k)] * s[k];
        }
        explained.push(s[k] * s[k] / total);
    }
    Ok(Embedding {
        coords,
        explained,
        rank_deficient,
    })
}
