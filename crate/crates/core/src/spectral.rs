//! Symmetrizations of a chain, graph Laplacians and Fiedler vectors.

use std::str::FromStr;

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef, Side};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;
use crate::linalg::asymmetry;
use crate::metric::{hp_similarity, HpSimilarity};
use crate::hitting::HittingProbabilities;
use crate::stationary::StationaryDistribution;

/// Above this size [`fiedler_vector`] switches from a full dense
/// eigendecomposition to shift-invert subspace iteration.
pub const DENSE_EIGEN_LIMIT: usize = 2000;
/// `lambda_3 - lambda_2` below this flags a basis-dependent sign pattern.
pub const EIGENGAP_TOL: f64 = 1e-12;
/// Entries below this fraction of `max |v|` get sign zero.
pub const ZERO_SIGN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetrization {
    /// `(P + P^T) / 2`.
    Additive,
    /// `max(P, P^T)` entrywise.
    Max,
    /// `I - (Phi^{1/2} P Phi^{-1/2} + Phi^{-1/2} P^T Phi^{1/2}) / 2`, already a Laplacian.
    Chung,
    /// The hitting-probability similarity `A^(hp, beta)`.
    Hp(f64),
}

impl Symmetrization {
    /// Parses `additive`, `max`, `chung` or `hp` (which needs `beta`).
    pub fn parse(name: &str, beta: Option<f64>) -> Result<Self> {
        match (name, beta) {
            ("hp", Some(b)) => Ok(Self::Hp(b)),
            ("hp", None) => Err(Error::Usage("the hp symmetrization needs --beta".into())),
            (_, Some(_)) => Err(Error::Usage(format!("--beta only applies to hp, not {name:?}"))),
            (other, None) => other.parse(),
        }
    }
}

impl FromStr for Symmetrization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(Self::Additive),
            "max" => Ok(Self::Max),
            "chung" => Ok(Self::Chung),
            "hp" => Err(Error::Usage("the hp symmetrization needs --beta".into())),
            _ => Err(Error::Usage(format!("unknown symmetrization {s:?}"))),
        }
    }
}

/// A symmetric matrix derived from a chain: an adjacency for every kind
/// except [`Symmetrization::Chung`], which yields a Laplacian.
#[derive(Debug, Clone)]
pub struct SymmetricOperator {
    pub kind: Symmetrization,
    pub m: Mat<f64>,
}

impl SymmetricOperator {
    pub fn is_laplacian(&self) -> bool {
        self.kind == Symmetrization::Chung
    }

    /// The Laplacian used for spectral partitioning.
    pub fn laplacian(&self) -> Mat<f64> {
        if self.is_laplacian() {
            self.m.clone()
        } else {
            laplacian(self.m.as_ref())
        }
    }
}

/// `hp` needs `Q`; other kinds ignore it.
pub fn symmetrize(
    p: &TransitionMatrix,
    phi: &StationaryDistribution,
    q: Option<&HittingProbabilities>,
    kind: Symmetrization,
) -> Result<SymmetricOperator> {
    let n = p.n();
    let pm = p.p();
    let m = match kind {
        Symmetrization::Additive => Mat::from_fn(n, n, |i, j| 0.5 * (pm[(i, j)] + pm[(j, i)])),
        Symmetrization::Max => Mat::from_fn(n, n, |i, j| pm[(i, j)].max(pm[(j, i)])),
        Symmetrization::Chung => {
            let s: Vec<f64> = (0..n).map(|i| phi[i].sqrt()).collect();
            let mut l = Mat::from_fn(n, n, |i, j| {
                let id = if i == j { 1.0 } else { 0.0 };
                id - 0.5 * (s[i] * pm[(i, j)] / s[j] + s[j] * pm[(j, i)] / s[i])
            });
            // Exact symmetry: the two halves are mirror images analytically.
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = 0.5 * (l[(i, j)] + l[(j, i)]);
                    l[(i, j)] = v;
                    l[(j, i)] = v;
                }
            }
            l
        }
        Symmetrization::Hp(beta) => {
            let q = q.ok_or_else(|| Error::Usage("hp symmetrization needs hitting probabilities".into()))?;
            let a: HpSimilarity = hp_similarity(q, phi, beta)?;
            a.matrix().to_owned()
        }
    };
    Ok(SymmetricOperator { kind, m })
}

/// `L = D - M` with `D` the diagonal of row sums.
pub fn laplacian(m: MatRef<'_, f64>) -> Mat<f64> {
    let n = m.nrows();
    let mut l = Mat::from_fn(n, n, |i, j| -m[(i, j)]);
    for i in 0..n {
        // The diagonal of M cancels; summing only the off-diagonal part keeps
        // row sums at round-off level.
        l[(i, i)] = (0..n).filter(|&j| j != i).map(|j| m[(i, j)]).sum();
    }
    l
}

/// Second eigenpair of a Laplacian.
#[derive(Debug, Clone, Serialize)]
pub struct Fiedler {
    pub lambda2: f64,
    pub lambda3: Option<f64>,
    /// Unit norm; largest-magnitude entry positive (lowest index on ties).
    pub vector: Vec<f64>,
    pub signs: Vec<i8>,
    /// Set when `lambda3 - lambda2 <= EIGENGAP_TOL`.
    pub eigengap_warning: bool,
}

fn orient(mut v: Vec<f64>) -> (Vec<f64>, Vec<i8>) {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    let top = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    // Magnitudes equal up to round-off count as a tie.
    let pivot = v.iter().position(|x| x.abs() >= top * (1.0 - 1e-10)).unwrap_or(0);
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let cut = ZERO_SIGN_TOL * top;
    let signs = v
        .iter()
        .map(|&x| if x.abs() <= cut { 0 } else if x > 0.0 { 1 } else { -1 })
        .collect();
    (v, signs)
}

fn eig_error(e: impl std::fmt::Debug) -> Error {
    Error::Numerical {
        what: format!("eigensolver failed: {e:?}"),
        residual: f64::NAN,
    }
}

/// Dense path: all eigenpairs, ascending.
fn fiedler_dense(l: MatRef<'_, f64>) -> Result<(f64, Option<f64>, Vec<f64>)> {
    let n = l.nrows();
    let evd = l.self_adjoint_eigen(Side::Lower).map_err(eig_error)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let lam3 = (n > 2).then(|| s[2]);
    Ok((s[1], lam3, (0..n).map(|i| u[(i, 1)]).collect()))
}

/// Modified Gram-Schmidt on the columns of `x`.
fn orthonormalize(x: &mut Mat<f64>) {
    let (n, k) = (x.nrows(), x.ncols());
    for c in 0..k {
        for prev in 0..c {
            let dot: f64 = (0..n).map(|i| x[(i, c)] * x[(i, prev)]).sum();
            for i in 0..n {
                x[(i, c)] -= dot * x[(i, prev)];
            }
        }
        let nrm = (0..n).map(|i| x[(i, c)] * x[(i, c)]).sum::<f64>().sqrt();
        for i in 0..n {
            x[(i, c)] /= nrm;
        }
    }
}

/// Large path: subspace iteration with `(L + sigma I)^{-1}` and a
/// Rayleigh-Ritz step, tracking the three smallest eigenpairs.
fn fiedler_iterative(l: MatRef<'_, f64>) -> Result<(f64, Option<f64>, Vec<f64>)> {
    let n = l.nrows();
    let scale = (0..n).map(|i| l[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let sigma = 1e-8 * scale;
    let shifted = Mat::from_fn(n, n, |i, j| l[(i, j)] + if i == j { sigma } else { 0.0 });
    let chol = shifted.llt(Side::Lower).map_err(eig_error)?;
    let block = 6.min(n);
    // Deterministic start: smooth, linearly independent columns.
    let mut x = Mat::from_fn(n, block, |i, c| ((i as f64 + 1.0) * (c as f64 + 1.0) * 0.7548776662).sin());
    orthonormalize(&mut x);
    let mut result = None;
    for _ in 0..1000 {
        let mut y = chol.solve(&x);
        orthonormalize(&mut y);
        let ly = l * &y;
        let h = y.transpose() * &ly;
        let small = h.self_adjoint_eigen(Side::Lower).map_err(eig_error)?;
        let (s, w) = (small.S().column_vector(), small.U());
        x = &y * w;
        let lam: Vec<f64> = (0..block).map(|k| s[k]).collect();
        let lx = l * &x;
        let resid = |k: usize| {
            (0..n)
                .map(|i| (lx[(i, k)] - lam[k] * x[(i, k)]).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let tol = 1e-10 * scale;
        let want = 3.min(block);
        if (0..want).all(|k| resid(k) <= tol) {
            result = Some((lam[1], (block > 2).then(|| lam[2]), (0..n).map(|i| x[(i, 1)]).collect()));
            break;
        }
    }
    result.ok_or_else(|| Error::Numerical {
        what: "subspace iteration for the Fiedler vector did not converge".into(),
        residual: f64::NAN,
    })
}

/// Eigenvector of the second-smallest eigenvalue of a symmetric Laplacian.
pub fn fiedler_vector(l: MatRef<'_, f64>) -> Result<Fiedler> {
    let n = l.nrows();
    if n < 2 {
        return Err(Error::Domain("a Fiedler vector needs at least two states".into()));
    }
    let asym = asymmetry(l);
    if asym > 1e-10 * (0..n).map(|i| l[(i, i)].abs()).fold(1.0, f64::max) {
        return Err(Error::Domain(format!("Laplacian is not symmetric (asymmetry {asym:e})")));
    }
    let (lambda2, lambda3, v) = if n <= DENSE_EIGEN_LIMIT {
        fiedler_dense(l)?
    } else {
        fiedler_iterative(l)?
    };
    let (vector, signs) = orient(v);
    Ok(Fiedler {
        lambda2,
        lambda3,
        eigengap_warning: lambda3.is_some_and(|l3| l3 - lambda2 <= EIGENGAP_TOL),
        vector,
        signs,
    })
}
