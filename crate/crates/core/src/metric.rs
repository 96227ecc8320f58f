//! The normalized hitting-probability similarity and the distance built on it.
//!
//! For `beta >= 1/2`,
//!
//! ```text
//! A[i][j] = phi_i^beta / phi_j^(1 - beta) * Q[i][j]     (i != j),  A[i][i] = 1
//! d[i][j] = -ln A[i][j]
//! ```
//!
//! `A` is symmetric because `Q[i][j] phi_i = Q[j][i] phi_j`. At `beta = 1/2`
//! the distance is only a pseudo-metric: pairs with `Q[i][j] = Q[j][i] = 1`
//! sit at distance zero. [`degenerate_pairs`] finds those classes.

use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;
use crate::hitting::{hitting_fast, HittingProbabilities};
use crate::linalg::asymmetry;
use crate::stationary::{stationary_distribution, StationaryDistribution};

/// Default tolerance on `1 - Q` for calling a pair degenerate.
pub const DEFAULT_TOL_DEG: f64 = 1e-9;
/// Pre-symmetrization asymmetry above this means `Q` and `phi` disagree.
pub const ASYMMETRY_LIMIT: f64 = 1e-8;
/// At `beta = 1/2`, similarities may exceed one by this much from round-off.
pub const HALF_OVERSHOOT: f64 = 1e-12;

/// Largest chain checked exhaustively by [`verify_metric_axioms`].
pub const EXHAUSTIVE_LIMIT: usize = 500;
/// Random triples sampled above [`EXHAUSTIVE_LIMIT`].
pub const SAMPLED_TRIPLES: usize = 1_000_000;

/// `A^(hp, beta)`, explicitly symmetrized.
#[derive(Debug, Clone)]
pub struct HpSimilarity {
    beta: f64,
    a: Mat<f64>,
    /// `max |A - A^T|` before symmetrization.
    pub asymmetry: f64,
}

impl HpSimilarity {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.a.as_ref()
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[(i, j)]
    }
}

pub fn hp_similarity(
    q: &HittingProbabilities,
    phi: &StationaryDistribution,
    beta: f64,
) -> Result<HpSimilarity> {
    if !(beta >= 0.5) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be at least 1/2, got {beta}")));
    }
    let n = q.n();
    if phi.len() != n {
        return Err(Error::Domain(format!(
            "Q has {n} states but phi has {}",
            phi.len()
        )));
    }
    let raw = Mat::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            phi[i].powf(beta) / phi[j].powf(1.0 - beta) * q.get(i, j)
        }
    });
    let asym = asymmetry(raw.as_ref());
    if asym > ASYMMETRY_LIMIT {
        return Err(Error::Consistency(format!(
            "similarity asymmetry {asym:e} exceeds {ASYMMETRY_LIMIT:e}; Q and phi disagree"
        )));
    }
    let half = beta == 0.5;
    let mut a = Mat::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            0.5 * (raw[(i, j)] + raw[(j, i)])
        }
    });
    if half {
        for j in 0..n {
            for i in 0..n {
                let v = a[(i, j)];
                if v > 1.0 {
                    if v > 1.0 + HALF_OVERSHOOT {
                        return Err(Error::Consistency(format!(
                            "A[{i},{j}] = {v} exceeds one at beta = 1/2"
                        )));
                    }
                    a[(i, j)] = 1.0;
                }
            }
        }
    }
    Ok(HpSimilarity {
        beta,
        a,
        asymmetry: asym,
    })
}

/// `d^beta = -ln A`, with a pseudo-metric flag at `beta = 1/2`.
#[derive(Debug, Clone)]
pub struct HpDistance {
    beta: f64,
    d: Mat<f64>,
    is_pseudo: bool,
}

impl HpDistance {
    /// Wraps an arbitrary distance matrix (e.g. one computed on a quotient).
    pub fn from_matrix(beta: f64, d: Mat<f64>, is_pseudo: bool) -> Self {
        Self { beta, d, is_pseudo }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.d.as_ref()
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }

    pub fn is_pseudo(&self) -> bool {
        self.is_pseudo
    }
}

pub fn hp_distance(a: &HpSimilarity) -> Result<HpDistance> {
    hp_distance_with_tol(a, DEFAULT_TOL_DEG)
}

pub fn hp_distance_with_tol(a: &HpSimilarity, tol_deg: f64) -> Result<HpDistance> {
    let n = a.n();
    let mut d = Mat::zeros(n, n);
    let mut is_pseudo = false;
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            let v = a.get(i, j);
            if !(v > 0.0) {
                return Err(Error::Domain(format!("A[{i},{j}] = {v} is not positive")));
            }
            let dist = if v == 1.0 { 0.0 } else { -v.ln() };
            if a.beta == 0.5 && dist < tol_deg {
                is_pseudo = true;
            }
            d[(i, j)] = dist;
        }
    }
    Ok(HpDistance {
        beta: a.beta,
        d,
        is_pseudo,
    })
}

/// Everything computed on the way from a chain to `d^beta`.
#[derive(Debug, Clone)]
pub struct HpMetric {
    pub phi: StationaryDistribution,
    pub q: HittingProbabilities,
    pub similarity: HpSimilarity,
    pub distance: HpDistance,
}

/// Stationary distribution, fast `Q`, similarity and distance in one call.
pub fn hp_metric(p: &TransitionMatrix, beta: f64) -> Result<HpMetric> {
    let phi = stationary_distribution(p)?;
    let q = hitting_fast(p)?;
    hp_metric_from_parts(phi, q, beta)
}

/// Same as [`hp_metric`] but reusing an existing `phi` and `Q`.
pub fn hp_metric_from_parts(
    phi: StationaryDistribution,
    q: HittingProbabilities,
    beta: f64,
) -> Result<HpMetric> {
    let similarity = hp_similarity(&q, &phi, beta)?;
    let distance = hp_distance(&similarity)?;
    Ok(HpMetric {
        phi,
        q,
        similarity,
        distance,
    })
}

/// Tolerances for [`verify_metric_axioms`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AxiomTolerances {
    pub symmetry: f64,
    pub triangle: f64,
}

impl Default for AxiomTolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-10,
            triangle: 1e-9,
        }
    }
}

/// Result of an exhaustive (or sampled) check of the metric axioms.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub symmetry_ok: bool,
    pub triangle_ok: bool,
    pub positivity_ok: bool,
    pub zero_diagonal_ok: bool,
    /// `max |D_ij - D_ji|`.
    pub worst_asymmetry: f64,
    /// `max (D_ij - D_ik - D_kj)`; at most zero when the triangle inequality holds.
    pub worst_triangle_excess: f64,
    pub worst_triangle: Option<(usize, usize, usize)>,
    /// Smallest off-diagonal distance.
    pub min_off_diagonal: f64,
    pub triples_checked: u64,
    pub exhaustive: bool,
}

impl AxiomReport {
    pub fn is_metric(&self) -> bool {
        self.symmetry_ok && self.triangle_ok && self.positivity_ok && self.zero_diagonal_ok
    }
}

/// Checks symmetry, positivity and the triangle inequality of any distance
/// matrix. Chains up to [`EXHAUSTIVE_LIMIT`] states are checked over all
/// triples; larger ones over [`SAMPLED_TRIPLES`] seeded random triples.
pub fn verify_metric_axioms(d: MatRef<'_, f64>, tol: AxiomTolerances) -> AxiomReport {
    let n = d.nrows();
    let worst_asymmetry = asymmetry(d);
    let mut min_off = f64::INFINITY;
    let mut zero_diag = true;
    for i in 0..n {
        zero_diag &= d[(i, i)] == 0.0;
        for j in 0..n {
            if i != j {
                min_off = min_off.min(d[(i, j)]);
            }
        }
    }
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = None;
    let mut checked = 0u64;
    let mut visit = |i: usize, k: usize, j: usize| {
        let excess = d[(i, j)] - d[(i, k)] - d[(k, j)];
        checked += 1;
        if excess > worst {
            worst = excess;
            worst_at = Some((i, k, j));
        }
    };
    let exhaustive = n <= EXHAUSTIVE_LIMIT;
    if exhaustive {
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    if i != j && i != k && k != j {
                        visit(i, k, j);
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..SAMPLED_TRIPLES {
            let (i, k, j) = (
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
            );
            if i != j && i != k && k != j {
                visit(i, k, j);
            }
        }
    }
    if worst == f64::NEG_INFINITY {
        worst = 0.0;
    }
    AxiomReport {
        symmetry_ok: worst_asymmetry <= tol.symmetry,
        triangle_ok: worst <= tol.triangle,
        positivity_ok: n < 2 || min_off > 0.0,
        zero_diagonal_ok: zero_diag,
        worst_asymmetry,
        worst_triangle_excess: worst,
        worst_triangle: worst_at,
        min_off_diagonal: if n < 2 { 0.0 } else { min_off },
        triples_checked: checked,
        exhaustive,
    }
}

/// Partition of the states into classes at `d^{1/2}` distance zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    /// Classes sorted by smallest member; members ascending.
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    pub degenerate: bool,
    /// Largest relative spread of `phi` inside a class (zero analytically).
    pub max_phi_spread: f64,
}

impl DegeneracyReport {
    pub fn non_singleton(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.classes.iter().filter(|c| c.len() > 1)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Groups states with `min(Q_ij, Q_ji) >= 1 - tol_deg` by transitive closure.
///
/// Every pair inside a resulting class must then satisfy the condition at
/// `10 * tol_deg`; otherwise the tolerance is mixing near-degenerate pairs
/// and a [`Error::Tolerance`] is returned.
pub fn degenerate_pairs(
    q: &HittingProbabilities,
    phi: &StationaryDistribution,
    tol_deg: f64,
) -> Result<DegeneracyReport> {
    let n = q.n();
    let close = |i: usize, j: usize, tol: f64| q.get(i, j).min(q.get(j, i)) >= 1.0 - tol;
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if close(i, j, tol_deg) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_class = vec![usize::MAX; n];
    let mut class_of = vec![0; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_class[r] == usize::MAX {
            root_class[r] = classes.len();
            classes.push(Vec::new());
        }
        class_of[i] = root_class[r];
        classes[root_class[r]].push(i);
    }
    let mut spread = 0.0f64;
    for c in &classes {
        for (x, &i) in c.iter().enumerate() {
            for &j in &c[x + 1..] {
                if !close(i, j, 10.0 * tol_deg) {
                    return Err(Error::Tolerance(format!(
                        "states {i} and {j} are joined transitively but min(Q) = {}",
                        q.get(i, j).min(q.get(j, i))
                    )));
                }
                spread = spread.max((phi[i] - phi[j]).abs() / phi[i].max(phi[j]));
            }
        }
    }
    let degenerate = classes.iter().any(|c| c.len() > 1);
    Ok(DegeneracyReport {
        classes,
        class_of,
        degenerate,
        max_phi_spread: spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{complete, cycle, random_chain};

    #[test]
    fn four_cycle_similarities() {
        let m = hp_metric(&cycle(4), 0.5).unwrap();
        let m1 = hp_metric(&cycle(4), 1.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((m.similarity.get(i, j) - 1.0).abs() < 1e-14);
                let want = if i == j { 1.0 } else { 0.25 };
                assert!((m1.similarity.get(i, j) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_cycle_is_pseudo() {
        let m = hp_metric(&cycle(2), 0.5).unwrap();
        assert!(m.distance.is_pseudo());
        assert_eq!(m.distance.get(0, 1), 0.0);
        let r = verify_metric_axioms(m.distance.matrix(), AxiomTolerances::default());
        assert!(r.symmetry_ok && r.triangle_ok && !r.positivity_ok);
    }

    #[test]
    fn complete_three_distance() {
        // Q = 3/4 from first-step analysis; phi uniform.
        let want = -(0.75f64).ln();
        let m = hp_metric(&complete(3), 0.5).unwrap();
        assert!(!m.distance.is_pseudo());
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((m.distance.get(i, j) - want).abs() < 1e-14);
                }
            }
        }
        assert!((want - 0.2877).abs() < 1e-4);
    }

    #[test]
    fn five_cycle_triangle_is_tight() {
        let m = hp_metric(&cycle(5), 0.5).unwrap();
        let r = verify_metric_axioms(m.distance.matrix(), AxiomTolerances::default());
        assert!(r.triangle_ok);
        assert!(r.worst_triangle_excess.abs() <= 1e-12);
    }

    #[test]
    fn random_chain_is_metric_at_three_quarters() {
        let m = hp_metric(&random_chain(50, 4), 0.75).unwrap();
        let r = verify_metric_axioms(m.distance.matrix(), AxiomTolerances::default());
        assert!(r.is_metric(), "{r:?}");
        assert_eq!(r.triples_checked, 50 * 49 * 48);
    }

    #[test]
    fn rejects_small_beta() {
        let p = cycle(3);
        let phi = stationary_distribution(&p).unwrap();
        let q = hitting_fast(&p).unwrap();
        assert!(matches!(hp_similarity(&q, &phi, 0.4), Err(Error::Domain(_))));
    }

    #[test]
    fn mismatched_phi_is_a_consistency_error() {
        let p = random_chain(6, 1);
        let q = hitting_fast(&p).unwrap();
        let phi = StationaryDistribution::from_vec(vec![1.0 / 6.0; 6]).unwrap();
        assert!(matches!(hp_similarity(&q, &phi, 0.5), Err(Error::Consistency(_))));
    }

    #[test]
    fn half_similarity_is_geometric_mean() {
        let m = hp_metric(&random_chain(30, 8), 0.5).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                if i != j {
                    let g = (m.q.get(i, j) * m.q.get(j, i)).sqrt();
                    assert!((m.similarity.get(i, j) - g).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn triangle_slack_identity() {
        for beta in [0.5, 0.8, 1.0] {
            let m = hp_metric(&random_chain(12, 21), beta).unwrap();
            let d = |i, j| m.distance.get(i, j);
            for i in 0..12 {
                for k in 0..12 {
                    for j in 0..12 {
                        if i == j || i == k || k == j {
                            continue;
                        }
                        let slack = d(i, k) + d(k, j) - d(i, j);
                        let formula = -(2.0 * beta - 1.0) * m.phi[k].ln()
                            - (m.q.get(i, k) * m.q.get(k, j) / m.q.get(i, j)).ln();
                        assert!((slack - formula).abs() <= 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn similarity_decreases_in_beta() {
        let p = random_chain(15, 2);
        let betas = [0.5, 0.6, 0.75, 1.0, 1.5];
        let ms: Vec<_> = betas.iter().map(|&b| hp_metric(&p, b).unwrap()).collect();
        for w in ms.windows(2) {
            for i in 0..15 {
                for j in 0..15 {
                    if i != j {
                        assert!(w[1].similarity.get(i, j) < w[0].similarity.get(i, j));
                    }
                }
            }
        }
    }

    #[test]
    fn degeneracy_classes() {
        let p = cycle(6);
        let m = hp_metric(&p, 0.5).unwrap();
        let r = degenerate_pairs(&m.q, &m.phi, DEFAULT_TOL_DEG).unwrap();
        assert_eq!(r.classes, vec![(0..6).collect::<Vec<_>>()]);
        assert!(r.degenerate);

        let p = complete(3);
        let m = hp_metric(&p, 0.5).unwrap();
        let r = degenerate_pairs(&m.q, &m.phi, DEFAULT_TOL_DEG).unwrap();
        assert_eq!(r.classes.len(), 3);
        assert!(!r.degenerate);
    }

    #[test]
    fn inconsistent_closure_is_reported() {
        // 0~1 and 1~2 at the loose tolerance, but 0 and 2 are further apart.
        let mut q = Mat::from_fn(3, 3, |_, _| 0.5);
        q[(0, 1)] = 0.99;
        q[(1, 0)] = 0.99;
        q[(1, 2)] = 0.99;
        q[(2, 1)] = 0.99;
        let q = HittingProbabilities::from_matrix(q);
        let phi = StationaryDistribution::from_vec(vec![1.0 / 3.0; 3]).unwrap();
        assert!(matches!(degenerate_pairs(&q, &phi, 0.02), Err(Error::Tolerance(_))));
    }
}
