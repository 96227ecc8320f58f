//! Hitting probabilities `Q[i][j] = P_i[tau_j < tau_i]`.
//!
//! Two exact routes are provided. [`hitting_reference`] factors
//! `M(j) = I - P + e_j e_j^T P` afresh for every column and reads
//! `Q[i][j] = M(j)^{-1}[i][j] / M(j)^{-1}[i][i]`. [`hitting_fast`] inverts
//! `M(0)` once and obtains every other column from a rank-2 Woodbury update,
//! touching only the entries of `M(j)^{-1}` that the ratio needs. The
//! [`simulate`] submodule estimates the same quantities by random walks.

mod fast;
mod reference;
pub mod simulate;

use faer::{Mat, MatRef};

pub use fast::{hitting_fast, FAST_PATH_COND_LIMIT};
pub use reference::{hitting_reference, hitting_reference_matrix};
pub use simulate::{simulate_hit_before_return, simulate_visit_counts, Estimate, WalkRecord};

use crate::stationary::StationaryDistribution;

/// The full hitting-probability matrix of a chain, zero on the diagonal.
#[derive(Debug, Clone)]
pub struct HittingProbabilities {
    q: Mat<f64>,
    /// Columns that could not use the fast path and were solved directly.
    pub fallback_columns: usize,
}

impl HittingProbabilities {
    pub(crate) fn from_columns(cols: Vec<Vec<f64>>, fallback_columns: usize) -> Self {
        let n = cols.len();
        Self {
            q: Mat::from_fn(n, n, |i, j| cols[j][i]),
            fallback_columns,
        }
    }

    /// Wraps a precomputed matrix; the diagonal is forced to zero.
    pub fn from_matrix(mut q: Mat<f64>) -> Self {
        for i in 0..q.nrows().min(q.ncols()) {
            q[(i, i)] = 0.0;
        }
        Self {
            q,
            fallback_columns: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[(i, j)]
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.q.as_ref()
    }

    /// `max_{i,j} |Q_ij phi_i - Q_ji phi_j|`.
    pub fn detailed_balance_residual(&self, phi: &StationaryDistribution) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let r = (self.q[(i, j)] * phi[i] - self.q[(j, i)] * phi[j]).abs();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// `max (Q_ik Q_kj - Q_ij)` over distinct triples; nonpositive when
    /// the submultiplicative inequality holds exactly.
    pub fn submultiplicativity_violation(&self) -> f64 {
        let n = self.n();
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            for k in 0..n {
                if k == i {
                    continue;
                }
                let qik = self.q[(i, k)];
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    worst = worst.max(qik * self.q[(k, j)] - self.q[(i, j)]);
                }
            }
        }
        worst
    }

    /// `max |Q - other|` entrywise.
    pub fn max_abs_diff(&self, other: &HittingProbabilities) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max((self.q[(i, j)] - other.q[(i, j)]).abs());
            }
        }
        worst
    }
}

/// Forms the ratio column `Q[i][j]` from the two entries of `M(j)^{-1}` that
/// it needs. Tiny round-off above one is clipped.
fn ratio(num: f64, den: f64) -> f64 {
    (num / den).min(1.0)
}

#[cfg(test)]
pub(crate) mod oracle {
    //! First-step analysis, independent of the `M(j)` formulation.

    use crate::graph::TransitionMatrix;
    use faer::Mat;
    use faer::linalg::solvers::Solve;

    /// `P_i[tau_j < tau_i]` by solving `h_k = P_k[hit j before i]` on the
    /// states other than `i` and `j`.
    pub fn first_step(p: &TransitionMatrix, i: usize, j: usize) -> f64 {
        let n = p.n();
        let others: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
        let m = others.len();
        let h = if m == 0 {
            Vec::new()
        } else {
            let a = Mat::from_fn(m, m, |r, c| {
                (if r == c { 1.0 } else { 0.0 }) - p.get(others[r], others[c])
            });
            let b = Mat::from_fn(m, 1, |r, _| p.get(others[r], j));
            let x = a.partial_piv_lu().solve(&b);
            (0..m).map(|r| x[(r, 0)]).collect()
        };
        let mut q = p.get(i, j);
        for (r, &k) in others.iter().enumerate() {
            q += p.get(i, k) * h[r];
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::first_step;
    use super::*;
    use crate::graph::TransitionMatrix;
    use crate::stationary::stationary_distribution;
    use crate::testutil::{complete, cycle, random_chain};
    use proptest::prelude::*;

    #[test]
    fn complete_three_oracle() {
        // From i: straight to j w.p. 1/2, else via k then to j w.p. 1/2.
        let hand = 0.5 + 0.5 * 0.5;
        let p = complete(3);
        assert!((first_step(&p, 0, 1) - hand).abs() < 1e-15);
        for j in 0..3 {
            let col = hitting_reference(&p, j).unwrap();
            for i in 0..3 {
                let want = if i == j { 0.0 } else { hand };
                assert!((col[i] - want).abs() < 1e-14, "{i} {j} {}", col[i]);
            }
        }
    }

    #[test]
    fn directed_cycle_columns_are_one() {
        let p = cycle(4);
        for j in 0..4 {
            let col = hitting_reference(&p, j).unwrap();
            for i in 0..4 {
                assert_eq!(col[i], if i == j { 0.0 } else { 1.0 });
            }
        }
        let q = hitting_fast(&cycle(7)).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let want = if i == j { 0.0 } else { 1.0 };
                assert!((q.get(i, j) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn reference_matches_first_step_oracle() {
        for seed in 0..5 {
            let p = random_chain(9, seed);
            let q = hitting_reference_matrix(&p).unwrap();
            for i in 0..9 {
                for j in 0..9 {
                    if i != j {
                        assert!((q.get(i, j) - first_step(&p, i, j)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn single_state_chain() {
        let p = TransitionMatrix::from_rows(&[vec![1.0]]).unwrap();
        assert_eq!(hitting_fast(&p).unwrap().get(0, 0), 0.0);
    }

    #[test]
    fn fifty_node_detailed_balance() {
        let p = random_chain(50, 11);
        let q = hitting_fast(&p).unwrap();
        let phi = stationary_distribution(&p).unwrap();
        assert!(q.detailed_balance_residual(&phi) <= 1e-10);
        assert!(q.submultiplicativity_violation() <= 1e-10);
        for i in 0..50 {
            for j in 0..50 {
                if i != j {
                    assert!(q.get(i, j) > 0.0 && q.get(i, j) <= 1.0);
                }
            }
        }
    }

    #[test]
    fn fast_is_deterministic() {
        let p = random_chain(40, 3);
        let a = hitting_fast(&p).unwrap();
        let b = hitting_fast(&p).unwrap();
        assert_eq!(a.max_abs_diff(&b), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn fast_matches_reference(n in 2usize..30, seed in any::<u64>()) {
            let p = random_chain(n, seed);
            let fast = hitting_fast(&p).unwrap();
            let reference = hitting_reference_matrix(&p).unwrap();
            prop_assert!(fast.max_abs_diff(&reference) <= 1e-8);
        }
    }
}
