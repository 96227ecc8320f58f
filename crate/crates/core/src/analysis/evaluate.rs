use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest number of distinct labels handled by [`purity_accuracy`].
pub const MAX_PURITY_LABELS: usize = 12;

fn dense_ids(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let ids = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (ids, map.len())
}

/// Fraction of nodes matched under the best one-to-one pairing of predicted
/// clusters with true classes. Unequal label counts are padded with empty
/// classes.
pub fn purity_accuracy(labels: &[usize], truth: &[usize]) -> Result<f64> {
    if labels.len() != truth.len() {
        return Err(Error::Domain(format!(
            "{} labels but {} truth entries",
            labels.len(),
            truth.len()
        )));
    }
    if labels.is_empty() {
        return Ok(1.0);
    }
    let (a, ka) = dense_ids(labels);
    let (b, kb) = dense_ids(truth);
    let k = ka.max(kb);
    if k > MAX_PURITY_LABELS {
        return Err(Error::Domain(format!("{k} labels exceed the limit of {MAX_PURITY_LABELS}")));
    }
    let mut table = vec![vec![0usize; k]; k];
    for (&x, &y) in a.iter().zip(&b) {
        table[x][y] += 1;
    }
    // best[mask] = best total matching the first popcount(mask) clusters to
    // the true classes in `mask`.
    let mut best = vec![0usize; 1 << k];
    for mask in 1usize..(1 << k) {
        let row = mask.count_ones() as usize - 1;
        let mut m = 0;
        for col in 0..k {
            if mask & (1 << col) != 0 {
                m = m.max(best[mask ^ (1 << col)] + table[row][col]);
            }
        }
        best[mask] = m;
    }
    Ok(best[(1 << k) - 1] as f64 / labels.len() as f64)
}

/// Add-one empirical tail probability of `accuracy` among `trials` labelings
/// drawn uniformly from `k` labels.
pub fn empirical_p_value(accuracy: f64, truth: &[usize], k: usize, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 || k == 0 {
        return Err(Error::Domain("need at least one trial and one label".into()));
    }
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let labels: Vec<usize> = (0..truth.len()).map(|_| rng.random_range(0..k)).collect();
            Ok(usize::from(purity_accuracy(&labels, truth)? >= accuracy))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok((hits + 1) as f64 / (trials + 1) as f64)
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut s = 0;
    while s < idx.len() {
        let mut e = s;
        while e + 1 < idx.len() && x[idx[e + 1]] == x[idx[s]] {
            e += 1;
        }
        let avg = (s + e) as f64 / 2.0 + 1.0;
        for &i in &idx[s..=e] {
            r[i] = avg;
        }
        s = e + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation, with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Domain("spearman needs two equal-length samples of size >= 2".into()));
    }
    Ok(pearson(&ranks(x), &ranks(y)))
}

/// Distances from one reference node, each rescaled to `[0, 1]` and listed
/// in increasing order of the first curve.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceCurves {
    pub reference: usize,
    pub nodes: Vec<usize>,
    pub curves: Vec<(String, Vec<f64>)>,
}

/// `(d - min) / (max - min)` for each named row of distances from
/// `reference`, sorted by the first one. The reference itself is dropped.
pub fn distance_curves(reference: usize, rows: &[(&str, &[f64])]) -> Result<DistanceCurves> {
    let Some((_, first)) = rows.first() else {
        return Err(Error::Domain("no distance rows".into()));
    };
    let n = first.len();
    if reference >= n || rows.iter().any(|(_, r)| r.len() != n) {
        return Err(Error::Domain("distance rows must share the reference's length".into()));
    }
    let mut nodes: Vec<usize> = (0..n).filter(|&i| i != reference).collect();
    nodes.sort_by(|&a, &b| first[a].total_cmp(&first[b]).then(a.cmp(&b)));
    let curves = rows
        .iter()
        .map(|(name, r)| {
            let vals: Vec<f64> = nodes.iter().map(|&i| r[i]).collect();
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = if hi > lo { hi - lo } else { 1.0 };
            (name.to_string(), vals.iter().map(|v| (v - lo) / span).collect())
        })
        .collect();
    Ok(DistanceCurves {
        reference,
        nodes,
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn balanced(n: usize, k: usize) -> Vec<usize> {
        (0..n).map(|i| i * k / n).collect()
    }

    /// Brute force over all permutations of `k` labels.
    fn brute_purity(a: &[usize], b: &[usize], k: usize) -> f64 {
        fn perms(k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(k - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, k - 1);
                    out.push(q);
                }
            }
            out
        }
        perms(k)
            .iter()
            .map(|p| a.iter().zip(b).filter(|(x, y)| p[**x] == **y).count())
            .max()
            .unwrap() as f64
            / a.len() as f64
    }

    #[test]
    fn purity_examples() {
        let t = balanced(9, 3);
        assert_eq!(purity_accuracy(&t, &t).unwrap(), 1.0);
        let perm: Vec<usize> = t.iter().map(|&x| (x + 1) % 3).collect();
        assert_eq!(purity_accuracy(&perm, &t).unwrap(), 1.0);
        assert!((purity_accuracy(&[7; 9], &t).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(purity_accuracy(&[0, 1], &t).is_err());
    }

    proptest! {
        #[test]
        fn purity_matches_brute_force(a in prop::collection::vec(0usize..4, 1..30), seed in 0u64..1000) {
            let b: Vec<usize> = a.iter().enumerate().map(|(i, _)| ((i as u64 * 7 + seed) % 4) as usize).collect();
            prop_assert!((purity_accuracy(&a, &b).unwrap() - brute_purity(&a, &b, 4)).abs() < 1e-15);
        }
    }

    #[test]
    fn p_value_extremes() {
        let t = balanced(300, 3);
        assert!((empirical_p_value(1.0, &t, 3, 200, 1).unwrap() - 1.0 / 201.0).abs() < 1e-15);
        assert_eq!(empirical_p_value(0.0, &t, 3, 200, 1).unwrap(), 1.0);
    }

    #[test]
    fn chance_level_p_value_is_reproducible_across_seeds() {
        // Max-over-permutations purity of random labels sits slightly above
        // 1/3, so chance-level accuracy has a p-value near one. Two seeds
        // must agree within sampling error.
        let t = balanced(300, 3);
        let a = empirical_p_value(1.0 / 3.0, &t, 3, 4000, 11).unwrap();
        let b = empirical_p_value(1.0 / 3.0, &t, 3, 4000, 12).unwrap();
        assert!((a - b).abs() < 0.05, "{a} {b}");
        assert!(a > 0.5);
    }

    #[test]
    fn spearman_examples() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 35.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        // Ties get average ranks: x ranks (1.5, 1.5, 3), y ranks (1, 2, 3).
        let r = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn curves_are_rescaled_and_sorted() {
        let a = [0.0, 3.0, 1.0, 2.0];
        let b = [0.0, 10.0, 30.0, 20.0];
        let c = distance_curves(0, &[("a", &a), ("b", &b)]).unwrap();
        assert_eq!(c.nodes, vec![2, 3, 1]);
        assert_eq!(c.curves[0].1, vec![0.0, 0.5, 1.0]);
        assert_eq!(c.curves[1].1, vec![1.0, 0.5, 0.0]);
    }
}
