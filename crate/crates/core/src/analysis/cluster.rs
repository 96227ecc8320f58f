use faer::MatRef;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

const MAX_ITER: usize = 300;

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn check_k(k: usize, n: usize, restarts: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Usage(format!("cannot form {k} clusters from {n} points")));
    }
    if restarts == 0 {
        return Err(Error::Usage("need at least one restart".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeans {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, ctr) in centers.iter().enumerate() {
        let d = sq_dist(x, ctr);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|x| sq_dist(x, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centers.push(points[pick].clone());
        for (i, x) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(x, &centers[centers.len() - 1]));
        }
    }
    centers
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> KMeans {
    let (n, k, dim) = (points.len(), centers.len(), points[0].len());
    let mut labels = vec![usize::MAX; n];
    for _ in 0..MAX_ITER {
        let mut changed = false;
        for (i, x) in points.iter().enumerate() {
            let (c, _) = nearest(x, &centers);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, x) in points.iter().enumerate() {
            counts[labels[i]] += 1;
            for (s, v) in sums[labels[i]].iter_mut().zip(x) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Reseed an empty cluster at the point farthest from its center.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(&points[a], &centers[labels[a]])
                            .total_cmp(&sq_dist(&points[b], &centers[labels[b]]))
                            .then(b.cmp(&a))
                    })
                    .expect("n > 0");
                centers[c] = points[far].clone();
                labels[far] = c;
                changed = true;
            } else {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = points
        .iter()
        .zip(&labels)
        .map(|(x, &c)| sq_dist(x, &centers[c]))
        .sum();
    KMeans {
        labels,
        centers,
        inertia,
    }
}

/// Lloyd's algorithm from k-means++ seeds; the lowest-inertia of `restarts`
/// runs is returned. Rows of `points` are observations.
pub fn kmeans(points: MatRef<'_, f64>, k: usize, restarts: usize, seed: u64) -> Result<KMeans> {
    let n = points.nrows();
    check_k(k, n, restarts)?;
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..points.ncols()).map(|j| points[(i, j)]).collect())
        .collect();
    if pts.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Domain("k-means input has non-finite coordinates".into()));
    }
    let mut best: Option<KMeans> = None;
    for r in 0..restarts {
        let mut rng = restart_rng(seed, r);
        let run = lloyd(&pts, plus_plus(&pts, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMedoids {
    pub labels: Vec<usize>,
    pub medoids: Vec<usize>,
    pub cost: f64,
}

fn assign(d: MatRef<'_, f64>, medoids: &[usize]) -> (Vec<usize>, f64) {
    let mut cost = 0.0;
    let labels = (0..d.nrows())
        .map(|i| {
            let mut best = (0, f64::INFINITY);
            for (c, &m) in medoids.iter().enumerate() {
                if d[(i, m)] < best.1 {
                    best = (c, d[(i, m)]);
                }
            }
            cost += best.1;
            best.0
        })
        .collect();
    (labels, cost)
}

fn alternate(d: MatRef<'_, f64>, mut medoids: Vec<usize>) -> KMedoids {
    for _ in 0..MAX_ITER {
        let (labels, _) = assign(d, &medoids);
        let mut next = medoids.clone();
        for (c, slot) in next.iter_mut().enumerate() {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            let mut best = (*slot, members.iter().map(|&j| d[(*slot, j)]).sum::<f64>());
            for &cand in &members {
                let cost: f64 = members.iter().map(|&j| d[(cand, j)]).sum();
                if cost < best.1 {
                    best = (cand, cost);
                }
            }
            *slot = best.0;
        }
        if next == medoids {
            break;
        }
        medoids = next;
    }
    let (labels, cost) = assign(d, &medoids);
    KMedoids {
        labels,
        medoids,
        cost,
    }
}

/// Alternating k-medoids on a precomputed distance matrix from random
/// initial medoids; the cheapest of `restarts` runs is returned.
pub fn kmedoids(d: MatRef<'_, f64>, k: usize, restarts: usize, seed: u64) -> Result<KMedoids> {
    let n = d.nrows();
    check_k(k, n, restarts)?;
    let mut best: Option<KMedoids> = None;
    for r in 0..restarts {
        let mut rng = restart_rng(seed, r);
        let init = sample(&mut rng, n, k).into_vec();
        let run = alternate(d, init);
        if best.as_ref().is_none_or(|b| run.cost < b.cost) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    #[test]
    fn kmeans_separated_clouds() {
        let pts = Mat::from_fn(10, 2, |i, j| if i < 5 { (i + j) as f64 * 0.01 } else { 100.0 + (i * j) as f64 * 0.01 });
        let r = kmeans(pts.as_ref(), 2, 3, 1).unwrap();
        assert!(same_partition(&r.labels, &[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]));
    }

    #[test]
    fn kmeans_identical_points() {
        let pts = Mat::from_fn(6, 2, |_, _| 1.5);
        let r = kmeans(pts.as_ref(), 3, 2, 0).unwrap();
        assert_eq!(r.inertia, 0.0);
    }

    #[test]
    fn kmeans_matches_enumerated_optimum() {
        let xs = [0.0, 1.0, 10.0, 11.0];
        let pts = Mat::from_fn(4, 1, |i, _| xs[i]);
        // Oracle: inertia of every 2-partition.
        let mut best = (f64::INFINITY, 0u32);
        for mask in 1u32..15 {
            let mut cost = 0.0;
            for side in [true, false] {
                let g: Vec<f64> = (0..4).filter(|&i| ((mask >> i) & 1 == 1) == side).map(|i| xs[i]).collect();
                let mu = g.iter().sum::<f64>() / g.len() as f64;
                cost += g.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>();
            }
            if cost < best.0 {
                best = (cost, mask);
            }
        }
        let r = kmeans(pts.as_ref(), 2, 5, 3).unwrap();
        let want: Vec<usize> = (0..4).map(|i| ((best.1 >> i) & 1) as usize).collect();
        assert!(same_partition(&r.labels, &want));
        assert!((r.inertia - best.0).abs() < 1e-12);
    }

    #[test]
    fn kmeans_is_seed_deterministic() {
        let pts = Mat::from_fn(40, 2, |i, j| ((i * 31 + j * 17) % 23) as f64);
        assert_eq!(kmeans(pts.as_ref(), 4, 5, 9).unwrap(), kmeans(pts.as_ref(), 4, 5, 9).unwrap());
        assert!(kmeans(pts.as_ref(), 41, 1, 0).is_err());
    }

    fn blocks() -> Mat<f64> {
        Mat::from_fn(9, 9, |i, j| {
            if i == j {
                0.0
            } else if i / 3 == j / 3 {
                0.1
            } else {
                10.0
            }
        })
    }

    #[test]
    fn kmedoids_recovers_blocks() {
        let r = kmedoids(blocks().as_ref(), 3, 5, 2).unwrap();
        assert!(same_partition(&r.labels, &[0, 0, 0, 1, 1, 1, 2, 2, 2]));
        assert!((r.cost - 0.6).abs() < 1e-12);
    }

    #[test]
    fn kmedoids_k_equals_n() {
        let r = kmedoids(blocks().as_ref(), 9, 1, 0).unwrap();
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn kmedoids_one_median() {
        let xs = [0.0f64, 0.4, 1.0, 3.0, 7.5, 8.0];
        let d = Mat::from_fn(6, 6, |i, j| (xs[i] - xs[j]).abs());
        let oracle = (0..6)
            .map(|c| (0..6).map(|j| d[(c, j)]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let r = kmedoids(d.as_ref(), 1, 3, 4).unwrap();
        assert!((r.cost - oracle).abs() < 1e-12);
        assert!(kmedoids(d.as_ref(), 7, 1, 0).is_err());
    }
}
