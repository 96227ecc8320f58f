//! Synthetic experiments: generators, embeddings, clustering and scoring.

pub mod cluster;
pub mod embed;
pub mod evaluate;
pub mod fixtures;
pub mod generators;

use std::str::FromStr;

use faer::{Mat, MatRef};
use serde::Serialize;

pub use cluster::{kmeans, kmedoids, KMeans, KMedoids};
pub use embed::{pca_embed, Embedding};
pub use evaluate::{distance_curves, empirical_p_value, purity_accuracy, spearman, DistanceCurves};
pub use generators::{Domain, ErCycle, Geometric, GluedCycles, PlantedPartition};

use crate::error::{Error, Result};
use crate::graph::{row_normalize, WeightedDigraph};
use crate::metric::hp_metric;

/// How to turn a graph into cluster labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterMethod {
    /// k-medoids directly on `d^{1/2}`.
    KmedoidsD12,
    /// k-means on the first `k - 1` principal components of `d^{1/2}`.
    PcaKmeansD12,
    /// k-means on the first `k - 1` principal components of the adjacency matrix.
    PcaKmeansA,
}

impl FromStr for ClusterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmedoids-d12" => Ok(Self::KmedoidsD12),
            "pca-kmeans-d12" => Ok(Self::PcaKmeansD12),
            "pca-kmeans-A" | "pca-kmeans-a" => Ok(Self::PcaKmeansA),
            _ => Err(Error::Usage(format!("unknown clustering method {s:?}"))),
        }
    }
}

/// `d^{1/2}` of the random walk on `g`.
pub fn half_distance(g: &WeightedDigraph) -> Result<Mat<f64>> {
    let p = row_normalize(g)?;
    Ok(hp_metric(&p, 0.5)?.distance.matrix().to_owned())
}

fn pca_kmeans(m: MatRef<'_, f64>, k: usize, restarts: usize, seed: u64) -> Result<Vec<usize>> {
    let dims = k.saturating_sub(1).max(1);
    let e = pca_embed(m, dims)?;
    Ok(kmeans(e.coords.as_ref(), k, restarts, seed)?.labels)
}

/// Clusters the nodes of `g` into `k` groups.
pub fn cluster_graph(
    g: &WeightedDigraph,
    method: ClusterMethod,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    match method {
        ClusterMethod::KmedoidsD12 => Ok(kmedoids(half_distance(g)?.as_ref(), k, restarts, seed)?.labels),
        ClusterMethod::PcaKmeansD12 => pca_kmeans(half_distance(g)?.as_ref(), k, restarts, seed),
        ClusterMethod::PcaKmeansA => pca_kmeans(g.to_dense().as_ref(), k, restarts, seed),
    }
}

/// Accuracy of each method on one planted-partition draw.
#[derive(Debug, Clone, Serialize)]
pub struct PlantedTrial {
    pub graph_seed: u64,
    pub strongly_connected: bool,
    /// `(method, accuracy)`; empty when the graph was not strongly connected.
    pub accuracy: Vec<(ClusterMethod, f64)>,
}

impl PlantedTrial {
    pub fn accuracy_of(&self, method: ClusterMethod) -> Option<f64> {
        self.accuracy.iter().find(|(m, _)| *m == method).map(|&(_, a)| a)
    }
}

/// Draws a planted-partition graph and scores every method on it. Graphs
/// that are not strongly connected are reported but not clustered.
pub fn planted_trial(
    spec: &PlantedPartition,
    methods: &[ClusterMethod],
    restarts: usize,
    graph_seed: u64,
    cluster_seed: u64,
) -> Result<PlantedTrial> {
    let (g, truth) = spec.build(graph_seed);
    if !g.is_strongly_connected() {
        return Ok(PlantedTrial {
            graph_seed,
            strongly_connected: false,
            accuracy: Vec::new(),
        });
    }
    let d = if methods.iter().any(|m| *m != ClusterMethod::PcaKmeansA) {
        Some(half_distance(&g)?)
    } else {
        None
    };
    let accuracy = methods
        .iter()
        .map(|&m| {
            let labels = match m {
                ClusterMethod::KmedoidsD12 => {
                    kmedoids(d.as_ref().expect("computed").as_ref(), spec.k, restarts, cluster_seed)?.labels
                }
                ClusterMethod::PcaKmeansD12 => {
                    pca_kmeans(d.as_ref().expect("computed").as_ref(), spec.k, restarts, cluster_seed)?
                }
                ClusterMethod::PcaKmeansA => pca_kmeans(g.to_dense().as_ref(), spec.k, restarts, cluster_seed)?,
            };
            Ok((m, purity_accuracy(&labels, &truth)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlantedTrial {
        graph_seed,
        strongly_connected: true,
        accuracy,
    })
}

/// Median of a non-empty sample.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn easy_planted_partition_is_recovered() {
        let spec = PlantedPartition::new(90, 3, 0.5, 0.05).unwrap();
        let t = planted_trial(
            &spec,
            &[ClusterMethod::KmedoidsD12, ClusterMethod::PcaKmeansD12, ClusterMethod::PcaKmeansA],
            5,
            3,
            1,
        )
        .unwrap();
        assert!(t.strongly_connected);
        for (m, a) in &t.accuracy {
            assert!(*a >= 0.95, "{m:?} {a}");
        }
    }

    #[test]
    fn clustering_is_seed_deterministic() {
        let spec = PlantedPartition::new(60, 3, 0.4, 0.2).unwrap();
        let (g, _) = spec.build(5);
        let a = cluster_graph(&g, ClusterMethod::PcaKmeansD12, 3, 5, 8).unwrap();
        let b = cluster_graph(&g, ClusterMethod::PcaKmeansD12, 3, 5, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn method_names() {
        assert_eq!("pca-kmeans-A".parse::<ClusterMethod>().unwrap(), ClusterMethod::PcaKmeansA);
        assert!("spectral".parse::<ClusterMethod>().is_err());
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    }
}
