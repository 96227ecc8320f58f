//! Weighted digraphs, strongly connected components, and row-stochastic
//! transition matrices.
//!
//! Graphs are stored sparse (one sorted adjacency list per node). A
//! [`TransitionMatrix`] is always dense: every downstream kernel is a dense
//! O(n³) computation, so the dense form is materialized once at
//! normalization time and capped at [`MAX_DENSE_NODES`].

pub mod io;
mod scc;

use std::collections::HashSet;

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

pub use scc::{is_strongly_connected, strongly_connected_components};

/// Largest chain that will be materialized as a dense transition matrix.
pub const MAX_DENSE_NODES: usize = 12_000;

/// Row sums of a [`TransitionMatrix`] must be within this of one.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A directed graph with nonnegative edge weights and unique node labels.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    labels: Vec<String>,
    out: Vec<Vec<(usize, f64)>>,
}

impl WeightedDigraph {
    /// Empty graph over the given labels.
    pub fn new(labels: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Domain(format!("duplicate node label {l:?}")));
            }
        }
        let out = vec![Vec::new(); labels.len()];
        Ok(Self { labels, out })
    }

    /// Empty graph with labels `0..n`.
    pub fn with_nodes(n: usize) -> Self {
        Self {
            labels: (0..n).map(|i| i.to_string()).collect(),
            out: vec![Vec::new(); n],
        }
    }

    /// Graph from a dense row-major weight matrix (`rows[i][j]` is the weight of `i -> j`).
    pub fn from_dense(labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let mut g = Self::new(labels)?;
        if rows.len() != g.n() {
            return Err(Error::Domain(format!(
                "expected {} rows, found {}",
                g.n(),
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != g.n() {
                return Err(Error::Domain(format!("row {i} has {} entries", row.len())));
            }
            for (j, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    g.add_edge(i, j, w)?;
                }
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Outgoing `(target, weight)` pairs of `i`, sorted by target.
    pub fn out_edges(&self, i: usize) -> &[(usize, f64)] {
        &self.out[i]
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match self.out[i].binary_search_by_key(&j, |&(t, _)| t) {
            Ok(pos) => self.out[i][pos].1,
            Err(_) => 0.0,
        }
    }

    fn check_edge(&self, i: usize, j: usize, w: f64) -> Result<()> {
        if i >= self.n() || j >= self.n() {
            return Err(Error::Domain(format!(
                "edge ({i}, {j}) out of range for {} nodes",
                self.n()
            )));
        }
        if !w.is_finite() {
            return Err(Error::Domain(format!("non-finite weight on edge ({i}, {j})")));
        }
        if w < 0.0 {
            return Err(Error::Domain(format!("negative weight {w} on edge ({i}, {j})")));
        }
        Ok(())
    }

    /// Adds `w` to the weight of `i -> j`; parallel edges accumulate.
    pub fn add_edge(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        self.check_edge(i, j, w)?;
        let row = &mut self.out[i];
        match row.binary_search_by_key(&j, |&(t, _)| t) {
            Ok(pos) => row[pos].1 += w,
            Err(pos) => row.insert(pos, (j, w)),
        }
        Ok(())
    }

    /// Overwrites the weight of `i -> j`.
    pub fn set_edge(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        self.check_edge(i, j, w)?;
        let row = &mut self.out[i];
        match row.binary_search_by_key(&j, |&(t, _)| t) {
            Ok(pos) => row[pos].1 = w,
            Err(pos) => row.insert(pos, (j, w)),
        }
        Ok(())
    }

    /// Successor lists of the support graph (edges with positive weight).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.out
            .iter()
            .map(|row| row.iter().filter(|e| e.1 > 0.0).map(|e| e.0).collect())
            .collect()
    }

    /// Subgraph induced by `nodes`, in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Self {
        let mut index = vec![usize::MAX; self.n()];
        for (new, &old) in nodes.iter().enumerate() {
            index[old] = new;
        }
        let out = nodes
            .iter()
            .map(|&old| {
                self.out[old]
                    .iter()
                    .filter(|&&(t, _)| index[t] != usize::MAX)
                    .map(|&(t, w)| (index[t], w))
                    .collect::<Vec<_>>()
            })
            .map(|mut row| {
                row.sort_by_key(|e| e.0);
                row
            })
            .collect();
        Self {
            labels: nodes.iter().map(|&i| self.labels[i].clone()).collect(),
            out,
        }
    }

    /// Copy with all `i -> i` edges removed.
    pub fn without_self_loops(&self) -> Self {
        let out = self
            .out
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().copied().filter(|&(t, _)| t != i).collect())
            .collect();
        Self {
            labels: self.labels.clone(),
            out,
        }
    }

    /// Dense weight matrix.
    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.n(), self.n());
        for (i, row) in self.out.iter().enumerate() {
            for &(j, w) in row {
                m[(i, j)] = w;
            }
        }
        m
    }

    pub fn is_strongly_connected(&self) -> bool {
        is_strongly_connected(&self.adjacency())
    }
}

/// Restricts `g` to its largest strongly connected component.
///
/// Ties in component size go to the component containing the smallest
/// original index. The returned map sends each original index to its new
/// index, or `None` if the node was dropped. Nodes keep their relative order.
pub fn largest_scc(g: &WeightedDigraph) -> (WeightedDigraph, Vec<Option<usize>>) {
    let comps = strongly_connected_components(&g.adjacency());
    let best = comps
        .into_iter()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])));
    let keep = best.unwrap_or_default();
    let mut map = vec![None; g.n()];
    for (new, &old) in keep.iter().enumerate() {
        map[old] = Some(new);
    }
    (g.induced_subgraph(&keep), map)
}

/// An irreducible row-stochastic matrix with node labels.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    labels: Vec<String>,
    p: Mat<f64>,
}

impl TransitionMatrix {
    /// Validates a dense matrix as an irreducible transition matrix.
    pub fn from_dense(labels: Vec<String>, p: Mat<f64>) -> Result<Self> {
        let n = labels.len();
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::Domain(format!(
                "matrix is {}x{} but there are {n} labels",
                p.nrows(),
                p.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::Domain("empty chain".into()));
        }
        if n > MAX_DENSE_NODES {
            return Err(Error::Domain(format!(
                "{n} states exceeds the dense limit of {MAX_DENSE_NODES}"
            )));
        }
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let v = p[(i, j)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Domain(format!("P[{i},{j}] = {v} is not a probability")));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Domain(format!("row {i} sums to {sum}")));
            }
        }
        let t = Self { labels, p };
        if !is_strongly_connected(&t.successors()) {
            return Err(Error::Irreducible("support graph is not strongly connected".into()));
        }
        Ok(t)
    }

    /// Row-stochastic matrix from a row-major nested vector; labels `0..n`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("matrix is not square".into()));
        }
        let p = Mat::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_dense((0..n).map(|i| i.to_string()).collect(), p)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn p(&self) -> MatRef<'_, f64> {
        self.p.as_ref()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    /// Successor lists of the support graph.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).filter(|&j| self.p[(i, j)] > 0.0).collect())
            .collect()
    }

    /// Predecessor lists of the support graph.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut pred = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if self.p[(i, j)] > 0.0 {
                    pred[j].push(i);
                }
            }
        }
        pred
    }

    /// The weighted digraph with weights equal to the transition probabilities.
    pub fn to_digraph(&self) -> WeightedDigraph {
        let n = self.n();
        let out = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| self.p[(i, j)] > 0.0)
                    .map(|j| (j, self.p[(i, j)]))
                    .collect()
            })
            .collect();
        WeightedDigraph {
            labels: self.labels.clone(),
            out,
        }
    }
}

/// Divides every row of `g` by its total weight.
///
/// Fails on a node with no outgoing weight (naming it) and on graphs whose
/// support is not strongly connected.
pub fn row_normalize(g: &WeightedDigraph) -> Result<TransitionMatrix> {
    let n = g.n();
    if n == 0 {
        return Err(Error::Domain("empty graph".into()));
    }
    if n > MAX_DENSE_NODES {
        return Err(Error::Domain(format!(
            "{n} nodes exceeds the dense limit of {MAX_DENSE_NODES}"
        )));
    }
    let mut p = Mat::zeros(n, n);
    for i in 0..n {
        let total: f64 = g.out_edges(i).iter().map(|e| e.1).sum();
        if total <= 0.0 {
            return Err(Error::ZeroRow {
                label: g.labels()[i].clone(),
            });
        }
        for &(j, w) in g.out_edges(i) {
            p[(i, j)] = w / total;
        }
    }
    if !g.is_strongly_connected() {
        return Err(Error::Irreducible(format!(
            "graph on {n} nodes is not strongly connected"
        )));
    }
    Ok(TransitionMatrix {
        labels: g.labels().to_vec(),
        p,
    })
}
