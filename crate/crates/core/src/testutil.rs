//! Small chains shared by the unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{row_normalize, TransitionMatrix, WeightedDigraph};

pub fn cycle(n: usize) -> TransitionMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if j == (i + 1) % n { 1.0 } else { 0.0 }).collect())
        .collect();
    TransitionMatrix::from_rows(&rows).unwrap()
}

pub fn complete(n: usize) -> TransitionMatrix {
    let v = 1.0 / (n - 1) as f64;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { v }).collect())
        .collect();
    TransitionMatrix::from_rows(&rows).unwrap()
}

/// Random strongly connected digraph: a Hamiltonian cycle plus random
/// weighted chords.
pub fn random_chain(n: usize, seed: u64) -> TransitionMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = WeightedDigraph::with_nodes(n);
    for i in 0..n {
        g.add_edge(i, (i + 1) % n, rng.random_range(0.1..2.0)).unwrap();
    }
    for _ in 0..(2 * n) {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        g.add_edge(a, b, rng.random_range(0.1..2.0)).unwrap();
    }
    row_normalize(&g).unwrap()
}
