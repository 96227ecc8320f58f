//! The rank-2 updated solver against one linear solve per column.

use std::time::Instant;

use hpmetric::graph::{row_normalize, WeightedDigraph};
use hpmetric::hitting::{hitting_fast, hitting_reference_matrix};
use hpmetric::stationary::stationary_distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(n: usize, seed: u64) -> WeightedDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = WeightedDigraph::with_nodes(n);
    for i in 0..n {
        g.add_edge(i, (i + 1) % n, 1.0).unwrap();
        for _ in 0..3 {
            let j = rng.random_range(0..n);
            g.add_edge(i, j, rng.random_range(0.1..2.0)).unwrap();
        }
    }
    g
}

fn main() -> hpmetric::Result<()> {
    println!("{:>6}{:>12}{:>12}{:>12}{:>14}", "n", "fast s", "ref s", "max diff", "balance");
    for n in [50, 100, 200, 400] {
        let p = row_normalize(&random_graph(n, n as u64))?;
        let t = Instant::now();
        let fast = hitting_fast(&p)?;
        let tf = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let reference = hitting_reference_matrix(&p)?;
        let tr = t.elapsed().as_secs_f64();
        let phi = stationary_distribution(&p)?;
        println!(
            "{n:>6}{tf:>12.4}{tr:>12.4}{:>12.2e}{:>14.2e}",
            fast.max_abs_diff(&reference),
            fast.detailed_balance_residual(&phi)
        );
    }
    Ok(())
}
