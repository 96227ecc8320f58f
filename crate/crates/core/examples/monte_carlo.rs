//! Simulated excursions against the exact hitting probabilities.

use hpmetric::analysis::GluedCycles;
use hpmetric::graph::{row_normalize, TransitionMatrix};
use hpmetric::hitting::{hitting_fast, simulate_hit_before_return, simulate_visit_counts};
use hpmetric::stationary::stationary_distribution;

fn main() -> hpmetric::Result<()> {
    let k3 = TransitionMatrix::from_rows(&[vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5], vec![0.5, 0.5, 0.0]])?;
    let glued = row_normalize(&GluedCycles::new(3, 4, 2)?.build())?;
    for (name, p) in [("K3", k3), ("glued (3,4,2)", glued)] {
        let q = hitting_fast(&p)?;
        let phi = stationary_distribution(&p)?;
        println!("{name}");
        for (i, j) in [(0, 1), (1, 0), (0, p.n() - 1)] {
            let hit = simulate_hit_before_return(&p, i, j, 100_000, 7)?;
            let vis = simulate_visit_counts(&p, i, j, 100_000, 8)?;
            println!(
                "  {i}->{j}: Q {:.4} vs {:.4} +- {:.4};  visits {:.4} vs {:.4} +- {:.4}",
                q.get(i, j),
                hit.mean,
                hit.std_err,
                phi[j] / phi[i],
                vis.mean,
                vis.std_err
            );
        }
    }
    Ok(())
}
