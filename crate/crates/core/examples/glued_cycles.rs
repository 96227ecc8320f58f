//! Hitting probabilities, similarity and d^{1/2} on glued cycles.
//!
//! Distances between backbone and branches do not depend on the cycle
//! lengths, only on the number of branches.

use hpmetric::analysis::GluedCycles;
use hpmetric::graph::row_normalize;
use hpmetric::metric::hp_metric;

fn main() -> hpmetric::Result<()> {
    for (n_b, n_c, c) in [(3, 4, 2), (5, 55, 2)] {
        let spec = GluedCycles::new(n_b, n_c, c)?;
        let p = row_normalize(&spec.build())?;
        let m = hp_metric(&p, 0.5)?;
        let b = spec.backbone().start;
        let (x, y) = (spec.branch(0).start, spec.branch(1).start);
        println!("glued cycles n_b={n_b} n_c={n_c} C={c} ({} nodes)", spec.n());
        println!("  {:<22}{:>10}{:>10}{:>10}", "pair", "Q", "A", "d");
        for (name, i, j) in [
            ("backbone-backbone", b, b + 1),
            ("backbone-branch", b, x),
            ("branch-backbone", x, b),
            ("same branch", x, x + 1),
            ("across branches", x, y),
        ] {
            println!(
                "  {:<22}{:>10.6}{:>10.6}{:>10.6}",
                name,
                m.q.get(i, j),
                m.similarity.get(i, j),
                m.distance.get(i, j)
            );
        }
        println!("  ln 2 = {:.6}, ln(C)/2 = {:.6}\n", 2f64.ln(), (c as f64).ln() / 2.0);
    }
    Ok(())
}
