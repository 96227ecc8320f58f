//! Fiedler vectors of four symmetrizations on an ER block with a trapping cycle.

use hpmetric::analysis::ErCycle;
use hpmetric::graph::row_normalize;
use hpmetric::hitting::hitting_fast;
use hpmetric::spectral::{fiedler_vector, symmetrize, Symmetrization};
use hpmetric::stationary::stationary_distribution;

fn main() -> hpmetric::Result<()> {
    let spec = ErCycle::new(20, 8, 0.5, 3.0)?;
    let g = spec.build(1)?.graph;
    let p = row_normalize(&g)?;
    let phi = stationary_distribution(&p)?;
    let q = hitting_fast(&p)?;
    let kinds = [
        Symmetrization::Additive,
        Symmetrization::Max,
        Symmetrization::Chung,
        Symmetrization::Hp(0.5),
        Symmetrization::Hp(1.0),
    ];
    print!("{:<6}", "node");
    for k in &kinds {
        print!("{:>12}", format!("{k:?}").to_lowercase());
    }
    println!();
    let vectors = kinds
        .iter()
        .map(|&k| Ok(fiedler_vector(symmetrize(&p, &phi, Some(&q), k)?.laplacian().as_ref())?.vector))
        .collect::<hpmetric::Result<Vec<_>>>()?;
    for i in 0..p.n() {
        print!("{:<6}", p.labels()[i]);
        for v in &vectors {
            print!("{:>12.4}", v[i]);
        }
        println!();
    }
    Ok(())
}
