//! Degenerate classes, their segments, and the quotient chain.

use hpmetric::analysis::{fixtures::degenerate_family, GluedCycles};
use hpmetric::graph::{row_normalize, WeightedDigraph};
use hpmetric::metric::{degenerate_pairs, hp_metric, DEFAULT_TOL_DEG};
use hpmetric::quotient::{analyze, check_quotient_bounds};

fn show(name: &str, g: &WeightedDigraph) -> hpmetric::Result<()> {
    let p = row_normalize(g)?;
    let m = hp_metric(&p, 0.5)?;
    let report = degenerate_pairs(&m.q, &m.phi, DEFAULT_TOL_DEG)?;
    let qa = analyze(&p, &m.phi, &report)?;
    println!("{name}: {} states -> {} states", p.n(), qa.chain.p.n());
    for cls in qa.classes.iter().filter(|c| c.len() > 1) {
        let names: Vec<&str> = cls.members.iter().map(|&i| p.labels()[i].as_str()).collect();
        println!("  class in cyclic order: {}", names.join(" -> "));
    }
    println!("  absolute segments: {}", qa.absolute.segments.len());
    let after = hp_metric(&qa.chain.p, 0.5)?;
    let bounds = check_quotient_bounds(&m.distance, &after.distance, &qa);
    println!(
        "  bounds hold on {} pairs: {} (isometry error {:.1e})",
        bounds.pairs_checked,
        bounds.ok(),
        bounds.worst_isometry_error
    );
    let again = degenerate_pairs(&after.q, &after.phi, DEFAULT_TOL_DEG)?;
    println!("  quotient still degenerate: {}\n", again.degenerate);
    Ok(())
}

fn main() -> hpmetric::Result<()> {
    show("glued cycles (3,4,2)", &GluedCycles::new(3, 4, 2)?.build())?;
    show("random degenerate graph", &degenerate_family(4))?;
    Ok(())
}
