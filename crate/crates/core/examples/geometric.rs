//! How well d^{1/2} and d^1 track Euclidean distance on sampled manifolds.

use hpmetric::analysis::{distance_curves, pca_embed, spearman, Domain, Geometric};
use hpmetric::graph::row_normalize;
use hpmetric::metric::hp_metric;

fn main() -> hpmetric::Result<()> {
    for (domain, n) in [(Domain::Circle, 300), (Domain::Sphere, 300), (Domain::TorusWithHole, 300)] {
        let spec = Geometric::new(domain, n, 1.0)?;
        let gg = spec.build(3);
        let p = row_normalize(&gg.graph)?;
        let euclid: Vec<f64> = gg.coords.iter().map(|x| spec.distance(&gg.coords[0], x)).collect();
        let d_half = hp_metric(&p, 0.5)?.distance;
        let d_one = hp_metric(&p, 1.0)?.distance;
        let row = |d: &hpmetric::metric::HpDistance| (0..n).map(|j| d.get(0, j)).collect::<Vec<_>>();
        let (h, o) = (row(&d_half), row(&d_one));
        println!(
            "{domain:?}: spearman d1/2 {:.4}, d1 {:.4}",
            spearman(&h, &euclid)?,
            spearman(&o, &euclid)?
        );
        let curves = distance_curves(0, &[("euclid", &euclid), ("d12", &h), ("d1", &o)])?;
        let mid = curves.nodes.len() / 2;
        for (name, c) in &curves.curves {
            println!("  {name:<7} at median rank: {:.3}", c[mid]);
        }
        let e = pca_embed(d_half.matrix(), 2)?;
        println!("  PCA of d1/2 explains {:.1}% in 2 dims", 100.0 * e.explained.iter().sum::<f64>());
    }

    let lattice = Geometric::new(Domain::TorusLattice, 100, 1.0)?.build(0);
    let p = row_normalize(&lattice.graph)?;
    let (h, o) = (hp_metric(&p, 0.5)?.distance, hp_metric(&p, 1.0)?.distance);
    let shift = o.get(0, 1) - h.get(0, 1);
    let worst = (0..100)
        .flat_map(|i| (0..100).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| (o.get(i, j) - h.get(i, j) - shift).abs())
        .fold(0.0f64, f64::max);
    println!("torus lattice: d1 - d1/2 = {shift:.6} (ln n = {:.6}), spread {worst:.1e}", 100f64.ln());
    Ok(())
}
