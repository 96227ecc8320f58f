//! Recovering planted communities with d^{1/2} versus the adjacency matrix.

use hpmetric::analysis::{empirical_p_value, median, planted_trial, ClusterMethod, PlantedPartition};

fn main() -> hpmetric::Result<()> {
    let spec = PlantedPartition::from_density(300, 3, 0.40, 0.06)?;
    println!("n = {}, k = {}, p_in = {:.2}, p_out = {:.2}", spec.n, spec.k, spec.p_in, spec.p_out);
    let methods = [ClusterMethod::KmedoidsD12, ClusterMethod::PcaKmeansD12, ClusterMethod::PcaKmeansA];
    let mut acc = vec![Vec::new(); methods.len()];
    for seed in 0..5 {
        let trial = planted_trial(&spec, &methods, 5, seed, 1)?;
        for (m, a) in methods.iter().zip(acc.iter_mut()) {
            if let Some(x) = trial.accuracy_of(*m) {
                a.push(x);
            }
        }
    }
    for (m, a) in methods.iter().zip(&acc) {
        let med = median(a);
        let pv = empirical_p_value(med, &spec.truth(), spec.k, 1000, 7)?;
        println!("{m:?}: median accuracy {med:.3}, p-value {pv:.4}");
    }
    Ok(())
}
