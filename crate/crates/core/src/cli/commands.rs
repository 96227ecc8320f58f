use std::io::Write;
use std::time::Instant;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::args::*;
use super::output::{load_chain, read_graph, read_truth, Run};
use super::verify;
use crate::analysis::{
    cluster_graph, empirical_p_value, pca_embed, purity_accuracy, ClusterMethod, ErCycle, Geometric, GluedCycles,
    PlantedPartition,
};
use crate::error::{Error, Result};
use crate::graph::io::{fmt_f64, write_dense_csv, write_edge_csv};
use crate::graph::{largest_scc, row_normalize, TransitionMatrix, WeightedDigraph};
use crate::hitting::{hitting_fast, hitting_reference_matrix, simulate_hit_before_return};
use crate::metric::{degenerate_pairs, hp_distance_with_tol, hp_metric, hp_similarity};
use crate::quotient::{analyze, check_quotient_bounds};
use crate::spectral::{fiedler_vector, symmetrize, Symmetrization};
use crate::stationary::stationary_distribution;

pub fn dispatch(cmd: Command, threads: usize) -> Result<i32> {
    match cmd {
        Command::Stationary(a) => stationary(a, threads),
        Command::Hitprob(a) => hitprob(a, threads),
        Command::Metric(a) => metric(a, threads),
        Command::Quotient(a) => quotient(a, threads),
        Command::Symmetrize(a) => symmetrize_cmd(a, threads),
        Command::Fiedler(a) => fiedler(a, threads),
        Command::Generate(a) => generate(a, threads),
        Command::Cluster(a) => cluster(a, threads),
        Command::Embed(a) => embed(a, threads),
        Command::Verify(a) => verify::run(a, threads),
        Command::Bench(a) => bench(a, threads),
    }
    .map(|ok| if ok { 0 } else { 1 })
}

fn stationary(a: StationaryArgs, threads: usize) -> Result<bool> {
    let run = Run::new("stationary", &a, None, threads);
    let p = load_chain(&a.input)?;
    let phi = stationary_distribution(&p)?;
    run.emit(a.out.as_deref(), json!({ "n": p.n() }), |w| {
        writeln!(w, "label,phi")?;
        for (l, v) in p.labels().iter().zip(phi.as_slice()) {
            writeln!(w, "{l},{}", fmt_f64(*v))?;
        }
        Ok(())
    })?;
    Ok(true)
}

fn label_index(p: &TransitionMatrix, label: &str) -> Result<usize> {
    p.labels()
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::Usage(format!("no node labelled {label:?}")))
}

#[derive(Serialize)]
struct McReport<'a> {
    source: &'a str,
    target: &'a str,
    estimate: f64,
    std_err: f64,
    walks: u64,
    seed: u64,
    exact: f64,
}

fn hitprob(a: HitprobArgs, threads: usize) -> Result<bool> {
    let seed = a.mc.as_ref().map(|_| a.seed);
    let run = Run::new("hitprob", &a, seed, threads);
    let p = load_chain(&a.input)?;
    if let Some(pair) = &a.mc {
        let (i, j) = (label_index(&p, &pair[0])?, label_index(&p, &pair[1])?);
        let est = simulate_hit_before_return(&p, i, j, a.walks, a.seed)?;
        let exact = crate::hitting::hitting_reference(&p, j)?[i];
        let report = McReport {
            source: &pair[0],
            target: &pair[1],
            estimate: est.mean,
            std_err: est.std_err,
            walks: est.walks,
            seed: a.seed,
            exact,
        };
        run.emit_json(a.out.as_deref(), &report)?;
        return Ok(true);
    }
    let q = if a.reference {
        hitting_reference_matrix(&p)?
    } else {
        hitting_fast(&p)?
    };
    let solver = if a.reference { "reference" } else { "fast" };
    run.emit(a.out.as_deref(), json!({ "n": p.n(), "solver": solver }), |w| {
        write_dense_csv(w, p.labels(), q.matrix())
    })?;
    Ok(true)
}

fn metric(a: MetricArgs, threads: usize) -> Result<bool> {
    let run = Run::new("metric", &a, None, threads);
    let p = load_chain(&a.input)?;
    let phi = stationary_distribution(&p)?;
    let q = hitting_fast(&p)?;
    let sim = hp_similarity(&q, &phi, a.beta)?;
    let d = hp_distance_with_tol(&sim, a.tol_deg)?;
    let results = json!({ "n": p.n(), "beta": a.beta, "is_pseudo": d.is_pseudo(), "asymmetry": sim.asymmetry });
    if let Some(path) = &a.similarity {
        run.emit(Some(path), results.clone(), |w| write_dense_csv(w, p.labels(), sim.matrix()))?;
    }
    run.emit(a.out.as_deref(), results, |w| write_dense_csv(w, p.labels(), d.matrix()))?;
    Ok(true)
}

fn quotient(a: QuotientArgs, threads: usize) -> Result<bool> {
    let run = Run::new("quotient", &a, None, threads);
    let p = load_chain(&a.input)?;
    let phi = stationary_distribution(&p)?;
    let q = hitting_fast(&p)?;
    let report = degenerate_pairs(&q, &phi, a.tol_deg)?;
    let qa = analyze(&p, &phi, &report)?;
    let sim = hp_similarity(&q, &phi, 0.5)?;
    let d = hp_distance_with_tol(&sim, a.tol_deg)?;
    let d_prime = hp_metric(&qa.chain.p, 0.5)?.distance;
    let bounds = check_quotient_bounds(&d, &d_prime, &qa);
    if !bounds.ok() {
        eprintln!("warning: {} quotient distance bounds violated", bounds.violations.len());
    }
    let results = json!({
        "n": p.n(),
        "states": qa.chain.p.n(),
        "degenerate": report.degenerate,
        "bounds_ok": bounds.ok(),
        "worst_isometry_error": bounds.worst_isometry_error,
    });
    let qp = &qa.chain.p;
    if let Some(path) = &a.map {
        run.emit(Some(path), results.clone(), |w| {
            writeln!(w, "node,class")?;
            for (l, &u) in p.labels().iter().zip(&qa.chain.class_map) {
                writeln!(w, "{l},{}", qp.labels()[u])?;
            }
            Ok(())
        })?;
    }
    run.emit(a.out.as_deref(), results, |w| write_dense_csv(w, qp.labels(), qp.p()))?;
    Ok(true)
}

fn sym_kind(method: SymMethod, beta: Option<f64>) -> Result<Symmetrization> {
    let (name, beta) = match method {
        SymMethod::Additive => ("additive", beta),
        SymMethod::Max => ("max", beta),
        SymMethod::Chung => ("chung", beta),
        SymMethod::Hp => ("hp", Some(beta.unwrap_or(0.5))),
    };
    Symmetrization::parse(name, beta)
}

fn operator(p: &TransitionMatrix, kind: Symmetrization) -> Result<crate::spectral::SymmetricOperator> {
    let phi = stationary_distribution(p)?;
    let q = match kind {
        Symmetrization::Hp(_) => Some(hitting_fast(p)?),
        _ => None,
    };
    symmetrize(p, &phi, q.as_ref(), kind)
}

fn symmetrize_cmd(a: SymmetrizeArgs, threads: usize) -> Result<bool> {
    let run = Run::new("symmetrize", &a, None, threads);
    let kind = sym_kind(a.method, a.beta)?;
    let p = load_chain(&a.input)?;
    let op = operator(&p, kind)?;
    let results = json!({ "n": p.n(), "kind": kind, "laplacian": op.is_laplacian() });
    run.emit(a.out.as_deref(), results, |w| write_dense_csv(w, p.labels(), op.m.as_ref()))?;
    Ok(true)
}

fn fiedler(a: FiedlerArgs, threads: usize) -> Result<bool> {
    let run = Run::new("fiedler", &a, None, threads);
    let kind = sym_kind(a.method, a.beta)?;
    let p = load_chain(&a.input)?;
    let f = fiedler_vector(operator(&p, kind)?.laplacian().as_ref())?;
    if f.eigengap_warning {
        eprintln!("warning: second and third eigenvalues coincide; the Fiedler vector is not unique");
    }
    let results = json!({
        "n": p.n(),
        "kind": kind,
        "lambda2": f.lambda2,
        "lambda3": f.lambda3,
        "eigengap_warning": f.eigengap_warning,
    });
    run.emit(a.out.as_deref(), results, |w| {
        writeln!(w, "label,value,sign")?;
        for ((l, v), s) in p.labels().iter().zip(&f.vector).zip(&f.signs) {
            writeln!(w, "{l},{},{s}", fmt_f64(*v))?;
        }
        Ok(())
    })?;
    Ok(true)
}

/// A generated graph with optional ground truth and coordinates.
pub struct Generated {
    pub graph: WeightedDigraph,
    pub truth: Option<Vec<usize>>,
    pub coords: Option<Vec<Vec<f64>>>,
    pub seed_used: u64,
}

pub fn build_model(model: Model, m: &ModelArgs, seed: u64) -> Result<Generated> {
    let plain = |graph, truth| Generated {
        graph,
        truth: Some(truth),
        coords: None,
        seed_used: seed,
    };
    Ok(match model {
        Model::Glued => {
            let spec = GluedCycles::new(m.nb, m.nc, m.c)?;
            let mut truth = vec![0; spec.n()];
            for b in 0..m.c {
                spec.branch(b).for_each(|i| truth[i] = b + 1);
            }
            plain(spec.build(), truth)
        }
        Model::ErCycle => {
            let mut spec = ErCycle::new(m.n_er, m.n_cycle, m.p, m.w)?;
            spec.self_loops = m.self_loops;
            let g = spec.build(seed)?;
            let truth = (0..m.n_er + m.n_cycle).map(|i| usize::from(i >= m.n_er)).collect();
            Generated {
                seed_used: g.seed_used,
                ..plain(g.graph, truth)
            }
        }
        Model::Planted => {
            let spec = PlantedPartition::from_density(m.n.unwrap_or(300), m.k, m.rho, m.delta)?;
            let (g, truth) = spec.build(seed);
            plain(g, truth)
        }
        Model::Geometric => {
            let gg = Geometric::new(m.domain.into(), m.n.unwrap_or(500), m.gamma)?.build(seed);
            Generated {
                graph: gg.graph,
                truth: None,
                coords: Some(gg.coords),
                seed_used: seed,
            }
        }
    })
}

fn generate(a: GenerateArgs, threads: usize) -> Result<bool> {
    let run = Run::new("generate", &a, Some(a.seed), threads);
    let gen = build_model(a.model, &a.params, a.seed)?;
    let g = &gen.graph;
    if !g.is_strongly_connected() {
        eprintln!(
            "warning: generated graph is not strongly connected (largest component {} of {})",
            largest_scc(g).0.n(),
            g.n()
        );
    }
    let results = json!({
        "n": g.n(),
        "edges": g.edge_count(),
        "seed_used": gen.seed_used,
        "strongly_connected": g.is_strongly_connected(),
    });
    if let Some(path) = &a.truth {
        let truth = gen
            .truth
            .as_ref()
            .ok_or_else(|| Error::Usage("this model has no ground truth".into()))?;
        run.emit(Some(path), results.clone(), |w| {
            writeln!(w, "node,community")?;
            for (l, c) in g.labels().iter().zip(truth) {
                writeln!(w, "{l},{c}")?;
            }
            Ok(())
        })?;
    }
    if let Some(path) = &a.coords {
        let coords = gen
            .coords
            .as_ref()
            .ok_or_else(|| Error::Usage("only geometric models have coordinates".into()))?;
        run.emit(Some(path), results.clone(), |w| write_coords(w, g.labels(), coords))?;
    }
    run.emit(a.out.as_deref(), results, |w| write_edge_csv(w, g))?;
    Ok(true)
}

fn write_coords(w: &mut dyn Write, labels: &[String], coords: &[Vec<f64>]) -> Result<()> {
    write!(w, "label")?;
    for d in 1..=coords.first().map_or(0, Vec::len) {
        write!(w, ",x{d}")?;
    }
    writeln!(w)?;
    for (l, x) in labels.iter().zip(coords) {
        write!(w, "{l}")?;
        for v in x {
            write!(w, ",{}", fmt_f64(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn load_graph(input: &InputArgs) -> Result<WeightedDigraph> {
    let mut g = read_graph(&input.input)?;
    if input.drop_self_loops {
        g = g.without_self_loops();
    }
    if input.largest_scc {
        g = largest_scc(&g).0;
    }
    Ok(g)
}

#[derive(Serialize)]
struct ClusterReport {
    method: String,
    k: usize,
    restarts: usize,
    seed: u64,
    nodes: Vec<String>,
    labels: Vec<usize>,
    accuracy: Option<f64>,
    p_value: Option<f64>,
}

fn cluster(a: ClusterArgs, threads: usize) -> Result<bool> {
    let run = Run::new("cluster", &a, Some(a.seed), threads);
    let method: ClusterMethod = a.method.parse()?;
    let g = load_graph(&a.input)?;
    let labels = cluster_graph(&g, method, a.k, a.restarts, a.seed)?;
    let (accuracy, p_value) = match &a.truth {
        Some(path) => {
            let truth = read_truth(path, g.labels())?;
            let acc = purity_accuracy(&labels, &truth)?;
            let pv = empirical_p_value(acc, &truth, a.k, a.trials, a.seed)?;
            (Some(acc), Some(pv))
        }
        None => (None, None),
    };
    let report = ClusterReport {
        method: a.method.clone(),
        k: a.k,
        restarts: a.restarts,
        seed: a.seed,
        nodes: g.labels().to_vec(),
        labels,
        accuracy,
        p_value,
    };
    run.emit_json(a.out.as_deref(), &report)?;
    Ok(true)
}

fn embed(a: EmbedArgs, threads: usize) -> Result<bool> {
    let run = Run::new("embed", &a, None, threads);
    let g = load_graph(&a.input)?;
    let m: Mat<f64> = match a.matrix {
        EmbedMatrix::D12 => hp_metric(&row_normalize(&g)?, 0.5)?.distance.matrix().to_owned(),
        EmbedMatrix::D1 => hp_metric(&row_normalize(&g)?, 1.0)?.distance.matrix().to_owned(),
        EmbedMatrix::A => g.to_dense(),
    };
    let e = pca_embed(m.as_ref(), a.dims)?;
    let coords: Vec<Vec<f64>> = (0..g.n())
        .map(|i| (0..e.coords.ncols()).map(|j| e.coords[(i, j)]).collect())
        .collect();
    let results = serde_json::to_value(e.summary()).map_err(|err| Error::Usage(err.to_string()))?;
    run.emit(a.out.as_deref(), results, |w| write_coords(w, g.labels(), &coords))?;
    Ok(true)
}

/// Random strongly connected digraph: a Hamiltonian cycle plus four random
/// out-edges per node, weights in `[0.5, 1.5)`.
fn bench_chain(n: usize, seed: u64) -> Result<TransitionMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = WeightedDigraph::with_nodes(n);
    for i in 0..n {
        g.add_edge(i, (i + 1) % n, rng.random_range(0.5..1.5))?;
        for _ in 0..4 {
            let j = rng.random_range(0..n);
            g.add_edge(i, j, rng.random_range(0.5..1.5))?;
        }
    }
    row_normalize(&g)
}

#[derive(Serialize)]
struct BenchPoint {
    n: usize,
    seconds: f64,
}

#[derive(Serialize)]
struct BenchReport {
    seed: u64,
    threads: usize,
    points: Vec<BenchPoint>,
    /// Time ratio between consecutive sizes.
    growth: Vec<f64>,
}

fn bench(a: BenchArgs, threads: usize) -> Result<bool> {
    let run = Run::new("bench", &a, Some(a.seed), threads);
    if a.reps == 0 || a.sizes.iter().any(|&n| n < 2) {
        return Err(Error::Usage("need at least one repetition and sizes >= 2".into()));
    }
    let mut points = Vec::new();
    for &n in &a.sizes {
        let p = bench_chain(n, a.seed)?;
        let mut best = f64::INFINITY;
        for _ in 0..a.reps {
            let t = Instant::now();
            hitting_fast(&p)?;
            best = best.min(t.elapsed().as_secs_f64());
        }
        eprintln!("n = {n}: {best:.3} s");
        points.push(BenchPoint { n, seconds: best });
    }
    let growth = points.windows(2).map(|w| w[1].seconds / w[0].seconds).collect();
    run.emit_json(
        a.out.as_deref(),
        &BenchReport {
            seed: a.seed,
            threads,
            points,
            growth,
        },
    )?;
    Ok(true)
}
