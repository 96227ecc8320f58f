//! The `verify` subcommand: executable checks of the structural identities.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::args::{Level, VerifyArgs};
use super::commands::build_model;
use super::output::{chain_from_path, Run};
use crate::error::{Error, Result};
use crate::graph::{row_normalize, TransitionMatrix};
use crate::hitting::{
    hitting_fast, hitting_reference_matrix, simulate_hit_before_return, simulate_visit_counts, HittingProbabilities,
};
use crate::metric::{
    degenerate_pairs, hp_distance_with_tol, hp_metric, hp_similarity, verify_metric_axioms, AxiomReport,
    AxiomTolerances,
};
use crate::quotient::{analyze, check_quotient_bounds};
use crate::stationary::{stationary_distribution, StationaryDistribution};

/// Absolute tolerance on `Q_ij phi_i - Q_ji phi_j` and on `Q_ik Q_kj - Q_ij`.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Largest chain on which the fast path is cross-checked column by column.
pub const CROSS_CHECK_LIMIT: usize = 200;
pub const FAST_VS_REFERENCE_TOL: f64 = 1e-8;
/// Simulation checks pass within `SE_MULTIPLE * SE + SE_FLOOR`.
pub const SE_MULTIPLE: f64 = 4.0;
pub const SE_FLOOR: f64 = 1e-10;
/// Share of simulation checks that must pass.
pub const ORACLE_PASS_RATE: f64 = 0.99;

#[derive(Debug, Serialize)]
struct IdentityReport {
    pass: bool,
    detailed_balance_residual: f64,
    submultiplicativity_violation: f64,
    fast_vs_reference: Option<f64>,
}

#[derive(Debug, Serialize)]
struct MetricLevel {
    beta: f64,
    pass: bool,
    axioms: AxiomReport,
}

#[derive(Debug, Serialize)]
struct QuotientReport {
    pass: bool,
    states: usize,
    non_singleton_classes: usize,
    bound_violations: usize,
    worst_isometry_error: f64,
    quotient_degenerate: bool,
}

#[derive(Debug, Serialize)]
struct OracleCheck {
    i: usize,
    j: usize,
    quantity: &'static str,
    estimate: f64,
    std_err: f64,
    exact: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    pass: bool,
    walks: u64,
    seed: u64,
    passed: usize,
    checks: Vec<OracleCheck>,
}

#[derive(Debug, Default, Serialize)]
struct Report {
    n: usize,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    identity: Option<IdentityReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    metric: Vec<MetricLevel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quotient: Option<QuotientReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleReport>,
}

fn source(a: &VerifyArgs) -> Result<TransitionMatrix> {
    match (&a.input, a.model) {
        (Some(path), _) => chain_from_path(path, a.largest_scc, a.drop_self_loops),
        (None, Some(model)) => row_normalize(&build_model(model, &a.params, a.seed)?.graph),
        (None, None) => Err(Error::Usage("verify needs --in or --model".into())),
    }
}

pub fn run(a: VerifyArgs, threads: usize) -> Result<bool> {
    let seed = a.levels.contains(&Level::Oracle).then_some(a.seed);
    let run = Run::new("verify", &a, seed, threads);
    let p = source(&a)?;
    let phi = stationary_distribution(&p)?;
    let q = hitting_fast(&p)?;
    let mut report = Report {
        n: p.n(),
        ..Default::default()
    };
    let mut pass = true;
    for level in &a.levels {
        match level {
            Level::Identity => {
                let r = identity(&p, &phi, &q)?;
                pass &= r.pass;
                report.identity = Some(r);
            }
            Level::Metric => {
                for beta in [0.5, 0.75, 1.0] {
                    let sim = hp_similarity(&q, &phi, beta)?;
                    let d = hp_distance_with_tol(&sim, a.tol_deg)?;
                    let axioms = verify_metric_axioms(d.matrix(), AxiomTolerances::default());
                    // At beta = 1/2 distinct states may sit at distance zero.
                    let ok = if beta > 0.5 {
                        axioms.is_metric()
                    } else {
                        axioms.symmetry_ok && axioms.triangle_ok && axioms.zero_diagonal_ok
                    };
                    pass &= ok;
                    report.metric.push(MetricLevel { beta, pass: ok, axioms });
                }
            }
            Level::Quotient => {
                let r = quotient(&p, &phi, &q, a.tol_deg)?;
                pass &= r.pass;
                report.quotient = Some(r);
            }
            Level::Oracle => {
                let r = oracle(&p, &phi, &q, a.walks, a.pairs, a.seed)?;
                pass &= r.pass;
                report.oracle = Some(r);
            }
        }
    }
    report.pass = pass;
    run.emit_json(a.out.as_deref(), &report)?;
    if !pass {
        eprintln!("verification failed");
    }
    Ok(pass)
}

fn identity(p: &TransitionMatrix, phi: &StationaryDistribution, q: &HittingProbabilities) -> Result<IdentityReport> {
    let balance = q.detailed_balance_residual(phi);
    let sub = if p.n() >= 3 { q.submultiplicativity_violation() } else { 0.0 };
    let cross = if p.n() <= CROSS_CHECK_LIMIT {
        Some(q.max_abs_diff(&hitting_reference_matrix(p)?))
    } else {
        None
    };
    Ok(IdentityReport {
        pass: balance <= IDENTITY_TOL && sub <= IDENTITY_TOL && cross.is_none_or(|c| c <= FAST_VS_REFERENCE_TOL),
        detailed_balance_residual: balance,
        submultiplicativity_violation: sub,
        fast_vs_reference: cross,
    })
}

fn quotient(
    p: &TransitionMatrix,
    phi: &StationaryDistribution,
    q: &HittingProbabilities,
    tol_deg: f64,
) -> Result<QuotientReport> {
    let deg = degenerate_pairs(q, phi, tol_deg)?;
    let qa = analyze(p, phi, &deg)?;
    let d = hp_distance_with_tol(&hp_similarity(q, phi, 0.5)?, tol_deg)?;
    let after = hp_metric(&qa.chain.p, 0.5)?;
    let bounds = check_quotient_bounds(&d, &after.distance, &qa);
    let again = degenerate_pairs(&after.q, &after.phi, tol_deg)?;
    Ok(QuotientReport {
        pass: bounds.ok() && !again.degenerate,
        states: qa.chain.p.n(),
        non_singleton_classes: deg.non_singleton().count(),
        bound_violations: bounds.violations.len(),
        worst_isometry_error: bounds.worst_isometry_error,
        quotient_degenerate: again.degenerate,
    })
}

/// Ordered pairs to simulate: all of them when there are at most `limit`,
/// otherwise a seeded sample.
fn oracle_pairs(n: usize, limit: usize, seed: u64) -> Vec<(usize, usize)> {
    let all: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    if all.len() <= limit {
        return all;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, all.len(), limit).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|k| all[k]).collect()
}

fn oracle(
    p: &TransitionMatrix,
    phi: &StationaryDistribution,
    q: &HittingProbabilities,
    walks: u64,
    pairs: usize,
    seed: u64,
) -> Result<OracleReport> {
    let mut checks = Vec::new();
    for (k, (i, j)) in oracle_pairs(p.n(), pairs, seed).into_iter().enumerate() {
        // Separate seeds per pair and quantity so the estimates are independent.
        let s = seed.wrapping_add(((2 * k + 1) as u64) << 32);
        let hit = simulate_hit_before_return(p, i, j, walks, s)?;
        let visits = simulate_visit_counts(p, i, j, walks, s.wrapping_add(1 << 31))?;
        for (quantity, est, exact) in [
            ("hit_before_return", hit, q.get(i, j)),
            ("visits_per_excursion", visits, phi[j] / phi[i]),
        ] {
            checks.push(OracleCheck {
                i,
                j,
                quantity,
                estimate: est.mean,
                std_err: est.std_err,
                exact,
                pass: (est.mean - exact).abs() <= SE_MULTIPLE * est.std_err + SE_FLOOR,
            });
        }
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    Ok(OracleReport {
        pass: passed as f64 >= ORACLE_PASS_RATE * checks.len() as f64,
        walks,
        seed,
        passed,
        checks,
    })
}
