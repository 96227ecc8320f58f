//! Monte Carlo excursions, used as an oracle independent of any linear solve.
//!
//! Each walk draws from its own ChaCha8 stream keyed by `(seed, walk index)`,
//! so results are identical however the walks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;

/// Step budget for a single excursion.
pub const STEP_CAP: u64 = 10_000_000;

/// Outcome of one excursion from `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkRecord {
    pub start: usize,
    pub hit_before_return: bool,
    /// Visits to the target before returning to `start`; zero when the walk
    /// stopped at the first hit.
    pub visits_to_target: u64,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub walks: u64,
}

/// Cumulative transition rows for inverse-CDF sampling.
struct Sampler {
    rows: Vec<(Vec<usize>, Vec<f64>)>,
}

impl Sampler {
    fn new(p: &TransitionMatrix) -> Self {
        let n = p.n();
        let rows = (0..n)
            .map(|i| {
                let mut targets = Vec::new();
                let mut cdf = Vec::new();
                let mut acc = 0.0;
                for j in 0..n {
                    let v = p.get(i, j);
                    if v > 0.0 {
                        acc += v;
                        targets.push(j);
                        cdf.push(acc);
                    }
                }
                (targets, cdf)
            })
            .collect();
        Self { rows }
    }

    fn step(&self, from: usize, rng: &mut ChaCha8Rng) -> usize {
        let (targets, cdf) = &self.rows[from];
        let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
        let k = cdf.partition_point(|&c| c <= u);
        targets[k.min(targets.len() - 1)]
    }

    fn excursion(
        &self,
        start: usize,
        target: usize,
        stop_at_target: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<WalkRecord> {
        let mut at = start;
        let mut hit = false;
        let mut visits = 0u64;
        for _ in 0..STEP_CAP {
            at = self.step(at, rng);
            if at == target {
                hit = true;
                if stop_at_target {
                    return Ok(WalkRecord {
                        start,
                        hit_before_return: true,
                        visits_to_target: 0,
                    });
                }
                visits += 1;
            }
            if at == start {
                return Ok(WalkRecord {
                    start,
                    hit_before_return: hit,
                    visits_to_target: visits,
                });
            }
        }
        Err(Error::SimulationDivergence {
            start,
            cap: STEP_CAP,
        })
    }
}

fn walk_rng(seed: u64, walk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(walk);
    rng
}

fn check_pair(p: &TransitionMatrix, i: usize, j: usize, walks: u64) -> Result<()> {
    let n = p.n();
    if i >= n || j >= n {
        return Err(Error::Domain(format!("state out of range for {n} states")));
    }
    if i == j {
        return Err(Error::Domain("source and target must differ".into()));
    }
    if walks == 0 {
        return Err(Error::Domain("need at least one walk".into()));
    }
    Ok(())
}

/// Runs `walks` excursions from `i` and returns the full records.
pub fn simulate_excursions(
    p: &TransitionMatrix,
    i: usize,
    j: usize,
    walks: u64,
    seed: u64,
    stop_at_target: bool,
) -> Result<Vec<WalkRecord>> {
    check_pair(p, i, j, walks)?;
    let sampler = Sampler::new(p);
    (0..walks)
        .into_par_iter()
        .map(|w| sampler.excursion(i, j, stop_at_target, &mut walk_rng(seed, w)))
        .collect()
}

/// Fraction of excursions from `i` that reach `j` before returning, with the
/// binomial standard error.
pub fn simulate_hit_before_return(
    p: &TransitionMatrix,
    i: usize,
    j: usize,
    walks: u64,
    seed: u64,
) -> Result<Estimate> {
    let recs = simulate_excursions(p, i, j, walks, seed, true)?;
    let hits = recs.iter().filter(|r| r.hit_before_return).count() as f64;
    let w = walks as f64;
    let q = hits / w;
    Ok(Estimate {
        mean: q,
        std_err: (q * (1.0 - q) / w).sqrt(),
        walks,
    })
}

/// Mean number of visits to `j` per excursion from `i`; its expectation is
/// `phi_j / phi_i`.
pub fn simulate_visit_counts(
    p: &TransitionMatrix,
    i: usize,
    j: usize,
    walks: u64,
    seed: u64,
) -> Result<Estimate> {
    let recs = simulate_excursions(p, i, j, walks, seed, false)?;
    let (sum, sum_sq) = recs.iter().fold((0u128, 0u128), |(s, s2), r| {
        let v = r.visits_to_target as u128;
        (s + v, s2 + v * v)
    });
    let w = walks as f64;
    let mean = sum as f64 / w;
    let var = if walks > 1 {
        ((sum_sq as f64 - w * mean * mean) / (w - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        std_err: (var / w).sqrt(),
        walks,
    })
}
