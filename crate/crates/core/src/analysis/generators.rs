//! Synthetic graphs with known structure.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;

/// A backbone chain `b1 -> ... -> b{n_b}` that splits into `c` parallel
/// chains of length `n_c`, each leading back to `b1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GluedCycles {
    pub n_b: usize,
    pub n_c: usize,
    pub c: usize,
}

impl GluedCycles {
    pub fn new(n_b: usize, n_c: usize, c: usize) -> Result<Self> {
        if n_b == 0 || n_c == 0 || c == 0 {
            return Err(Error::Domain("glued cycles need n_b, n_c, C >= 1".into()));
        }
        Ok(Self { n_b, n_c, c })
    }

    pub fn n(&self) -> usize {
        self.n_b + self.c * self.n_c
    }

    pub fn backbone(&self) -> std::ops::Range<usize> {
        0..self.n_b
    }

    /// Node indices of branch `m` (zero-based) in walk order.
    pub fn branch(&self, m: usize) -> std::ops::Range<usize> {
        let s = self.n_b + m * self.n_c;
        s..s + self.n_c
    }

    pub fn build(&self) -> WeightedDigraph {
        let mut labels: Vec<String> = (1..=self.n_b).map(|t| format!("b{t}")).collect();
        for m in 1..=self.c {
            labels.extend((1..=self.n_c).map(|s| format!("c{m}_{s}")));
        }
        let mut g = WeightedDigraph::new(labels).expect("labels are unique");
        let mut edge = |a, b| g.add_edge(a, b, 1.0).expect("indices in range");
        for t in 1..self.n_b {
            edge(t - 1, t);
        }
        for m in 0..self.c {
            let br = self.branch(m);
            edge(self.n_b - 1, br.start);
            for s in br.start + 1..br.end {
                edge(s - 1, s);
            }
            edge(br.end - 1, 0);
        }
        g
    }
}

/// Directed Erdos-Renyi block joined to a heavy directed cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErCycle {
    pub n_er: usize,
    pub n_cycle: usize,
    pub p: f64,
    pub w: f64,
    pub self_loops: bool,
}

/// Output of [`ErCycle::build`].
#[derive(Debug, Clone)]
pub struct ErCycleGraph {
    pub graph: WeightedDigraph,
    /// Seed of the accepted draw; larger than the requested one after retries.
    pub seed_used: u64,
}

/// Draws tried before [`ErCycle::build`] gives up on strong connectivity.
pub const MAX_ATTEMPTS: u64 = 100;

impl ErCycle {
    pub fn new(n_er: usize, n_cycle: usize, p: f64, w: f64) -> Result<Self> {
        if n_er == 0 || n_cycle == 0 {
            return Err(Error::Domain("ER block and cycle must be non-empty".into()));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!("edge probability {p} not in (0, 1]")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::Domain(format!("cycle in-edge weight {w} must be positive")));
        }
        Ok(Self {
            n_er,
            n_cycle,
            p,
            w,
            self_loops: false,
        })
    }

    /// In-edges from the ER block attached to each cycle node.
    pub fn in_edges_per_cycle_node(&self) -> usize {
        (2 * (self.n_er as f64 * self.p).round() as i64 - 1).max(0) as usize
    }

    /// ER nodes come first (`e1..`), then cycle nodes (`y1..`).
    pub fn build(&self, seed: u64) -> Result<ErCycleGraph> {
        for attempt in 0..MAX_ATTEMPTS {
            let s = seed.wrapping_add(attempt);
            let g = self.draw(s);
            if g.is_strongly_connected() {
                return Ok(ErCycleGraph {
                    graph: g,
                    seed_used: s,
                });
            }
        }
        Err(Error::Generation(format!(
            "no strongly connected ER+cycle graph in {MAX_ATTEMPTS} draws from seed {seed}"
        )))
    }

    fn draw(&self, seed: u64) -> WeightedDigraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ne, nc) = (self.n_er, self.n_cycle);
        let mut labels: Vec<String> = (1..=ne).map(|i| format!("e{i}")).collect();
        labels.extend((1..=nc).map(|i| format!("y{i}")));
        let mut g = WeightedDigraph::new(labels).expect("labels are unique");
        for i in 0..ne {
            for j in 0..ne {
                if (i != j || self.self_loops) && rng.random_bool(self.p) {
                    g.add_edge(i, j, 1.0).expect("in range");
                }
            }
        }
        for t in 0..nc {
            g.add_edge(ne + t, ne + (t + 1) % nc, 1.0).expect("in range");
        }
        let m = self.in_edges_per_cycle_node();
        for t in 0..nc {
            for _ in 0..m {
                let src = rng.random_range(0..ne);
                // Repeated draws collapse to one edge of weight w.
                g.set_edge(src, ne + t, self.w).expect("in range");
            }
        }
        g.add_edge(ne, 0, 1.0).expect("in range");
        g.add_edge(0, ne, 1.0).expect("in range");
        g
    }
}

/// Directed planted partition with `k` contiguous balanced communities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlantedPartition {
    pub n: usize,
    pub k: usize,
    pub p_in: f64,
    pub p_out: f64,
}

impl PlantedPartition {
    pub fn new(n: usize, k: usize, p_in: f64, p_out: f64) -> Result<Self> {
        if k == 0 || n == 0 || !n.is_multiple_of(k) {
            return Err(Error::Domain(format!("{n} nodes do not split into {k} equal communities")));
        }
        if !(0.0 <= p_out && p_out <= p_in && p_in <= 1.0) {
            return Err(Error::Domain(format!(
                "need 0 <= p_out <= p_in <= 1, got p_in = {p_in}, p_out = {p_out}"
            )));
        }
        Ok(Self { n, k, p_in, p_out })
    }

    /// From mean density `rho = (p_in + (k-1) p_out) / k` and gap `delta = p_in - p_out`.
    pub fn from_density(n: usize, k: usize, rho: f64, delta: f64) -> Result<Self> {
        let p_out = rho - delta / k as f64;
        Self::new(n, k, p_out + delta, p_out)
    }

    pub fn delta(&self) -> f64 {
        self.p_in - self.p_out
    }

    pub fn rho(&self) -> f64 {
        (self.p_in + (self.k - 1) as f64 * self.p_out) / self.k as f64
    }

    pub fn truth(&self) -> Vec<usize> {
        let size = self.n / self.k;
        (0..self.n).map(|i| i / size).collect()
    }

    /// Unit-weight digraph without self-loops; may be disconnected.
    pub fn build(&self, seed: u64) -> (WeightedDigraph, Vec<usize>) {
        let truth = self.truth();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = WeightedDigraph::with_nodes(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j {
                    continue;
                }
                let p = if truth[i] == truth[j] { self.p_in } else { self.p_out };
                if rng.random_bool(p) {
                    g.add_edge(i, j, 1.0).expect("in range");
                }
            }
        }
        (g, truth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// `[0, 2pi]^2` with periodic distance.
    FlatTorus,
    /// Flat torus minus the disc of radius `pi/2` at `(pi, pi)`.
    TorusWithHole,
    /// `{|x - pi| >= pi/2} U {|y - pi| <= pi/4}` inside `[0, 2pi]^2`, plain distance.
    HDomain,
    /// Unit circle, chord distance.
    Circle,
    /// Unit sphere in R^3, chord distance.
    Sphere,
    /// Square grid on the flat torus, unit weights to the 4 nearest neighbours.
    TorusLattice,
}

impl Domain {
    fn periodic(self) -> bool {
        matches!(self, Domain::FlatTorus | Domain::TorusWithHole)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometric {
    pub domain: Domain,
    pub n: usize,
    pub gamma: f64,
}

/// Graph and the coordinates of its nodes.
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    pub graph: WeightedDigraph,
    pub coords: Vec<Vec<f64>>,
}

impl Geometric {
    pub fn new(domain: Domain, n: usize, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
        }
        if n < 2 {
            return Err(Error::Domain("need at least two points".into()));
        }
        if domain == Domain::TorusLattice {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n || side < 3 {
                return Err(Error::Domain(format!("lattice needs a square n >= 9, got {n}")));
            }
        }
        Ok(Self { domain, n, gamma })
    }

    /// Distance used for the kernel weights.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let period = 2.0 * PI;
        x.iter()
            .zip(y)
            .map(|(a, b)| {
                let mut d = (a - b).abs();
                if self.domain.periodic() {
                    d = d.min(period - d);
                }
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn sample_points(&self, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = 2.0 * PI;
        let square = |rng: &mut ChaCha8Rng| vec![rng.random_range(0.0..tau), rng.random_range(0.0..tau)];
        (0..self.n)
            .map(|_| match self.domain {
                Domain::FlatTorus => square(&mut rng),
                Domain::TorusWithHole => loop {
                    let x = square(&mut rng);
                    if (x[0] - PI).hypot(x[1] - PI) >= PI / 2.0 {
                        break x;
                    }
                },
                Domain::HDomain => loop {
                    let x = square(&mut rng);
                    if (x[0] - PI).abs() >= PI / 2.0 || (x[1] - PI).abs() <= PI / 4.0 {
                        break x;
                    }
                },
                Domain::Circle => {
                    let t: f64 = rng.random_range(0.0..tau);
                    vec![t.cos(), t.sin()]
                }
                Domain::Sphere => loop {
                    let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                    if r > 1e-3 && r <= 1.0 {
                        break v.iter().map(|a| a / r).collect();
                    }
                },
                Domain::TorusLattice => unreachable!("lattice points are not sampled"),
            })
            .collect()
    }

    pub fn build(&self, seed: u64) -> GeometricGraph {
        if self.domain == Domain::TorusLattice {
            return self.lattice();
        }
        let coords = self.sample_points(seed);
        self.from_points(coords)
    }

    /// Complete graph with weights `exp(-gamma d^2)` on given points.
    pub fn from_points(&self, coords: Vec<Vec<f64>>) -> GeometricGraph {
        let n = coords.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            0.0
                        } else {
                            let d = self.distance(&coords[i], &coords[j]);
                            (-self.gamma * d * d).exp()
                        }
                    })
                    .collect()
            })
            .collect();
        let labels = (1..=n).map(|i| format!("x{i}")).collect();
        let graph = WeightedDigraph::from_dense(labels, &rows).expect("weights are finite");
        GeometricGraph { graph, coords }
    }

    fn lattice(&self) -> GeometricGraph {
        let side = (self.n as f64).sqrt().round() as usize;
        let h = 2.0 * PI / side as f64;
        let at = |r: usize, c: usize| r * side + c;
        let mut g = WeightedDigraph::with_nodes(self.n);
        let mut coords = Vec::with_capacity(self.n);
        for r in 0..side {
            for c in 0..side {
                coords.push(vec![c as f64 * h, r as f64 * h]);
                for (dr, dc) in [(1, 0), (side - 1, 0), (0, 1), (0, side - 1)] {
                    let v = at((r + dr) % side, (c + dc) % side);
                    g.set_edge(at(r, c), v, 1.0).expect("in range");
                }
            }
        }
        GeometricGraph { graph: g, coords }
    }
}
