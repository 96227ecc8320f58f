//! Small graphs with known degenerate structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::WeightedDigraph;

/// Four nodes `a, b, i, j` with edges a->j, a->b, j->b, b->i, b->a, i->a.
/// `{a, b}` is the only non-singleton class; `j` lies between `a` and `b`
/// and `i` between `b` and `a`.
pub fn collapse_gadget() -> WeightedDigraph {
    let labels = ["a", "b", "i", "j"].map(String::from).to_vec();
    let mut g = WeightedDigraph::new(labels).expect("unique labels");
    for (x, y) in [(0, 3), (0, 1), (3, 1), (1, 2), (1, 0), (2, 0)] {
        g.add_edge(x, y, 1.0).expect("in range");
    }
    g
}

struct Builder {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    rng: ChaCha8Rng,
}

impl Builder {
    fn node(&mut self) -> usize {
        self.n += 1;
        self.n - 1
    }

    fn edge(&mut self, a: usize, b: usize) {
        let w = self.rng.random_range(0.5..2.0);
        self.edges.push((a, b, w));
    }

    /// A single node, or an entry/exit pair joined by 2-3 parallel middle
    /// nodes. Returns `(entry, exit)`.
    fn unit(&mut self) -> (usize, usize) {
        let entry = self.node();
        if self.rng.random_bool(0.5) {
            return (entry, entry);
        }
        let exit = self.node();
        for _ in 0..self.rng.random_range(2..=3) {
            let m = self.node();
            self.edge(entry, m);
            self.edge(m, exit);
        }
        (entry, exit)
    }

    /// A chain of 1-3 units.
    fn chain(&mut self) -> (usize, usize) {
        let (first, mut last) = self.unit();
        for _ in 1..self.rng.random_range(1..=3) {
            let (a, b) = self.unit();
            self.edge(last, a);
            last = b;
        }
        (first, last)
    }
}

/// Glued-cycle-like graphs built from diamonds: a backbone chain that forks
/// into 2-4 branch chains which all return to the backbone start. Each
/// branch is a non-singleton class, as is the backbone unless it is one node.
pub fn degenerate_family(seed: u64) -> WeightedDigraph {
    let mut b = Builder {
        n: 0,
        edges: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let (start, end) = b.chain();
    let branches = b.rng.random_range(2..=4);
    for _ in 0..branches {
        let (a, z) = b.chain();
        // The extra node keeps each branch class at size >= 2 even for a bare diamond.
        let extra = b.node();
        b.edge(end, a);
        b.edge(z, extra);
        b.edge(extra, start);
    }
    let mut g = WeightedDigraph::with_nodes(b.n);
    for (x, y, w) in b.edges {
        g.add_edge(x, y, w).expect("in range");
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::row_normalize;
    use crate::metric::{degenerate_pairs, hp_metric, DEFAULT_TOL_DEG};

    #[test]
    fn family_has_several_classes() {
        for seed in 0..10 {
            let g = degenerate_family(seed);
            assert!(g.is_strongly_connected());
            let p = row_normalize(&g).unwrap();
            let m = hp_metric(&p, 0.5).unwrap();
            let r = degenerate_pairs(&m.q, &m.phi, DEFAULT_TOL_DEG).unwrap();
            assert!(r.non_singleton().count() >= 2, "seed {seed}: {:?}", r.classes);
        }
    }
}
