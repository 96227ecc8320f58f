//! Degenerate classes, their segments, and the quotient chain.
//!
//! Members of a class at `d^{1/2}` distance zero are visited by every
//! excursion in one fixed cyclic order `a_0, a_1, ..., a_{m-1}`. Each node
//! outside the class lies in exactly one segment: the `k` such that every
//! walk through it comes from `a_{k-1}` and goes on to `a_k`. Collapsing
//! every class to one state yields a chain whose `d^{1/2}` is a metric.

use std::collections::{HashMap, VecDeque};

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;
use crate::metric::{DegeneracyReport, HpDistance};
use crate::stationary::StationaryDistribution;

/// A class in commute order, starting from its smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderedClass {
    pub members: Vec<usize>,
}

impl OrderedClass {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Segment index of every node with respect to one class; `None` for members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentLabeling {
    pub class_id: usize,
    pub labels: Vec<Option<usize>>,
}

/// Nodes grouped by their segment labels over all non-singleton classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbsoluteSegments {
    /// Groups in order of first appearance; members ascending.
    pub segments: Vec<Vec<usize>>,
    pub segment_of: Vec<usize>,
}

/// The collapsed chain.
#[derive(Debug, Clone)]
pub struct QuotientChain {
    pub p: TransitionMatrix,
    /// Original state to quotient state.
    pub class_map: Vec<usize>,
    /// Quotient state to its original members, ascending.
    pub classes: Vec<Vec<usize>>,
    pub phi: StationaryDistribution,
}

/// Breadth-first search from `from` over `adj` that records, but does not
/// pass through, nodes in `stop`. `from` itself is only a source.
fn first_hits(adj: &[Vec<usize>], from: usize, stop: &[bool]) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut hits = Vec::new();
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if stop[w] {
                if !hits.contains(&w) {
                    hits.push(w);
                }
            } else if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    hits.sort_unstable();
    hits
}

fn membership(n: usize, members: &[usize]) -> Result<Vec<bool>> {
    let mut stop = vec![false; n];
    for &m in members {
        if m >= n {
            return Err(Error::Domain(format!("state {m} out of range for {n} states")));
        }
        if stop[m] {
            return Err(Error::Domain(format!("state {m} listed twice")));
        }
        stop[m] = true;
    }
    Ok(stop)
}

/// Orders a class by following, from each member, the unique member reached
/// first. Fails unless this closes into a single cycle through all members.
pub fn order_class(p: &TransitionMatrix, members: &[usize]) -> Result<OrderedClass> {
    let n = p.n();
    let stop = membership(n, members)?;
    let Some(&start) = members.iter().min() else {
        return Err(Error::Domain("empty class".into()));
    };
    if members.len() == 1 {
        return Ok(OrderedClass {
            members: vec![start],
        });
    }
    let succ = p.successors();
    let mut order = vec![start];
    let mut at = start;
    loop {
        let hits = first_hits(&succ, at, &stop);
        let next = match hits.as_slice() {
            [x] if *x != at => *x,
            _ => {
                return Err(Error::Structure(format!(
                    "state {at} does not lead to a unique next class member (reaches {hits:?})"
                )))
            }
        };
        if next == start {
            break;
        }
        if order.contains(&next) || order.len() == members.len() {
            return Err(Error::Structure(format!(
                "commute order from {start} revisits {next} before closing"
            )));
        }
        order.push(next);
        at = next;
    }
    if order.len() != members.len() {
        return Err(Error::Structure(format!(
            "commute order from {start} closes after {} of {} members",
            order.len(),
            members.len()
        )));
    }
    Ok(OrderedClass { members: order })
}

/// Labels every non-member with the index of the member it reaches first,
/// and checks that the member reaching it last is the one just before.
pub fn segments(p: &TransitionMatrix, cls: &OrderedClass, class_id: usize) -> Result<SegmentLabeling> {
    let n = p.n();
    let stop = membership(n, &cls.members)?;
    let m = cls.len();
    let pos: HashMap<usize, usize> = cls.members.iter().enumerate().map(|(k, &a)| (a, k)).collect();
    let succ = p.successors();
    let pred = p.predecessors();
    let mut labels = vec![None; n];
    for v in 0..n {
        if stop[v] {
            continue;
        }
        let ahead = first_hits(&succ, v, &stop);
        let behind = first_hits(&pred, v, &stop);
        let (&[a], &[b]) = (ahead.as_slice(), behind.as_slice()) else {
            return Err(Error::Structure(format!(
                "state {v} sits between several class members (after {behind:?}, before {ahead:?})"
            )));
        };
        let k = pos[&a];
        if pos[&b] != (k + m - 1) % m {
            return Err(Error::Structure(format!(
                "state {v} is entered from {b} but leads to {a}, which is not its successor"
            )));
        }
        labels[v] = Some(k);
    }
    Ok(SegmentLabeling { class_id, labels })
}

/// Groups nodes by their full vector of labels.
pub fn absolute_segments(n: usize, labelings: &[SegmentLabeling]) -> AbsoluteSegments {
    let mut index: HashMap<Vec<Option<usize>>, usize> = HashMap::new();
    let mut segments: Vec<Vec<usize>> = Vec::new();
    let mut segment_of = vec![0; n];
    for v in 0..n {
        let key: Vec<Option<usize>> = labelings.iter().map(|l| l.labels[v]).collect();
        let id = *index.entry(key).or_insert_with(|| {
            segments.push(Vec::new());
            segments.len() - 1
        });
        segments[id].push(v);
        segment_of[v] = id;
    }
    AbsoluteSegments {
        segments,
        segment_of,
    }
}

/// Collapses each class of `partition` into one state:
/// `P'[U][V] = sum_{i in U} phi_i P[i][V] / phi_U`.
///
/// Quotient states are ordered by their smallest original member.
pub fn quotient_chain(
    p: &TransitionMatrix,
    phi: &StationaryDistribution,
    partition: &[Vec<usize>],
) -> Result<QuotientChain> {
    let n = p.n();
    let mut classes: Vec<Vec<usize>> = partition
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c
        })
        .collect();
    classes.sort_unstable_by_key(|c| c[0]);
    let mut class_map = vec![usize::MAX; n];
    for (u, c) in classes.iter().enumerate() {
        for &i in c {
            if i >= n {
                return Err(Error::Domain(format!("state {i} out of range for {n} states")));
            }
            if class_map[i] != usize::MAX {
                return Err(Error::Domain(format!("state {i} is in two classes")));
            }
            class_map[i] = u;
        }
    }
    if let Some(i) = class_map.iter().position(|&u| u == usize::MAX) {
        return Err(Error::Domain(format!("state {i} is in no class")));
    }
    let k = classes.len();
    let phi_u: Vec<f64> = classes.iter().map(|c| c.iter().map(|&i| phi[i]).sum()).collect();
    let pm = p.p();
    let mut pq = Mat::<f64>::zeros(k, k);
    for (u, c) in classes.iter().enumerate() {
        for &i in c {
            let w = phi[i] / phi_u[u];
            for j in 0..n {
                let v = pm[(i, j)];
                if v != 0.0 {
                    pq[(u, class_map[j])] += w * v;
                }
            }
        }
    }
    // Rows sum to one analytically; remove the round-off of the weighted sum.
    for u in 0..k {
        let s: f64 = (0..k).map(|v| pq[(u, v)]).sum();
        for v in 0..k {
            pq[(u, v)] = (pq[(u, v)] / s).min(1.0);
        }
    }
    let labels = classes
        .iter()
        .map(|c| {
            c.iter()
                .map(|&i| p.labels()[i].as_str())
                .collect::<Vec<_>>()
                .join("+")
        })
        .collect();
    let total: f64 = phi_u.iter().sum();
    let phi_q = StationaryDistribution::from_vec(phi_u.iter().map(|v| v / total).collect())?;
    Ok(QuotientChain {
        p: TransitionMatrix::from_dense(labels, pq)?,
        class_map,
        classes,
        phi: phi_q,
    })
}

/// Collapses the classes one at a time in the given order. The result uses
/// the same state order as [`quotient_chain`] on the whole partition.
pub fn quotient_sequential(
    p: &TransitionMatrix,
    phi: &StationaryDistribution,
    classes: &[Vec<usize>],
    order: &[usize],
) -> Result<QuotientChain> {
    let n = p.n();
    let mut chain = QuotientChain {
        p: p.clone(),
        class_map: (0..n).collect(),
        classes: (0..n).map(|i| vec![i]).collect(),
        phi: phi.clone(),
    };
    for &c in order {
        let cls = classes
            .get(c)
            .ok_or_else(|| Error::Domain(format!("no class {c}")))?;
        let mut merged: Vec<usize> = cls.iter().map(|&i| chain.class_map[i]).collect();
        merged.sort_unstable();
        merged.dedup();
        let mut partition = vec![merged.clone()];
        partition.extend((0..chain.p.n()).filter(|u| !merged.contains(u)).map(|u| vec![u]));
        let step = quotient_chain(&chain.p, &chain.phi, &partition)?;
        let originals: Vec<Vec<usize>> = step
            .classes
            .iter()
            .map(|c| {
                let mut o: Vec<usize> = c.iter().flat_map(|&u| chain.classes[u].clone()).collect();
                o.sort_unstable();
                o
            })
            .collect();
        let class_map = chain.class_map.iter().map(|&u| step.class_map[u]).collect();
        chain = QuotientChain {
            p: step.p,
            class_map,
            classes: originals,
            phi: step.phi,
        };
    }
    // Quotient states after sequential steps are ordered by smallest current
    // index, which need not match smallest original member.
    let k = chain.classes.len();
    let mut perm: Vec<usize> = (0..k).collect();
    perm.sort_unstable_by_key(|&u| chain.classes[u][0]);
    let mut inv = vec![0; k];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let pm = chain.p.p();
    let pq = Mat::from_fn(k, k, |a, b| pm[(perm[a], perm[b])]);
    let labels = perm.iter().map(|&u| chain.p.labels()[u].clone()).collect();
    let phi_q = StationaryDistribution::from_vec(perm.iter().map(|&u| chain.phi[u]).collect())?;
    Ok(QuotientChain {
        p: TransitionMatrix::from_dense(labels, pq)?,
        class_map: chain.class_map.iter().map(|&u| inv[u]).collect(),
        classes: perm.iter().map(|&u| chain.classes[u].clone()).collect(),
        phi: phi_q,
    })
}

/// Ordered classes, segment labels and the quotient of a degenerate chain.
#[derive(Debug, Clone)]
pub struct QuotientAnalysis {
    /// Every class, singletons included, in the order of `chain` states.
    pub classes: Vec<OrderedClass>,
    /// One labeling per non-singleton class; `class_id` indexes `classes`.
    pub labelings: Vec<SegmentLabeling>,
    pub absolute: AbsoluteSegments,
    pub chain: QuotientChain,
}

/// Validates the classes of `report` structurally and collapses them.
pub fn analyze(
    p: &TransitionMatrix,
    phi: &StationaryDistribution,
    report: &DegeneracyReport,
) -> Result<QuotientAnalysis> {
    let chain = quotient_chain(p, phi, &report.classes)?;
    let classes = chain
        .classes
        .iter()
        .map(|c| order_class(p, c))
        .collect::<Result<Vec<_>>>()?;
    let labelings = classes
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() > 1)
        .map(|(id, c)| segments(p, c, id))
        .collect::<Result<Vec<_>>>()?;
    let absolute = absolute_segments(p.n(), &labelings);
    Ok(QuotientAnalysis {
        classes,
        labelings,
        absolute,
        chain,
    })
}

/// A pair of original states whose quotient distance broke its bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundViolation {
    pub i: usize,
    pub j: usize,
    pub d: f64,
    pub d_prime: f64,
    pub lower: f64,
    pub upper: f64,
    pub separating: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub pairs_checked: usize,
    /// Pairs in one absolute segment.
    pub isometric_pairs: usize,
    /// Largest `|D' - D - ln(|a||b|)/2|` over pairs with no separating class.
    pub worst_isometry_error: f64,
    pub violations: Vec<BoundViolation>,
}

impl BoundReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tolerance of the bound checks.
pub const BOUND_TOL: f64 = 1e-9;

/// Compares `d^{1/2}` on the original chain with `d'^{1/2}` on the quotient.
///
/// For `i` in class `a` and `j` in class `b != a`, with `c` the number of
/// other non-singleton classes whose segments separate them and
/// `s = ln(|a||b|)/2`:
///
/// ```text
/// c = 0:  D'[a][b] = D[i][j] + s
/// c > 0:  D[i][j] + s < D'[a][b] <= D[i][j] + s + c ln 2
/// ```
///
/// When `i` and `j` are in the same absolute segment both classes are
/// singletons, so `s = 0` and the quotient is an isometry there.
pub fn check_quotient_bounds(d: &HpDistance, d_prime: &HpDistance, qa: &QuotientAnalysis) -> BoundReport {
    let n = d.n();
    let map = &qa.chain.class_map;
    let sizes: Vec<usize> = qa.chain.classes.iter().map(Vec::len).collect();
    let mut report = BoundReport {
        pairs_checked: 0,
        isometric_pairs: 0,
        worst_isometry_error: 0.0,
        violations: Vec::new(),
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (map[i], map[j]);
            if a == b {
                continue;
            }
            report.pairs_checked += 1;
            if qa.absolute.segment_of[i] == qa.absolute.segment_of[j] {
                report.isometric_pairs += 1;
            }
            let c = qa
                .labelings
                .iter()
                .filter(|l| l.class_id != a && l.class_id != b)
                .filter(|l| matches!((l.labels[i], l.labels[j]), (Some(x), Some(y)) if x != y))
                .count();
            let dij = d.get(i, j);
            let dq = d_prime.get(a, b);
            let base = dij + 0.5 * ((sizes[a] * sizes[b]) as f64).ln();
            let (lower, upper, ok) = if c == 0 {
                let err = (dq - base).abs();
                report.worst_isometry_error = report.worst_isometry_error.max(err);
                (base - BOUND_TOL, base + BOUND_TOL, err <= BOUND_TOL)
            } else {
                let upper = base + c as f64 * std::f64::consts::LN_2 + BOUND_TOL;
                (base, upper, dq > base && dq <= upper)
            };
            if !ok {
                report.violations.push(BoundViolation {
                    i,
                    j,
                    d: dij,
                    d_prime: dq,
                    lower,
                    upper,
                    separating: c,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fixtures::{collapse_gadget, degenerate_family};
    use crate::analysis::GluedCycles;
    use crate::graph::row_normalize;
    use crate::hitting::hitting_reference_matrix;
    use crate::hitting::oracle::first_step;
    use crate::metric::{degenerate_pairs, hp_metric, verify_metric_axioms, AxiomTolerances, DEFAULT_TOL_DEG};
    use crate::stationary::stationary_distribution;
    use crate::testutil::{cycle, random_chain};

    fn gadget() -> TransitionMatrix {
        row_normalize(&collapse_gadget()).unwrap()
    }

    fn analysis(p: &TransitionMatrix) -> QuotientAnalysis {
        let m = hp_metric(p, 0.5).unwrap();
        let rep = degenerate_pairs(&m.q, &m.phi, DEFAULT_TOL_DEG).unwrap();
        analyze(p, &m.phi, &rep).unwrap()
    }

    #[test]
    fn cycle_order_and_collapse() {
        let p = cycle(4);
        let cls = order_class(&p, &[2, 0, 3, 1]).unwrap();
        assert_eq!(cls.members, vec![0, 1, 2, 3]);
        let seg = segments(&p, &cls, 0).unwrap();
        assert!(seg.labels.iter().all(Option::is_none));
        let qa = analysis(&p);
        assert_eq!(qa.chain.p.n(), 1);
        assert_eq!(qa.chain.p.get(0, 0), 1.0);
        assert_eq!(qa.absolute.segments.len(), 1);
    }

    #[test]
    fn gadget_structure() {
        let p = gadget();
        let cls = order_class(&p, &[0, 1]).unwrap();
        assert_eq!(cls.members, vec![0, 1]);
        let seg = segments(&p, &cls, 0).unwrap();
        // j lies between a and b (reaches b first); i between b and a.
        assert_eq!(seg.labels, vec![None, None, Some(0), Some(1)]);
        let qa = analysis(&p);
        assert_eq!(qa.chain.classes, vec![vec![0, 1], vec![2], vec![3]]);
        assert_eq!(qa.labelings.len(), 1);
    }

    #[test]
    fn gadget_single_collapse() {
        let p = gadget();
        let qa = analysis(&p);
        let pq = &qa.chain.p;
        // alpha = 0, i = 1, j = 2 in the quotient.
        let (q_aj, q_ij, q_ji) = (first_step(&p, 0, 3), first_step(&p, 2, 3), first_step(&p, 3, 2));
        let (qq_aj, qq_ij, qq_ji) = (first_step(pq, 0, 2), first_step(pq, 1, 2), first_step(pq, 2, 1));
        assert!((qq_aj - 0.5 * q_aj).abs() < 1e-14);
        assert!(0.5 * q_ij < qq_ij && qq_ij < q_ij);
        assert!(0.5 * q_ji < qq_ji && qq_ji < q_ji);
    }

    #[test]
    fn gadget_bounds() {
        let p = gadget();
        let qa = analysis(&p);
        let d = hp_metric(&p, 0.5).unwrap().distance;
        let m2 = hp_metric(&qa.chain.p, 0.5).unwrap();
        let rep = check_quotient_bounds(&d, &m2.distance, &qa);
        assert!(rep.ok(), "{rep:?}");
        let ax = verify_metric_axioms(m2.distance.matrix(), AxiomTolerances::default());
        assert!(ax.is_metric());
    }

    #[test]
    fn non_degenerate_chain_is_unchanged() {
        let p = random_chain(10, 5);
        let qa = analysis(&p);
        assert_eq!(qa.chain.p.n(), 10);
        assert_eq!(qa.absolute.segments, vec![(0..10).collect::<Vec<_>>()]);
        for i in 0..10 {
            for j in 0..10 {
                assert!((qa.chain.p.get(i, j) - p.get(i, j)).abs() < 1e-15);
            }
        }
        let d = hp_metric(&p, 0.5).unwrap().distance;
        let d2 = hp_metric(&qa.chain.p, 0.5).unwrap().distance;
        let rep = check_quotient_bounds(&d, &d2, &qa);
        assert!(rep.ok());
        assert_eq!(rep.isometric_pairs, 45);
    }

    #[test]
    fn fake_class_is_rejected() {
        let p = random_chain(8, 2);
        assert!(matches!(order_class(&p, &[0, 3, 5]), Err(Error::Structure(_))));
    }

    #[test]
    fn quotient_weights_by_phi() {
        // Non-class partition: P' still follows the weighted average.
        let p = random_chain(6, 9);
        let phi = stationary_distribution(&p).unwrap();
        let part = vec![vec![4, 1], vec![0], vec![2, 3, 5]];
        let qc = quotient_chain(&p, &phi, &part).unwrap();
        assert_eq!(qc.classes, vec![vec![0], vec![1, 4], vec![2, 3, 5]]);
        let w = phi[1] + phi[4];
        let want = (phi[1] * (p.get(1, 2) + p.get(1, 3) + p.get(1, 5))
            + phi[4] * (p.get(4, 2) + p.get(4, 3) + p.get(4, 5)))
            / w;
        assert!((qc.p.get(1, 2) - want).abs() < 1e-15);
        assert!((qc.phi[1] - w).abs() < 1e-15);
        // Stationarity of the summed weights for the collapsed chain.
        let phi2 = stationary_distribution(&qc.p).unwrap();
        for u in 0..3 {
            assert!((phi2[u] - qc.phi[u]).abs() < 1e-12);
        }
    }

    #[test]
    fn sequential_matches_simultaneous() {
        let p = random_chain(7, 3);
        let phi = stationary_distribution(&p).unwrap();
        let part = vec![vec![5, 1], vec![0, 6], vec![2], vec![3, 4]];
        let all = quotient_chain(&p, &phi, &part).unwrap();
        for order in [[0, 1, 3], [3, 1, 0], [1, 3, 0]] {
            let seq = quotient_sequential(&p, &phi, &part, &order).unwrap();
            assert_eq!(seq.classes, all.classes);
            assert_eq!(seq.class_map, all.class_map);
            for u in 0..4 {
                for v in 0..4 {
                    assert!((seq.p.get(u, v) - all.p.get(u, v)).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn quotient_hitting_matches_oracle() {
        let qa = analysis(&gadget());
        let q = hitting_reference_matrix(&qa.chain.p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((q.get(i, j) - first_step(&qa.chain.p, i, j)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn glued_cycles_collapse_to_three_states() {
        let spec = GluedCycles::new(3, 4, 2).unwrap();
        let p = row_normalize(&spec.build()).unwrap();
        let qa = analysis(&p);
        assert_eq!(qa.chain.classes, vec![vec![0, 1, 2], (3..7).collect(), (7..11).collect()]);
        assert_eq!(qa.classes[0].members, vec![0, 1, 2]);
        // Both branches sit between b3 and b1.
        let backbone = &qa.labelings[0];
        assert_eq!(backbone.class_id, 0);
        assert!((3..11).all(|v| backbone.labels[v] == Some(0)));
        assert_eq!(qa.absolute.segments, vec![vec![0, 1, 2], (3..7).collect(), (7..11).collect()]);

        let d = hp_metric(&p, 0.5).unwrap().distance;
        let m2 = hp_metric(&qa.chain.p, 0.5).unwrap();
        let rep = check_quotient_bounds(&d, &m2.distance, &qa);
        assert!(rep.ok(), "{rep:?}");
        let deg = degenerate_pairs(&m2.q, &m2.phi, DEFAULT_TOL_DEG).unwrap();
        assert!(!deg.degenerate);
        // Backbone to branch: d = ln(2)/2, |a||b| = 12, and no separating class.
        let want = 0.5 * 2f64.ln() + 0.5 * 12f64.ln();
        assert!((m2.distance.get(0, 1) - want).abs() < 1e-12);
    }

    #[test]
    fn family_bounds_and_sequential_collapse() {
        for seed in 0..4 {
            let p = row_normalize(&degenerate_family(seed)).unwrap();
            let qa = analysis(&p);
            let d = hp_metric(&p, 0.5).unwrap().distance;
            let m2 = hp_metric(&qa.chain.p, 0.5).unwrap();
            let rep = check_quotient_bounds(&d, &m2.distance, &qa);
            assert!(rep.ok(), "seed {seed}: {rep:?}");
            let classes = &qa.chain.classes;
            let order: Vec<usize> = (0..classes.len()).rev().collect();
            let seq = quotient_sequential(&p, &stationary_distribution(&p).unwrap(), classes, &order).unwrap();
            for u in 0..classes.len() {
                for v in 0..classes.len() {
                    assert!((seq.p.get(u, v) - qa.chain.p.get(u, v)).abs() <= 1e-12);
                }
            }
        }
    }
}
