//! Iterative Tarjan. No recursion, so deep graphs cannot overflow the stack.

const UNVISITED: usize = usize::MAX;

/// Strongly connected components of the graph given by successor lists.
///
/// Components come out in reverse topological order of the condensation
/// (sinks first), as Tarjan produces them.
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    // (node, next successor position)
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0usize;
    let mut comps = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(top) = call.last_mut() {
            let v = top.0;
            if top.1 < adj[v].len() {
                let w = adj[v][top.1];
                top.1 += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[v]);
            }
            if lowlink[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}

/// True if every node reaches every other node. The empty graph is not
/// strongly connected.
pub fn is_strongly_connected(adj: &[Vec<usize>]) -> bool {
    if adj.is_empty() {
        return false;
    }
    let reach = |adj: &[Vec<usize>]| {
        let mut seen = vec![false; adj.len()];
        let mut todo = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = todo.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    todo.push(w);
                }
            }
        }
        count
    };
    let n = adj.len();
    if reach(adj) != n {
        return false;
    }
    let mut rev = vec![Vec::new(); n];
    for (v, succ) in adj.iter().enumerate() {
        for &w in succ {
            rev[w].push(v);
        }
    }
    reach(&rev) == n
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted(mut comps: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        for c in &mut comps {
            c.sort_unstable();
        }
        comps.sort();
        comps
    }

    #[test]
    fn two_cycles_and_a_bridge() {
        let adj = vec![vec![1], vec![0, 2], vec![3], vec![2]];
        assert_eq!(sorted(strongly_connected_components(&adj)), vec![vec![0, 1], vec![2, 3]]);
        assert!(!is_strongly_connected(&adj));
    }

    #[test]
    fn long_path_does_not_recurse() {
        let n = 200_000;
        let adj: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + 1) % n]).collect();
        let comps = strongly_connected_components(&adj);
        assert_eq!(comps.len(), 1);
        assert!(is_strongly_connected(&adj));
    }

    // Brute-force mutual reachability as the oracle.
    fn reachable(adj: &[Vec<usize>], s: usize) -> Vec<bool> {
        let mut seen = vec![false; adj.len()];
        let mut todo = vec![s];
        seen[s] = true;
        while let Some(v) = todo.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    todo.push(w);
                }
            }
        }
        seen
    }

    proptest! {
        #[test]
        fn matches_mutual_reachability(edges in proptest::collection::vec((0usize..12, 0usize..12), 0..40)) {
            let n = 12;
            let mut adj = vec![Vec::new(); n];
            for (a, b) in edges {
                adj[a].push(b);
            }
            let reach: Vec<Vec<bool>> = (0..n).map(|s| reachable(&adj, s)).collect();
            let comps = strongly_connected_components(&adj);
            let mut comp_of = vec![0; n];
            for (c, members) in comps.iter().enumerate() {
                for &v in members {
                    comp_of[v] = c;
                }
            }
            for a in 0..n {
                for b in 0..n {
                    prop_assert_eq!(comp_of[a] == comp_of[b], reach[a][b] && reach[b][a]);
                }
            }
        }
    }
}
