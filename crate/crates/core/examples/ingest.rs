//! Reading an edge list, trimming to the largest strongly connected
//! component, and writing the distance matrix as CSV.

use std::io::Cursor;

use hpmetric::graph::io::{load_edge_list, write_dense_csv, EdgeFormat};
use hpmetric::graph::{largest_scc, row_normalize};
use hpmetric::metric::hp_metric;

const EDGES: &str = "\
# src,dst,weight
home,work,2
work,home,2
work,gym
gym,home
home,shop,0.5
shop,home
airport,home
";

fn main() -> hpmetric::Result<()> {
    let g = load_edge_list(Cursor::new(EDGES), EdgeFormat::Csv)?;
    let (core, map) = largest_scc(&g);
    let dropped: Vec<&str> = (0..g.n()).filter(|&i| map[i].is_none()).map(|i| g.labels()[i].as_str()).collect();
    eprintln!("dropped outside the largest component: {dropped:?}");
    let m = hp_metric(&row_normalize(&core)?, 0.75)?;
    write_dense_csv(std::io::stdout().lock(), core.labels(), m.distance.matrix())
}
