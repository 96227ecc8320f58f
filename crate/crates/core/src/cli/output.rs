//! Input loading, output files and their `.meta.json` sidecars.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Cursor, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use super::args::InputArgs;
use crate::error::{Error, Result};
use crate::graph::io::{load_edge_list, read_dense_csv, EdgeFormat};
use crate::graph::{largest_scc, row_normalize, TransitionMatrix, WeightedDigraph};

/// Reads a graph, guessing the format from the extension and first line.
pub fn read_graph(path: &Path) -> Result<WeightedDigraph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    let is_mtx = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx")) || first.starts_with("%%MatrixMarket");
    if is_mtx {
        return load_edge_list(Cursor::new(text), EdgeFormat::MatrixMarket);
    }
    if first.split(',').next().map(str::trim) == Some("label") {
        let (labels, m) = read_dense_csv(Cursor::new(text))?;
        let rows = crate::linalg::to_rows(m.as_ref());
        return WeightedDigraph::from_dense(labels, &rows);
    }
    load_edge_list(Cursor::new(text), EdgeFormat::Csv)
}

/// Applies the preprocessing flags and row-normalizes.
pub fn load_chain(input: &InputArgs) -> Result<TransitionMatrix> {
    chain_from_path(&input.input, input.largest_scc, input.drop_self_loops)
}

pub fn chain_from_path(path: &Path, scc: bool, drop_loops: bool) -> Result<TransitionMatrix> {
    let mut g = read_graph(path)?;
    if drop_loops {
        g = g.without_self_loops();
    }
    if scc {
        let n = g.n();
        g = largest_scc(&g).0;
        if g.n() < n {
            eprintln!("kept the largest strongly connected component: {} of {n} nodes", g.n());
        }
    }
    row_normalize(&g)
}

/// `node,community` file mapped onto the node order of `labels`.
pub fn read_truth(path: &Path, labels: &[String]) -> Result<Vec<usize>> {
    let file = File::open(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut by_node: HashMap<String, String> = HashMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (lineno == 0 && line.starts_with("node,")) {
            continue;
        }
        let (node, comm) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            msg: "expected `node,community`".into(),
        })?;
        by_node.insert(node.trim().to_string(), comm.trim().to_string());
    }
    let mut ids: HashMap<&str, usize> = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let c = by_node
                .get(l)
                .ok_or_else(|| Error::Domain(format!("node {l:?} missing from the truth file")))?;
            let next = ids.len();
            Ok(*ids.entry(c.as_str()).or_insert(next))
        })
        .collect()
}

#[derive(Serialize)]
struct Meta<'a> {
    version: &'static str,
    command: &'a str,
    seed: Option<u64>,
    threads: usize,
    parameters: &'a Value,
    elapsed_seconds: f64,
    #[serde(skip_serializing_if = "Value::is_null")]
    results: &'a Value,
}

/// Bookkeeping shared by every output of one invocation.
pub struct Run {
    command: &'static str,
    seed: Option<u64>,
    threads: usize,
    parameters: Value,
    started: Instant,
}

impl Run {
    pub fn new(command: &'static str, params: &impl Serialize, seed: Option<u64>, threads: usize) -> Self {
        Self {
            command,
            seed,
            threads,
            parameters: serde_json::to_value(params).unwrap_or(Value::Null),
            started: Instant::now(),
        }
    }

    /// Writes to `path` plus its sidecar, or to stdout without one.
    pub fn emit(
        &self,
        path: Option<&Path>,
        results: Value,
        body: impl FnOnce(&mut dyn Write) -> Result<()>,
    ) -> Result<()> {
        match path {
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                body(&mut lock)?;
                lock.flush()?;
            }
            Some(p) => {
                let mut w = BufWriter::new(create(p)?);
                body(&mut w)?;
                w.flush()?;
                self.sidecar(p, &results)?;
            }
        }
        Ok(())
    }

    /// Pretty JSON to `path` or stdout.
    pub fn emit_json(&self, path: Option<&Path>, report: &impl Serialize) -> Result<()> {
        let v = serde_json::to_value(report).map_err(|e| Error::Usage(e.to_string()))?;
        self.emit(path, Value::Null, |w| {
            serde_json::to_writer_pretty(&mut *w, &v).map_err(|e| Error::Usage(e.to_string()))?;
            writeln!(w)?;
            Ok(())
        })
    }

    fn sidecar(&self, path: &Path, results: &Value) -> Result<()> {
        let meta = Meta {
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            seed: self.seed,
            threads: self.threads,
            parameters: &self.parameters,
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
            results,
        };
        let f = create(&sidecar_path(path))?;
        serde_json::to_writer_pretty(BufWriter::new(f), &meta).map_err(|e| Error::Usage(e.to_string()))
    }
}

fn create(p: &Path) -> Result<File> {
    File::create(p).map_err(|e| Error::Usage(format!("cannot write {}: {e}", p.display())))
}

/// `dir/name.csv` becomes `dir/name.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}
