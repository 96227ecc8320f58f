//! Text formats: CSV edge lists, Matrix Market coordinate files, and dense
//! labelled CSV matrices.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use faer::{Mat, MatRef};

use super::WeightedDigraph;
use crate::error::{Error, Result};

/// Input format for [`load_edge_list`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFormat {
    /// `src,dst[,weight]` lines; `#` comments.
    Csv,
    /// `%%MatrixMarket matrix coordinate {real|pattern} general`.
    MatrixMarket,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_weight(s: &str, line: usize) -> Result<f64> {
    let w: f64 = s
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("invalid weight {s:?}")))?;
    if !w.is_finite() {
        return Err(parse_err(line, format!("non-finite weight {s:?}")));
    }
    if w < 0.0 {
        return Err(Error::Domain(format!("negative weight {w} on line {line}")));
    }
    Ok(w)
}

/// Reads a weighted digraph. Duplicate edges have their weights summed.
///
/// CSV nodes are numbered in order of first appearance; Matrix Market nodes
/// keep their file order and are labelled `1..=n`.
pub fn load_edge_list<R: BufRead>(source: R, format: EdgeFormat) -> Result<WeightedDigraph> {
    match format {
        EdgeFormat::Csv => load_csv(source),
        EdgeFormat::MatrixMarket => load_matrix_market(source),
    }
}

fn load_csv<R: BufRead>(source: R) -> Result<WeightedDigraph> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut intern = |name: &str| -> usize {
        if let Some(&i) = index.get(name) {
            return i;
        }
        let i = labels.len();
        index.insert(name.to_string(), i);
        labels.push(name.to_string());
        i
    };
    for (lineno, line) in source.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(parse_err(
                lineno,
                format!("expected `src,dst[,weight]`, found {} fields", fields.len()),
            ));
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(parse_err(lineno, "empty node identifier"));
        }
        let w = match fields.get(2) {
            Some(s) => parse_weight(s, lineno)?,
            None => 1.0,
        };
        let a = intern(fields[0]);
        let b = intern(fields[1]);
        edges.push((a, b, w));
    }
    let mut g = WeightedDigraph::new(labels)?;
    for (a, b, w) in edges {
        g.add_edge(a, b, w)?;
    }
    Ok(g)
}

fn load_matrix_market<R: BufRead>(source: R) -> Result<WeightedDigraph> {
    let mut lines = source.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty Matrix Market file"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "missing `%%MatrixMarket matrix` banner"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported layout {:?}", tokens[2])));
    }
    let pattern = match tokens[3].as_str() {
        "real" => false,
        "pattern" => true,
        other => return Err(parse_err(1, format!("unsupported field {other:?}"))),
    };
    if tokens[4] != "general" {
        return Err(parse_err(1, format!("unsupported symmetry {:?}", tokens[4])));
    }

    let mut size: Option<(usize, usize)> = None;
    let mut g: Option<WeightedDigraph> = None;
    let mut seen = 0usize;
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if f.len() != 3 {
                    return Err(parse_err(lineno, "expected `rows cols entries`"));
                }
                let nums: Vec<usize> = f
                    .iter()
                    .map(|s| s.parse().map_err(|_| parse_err(lineno, format!("bad size {s:?}"))))
                    .collect::<Result<_>>()?;
                if nums[0] != nums[1] {
                    return Err(parse_err(lineno, "adjacency matrix must be square"));
                }
                size = Some((nums[0], nums[2]));
                g = Some(WeightedDigraph::new((1..=nums[0]).map(|i| i.to_string()).collect())?);
            }
            Some((n, _)) => {
                let want = if pattern { 2 } else { 3 };
                if f.len() != want {
                    return Err(parse_err(lineno, format!("expected {want} fields")));
                }
                let idx = |s: &str| -> Result<usize> {
                    let i: usize = s
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad index {s:?}")))?;
                    if i == 0 || i > n {
                        return Err(parse_err(lineno, format!("index {i} outside 1..={n}")));
                    }
                    Ok(i - 1)
                };
                let (a, b) = (idx(f[0])?, idx(f[1])?);
                let w = if pattern { 1.0 } else { parse_weight(f[2], lineno)? };
                g.as_mut().expect("size line seen").add_edge(a, b, w)?;
                seen += 1;
            }
        }
    }
    let (_, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if seen != nnz {
        return Err(parse_err(0, format!("header declares {nnz} entries, found {seen}")));
    }
    Ok(g.expect("size line seen"))
}

/// Writes the 17-significant-digit representation used by every matrix file.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a dense matrix as CSV: a `label,<l1>,...` header, then one
/// `<li>,v_i1,...` row per node.
pub fn write_dense_csv<W: Write>(mut out: W, labels: &[String], m: MatRef<'_, f64>) -> Result<()> {
    write!(out, "label")?;
    for l in labels {
        write!(out, ",{l}")?;
    }
    writeln!(out)?;
    for (i, l) in labels.iter().enumerate() {
        write!(out, "{l}")?;
        for j in 0..m.ncols() {
            write!(out, ",{}", fmt_f64(m[(i, j)]))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads a matrix written by [`write_dense_csv`].
pub fn read_dense_csv<R: BufRead>(source: R) -> Result<(Vec<String>, Mat<f64>)> {
    let mut labels: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in source.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match &labels {
            None => {
                if fields[0] != "label" {
                    return Err(parse_err(lineno, "dense CSV must start with a `label,...` header"));
                }
                labels = Some(fields[1..].iter().map(|s| s.to_string()).collect());
            }
            Some(ls) => {
                if fields.len() != ls.len() + 1 {
                    return Err(parse_err(
                        lineno,
                        format!("expected {} fields, found {}", ls.len() + 1, fields.len()),
                    ));
                }
                if rows.len() >= ls.len() || fields[0] != ls[rows.len()] {
                    return Err(parse_err(lineno, format!("row label {:?} out of order", fields[0])));
                }
                let row = fields[1..]
                    .iter()
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| parse_err(lineno, format!("invalid number {s:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
        }
    }
    let labels = labels.ok_or_else(|| parse_err(1, "empty matrix file"))?;
    if rows.len() != labels.len() {
        return Err(parse_err(
            0,
            format!("{} labels but {} rows", labels.len(), rows.len()),
        ));
    }
    let n = labels.len();
    Ok((labels, Mat::from_fn(n, n, |i, j| rows[i][j])))
}

/// Writes a graph as a `src,dst,weight` CSV edge list.
pub fn write_edge_csv<W: Write>(mut out: W, g: &WeightedDigraph) -> Result<()> {
    for i in 0..g.n() {
        for &(j, w) in g.out_edges(i) {
            writeln!(out, "{},{},{}", g.labels()[i], g.labels()[j], fmt_f64(w))?;
        }
    }
    Ok(())
}
