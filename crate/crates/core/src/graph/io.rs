//! Edge-list and Matrix Market reading/writing.
//!
//! Edge-list files hold one undirected edge per line as `u v [w]` with 0-based
//! vertex indices. Lines starting with `#` are comments, except for a
//! `# vertices: N` header which fixes the vertex count so that isolated
//! vertices survive a round trip. Without the header the vertex count is one
//! more than the largest index seen.
//!
//! Matrix Market files use the `coordinate` layout with `symmetric` symmetry;
//! `pattern` files load as unweighted graphs, `real`/`integer` files as weighted
//! ones. Entries are 1-based and must lie strictly off the diagonal.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::{RawEdge, SparseGraph};
use crate::error::{Error, Result};

/// Largest vertex count accepted from a file.
pub const MAX_VERTICES: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    MatrixMarket,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge-list" | "edgelist" | "edges" => Ok(GraphFormat::EdgeList),
            "matrix-market" | "mtx" | "mm" => Ok(GraphFormat::MatrixMarket),
            other => Err(Error::InvalidArgument(format!("unknown graph format '{other}'"))),
        }
    }
}

impl fmt::Display for GraphFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphFormat::EdgeList => "edge-list",
            GraphFormat::MatrixMarket => "matrix-market",
        })
    }
}

fn parse_index(token: &str, line: usize) -> Result<usize> {
    let value: usize = token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid vertex index '{token}'")))?;
    if value >= MAX_VERTICES {
        return Err(Error::parse(line, format!("vertex index {value} exceeds limit")));
    }
    Ok(value)
}

fn parse_weight(token: &str, line: usize) -> Result<f64> {
    let w: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid weight '{token}'")))?;
    if !w.is_finite() {
        return Err(Error::parse(line, format!("non-finite weight '{token}'")));
    }
    Ok(w)
}

fn parse_vertex_header(comment: &str, line: usize) -> Result<Option<usize>> {
    let body = comment.trim_start_matches('#').trim();
    let Some(rest) = body.strip_prefix("vertices") else {
        return Ok(None);
    };
    let rest = rest.trim_start().trim_start_matches(':').trim();
    let n: usize = rest
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid vertex count '{rest}'")))?;
    if n > MAX_VERTICES {
        return Err(Error::parse(line, format!("vertex count {n} exceeds limit")));
    }
    Ok(Some(n))
}

/// Parses the edge-list text format.
pub fn parse_edge_list(text: &str) -> Result<SparseGraph> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    let mut weighted = false;
    let mut max_index: Option<usize> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some(n) = parse_vertex_header(trimmed, line)? {
                if declared.is_some() {
                    return Err(Error::parse(line, "repeated vertex header"));
                }
                declared = Some(n);
            }
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let (u, v, w) = match tokens.as_slice() {
            [u, v] => (parse_index(u, line)?, parse_index(v, line)?, 1.0),
            [u, v, w] => {
                weighted = true;
                (parse_index(u, line)?, parse_index(v, line)?, parse_weight(w, line)?)
            }
            _ => return Err(Error::parse(line, "expected 'u v' or 'u v w'")),
        };
        if u == v {
            return Err(Error::SelfLoopRejected { line, vertex: u });
        }
        max_index = Some(max_index.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push(RawEdge { u, v, w, line });
    }
    let n = match (declared, max_index) {
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => 0,
    };
    SparseGraph::from_raw(n, edges, weighted)
}

/// Writes the edge-list format, including the `# vertices: N` header.
pub fn write_edge_list<W: Write>(graph: &SparseGraph, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "# vertices: {}", graph.n())?;
    for (u, v, w) in graph.edges() {
        if graph.is_weighted() {
            writeln!(out, "{u} {v} {w:?}")?;
        } else {
            writeln!(out, "{u} {v}")?;
        }
    }
    Ok(())
}

/// Parses a symmetric coordinate Matrix Market file.
pub fn parse_matrix_market(text: &str) -> Result<SparseGraph> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (line, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty Matrix Market file"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::parse(line, "missing '%%MatrixMarket matrix' banner"));
    }
    if fields[2] != "coordinate" {
        return Err(Error::parse(line, "only coordinate layout is supported"));
    }
    let weighted = match fields[3].as_str() {
        "pattern" => false,
        "real" | "integer" => true,
        other => return Err(Error::parse(line, format!("unsupported field '{other}'"))),
    };
    if fields[4] != "symmetric" {
        return Err(Error::parse(line, "only symmetric matrices describe undirected graphs"));
    }

    let mut size: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (line, raw) in lines {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let Some((n, nnz)) = size else {
            let [rows, cols, nnz] = tokens.as_slice() else {
                return Err(Error::parse(line, "expected 'rows cols entries'"));
            };
            let rows = parse_index(rows, line)?;
            let cols = parse_index(cols, line)?;
            let nnz: usize = nnz
                .parse()
                .map_err(|_| Error::parse(line, format!("invalid entry count '{nnz}'")))?;
            if rows != cols {
                return Err(Error::parse(line, "adjacency matrix must be square"));
            }
            size = Some((rows, nnz));
            continue;
        };
        if edges.len() == nnz {
            return Err(Error::parse(line, "more entries than declared"));
        }
        let (i, j, w) = match (weighted, tokens.as_slice()) {
            (false, [i, j]) => (parse_index(i, line)?, parse_index(j, line)?, 1.0),
            (true, [i, j, w]) => (parse_index(i, line)?, parse_index(j, line)?, parse_weight(w, line)?),
            _ => return Err(Error::parse(line, "wrong number of fields in entry")),
        };
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::parse(line, format!("entry ({i}, {j}) outside 1..={n}")));
        }
        if i == j {
            return Err(Error::SelfLoopRejected { line, vertex: i - 1 });
        }
        edges.push(RawEdge { u: i - 1, v: j - 1, w, line });
    }
    let Some((n, nnz)) = size else {
        return Err(Error::parse(text.lines().count().max(1), "missing size line"));
    };
    if edges.len() != nnz {
        return Err(Error::parse(
            text.lines().count().max(1),
            format!("declared {nnz} entries, found {}", edges.len()),
        ));
    }
    SparseGraph::from_raw(n, edges, weighted)
}

/// Writes the lower triangle as a symmetric coordinate Matrix Market file.
pub fn write_matrix_market<W: Write>(graph: &SparseGraph, out: &mut W) -> std::io::Result<()> {
    let field = if graph.is_weighted() { "real" } else { "pattern" };
    writeln!(out, "%%MatrixMarket matrix coordinate {field} symmetric")?;
    writeln!(out, "{} {} {}", graph.n(), graph.n(), graph.num_edges())?;
    for (u, v, w) in graph.edges() {
        if graph.is_weighted() {
            writeln!(out, "{} {} {w:?}", v + 1, u + 1)?;
        } else {
            writeln!(out, "{} {}", v + 1, u + 1)?;
        }
    }
    Ok(())
}

pub fn load_graph(path: impl AsRef<Path>, format: GraphFormat) -> Result<SparseGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        GraphFormat::EdgeList => parse_edge_list(&text),
        GraphFormat::MatrixMarket => parse_matrix_market(&text),
    }
}

pub fn save_graph(graph: &SparseGraph, path: impl AsRef<Path>, format: GraphFormat) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    match format {
        GraphFormat::EdgeList => write_edge_list(graph, &mut buf),
        GraphFormat::MatrixMarket => write_matrix_market(graph, &mut buf),
    }
    .map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}
