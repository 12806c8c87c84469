//! Plain-text edge lists: a header line `n m`, then `m` lines `u v` with
//! 0-based vertices in lexicographic order.

use std::io::{BufRead, Write};

use gridcheck_core::digraph::{Digraph, GraphError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("header announces {expected} edges but {found} follow")]
    EdgeCount { expected: usize, found: usize },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
}

pub fn write_edge_list<W: Write>(g: &Digraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", g.n(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

pub fn to_edge_list_string(g: &Digraph) -> String {
    let mut buf = Vec::new();
    write_edge_list(g, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_pair(line: &str, lineno: usize) -> Result<(usize, usize), EdgeListError> {
    let mut parts = line.split_whitespace();
    let mut next = |what: &str| -> Result<usize, EdgeListError> {
        let tok = parts.next().ok_or_else(|| EdgeListError::Syntax {
            line: lineno,
            message: format!("missing {what}"),
        })?;
        tok.parse().map_err(|_| EdgeListError::Syntax {
            line: lineno,
            message: format!("`{tok}` is not a non-negative integer"),
        })
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if parts.next().is_some() {
        return Err(EdgeListError::Syntax {
            line: lineno,
            message: "expected exactly two fields".into(),
        });
    }
    Ok((a, b))
}

/// Reads an edge list. Blank lines and `#` comments are skipped; edges may
/// come in any order but must not repeat.
pub fn read_edge_list<R: BufRead>(input: R) -> Result<Digraph, EdgeListError> {
    let mut header = None;
    let mut g = None;
    let mut found = 0;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (a, b) = parse_pair(content, lineno)?;
        match header {
            None => {
                header = Some((a, b));
                g = Some(Digraph::empty(a));
            }
            Some(_) => {
                let graph = g.as_mut().expect("set with header");
                graph
                    .add_edge(a, b)
                    .map_err(|source| EdgeListError::Graph {
                        line: lineno,
                        source,
                    })?;
                found += 1;
            }
        }
    }
    let (_, expected) = header.ok_or(EdgeListError::Syntax {
        line: 0,
        message: "empty input".into(),
    })?;
    if found != expected {
        return Err(EdgeListError::EdgeCount { expected, found });
    }
    Ok(g.expect("set with header"))
}
