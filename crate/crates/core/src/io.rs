//! The plain-text graph format: a `BIPARTITE n_left n_right m` header, `m`
//! lines `u v` in left-major slot order, then a `MANIFEST <ref>` line.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::graph::DenseBipartiteGraph;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("expected {expected} edge lines, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn parse_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn graph_file_text(g: &DenseBipartiteGraph, manifest: &str) -> String {
    let mut s = g.edge_list_text();
    s.push_str("MANIFEST ");
    s.push_str(manifest);
    s.push('\n');
    s
}

/// Parses a graph file, returning the graph and its manifest reference.
pub fn parse_graph_file(text: &str) -> Result<(DenseBipartiteGraph, Option<String>), FormatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (no, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "BIPARTITE" {
        return Err(parse_err(no, "expected `BIPARTITE n_left n_right m`"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|e| parse_err(no, format!("{s}: {e}")));
    let (nl, nr, m) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    let mut edges = Vec::with_capacity(m);
    let mut manifest = None;
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        if manifest.is_some() {
            return Err(parse_err(no, "content after MANIFEST line"));
        }
        if let Some(rest) = line.strip_prefix("MANIFEST") {
            manifest = Some(rest.trim().to_string());
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(u), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(no, "expected `u v`"));
        };
        let u: usize = u.parse().map_err(|e| parse_err(no, format!("{u}: {e}")))?;
        let v: usize = v.parse().map_err(|e| parse_err(no, format!("{v}: {e}")))?;
        if u >= nl || v >= nr {
            return Err(parse_err(no, format!("edge ({u}, {v}) out of range")));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(FormatError::EdgeCount {
            expected: m,
            found: edges.len(),
        });
    }
    let g = DenseBipartiteGraph::from_edges(nl, nr, &edges).expect("indices checked");
    Ok((g, manifest))
}

pub fn read_graph_file(path: &Path) -> Result<(DenseBipartiteGraph, Option<String>), FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_graph_file(&text)
}

pub fn write_graph_file(path: &Path, g: &DenseBipartiteGraph, manifest: &str) -> Result<(), FormatError> {
    fs::write(path, graph_file_text(g, manifest)).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = DenseBipartiteGraph::from_edges(2, 3, &[(0, 2), (0, 0), (1, 1), (1, 1)]).unwrap();
        let text = graph_file_text(&g, "g.manifest.json");
        assert!(text.starts_with("BIPARTITE 2 3 4\n0 2\n0 0\n"));
        let (h, m) = parse_graph_file(&text).unwrap();
        assert_eq!(m.as_deref(), Some("g.manifest.json"));
        assert_eq!(graph_file_text(&h, "g.manifest.json"), text);
        assert_eq!(h.checksum(), g.checksum());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_graph_file("").is_err());
        assert!(parse_graph_file("GRAPH 1 1 0\n").is_err());
        assert!(matches!(
            parse_graph_file("BIPARTITE 1 1 2\n0 0\n"),
            Err(FormatError::EdgeCount { expected: 2, found: 1 })
        ));
        assert!(parse_graph_file("BIPARTITE 1 1 1\n0 1\n").is_err());
        assert!(parse_graph_file("BIPARTITE 1 1 1\n0 x\n").is_err());
        assert!(parse_graph_file("BIPARTITE 1 1 1\nMANIFEST a\n0 0\n").is_err());
    }
}
