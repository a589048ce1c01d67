//! Plain-text formats: edge lists (`u v` per line) and colorings (one
//! `0`/`1` per line). Lines starting with `#` and blank lines are ignored.

use std::fmt::Write as _;

use crate::{Color, Graph, GraphError};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses an edge list. Ids are re-indexed densely; the returned vector
/// holds the original id of every node.
pub fn parse_edge_list(text: &str) -> Result<(Graph, Vec<u64>), GraphError> {
    let mut edges = Vec::new();
    for (line, l) in content_lines(text) {
        let mut it = l.split_whitespace();
        let mut next = || -> Result<u64, GraphError> {
            let tok = it.next().ok_or(GraphError::Parse { line, msg: "expected two node ids".into() })?;
            tok.parse().map_err(|_| GraphError::Parse { line, msg: format!("bad node id {tok:?}") })
        };
        let (u, v) = (next()?, next()?);
        if it.next().is_some() {
            return Err(GraphError::Parse { line, msg: "trailing tokens".into() });
        }
        edges.push((u, v));
    }
    Graph::build_reindexed(&edges)
}

/// Parses an edge list whose ids are already dense, keeping isolated
/// trailing nodes when `n` is given.
pub fn parse_dense_edge_list(text: &str, n: Option<usize>) -> Result<Graph, GraphError> {
    let mut edges = Vec::new();
    for (line, l) in content_lines(text) {
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(GraphError::Parse { line, msg: "expected two node ids".into() });
        }
        let p = |t: &str| t.parse::<usize>().map_err(|_| GraphError::Parse { line, msg: format!("bad node id {t:?}") });
        edges.push((p(parts[0])?, p(parts[1])?));
    }
    match n {
        Some(n) => Graph::from_edges(n, &edges),
        None => Graph::build(&edges),
    }
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("# nodes {} edges {}\n", g.node_count(), g.edge_count());
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

pub fn parse_coloring(text: &str) -> Result<Vec<Color>, GraphError> {
    content_lines(text)
        .map(|(line, l)| match l {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(GraphError::Parse { line, msg: format!("expected 0 or 1, got {l:?}") }),
        })
        .collect()
}

pub fn write_coloring(colors: &[Color]) -> String {
    colors.iter().map(|&c| if c { "1\n" } else { "0\n" }).collect()
}
