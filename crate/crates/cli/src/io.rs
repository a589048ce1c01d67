use std::fs;
use std::path::Path;

use anyhow::Context;
use propdyn_graph::io::{parse_coloring, parse_dense_edge_list};
use propdyn_graph::{Color, Graph};

pub fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Graph with dense ids; `n` keeps isolated trailing nodes.
pub fn read_graph(path: &Path, n: Option<usize>) -> anyhow::Result<Graph> {
    parse_dense_edge_list(&read(path)?, n).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_coloring(path: &Path) -> anyhow::Result<Vec<Color>> {
    parse_coloring(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// Whitespace-separated node ids; `#` starts a comment line.
pub fn read_schedule(path: &Path) -> anyhow::Result<Vec<usize>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        for tok in line.split_whitespace() {
            let v = tok.parse().with_context(|| format!("{}:{}: bad node id {tok:?}", path.display(), i + 1))?;
            out.push(v);
        }
    }
    Ok(out)
}

pub fn write_schedule(nodes: &[usize]) -> String {
    let mut s = String::with_capacity(nodes.len() * 7);
    for v in nodes {
        s.push_str(&v.to_string());
        s.push('\n');
    }
    s
}
