use serde::{Deserialize, Serialize};

use crate::CpsError;

/// Directed edge `(u, v)` with conflict count `c`; real when `c > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpsEdge {
    pub u: usize,
    pub v: usize,
    pub c: f64,
}

/// Switch counts and conflict flows on a graph.
///
/// Only directed edges that may carry flow are stored; their structure is
/// fixed after construction while `s` and `c` may be modified.
#[derive(Debug, Clone, PartialEq)]
pub struct Cps {
    pub lambda: f64,
    /// Nodes with `s(v) < s0` are base nodes.
    pub s0: u64,
    pub deg: Vec<u64>,
    pub s: Vec<f64>,
    edges: Vec<CpsEdge>,
    out_start: Vec<usize>,
    in_start: Vec<usize>,
    in_index: Vec<usize>,
}

impl Cps {
    pub fn new(
        lambda: f64,
        s0: u64,
        deg: Vec<u64>,
        s: Vec<f64>,
        mut edges: Vec<CpsEdge>,
    ) -> Result<Self, CpsError> {
        let n = deg.len();
        if s.len() != n {
            return Err(CpsError::Invalid(format!("{} switch counts for {n} nodes", s.len())));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(CpsError::Invalid(format!("lambda {lambda} outside (0, 1)")));
        }
        if let Some(v) = (0..n).find(|&v| !(s[v] >= 0.0)) {
            return Err(CpsError::Invalid(format!("negative s at node {v}")));
        }
        edges.sort_by_key(|e| (e.u, e.v));
        for w in edges.windows(2) {
            if (w[0].u, w[0].v) == (w[1].u, w[1].v) {
                return Err(CpsError::Invalid(format!("duplicate edge ({}, {})", w[0].u, w[0].v)));
            }
        }
        for e in &edges {
            if e.u >= n || e.v >= n || e.u == e.v {
                return Err(CpsError::Invalid(format!("bad edge ({}, {})", e.u, e.v)));
            }
            if !(e.c >= 0.0) {
                return Err(CpsError::Invalid(format!("negative c on ({}, {})", e.u, e.v)));
            }
        }
        let mut out_start = vec![0usize; n + 1];
        let mut in_start = vec![0usize; n + 1];
        for e in &edges {
            out_start[e.u + 1] += 1;
            in_start[e.v + 1] += 1;
        }
        for v in 0..n {
            out_start[v + 1] += out_start[v];
            in_start[v + 1] += in_start[v];
        }
        let mut fill = in_start.clone();
        let mut in_index = vec![0usize; edges.len()];
        for (i, e) in edges.iter().enumerate() {
            in_index[fill[e.v]] = i;
            fill[e.v] += 1;
        }
        Ok(Cps { lambda, s0, deg, s, edges, out_start, in_start, in_index })
    }

    pub fn node_count(&self) -> usize {
        self.deg.len()
    }

    pub fn edges(&self) -> &[CpsEdge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &CpsEdge {
        &self.edges[i]
    }

    pub fn set_c(&mut self, i: usize, c: f64) {
        self.edges[i].c = c;
    }

    /// Indices of edges leaving `v`, ordered by target.
    pub fn out_edges(&self, v: usize) -> std::ops::Range<usize> {
        self.out_start[v]..self.out_start[v + 1]
    }

    /// Indices of edges entering `v`.
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_index[self.in_start[v]..self.in_start[v + 1]]
    }

    pub fn c_out(&self, v: usize) -> f64 {
        self.out_edges(v).map(|i| self.edges[i].c).sum()
    }

    pub fn c_in(&self, v: usize) -> f64 {
        self.in_edges(v).iter().map(|&i| self.edges[i].c).sum()
    }

    /// `c(u, v)`, zero when the edge is not stored.
    pub fn c(&self, u: usize, v: usize) -> f64 {
        let r = self.out_edges(u);
        match self.edges[r.clone()].binary_search_by_key(&v, |e| e.v) {
            Ok(k) => self.edges[r.start + k].c,
            Err(_) => 0.0,
        }
    }

    pub fn is_base(&self, v: usize) -> bool {
        self.s[v] < self.s0 as f64
    }

    pub fn is_source(&self, v: usize) -> bool {
        self.in_edges(v).iter().all(|&i| self.edges[i].c <= 0.0)
    }

    pub fn total_s(&self) -> f64 {
        self.s.iter().sum()
    }

    pub fn total_c(&self) -> f64 {
        self.edges.iter().map(|e| e.c).sum()
    }

    pub fn real_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.c > 0.0).count()
    }

    pub fn to_file(&self) -> CpsFile {
        CpsFile {
            lambda: self.lambda,
            s0: self.s0,
            nodes: (0..self.node_count())
                .map(|id| NodeRecord { id, deg: self.deg[id], s: self.s[id] })
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| e.c > 0.0)
                .map(|e| EdgeRecord { u: e.u, v: e.v, c: e.c })
                .collect(),
        }
    }

    pub fn from_file(f: CpsFile) -> Result<Self, CpsError> {
        let n = f.nodes.len();
        let mut deg = vec![0u64; n];
        let mut s = vec![0.0; n];
        let mut seen = vec![false; n];
        for r in &f.nodes {
            if r.id >= n || seen[r.id] {
                return Err(CpsError::Invalid(format!("node ids must be 0..{n} without repeats")));
            }
            seen[r.id] = true;
            deg[r.id] = r.deg;
            s[r.id] = r.s;
        }
        let edges = f.edges.iter().map(|e| CpsEdge { u: e.u, v: e.v, c: e.c }).collect();
        Cps::new(f.lambda, f.s0, deg, s, edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("CPS serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CpsError> {
        Cps::from_file(serde_json::from_str(text)?)
    }
}

/// JSON interchange form: nodes `(id, deg, s)` and real edges `(u, v, c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpsFile {
    pub lambda: f64,
    pub s0: u64,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub deg: u64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    pub c: f64,
}
