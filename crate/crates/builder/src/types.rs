use propdyn_graph::{Color, ProcessKind};
use serde::{Deserialize, Serialize};

/// What a node type stands for in the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    /// Member `number` of group `group` at a real level, in color copy `copy`.
    Level { level: usize, group: u64, number: u64, copy: bool },
    /// Relay between level `layer` and `layer + 1`, following level node
    /// `(group, number, copy)`.
    Relay { layer: usize, group: u64, number: u64, copy: bool },
    /// Priming chain above the top level, shared by all top groups.
    Chain { depth: usize, number: u64, copy: bool },
    /// Never-switching pool closing the chains.
    Pool { color: Color },
}

/// A set of interchangeable nodes: same color, same number of neighbors in
/// every other type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeType {
    pub role: Role,
    pub size: u64,
    /// Initial color in the majority version.
    pub color: Color,
    /// Bipartition layer; the minority version flips odd layers.
    pub layer: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkKind {
    /// Upper group to lower nodes of a gadget.
    Gadget,
    /// Level node to its relay.
    ToRelay,
    /// Relay group to lower nodes.
    FromRelay,
    /// Chain or pool to the type it primes.
    Chain,
}

/// Biregular bipartite wiring between two types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeLink {
    pub upper: usize,
    pub lower: usize,
    /// Neighbors each upper node has in the lower type.
    pub down_degree: u64,
    /// Neighbors each lower node has in the upper type.
    pub up_degree: u64,
    pub kind: LinkKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeGraph {
    pub types: Vec<NodeType>,
    pub links: Vec<TypeLink>,
}

impl TypeGraph {
    pub fn add(&mut self, role: Role, size: u64, color: Color, layer: i64) -> usize {
        self.types.push(NodeType { role, size, color, layer });
        self.types.len() - 1
    }

    pub fn link(&mut self, upper: usize, lower: usize, down_degree: u64, up_degree: u64, kind: LinkKind) {
        self.links.push(TypeLink { upper, lower, down_degree, up_degree, kind });
    }

    pub fn node_count(&self) -> u64 {
        self.types.iter().map(|t| t.size).sum()
    }

    pub fn edge_count(&self) -> u64 {
        self.links.iter().map(|l| self.types[l.upper].size * l.down_degree).sum()
    }

    /// Initial color of a type for the given process.
    pub fn color(&self, t: usize, kind: ProcessKind) -> Color {
        let ty = &self.types[t];
        match kind {
            ProcessKind::Majority => ty.color,
            ProcessKind::Minority => ty.color ^ (ty.layer.rem_euclid(2) == 1),
        }
    }

    /// Per-type adjacency: `(link index, other type, per-node degree, other is below)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize, u64, bool)>> {
        let mut adj = vec![Vec::new(); self.types.len()];
        for (i, l) in self.links.iter().enumerate() {
            adj[l.upper].push((i, l.lower, l.down_degree, true));
            adj[l.lower].push((i, l.upper, l.up_degree, false));
        }
        adj
    }

    /// Per-node degree of every type.
    pub fn degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.types.len()];
        for l in &self.links {
            deg[l.upper] += l.down_degree;
            deg[l.lower] += l.up_degree;
        }
        deg
    }
}
