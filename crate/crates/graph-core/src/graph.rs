use crate::GraphError;

/// Immutable simple undirected graph with sorted adjacency lists.
///
/// Adjacency is stored in compressed sparse row form. Every undirected edge
/// `{u, v}` occupies two directed *slots*, one in each endpoint's list;
/// [`Graph::reverse_slot`] maps one to the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    reverse: Vec<u32>,
}

impl Graph {
    /// Builds a graph on `n` nodes, rejecting self-loops and duplicates.
    /// `(u, v)` and `(v, u)` count as the same edge.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut deg = vec![0usize; n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::NodeOutOfRange { node: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            deg[u] += 1;
            deg[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &deg {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0u32; offsets[n]];
        for &(u, v) in edges {
            targets[fill[u]] = v as u32;
            fill[u] += 1;
            targets[fill[v]] = u as u32;
            fill[v] += 1;
        }
        for v in 0..n {
            let list = &mut targets[offsets[v]..offsets[v + 1]];
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = (v.min(w[0] as usize), v.max(w[0] as usize));
                return Err(GraphError::DuplicateEdge(a, b));
            }
        }
        let mut g = Graph { offsets, targets, reverse: Vec::new() };
        g.reverse = (0..n)
            .flat_map(|u| g.slots(u).map(move |s| (u, s)))
            .map(|(u, s)| {
                let v = g.targets[s] as usize;
                g.slot_of(v, u).expect("symmetric adjacency") as u32
            })
            .collect();
        Ok(g)
    }

    /// Builds a graph whose node count is one more than the largest id used.
    pub fn build(edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        Self::from_edges(n, edges)
    }

    /// Re-indexes arbitrary (possibly sparse) ids to `0..n` in increasing
    /// order and builds the graph. Returns the original id of each node.
    pub fn build_reindexed(edges: &[(u64, u64)]) -> Result<(Self, Vec<u64>), GraphError> {
        let mut ids: Vec<u64> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        ids.sort_unstable();
        ids.dedup();
        let index = |x: u64| ids.binary_search(&x).unwrap();
        let dense: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (index(u), index(v))).collect();
        let g = Self::from_edges(ids.len(), &dense)?;
        Ok((g, ids))
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Sorted neighbor ids of `v`.
    pub fn neighbors(&self, v: usize) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.targets[self.offsets[v]..self.offsets[v + 1]].iter().map(|&u| u as usize)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.slot_of(u, v).is_some()
    }

    /// Range of directed slots owned by `v`.
    pub fn slots(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    /// Total number of directed slots (twice the edge count).
    pub fn slot_count(&self) -> usize {
        self.targets.len()
    }

    /// Head of a directed slot.
    pub fn slot_target(&self, slot: usize) -> usize {
        self.targets[slot] as usize
    }

    /// The slot of the same edge seen from the other endpoint.
    pub fn reverse_slot(&self, slot: usize) -> usize {
        self.reverse[slot] as usize
    }

    /// Slot of the directed edge `u -> v`, if the edge exists.
    pub fn slot_of(&self, u: usize, v: usize) -> Option<usize> {
        let base = self.offsets[u];
        self.targets[base..self.offsets[u + 1]]
            .binary_search(&(v as u32))
            .ok()
            .map(|i| base + i)
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count())
            .flat_map(move |u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Tries to 2-color the graph; returns the side of every node when the
    /// graph is bipartite.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let n = self.node_count();
        let mut side: Vec<Option<bool>> = vec![None; n];
        let mut stack = Vec::new();
        for s in 0..n {
            if side[s].is_some() {
                continue;
            }
            side[s] = Some(false);
            stack.push(s);
            while let Some(u) = stack.pop() {
                let su = side[u].unwrap();
                for w in self.neighbors(u) {
                    match side[w] {
                        None => {
                            side[w] = Some(!su);
                            stack.push(w);
                        }
                        Some(sw) if sw == su => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(side.into_iter().map(|s| s.unwrap()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_degrees() {
        let g = Graph::build(&[(0, 1), (1, 2)]).unwrap();
        let deg: Vec<usize> = (0..3).map(|v| g.degree(v)).collect();
        assert_eq!(deg, vec![1, 2, 1]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn duplicate_after_normalization() {
        assert_eq!(Graph::build(&[(0, 1), (1, 0)]), Err(GraphError::DuplicateEdge(0, 1)));
    }

    #[test]
    fn self_loop_rejected() {
        assert_eq!(Graph::build(&[(2, 2)]), Err(GraphError::SelfLoop(2)));
    }

    #[test]
    fn complete_bipartite_4_4() {
        let edges: Vec<_> = (0..4).flat_map(|a| (4..8).map(move |b| (a, b))).collect();
        let g = Graph::build(&edges).unwrap();
        assert!((0..8).all(|v| g.degree(v) == 4));
        assert!(g.bipartition().is_some());
    }

    #[test]
    fn reverse_slots_pair_up() {
        let g = Graph::build(&[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        for u in 0..g.node_count() {
            for s in g.slots(u) {
                let r = g.reverse_slot(s);
                assert_eq!(g.slot_target(r), u);
                assert_eq!(g.reverse_slot(r), s);
            }
        }
    }

    #[test]
    fn reindex_sparse_ids() {
        let (g, ids) = Graph::build_reindexed(&[(10, 30), (30, 70)]).unwrap();
        assert_eq!(ids, vec![10, 30, 70]);
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn odd_cycle_not_bipartite() {
        let g = Graph::build(&[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(g.bipartition().is_none());
    }
}
