use crate::Cps;

/// A CPS whose real edges are acyclic and whose base nodes are sources.
#[derive(Debug, Clone, PartialEq)]
pub struct CpsDag {
    pub cps: Cps,
    /// Topological order of all nodes with respect to the real edges.
    pub order: Vec<usize>,
    /// Total conflict count removed by cycle cancellation.
    pub cancelled: f64,
    /// Total conflict count removed from inputs of base nodes.
    pub base_inputs_removed: f64,
}

impl CpsDag {
    /// Position of every node in [`CpsDag::order`].
    pub fn rank(&self) -> Vec<usize> {
        let mut rank = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            rank[v] = i;
        }
        rank
    }

    pub fn sources(&self) -> Vec<usize> {
        (0..self.cps.node_count()).filter(|&v| self.cps.is_source(v)).collect()
    }

    /// True if every real edge points forward in [`CpsDag::order`].
    pub fn is_topological(&self) -> bool {
        let rank = self.rank();
        self.cps.edges().iter().all(|e| e.c <= 0.0 || rank[e.u] < rank[e.v])
    }
}

const WHITE: u8 = 0;
const GRAY: u8 = 1;
const BLACK: u8 = 2;

/// Cancels every directed cycle of real edges by subtracting its minimum,
/// then removes the inputs of base nodes.
///
/// A depth-first search runs over real edges; each back edge closes a cycle
/// on the current stack, which is cancelled in place before the search
/// resumes from the source of the first zeroed edge. Which cycles get
/// cancelled depends on the search order, but any order yields a valid CPS.
pub fn canonicalize_dag(cps: &Cps) -> CpsDag {
    let mut cps = cps.clone();
    let n = cps.node_count();
    let mut color = vec![WHITE; n];
    let mut finish = Vec::with_capacity(n);
    let mut cancelled = 0.0;

    for root in 0..n {
        if color[root] != WHITE {
            continue;
        }
        // Frames: (node, next edge index, edge index that entered the node).
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, cps.out_edges(root).start, usize::MAX)];
        color[root] = GRAY;
        while let Some(&mut (v, ref mut cursor, _)) = stack.last_mut() {
            let end = cps.out_edges(v).end;
            if *cursor == end {
                color[v] = BLACK;
                finish.push(v);
                stack.pop();
                continue;
            }
            let i = *cursor;
            *cursor += 1;
            let e = *cps.edge(i);
            if e.c <= 0.0 {
                continue;
            }
            match color[e.v] {
                WHITE => {
                    color[e.v] = GRAY;
                    stack.push((e.v, cps.out_edges(e.v).start, i));
                }
                GRAY => {
                    let top = stack.iter().position(|f| f.0 == e.v).expect("gray node on stack");
                    let mut cycle: Vec<usize> = stack[top + 1..].iter().map(|f| f.2).collect();
                    cycle.push(i);
                    let m = cycle.iter().map(|&k| cps.edge(k).c).fold(f64::INFINITY, f64::min);
                    let mut first_zero = None;
                    for (pos, &k) in cycle.iter().enumerate() {
                        let c = cps.edge(k).c;
                        if c <= m {
                            cps.set_c(k, 0.0);
                            first_zero.get_or_insert(pos);
                        } else {
                            cps.set_c(k, c - m);
                        }
                    }
                    cancelled += m * cycle.len() as f64;
                    // Frames above the first zeroed tree edge lose their
                    // entry and are explored again later.
                    let keep = top + 1 + first_zero.unwrap();
                    for f in stack.drain(keep..) {
                        color[f.0] = WHITE;
                    }
                }
                _ => {}
            }
        }
    }

    let mut base_inputs_removed = 0.0;
    for v in 0..n {
        if cps.is_base(v) {
            for k in cps.in_edges(v).to_vec() {
                base_inputs_removed += cps.edge(k).c;
                cps.set_c(k, 0.0);
            }
        }
    }
    finish.reverse();
    CpsDag { cps, order: finish, cancelled, base_inputs_removed }
}
