use propdyn_graph::Graph;
use propdyn_sim::{Observer, Trace};

use crate::{validate, Cps, CpsEdge, CpsError, Form};

const NONE: u32 = u32::MAX;

/// Streaming conflict attribution, usable as a simulator [`Observer`].
///
/// A conflict is credited to `c(u, v)` when it was created by a switch of
/// `u` and removed by a switch of `v`. Conflicts present initially, conflicts
/// still present at the end, and conflicts a node removes by switching back
/// itself are not counted.
pub struct CpsExtractor<'g> {
    g: &'g Graph,
    /// Creator of the current conflict on each undirected edge, keyed by the
    /// smaller of its two slots.
    creator: Vec<u32>,
    /// `c` per slot; slot `s` of node `u` holds `c(u, target(s))`.
    flow: Vec<u64>,
    switches: Vec<u64>,
    current: usize,
}

impl<'g> CpsExtractor<'g> {
    pub fn new(g: &'g Graph) -> Self {
        CpsExtractor {
            g,
            creator: vec![NONE; g.slot_count()],
            flow: vec![0; g.slot_count()],
            switches: vec![0; g.node_count()],
            current: 0,
        }
    }

    /// Builds the CPS and checks the slack form of the conditions.
    pub fn finish(self, lambda: f64, s0: u64) -> Result<Cps, CpsError> {
        let cps = self.into_unchecked(lambda, s0)?;
        validate(&cps, Form::Slack).into_result()?;
        Ok(cps)
    }

    /// Builds the CPS without validating it.
    pub fn into_unchecked(self, lambda: f64, s0: u64) -> Result<Cps, CpsError> {
        let g = self.g;
        let deg = (0..g.node_count()).map(|v| g.degree(v) as u64).collect();
        let s = self.switches.iter().map(|&x| x as f64).collect();
        let mut edges = Vec::new();
        for u in 0..g.node_count() {
            for slot in g.slots(u) {
                if self.flow[slot] > 0 {
                    edges.push(CpsEdge { u, v: g.slot_target(slot), c: self.flow[slot] as f64 });
                }
            }
        }
        Cps::new(lambda, s0, deg, s, edges)
    }
}

impl Observer for CpsExtractor<'_> {
    fn on_switch(&mut self, _step: u64, node: usize) {
        self.current = node;
        self.switches[node] += 1;
    }

    fn on_edge(&mut self, slot: usize, created: bool) {
        let rev = self.g.reverse_slot(slot);
        let key = slot.min(rev);
        if created {
            self.creator[key] = self.current as u32;
        } else {
            let c = self.creator[key];
            if c != NONE && c as usize != self.current {
                // `rev` is the creator's slot pointing at the remover.
                self.flow[rev] += 1;
            }
            self.creator[key] = NONE;
        }
    }
}

/// Extracts the CPS of a recorded trace and checks conditions 2, 3 and the
/// slack form of condition 1.
pub fn extract_cps(g: &Graph, trace: &Trace, lambda: f64, s0: u64) -> Result<Cps, CpsError> {
    let mut ex = CpsExtractor::new(g);
    for ev in &trace.events {
        ex.on_switch(ev.step, ev.node);
        for &(u, v) in &ev.created {
            ex.on_edge(g.slot_of(u, v).ok_or_else(|| bad_edge(u, v))?, true);
        }
        for &(u, v) in &ev.removed {
            ex.on_edge(g.slot_of(u, v).ok_or_else(|| bad_edge(u, v))?, false);
        }
    }
    ex.finish(lambda, s0)
}

fn bad_edge(u: usize, v: usize) -> CpsError {
    CpsError::Invalid(format!("trace mentions non-edge ({u}, {v})"))
}
