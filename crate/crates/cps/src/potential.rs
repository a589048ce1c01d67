use serde::{Deserialize, Serialize};

use crate::{le, CpsDag};

/// Edge potentials `P(e) = c(e)^(1/f)` and the per-node balance between
/// incoming and outgoing potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialReport {
    pub f_lambda: f64,
    /// Indexed like the CPS edge list.
    pub edge_potential: Vec<f64>,
    pub node_in: Vec<f64>,
    pub node_out: Vec<f64>,
    /// `in - out` for non-source nodes with `s(v) >= s0`; `None` elsewhere.
    pub margin: Vec<Option<f64>>,
    pub violations: Vec<usize>,
    /// Potential leaving the sources.
    pub trivial_dicut: f64,
    /// `|E| * P(s0)`.
    pub trivial_bound: f64,
}

impl PotentialReport {
    /// `margin / in`, the fraction of incoming potential lost at `v`.
    pub fn relative_margin(&self, v: usize) -> Option<f64> {
        let m = self.margin[v]?;
        Some(if self.node_in[v] > 0.0 { m / self.node_in[v] } else { 0.0 })
    }
}

fn potential(c: f64, f: f64) -> f64 {
    if c <= 0.0 { 0.0 } else { c.powf(1.0 / f) }
}

pub fn potential_report(dag: &CpsDag, f_lambda: f64) -> PotentialReport {
    let cps = &dag.cps;
    let n = cps.node_count();
    let edge_potential: Vec<f64> = cps.edges().iter().map(|e| potential(e.c, f_lambda)).collect();
    let mut node_in = vec![0.0; n];
    let mut node_out = vec![0.0; n];
    for (e, &p) in cps.edges().iter().zip(&edge_potential) {
        node_out[e.u] += p;
        node_in[e.v] += p;
    }
    let mut margin = vec![None; n];
    let mut violations = Vec::new();
    let mut trivial_dicut = 0.0;
    for v in 0..n {
        if cps.is_source(v) {
            trivial_dicut += node_out[v];
            continue;
        }
        if cps.is_base(v) {
            continue;
        }
        margin[v] = Some(node_in[v] - node_out[v]);
        if !le(node_out[v], node_in[v]) {
            violations.push(v);
        }
    }
    let undirected = cps.deg.iter().sum::<u64>() as f64 / 2.0;
    PotentialReport {
        f_lambda,
        edge_potential,
        node_in,
        node_out,
        margin,
        violations,
        trivial_dicut,
        trivial_bound: undirected * potential(cps.s0 as f64, f_lambda),
    }
}

/// A dipartitioning `(V1, V2)` with `V1` closed under predecessors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dicut {
    pub v1: Vec<usize>,
    /// Real edges from `V1` to `V2`, as CPS edge indices.
    pub edges: Vec<usize>,
    pub potential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DicutEnumeration {
    pub dicuts: Vec<Dicut>,
    /// False when the budget stopped the enumeration early.
    pub complete: bool,
    pub trivial_potential: f64,
    pub max_potential: f64,
    /// Every enumerated dicut carries at most the trivial potential.
    pub bounded_by_trivial: bool,
    /// Every real edge leaving a source has `c <= s0`.
    pub source_edges_within_s0: bool,
}

/// Enumerates dipartitionings whose first part contains all sources and is
/// closed under predecessors, up to `budget` of them.
pub fn enumerate_dicuts(dag: &CpsDag, f_lambda: f64, budget: usize) -> DicutEnumeration {
    let cps = &dag.cps;
    let n = cps.node_count();
    let mut in_v1: Vec<bool> = (0..n).map(|v| cps.is_source(v)).collect();
    let free: Vec<usize> = dag.order.iter().copied().filter(|&v| !in_v1[v]).collect();
    let source_edges_within_s0 = cps
        .edges()
        .iter()
        .all(|e| e.c <= 0.0 || !in_v1[e.u] || le(e.c, cps.s0 as f64));

    let mut out = DicutEnumeration {
        dicuts: Vec::new(),
        complete: true,
        trivial_potential: 0.0,
        max_potential: 0.0,
        bounded_by_trivial: true,
        source_edges_within_s0,
    };
    let record = |in_v1: &[bool], out: &mut DicutEnumeration| {
        let edges: Vec<usize> = (0..cps.edges().len())
            .filter(|&i| {
                let e = cps.edge(i);
                e.c > 0.0 && in_v1[e.u] && !in_v1[e.v]
            })
            .collect();
        let p = edges.iter().map(|&i| potential(cps.edge(i).c, f_lambda)).sum::<f64>();
        let v1 = (0..n).filter(|&v| in_v1[v]).collect();
        out.dicuts.push(Dicut { v1, edges, potential: p });
    };

    // Depth-first over include/exclude decisions in topological order; a
    // node may join V1 only once all its real predecessors have.
    fn walk(
        i: usize,
        free: &[usize],
        in_v1: &mut Vec<bool>,
        budget: usize,
        out: &mut DicutEnumeration,
        can_join: &dyn Fn(&[bool], usize) -> bool,
        record: &dyn Fn(&[bool], &mut DicutEnumeration),
    ) {
        if !out.complete {
            return;
        }
        if i == free.len() {
            if out.dicuts.len() >= budget {
                out.complete = false;
            } else {
                record(in_v1, out);
            }
            return;
        }
        walk(i + 1, free, in_v1, budget, out, can_join, record);
        let v = free[i];
        if can_join(in_v1, v) {
            in_v1[v] = true;
            walk(i + 1, free, in_v1, budget, out, can_join, record);
            in_v1[v] = false;
        }
    }
    let can_join = |in_v1: &[bool], v: usize| {
        cps.in_edges(v).iter().all(|&k| {
            let e = cps.edge(k);
            e.c <= 0.0 || in_v1[e.u]
        })
    };
    walk(0, &free, &mut in_v1, budget, &mut out, &can_join, &record);

    // The first recorded dicut excludes every free node: the trivial one.
    if let Some(first) = out.dicuts.first() {
        out.trivial_potential = first.potential;
    }
    out.max_potential = out.dicuts.iter().map(|d| d.potential).fold(0.0, f64::max);
    out.bounded_by_trivial = out.dicuts.iter().all(|d| le(d.potential, out.trivial_potential));
    out
}
