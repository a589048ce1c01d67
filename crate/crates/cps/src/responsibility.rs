use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::validate::validate_nodes_with;
use crate::{le, Cps, CpsDag, CpsError, Form};

/// Changes applied at one node while propagating the effects of `v0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeAdjustment {
    pub node: usize,
    pub delta_in: f64,
    pub delta_out: f64,
    /// Input that could not be matched by remaining outputs.
    pub delta_tilde_in: f64,
    pub delta_s: f64,
    /// Truncation level of the outputs, when they were not all zeroed.
    pub c_thres: Option<f64>,
}

/// Processing of one band node `v0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponsibilityStep {
    pub v0: usize,
    /// `(u, v, delta c)` for every reduced edge.
    pub delta_c: Vec<(usize, usize, f64)>,
    pub adjustments: Vec<NodeAdjustment>,
    pub responsibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponsibilityLedger {
    pub a: u64,
    /// Band `{v : a <= deg(v) < 2a}` in processing order.
    pub band: Vec<usize>,
    pub responsibility: BTreeMap<usize, f64>,
    pub steps: Vec<ResponsibilityStep>,
    /// `s` of the band before processing, summed.
    pub band_s: f64,
    /// Final `s'` per node.
    pub s_final: Vec<f64>,
    /// Bound constant `C` with `R(v0) <= C s'(v0)`.
    pub bound_constant: f64,
    /// Largest observed `R(v0) / s'(v0)`.
    pub max_ratio: f64,
}

impl ResponsibilityLedger {
    pub fn total_responsibility(&self) -> f64 {
        self.responsibility.values().sum()
    }
}

/// `1 + (1 + l)(1 - l) / l^2`, the constant of the `R(v0) = O(s'(v0))` bound
/// for a band `[a, 2a)`.
pub fn responsibility_constant(lambda: f64) -> f64 {
    1.0 + (1.0 + lambda) / (2.0 * lambda * lambda) * (1.0 - lambda) * 2.0
}

/// Lowers every output above `t` to `t`, choosing `t` so that the total
/// reduction is `target`; returns `t` and the per-output reductions.
fn water_fill(values: &[f64], target: f64) -> (f64, Vec<f64>) {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut t = 0.0;
    for k in 0..sorted.len() {
        prefix += sorted[k];
        let next = sorted.get(k + 1).copied().unwrap_or(0.0);
        // Lowering the top k+1 values to `next` removes this much.
        let removed = prefix - (k + 1) as f64 * next;
        if removed >= target {
            t = (prefix - target) / (k + 1) as f64;
            break;
        }
    }
    let cuts = values.iter().map(|&x| (x - t).max(0.0)).collect();
    (t, cuts)
}

/// Propagation state shared by the nodes reached from one `v0`.
struct Flow<'a> {
    rank: &'a [usize],
    frontier: &'a mut BinaryHeap<Reverse<(usize, usize)>>,
    delta_in: &'a mut [f64],
    reached: &'a mut [bool],
}

impl Flow<'_> {
    /// Reduces the outputs of `v` by `cuts` and forwards them downstream.
    fn push_out(&mut self, cps: &mut Cps, v: usize, cuts: &[f64], step: &mut ResponsibilityStep) {
        for (k, &d) in cps.out_edges(v).zip(cuts) {
            if d <= 0.0 {
                continue;
            }
            let e = *cps.edge(k);
            let rest = e.c - d;
            cps.set_c(k, if rest <= 1e-12 * e.c { 0.0 } else { rest });
            step.delta_c.push((e.u, e.v, d));
            self.delta_in[e.v] += d;
            if !self.reached[e.v] {
                self.reached[e.v] = true;
                self.frontier.push(Reverse((self.rank[e.v], e.v)));
            }
        }
    }
}

/// Runs the responsibility redistribution on the band `[a, 2a)`.
///
/// Band nodes are processed in topological order. For each `v0` its outputs
/// are zeroed and the removed flow is pushed downstream: a node receiving
/// `delta_in` gives up `delta_s` switches and truncates its largest outputs
/// by `(1 - l)/(1 + l) delta_in`, or zeroes them all when they are too
/// small, in which case `delta_s` is capped at the remaining `s'`. After every `v0` the touched nodes are re-validated against the
/// relaxed conditions.
pub fn apply_responsibilities(dag: &CpsDag, a: u64) -> Result<ResponsibilityLedger, CpsError> {
    let mut cps = dag.cps.clone();
    let n = cps.node_count();
    let l = cps.lambda;
    let rho = (1.0 - l) / (1.0 + l);
    let in_band = |v: usize, deg: &[u64]| a <= deg[v] && deg[v] < 2 * a;
    let band: Vec<usize> = dag.order.iter().copied().filter(|&v| in_band(v, &cps.deg)).collect();
    if band.is_empty() {
        return Err(CpsError::EmptyBand { a });
    }
    let rank = dag.rank();
    let base: Vec<bool> = (0..n).map(|v| cps.is_base(v)).collect();
    let band_s: f64 = band.iter().map(|&v| cps.s[v]).sum();
    let bound_constant = responsibility_constant(l);
    let mut responsibility = BTreeMap::new();
    let mut steps = Vec::new();
    let mut max_ratio: f64 = 0.0;

    // Per-node accumulators, reset after each v0.
    let mut delta_in = vec![0.0f64; n];
    let mut reached = vec![false; n];

    for &v0 in &band {
        let mut step = ResponsibilityStep { v0, delta_c: Vec::new(), adjustments: Vec::new(), responsibility: 0.0 };
        // Nodes reached from v0, processed in topological order.
        let mut frontier = BinaryHeap::new();
        let mut touched = vec![v0];
        let outs: Vec<f64> = cps.out_edges(v0).map(|k| cps.edge(k).c).collect();
        let mut flow = Flow { rank: &rank, frontier: &mut frontier, delta_in: &mut delta_in, reached: &mut reached };
        flow.push_out(&mut cps, v0, &outs, &mut step);

        let mut band_delta = 0.0;
        while let Some(Reverse((_, v))) = flow.frontier.pop() {
            touched.push(v);
            let din = flow.delta_in[v];
            let deg = cps.deg[v] as f64;
            let outs: Vec<f64> = cps.out_edges(v).map(|k| cps.edge(k).c).collect();
            let cout: f64 = outs.iter().sum();
            let want = rho * din;
            let (ds, dout, tilde, thres, cuts) = if cout >= want {
                let (t, cuts) = water_fill(&outs, want);
                (din / ((1.0 + l) / 2.0 * deg), want, 0.0, Some(t), cuts)
            } else {
                let tilde = din - cout / rho;
                // A node with surplus input can be charged more than it has
                // left; with its outputs gone, zero switches is still valid.
                let ds = ((din - tilde) / ((1.0 + l) / 2.0 * deg) + tilde / (l * deg)).min(cps.s[v]);
                (ds, cout, tilde, None, outs.clone())
            };
            if !le(dout, rho * din) {
                return Err(CpsError::Step { v0, detail: format!("damping fails at node {v}") });
            }
            let s_new = cps.s[v] - ds;
            if s_new < -1e-9 * (1.0 + cps.s[v]) {
                return Err(CpsError::Step { v0, detail: format!("s' of node {v} would become {s_new}") });
            }
            cps.s[v] = s_new.max(0.0);
            if in_band(v, &cps.deg) {
                band_delta += ds;
            }
            step.adjustments.push(NodeAdjustment {
                node: v,
                delta_in: din,
                delta_out: dout,
                delta_tilde_in: tilde,
                delta_s: ds,
                c_thres: thres,
            });
            flow.push_out(&mut cps, v, &cuts, &mut step);
        }
        for &v in &touched {
            flow.delta_in[v] = 0.0;
            flow.reached[v] = false;
        }

        let r = cps.s[v0] + band_delta;
        step.responsibility = r;
        if cps.s[v0] > 0.0 {
            max_ratio = max_ratio.max(r / cps.s[v0]);
        } else if r > 1e-9 {
            max_ratio = f64::INFINITY;
        }
        responsibility.insert(v0, r);
        validate_nodes_with(&cps, Form::Relaxed, touched.iter().copied(), &|v| base[v])
            .into_result()
            .map_err(|e| CpsError::Step { v0, detail: e.to_string() })?;
        steps.push(step);
    }

    Ok(ResponsibilityLedger {
        a,
        band,
        responsibility,
        steps,
        band_s,
        s_final: cps.s,
        bound_constant,
        max_ratio,
    })
}
