use propdyn_graph::{Graph, ProcessState, SwitchRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{max_stabilization_time, SimError, Trace, DEFAULT_STATE_BUDGET};

/// Which switchable node moves next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheduler {
    /// Switch exactly these nodes in order; stops when the list is exhausted.
    Scripted(Vec<usize>),
    /// Largest `|N_c| - |N_nc| - lambda * deg`, lowest id on ties. A heuristic.
    GreedyMaxMargin,
    /// Smallest degree, lowest id on ties. A heuristic.
    GreedyMinDegree,
    /// Uniform choice among switchable nodes from a ChaCha8 stream.
    RandomSeeded(u64),
    /// Follows an optimal schedule from [`max_stabilization_time`].
    ExhaustiveOracle,
}

/// Callbacks for streaming executions. `on_switch` fires before the edge
/// callbacks of the same step; `on_edge` receives the CSR slot (whose source
/// is the switching node) and whether it became a conflict.
pub trait Observer {
    fn on_switch(&mut self, _step: u64, _node: usize) {}
    fn on_edge(&mut self, _slot: usize, _created: bool) {}
}

impl Observer for () {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSummary {
    pub steps: u64,
    /// No node is switchable in the final state.
    pub stabilized: bool,
}

/// `10 n^2`, above any possible trace length.
pub fn default_step_cap(n: usize) -> u64 {
    10 * (n as u64).pow(2)
}

/// Runs the process and records every event.
pub fn run(
    g: &Graph,
    rule: &SwitchRule,
    initial: ProcessState,
    sched: &Scheduler,
    step_cap: u64,
) -> Result<Trace, SimError> {
    let initial_coloring = initial.colors().to_vec();
    let kind = initial.kind();
    let mut state = initial;
    let mut rec = Recorder { g, events: Vec::new() };
    let summary = run_observed(g, rule, &mut state, sched, step_cap, &mut rec)?;
    Ok(Trace {
        kind,
        events: rec.events,
        initial_coloring,
        final_coloring: state.colors().to_vec(),
        total_steps: summary.steps,
        stabilized: summary.stabilized,
    })
}

struct Recorder<'a> {
    g: &'a Graph,
    events: Vec<crate::Event>,
}

impl Observer for Recorder<'_> {
    fn on_switch(&mut self, step: u64, node: usize) {
        self.events.push(crate::Event { step, node, created: Vec::new(), removed: Vec::new() });
    }

    fn on_edge(&mut self, slot: usize, created: bool) {
        let ev = self.events.last_mut().expect("edge before switch");
        let e = (ev.node, self.g.slot_target(slot));
        if created {
            ev.created.push(e);
        } else {
            ev.removed.push(e);
        }
    }
}

/// Runs the process in place, streaming events to `obs`.
pub fn run_observed(
    g: &Graph,
    rule: &SwitchRule,
    state: &mut ProcessState,
    sched: &Scheduler,
    step_cap: u64,
    obs: &mut impl Observer,
) -> Result<RunSummary, SimError> {
    let script = match sched {
        Scheduler::Scripted(s) => Some(s.clone()),
        Scheduler::ExhaustiveOracle => {
            Some(max_stabilization_time(g, rule, state, DEFAULT_STATE_BUDGET)?.1)
        }
        _ => None,
    };
    if let Some(script) = script {
        let n = g.node_count();
        let mut steps = 0u64;
        for &v in script.iter().take(step_cap.min(usize::MAX as u64) as usize) {
            if v >= n {
                return Err(SimError::NodeOutOfRange { step: steps, node: v, n });
            }
            if !state.is_switchable(g, rule, v) {
                return Err(SimError::NotSwitchable { step: steps, node: v });
            }
            obs.on_switch(steps, v);
            state.switch_with(g, rule, v, |s, c| obs.on_edge(s, c))?;
            steps += 1;
        }
        let stabilized = (0..n).all(|v| !state.is_switchable(g, rule, v));
        return Ok(RunSummary { steps, stabilized });
    }

    let mut ready = ReadySet::new(g, rule, state);
    let mut rng = match sched {
        Scheduler::RandomSeeded(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let margin = MarginKey::new(rule);
    let mut steps = 0u64;
    while steps < step_cap {
        if ready.items.is_empty() {
            return Ok(RunSummary { steps, stabilized: true });
        }
        let v = match sched {
            Scheduler::GreedyMaxMargin => *ready
                .items
                .iter()
                .max_by(|&&a, &&b| {
                    margin
                        .cmp(state.surplus(g, a), g.degree(a), state.surplus(g, b), g.degree(b))
                        .then(b.cmp(&a))
                })
                .unwrap(),
            Scheduler::GreedyMinDegree => {
                *ready.items.iter().min_by_key(|&&v| (g.degree(v), v)).unwrap()
            }
            Scheduler::RandomSeeded(_) => {
                let rng = rng.as_mut().unwrap();
                ready.items[rng.gen_range(0..ready.items.len())]
            }
            Scheduler::Scripted(_) | Scheduler::ExhaustiveOracle => unreachable!(),
        };
        obs.on_switch(steps, v);
        state.switch_with(g, rule, v, |s, c| obs.on_edge(s, c))?;
        ready.refresh(g, rule, state, v);
        steps += 1;
    }
    Ok(RunSummary { steps, stabilized: ready.items.is_empty() })
}

/// Switchable nodes with O(1) insert and remove.
struct ReadySet {
    items: Vec<usize>,
    pos: Vec<usize>,
}

impl ReadySet {
    const ABSENT: usize = usize::MAX;

    fn new(g: &Graph, rule: &SwitchRule, state: &ProcessState) -> Self {
        let mut set = ReadySet { items: Vec::new(), pos: vec![Self::ABSENT; g.node_count()] };
        for v in 0..g.node_count() {
            set.update(v, state.is_switchable(g, rule, v));
        }
        set
    }

    fn update(&mut self, v: usize, on: bool) {
        let present = self.pos[v] != Self::ABSENT;
        if on && !present {
            self.pos[v] = self.items.len();
            self.items.push(v);
        } else if !on && present {
            let i = self.pos[v];
            let last = *self.items.last().unwrap();
            self.items.swap_remove(i);
            if last != v {
                self.pos[last] = i;
            }
            self.pos[v] = Self::ABSENT;
        }
    }

    fn refresh(&mut self, g: &Graph, rule: &SwitchRule, state: &ProcessState, v: usize) {
        self.update(v, state.is_switchable(g, rule, v));
        for u in g.neighbors(v) {
            self.update(u, state.is_switchable(g, rule, u));
        }
    }
}

/// Exact comparison of `surplus - lambda * deg` across nodes.
enum MarginKey {
    Exact { num: i128, den: i128 },
    Float(f64),
}

impl MarginKey {
    fn new(rule: &SwitchRule) -> Self {
        match rule.lambda() {
            None => MarginKey::Exact { num: 0, den: 1 },
            Some(l) => match l.as_fraction() {
                Some((num, den)) => MarginKey::Exact { num: num as i128, den: den as i128 },
                None => MarginKey::Float(l.value()),
            },
        }
    }

    fn cmp(&self, sa: i64, da: usize, sb: i64, db: usize) -> std::cmp::Ordering {
        match *self {
            MarginKey::Exact { num, den } => {
                let key = |s: i64, d: usize| s as i128 * den - num * d as i128;
                key(sa, da).cmp(&key(sb, db))
            }
            MarginKey::Float(x) => {
                let key = |s: i64, d: usize| s as f64 - x * d as f64;
                key(sa, da).total_cmp(&key(sb, db))
            }
        }
    }
}
