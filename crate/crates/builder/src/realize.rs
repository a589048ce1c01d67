use propdyn_graph::{Color, Graph, ProcessKind, ProcessState, SwitchRule};
use propdyn_sim::{run_observed, Observer, RunSummary, Scheduler};

use crate::plan::ConstructionPlan;
use crate::BuildError;

/// A concrete graph with its initial coloring and scripted schedule.
#[derive(Debug, Clone)]
pub struct Realization {
    pub graph: Graph,
    pub colors: Vec<Color>,
    pub kind: ProcessKind,
    pub rule: SwitchRule,
    /// Node order of the scripted execution.
    pub schedule: Vec<usize>,
    /// First node id of every type; type `t` owns `offsets[t]..offsets[t+1]`.
    pub offsets: Vec<usize>,
}

impl Realization {
    pub fn initial_state(&self) -> Result<ProcessState, BuildError> {
        Ok(ProcessState::new(&self.graph, self.kind, self.colors.clone())?)
    }

    pub fn scheduler(&self) -> Scheduler {
        Scheduler::Scripted(self.schedule.clone())
    }

    /// Type of node `v`.
    pub fn type_of(&self, v: usize) -> usize {
        self.offsets.partition_point(|&o| o <= v) - 1
    }

    /// Runs the scripted schedule, failing if any step is not switchable.
    pub fn replay(&self, obs: &mut impl Observer) -> Result<(RunSummary, ProcessState), BuildError> {
        let mut state = self.initial_state()?;
        let cap = self.schedule.len() as u64;
        let summary = run_observed(&self.graph, &self.rule, &mut state, &self.scheduler(), cap, obs)?;
        Ok((summary, state))
    }
}

/// Expands a plan into nodes and edges.
///
/// Each link is wired so that upper node `i` sees lower nodes
/// `i * d + t (mod N)` for `t < d`, which is biregular with no repeats.
pub fn realize(plan: &ConstructionPlan, kind: ProcessKind) -> Result<Realization, BuildError> {
    let tg = &plan.types;
    let mut offsets = Vec::with_capacity(tg.types.len() + 1);
    offsets.push(0usize);
    for t in &tg.types {
        offsets.push(offsets.last().unwrap() + t.size as usize);
    }
    let n = *offsets.last().unwrap();
    if n > u32::MAX as usize {
        return Err(BuildError::Config(format!("{n} nodes exceed the u32 id space")));
    }

    let mut edges = Vec::with_capacity(tg.edge_count() as usize);
    for l in &tg.links {
        let (nu, nl) = (tg.types[l.upper].size, tg.types[l.lower].size);
        let level = tg.types[l.upper].layer;
        if nu * l.down_degree != nl * l.up_degree {
            return Err(BuildError::Wiring {
                level,
                detail: format!("{nu} x {} != {nl} x {}", l.down_degree, l.up_degree),
            });
        }
        if l.down_degree > nl {
            return Err(BuildError::Wiring {
                level,
                detail: format!("down-degree {} exceeds {nl} lower nodes", l.down_degree),
            });
        }
        let (bu, bl) = (offsets[l.upper], offsets[l.lower]);
        for i in 0..nu {
            for t in 0..l.down_degree {
                edges.push((bu + i as usize, bl + ((i * l.down_degree + t) % nl) as usize));
            }
        }
    }
    let graph = Graph::from_edges(n, &edges)?;

    let mut colors = vec![false; n];
    for (t, _) in tg.types.iter().enumerate() {
        colors[offsets[t]..offsets[t + 1]].fill(tg.color(t, kind));
    }
    let schedule = plan
        .events
        .iter()
        .flat_map(|e| e.iter().flat_map(|&t| offsets[t as usize]..offsets[t as usize + 1]))
        .collect();
    Ok(Realization { graph, colors, kind, rule: plan.rule(), schedule, offsets })
}
