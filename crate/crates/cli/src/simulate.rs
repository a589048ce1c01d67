use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use propdyn_graph::ProcessState;
use propdyn_sim::{default_step_cap, max_stabilization_time, run, Scheduler, DEFAULT_STATE_BUDGET};
use serde_json::json;

use crate::{io, Global, RuleArgs, SchedulerArg};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Edge list with dense node ids.
    #[arg(long)]
    pub graph: PathBuf,
    /// One 0/1 color per line.
    #[arg(long)]
    pub coloring: PathBuf,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long, value_enum, default_value_t = SchedulerArg::Margin, conflicts_with = "script")]
    pub scheduler: SchedulerArg,
    /// Switch exactly these nodes in order (e.g. a schedule written by `build`).
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Write the trace as JSONL.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

pub fn simulate(g: &Global, a: &SimulateArgs) -> anyhow::Result<bool> {
    let colors = io::read_coloring(&a.coloring)?;
    let graph = io::read_graph(&a.graph, Some(colors.len()))?;
    let rule = a.rule.rule()?;
    let state = ProcessState::new(&graph, a.rule.kind.into(), colors)?;
    let sched = match &a.script {
        Some(p) => Scheduler::Scripted(io::read_schedule(p)?),
        None => a.scheduler.scheduler(g.seed),
    };
    let cap = a.max_steps.unwrap_or_else(|| default_step_cap(graph.node_count()));
    let trace = run(&graph, &rule, state, &sched, cap).context("simulation")?;
    if let Some(p) = &a.trace {
        io::write(p, &trace.to_jsonl())?;
    }
    let final_state = ProcessState::new(&graph, trace.kind, trace.final_coloring.clone())?;
    let conflicts = final_state.total_conflicts();
    if g.json {
        let v = json!({
            "steps": trace.total_steps,
            "stabilized": trace.stabilized,
            "final_conflicts": conflicts,
            "nodes": graph.node_count(),
            "edges": graph.edge_count(),
        });
        println!("{v}");
    } else {
        let word = if trace.total_steps == 1 { "step" } else { "steps" };
        let stab = if trace.stabilized { "stabilized" } else { "not stabilized" };
        println!("{} {word}, {stab}, {conflicts} conflicts left", trace.total_steps);
    }
    Ok(true)
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub coloring: PathBuf,
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Cap on distinct colorings explored.
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    pub budget: usize,
}

/// Exact maximum, compared against every heuristic. Fails if a heuristic
/// beats the oracle or any run exceeds the edge count.
pub fn oracle(g: &Global, a: &OracleArgs) -> anyhow::Result<bool> {
    let colors = io::read_coloring(&a.coloring)?;
    let graph = io::read_graph(&a.graph, Some(colors.len()))?;
    let rule = a.rule.rule()?;
    let state = ProcessState::new(&graph, a.rule.kind.into(), colors)?;
    let (best, witness) = max_stabilization_time(&graph, &rule, &state, a.budget)?;
    let edges = graph.edge_count() as u64;
    let cap = default_step_cap(graph.node_count());
    let mut heuristics = Vec::new();
    for s in [SchedulerArg::Margin, SchedulerArg::Degree, SchedulerArg::Random] {
        let t = run(&graph, &rule, state.clone(), &s.scheduler(g.seed), cap)?;
        heuristics.push((format!("{s:?}").to_lowercase(), t.total_steps));
    }
    let ok = best <= edges && heuristics.iter().all(|&(_, h)| h <= best);
    if g.json {
        let h: serde_json::Map<String, serde_json::Value> =
            heuristics.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        println!("{}", json!({ "max_steps": best, "schedule": witness, "edges": edges, "heuristics": h, "ok": ok }));
    } else {
        println!("max stabilization time {best} (edges {edges})");
        println!("schedule {witness:?}");
        for (k, v) in &heuristics {
            println!("{k} {v}");
        }
    }
    Ok(ok)
}
