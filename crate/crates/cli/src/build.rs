use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use propdyn_builder::{plan, realize, ConstructionPlan, PlanConfig, RelayMode};
use propdyn_cps::{validate, CpsExtractor, Form};
use propdyn_graph::io::{write_coloring, write_edge_list};
use propdyn_graph::Lambda;
use serde_json::json;

use crate::{io, Global, KindArg};

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Exact rational threshold (`p/q` or a finite decimal).
    #[arg(long)]
    pub lambda: Lambda,
    /// Node budget; the largest construction that fits is chosen. Defaults
    /// to 100000, or no limit with `--levels`.
    #[arg(long = "n")]
    pub n_target: Option<u64>,
    /// Fall back to relay layers when no contradiction-free gadget exists.
    #[arg(long)]
    pub relay: bool,
    /// Always use relay layers.
    #[arg(long, conflicts_with = "relay")]
    pub relay_only: bool,
    /// Force the number of levels.
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, default_value_t = 12)]
    pub max_q: u64,
    #[arg(long, default_value_t = 24)]
    pub relay_max_q: u64,
    #[arg(long, default_value_t = 20_000_000)]
    pub max_edges: u64,
    /// Switches primed into every top node.
    #[arg(long)]
    pub chain_depth: Option<u64>,
    #[arg(long, value_enum, default_value_t = KindArg::Majority)]
    pub kind: KindArg,
    /// Output directory for plan.json, graph.txt, coloring.txt, schedule.txt.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Only write plan.json.
    #[arg(long)]
    pub plan_only: bool,
    /// Replay the schedule and validate the extracted CPS.
    #[arg(long)]
    pub verify: bool,
}

pub fn build(g: &Global, a: &BuildArgs) -> anyhow::Result<bool> {
    let relay = match (a.relay, a.relay_only) {
        (_, true) => RelayMode::Always,
        (true, _) => RelayMode::Auto,
        _ => RelayMode::Never,
    };
    let config = PlanConfig {
        relay,
        levels: a.levels,
        chain_depth: a.chain_depth,
        max_q: a.max_q,
        relay_max_q: a.relay_max_q,
        max_edges: a.max_edges,
        tol: g.tol,
    };
    let n_target = a.n_target.unwrap_or(if a.levels.is_some() { u64::MAX } else { 100_000 });
    let p = plan(a.lambda, n_target, &config).context("planning")?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    io::write(&a.out.join("plan.json"), &p.to_json()?)?;
    if a.plan_only && !a.verify {
        report(g, &p, None);
        return Ok(true);
    }

    let r = realize(&p, a.kind.into())?;
    if !a.plan_only {
        io::write(&a.out.join("graph.txt"), &write_edge_list(&r.graph))?;
        io::write(&a.out.join("coloring.txt"), &write_coloring(&r.colors))?;
        io::write(&a.out.join("schedule.txt"), &io::write_schedule(&r.schedule))?;
    }
    if !a.verify {
        report(g, &p, None);
        return Ok(true);
    }

    let mut ex = CpsExtractor::new(&r.graph);
    let (summary, _) = r.replay(&mut ex)?;
    let s0 = g.s0.unwrap_or(p.cps_s0());
    let cps = ex.into_unchecked(p.lambda.value(), s0)?;
    let slack = validate(&cps, Form::Slack).is_valid();
    let strict = validate(&cps, Form::Relaxed).is_valid();
    let exact = summary.steps == p.predicted.total;
    let v = Verification { steps: summary.steps, exact, slack, strict };
    report(g, &p, Some(&v));
    Ok(exact && slack && strict)
}

struct Verification {
    steps: u64,
    exact: bool,
    slack: bool,
    strict: bool,
}

fn report(g: &Global, p: &ConstructionPlan, v: Option<&Verification>) {
    if g.json {
        let mut out = json!({
            "lambda": p.lambda.to_string(),
            "mode": format!("{:?}", p.mode),
            "fallback": p.fallback,
            "rate": [p.rate.p, p.rate.q],
            "levels": p.level_count(),
            "nodes": p.node_count(),
            "edges": p.edge_count(),
            "predicted_total": p.predicted.total,
            "per_level_mean": p.predicted.per_level_mean,
            "ideal_growth": p.ideal_growth,
        });
        if let Some(v) = v {
            out["replay_steps"] = json!(v.steps);
            out["replay_exact"] = json!(v.exact);
            out["cps_slack"] = json!(v.slack);
            out["cps_strict"] = json!(v.strict);
        }
        println!("{out}");
        return;
    }
    let fb = if p.fallback { " (fallback)" } else { "" };
    println!("lambda {} mode {:?}{fb} rate {}/{}", p.lambda, p.mode, p.rate.p, p.rate.q);
    println!("levels {} nodes {} edges {}", p.level_count(), p.node_count(), p.edge_count());
    println!("predicted switches {} per-level means {:?}", p.predicted.total, p.predicted.per_level_mean);
    println!("growth {:?} ideal {:.4}", p.predicted.growth(), p.ideal_growth);
    if let Some(v) = v {
        let word = |b: bool| if b { "ok" } else { "FAILED" };
        println!(
            "replay {} steps ({}), cps slack {}, strict {}",
            v.steps,
            word(v.exact),
            word(v.slack),
            word(v.strict)
        );
    }
}
