use std::io::BufReader;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use propdyn_cps::{
    apply_responsibilities, canonicalize_dag, enumerate_dicuts, potential_report, validate, Cps, CpsExtractor,
    CpsFile, Form, ValidationReport,
};
use propdyn_graph::Lambda;
use propdyn_sim::{Observer, Trace};
use propdyn_spectrum::solve_spectrum;
use serde::Serialize;

use crate::{io, out_or_stdout, Global};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// A JSONL trace (needs --graph and --lambda) or a CPS JSON file.
    pub input: PathBuf,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<Lambda>,
    /// Base threshold is `ceil(1/eps)` unless --s0 is given.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Check condition 1R instead of the slack form.
    #[arg(long)]
    pub strict: bool,
    /// Cancel cycles and re-check.
    #[arg(long)]
    pub dag: bool,
    /// Potential never grows through nodes with `s >= s0`.
    #[arg(long)]
    pub potential: bool,
    /// Enumerate dipartitionings, up to this many.
    #[arg(long, num_args = 0..=1, default_missing_value = "100000")]
    pub dicuts: Option<usize>,
    /// Run the responsibility procedure on the band `[a, 2a)`.
    #[arg(long, value_name = "A")]
    pub responsibility: Option<u64>,
    /// Write the CPS (after extraction) as JSON.
    #[arg(long)]
    pub write_cps: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn conditions(name: &'static str, r: &ValidationReport) -> Check {
    let failed: Vec<String> = r
        .checks
        .iter()
        .filter(|c| !c.holds)
        .map(|c| format!("{} at {:?} ({:?})", c.condition, c.worst, c.worst_sides.unwrap_or_default()))
        .collect();
    let detail = if failed.is_empty() { "all conditions hold".to_string() } else { failed.join("; ") };
    Check { name, pass: r.is_valid(), detail }
}

fn load(g: &Global, a: &VerifyArgs) -> anyhow::Result<Cps> {
    let text = io::read(&a.input)?;
    let first = text.lines().next().unwrap_or_default();
    if first.contains("\"record\"") {
        let graph_path = a.graph.as_ref().context("a trace needs --graph")?;
        let lambda = a.lambda.context("a trace needs --lambda")?;
        let trace = Trace::read_jsonl(BufReader::new(text.as_bytes()))?;
        let graph = io::read_graph(graph_path, Some(trace.initial_coloring.len()))?;
        let s0 = g.s0.unwrap_or_else(|| (1.0 / a.eps).ceil() as u64);
        // Extraction without the built-in check; validation is reported below.
        let mut ex = CpsExtractor::new(&graph);
        for ev in &trace.events {
            ex.on_switch(ev.step, ev.node);
            for &(u, v) in &ev.created {
                ex.on_edge(graph.slot_of(u, v).context("trace mentions a non-edge")?, true);
            }
            for &(u, v) in &ev.removed {
                ex.on_edge(graph.slot_of(u, v).context("trace mentions a non-edge")?, false);
            }
        }
        Ok(ex.into_unchecked(lambda.value(), s0)?)
    } else {
        let mut file: CpsFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.input.display()))?;
        if let Some(s0) = g.s0 {
            file.s0 = s0;
        }
        if let Some(l) = a.lambda {
            file.lambda = l.value();
        }
        Ok(Cps::from_file(file)?)
    }
}

pub fn verify(g: &Global, a: &VerifyArgs) -> anyhow::Result<bool> {
    let cps = load(g, a)?;
    if let Some(p) = &a.write_cps {
        out_or_stdout(&Some(p.clone()), &cps.to_json())?;
    }
    let form = if a.strict { Form::Relaxed } else { Form::Slack };
    let mut checks = vec![conditions(if a.strict { "strict" } else { "slack" }, &validate(&cps, form))];

    let wants_dag = a.dag || a.potential || a.dicuts.is_some() || a.responsibility.is_some();
    if wants_dag {
        let dag = canonicalize_dag(&cps);
        if a.dag {
            let ds = (dag.cps.total_s() - cps.total_s()).abs();
            let mut c = conditions("dag", &validate(&dag.cps, form));
            c.pass &= dag.is_topological() && ds == 0.0;
            c.detail = format!(
                "acyclic {}, cancelled {}, base inputs removed {}, {}",
                dag.is_topological(),
                dag.cancelled,
                dag.base_inputs_removed,
                c.detail
            );
            checks.push(c);
        }
        let f = solve_spectrum(cps.lambda, g.tol)?.f;
        if a.potential {
            let rep = potential_report(&dag, f);
            checks.push(Check {
                name: "potential",
                pass: rep.violations.is_empty(),
                detail: format!(
                    "{} violations; trivial dicut {:.6} <= bound {:.6}",
                    rep.violations.len(),
                    rep.trivial_dicut,
                    rep.trivial_bound
                ),
            });
        }
        if let Some(budget) = a.dicuts {
            let en = enumerate_dicuts(&dag, f, budget);
            checks.push(Check {
                name: "dicuts",
                pass: en.bounded_by_trivial && en.source_edges_within_s0,
                detail: format!(
                    "{} dipartitionings{}, max {:.6}, trivial {:.6}, source edges within s0 {}",
                    en.dicuts.len(),
                    if en.complete { "" } else { " (budget hit)" },
                    en.max_potential + 0.0,
                    en.trivial_potential + 0.0,
                    en.source_edges_within_s0
                ),
            });
        }
        if let Some(band) = a.responsibility {
            checks.push(match apply_responsibilities(&dag, band) {
                Ok(l) => {
                    let total = l.total_responsibility();
                    let sum_ok = (total - l.band_s).abs() <= 1e-9 * (1.0 + l.band_s);
                    Check {
                        name: "responsibility",
                        pass: sum_ok && l.max_ratio <= l.bound_constant,
                        detail: format!(
                            "band {} nodes, sum R {total:.6} vs sum s {:.6}, max ratio {:.4} <= {:.4}",
                            l.band.len(),
                            l.band_s,
                            l.max_ratio,
                            l.bound_constant
                        ),
                    }
                }
                Err(e) => Check { name: "responsibility", pass: false, detail: e.to_string() },
            });
        }
    }

    let ok = checks.iter().all(|c| c.pass);
    if g.json {
        println!("{}", serde_json::json!({ "ok": ok, "checks": checks }));
    } else {
        for c in &checks {
            println!("{}: {} ({})", c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail);
        }
    }
    Ok(ok)
}
