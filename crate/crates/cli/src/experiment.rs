//! Sweeps over constructions and random instances.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use propdyn_builder::{plan, realize, PlanConfig, RelayMode};
use propdyn_cps::{validate, CpsExtractor, Form};
use propdyn_graph::{Lambda, ProcessKind, ProcessState, SwitchRule};
use propdyn_sim::{default_step_cap, fit_growth_exponent, max_stabilization_time, run, DEFAULT_STATE_BUDGET};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{io, out_or_stdout, random, Global, SchedulerArg};

pub const CSV_COLUMNS: &str = "source,lambda,n,edges,seed,total_switches,fitted_exponent";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Lambda values as `p/q` or decimals.
    pub lambdas: Vec<String>,
    pub kind: ProcessKind,
    /// Overrides the global seed.
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    /// Base threshold for CPS checks of replays (default: the plan's own).
    pub s0: Option<u64>,
    /// Slack subtracted from `1 + f` when judging a fitted exponent.
    pub eps_fit: f64,
    pub builder: Option<BuilderSweep>,
    pub random: Option<RandomSweep>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            lambdas: Vec::new(),
            kind: ProcessKind::Majority,
            seed: None,
            tol: None,
            s0: None,
            eps_fit: 0.2,
            builder: None,
            random: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuilderSweep {
    pub n_targets: Vec<u64>,
    /// Forced level counts, swept in addition to `n_targets`.
    pub levels: Vec<usize>,
    pub relay: bool,
    /// Realize, replay and check every plan.
    pub replay: bool,
    pub max_q: u64,
    pub relay_max_q: u64,
    pub max_edges: u64,
}

impl Default for BuilderSweep {
    fn default() -> Self {
        let d = PlanConfig::default();
        BuilderSweep {
            n_targets: Vec::new(),
            levels: Vec::new(),
            relay: true,
            replay: false,
            max_q: d.max_q,
            relay_max_q: d.relay_max_q,
            max_edges: d.max_edges,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomSweep {
    pub sizes: Vec<usize>,
    pub edge_probability: f64,
    pub instances: usize,
    /// Any of `margin`, `degree`, `random`.
    pub schedulers: Vec<String>,
    /// Also compute the exact maximum.
    pub oracle: bool,
    pub budget: usize,
}

impl Default for RandomSweep {
    fn default() -> Self {
        RandomSweep {
            sizes: Vec::new(),
            edge_probability: 0.5,
            instances: 10,
            schedulers: vec!["margin".into(), "degree".into(), "random".into()],
            oracle: true,
            budget: DEFAULT_STATE_BUDGET,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON experiment configuration.
    pub config: PathBuf,
    /// CSV destination (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub source: String,
    pub lambda: String,
    pub n: usize,
    pub edges: usize,
    pub seed: Option<u64>,
    pub total_switches: u64,
    pub fitted_exponent: Option<f64>,
}

impl Row {
    fn csv(&self) -> String {
        let opt = |x: Option<String>| x.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.source,
            self.lambda,
            self.n,
            self.edges,
            opt(self.seed.map(|s| s.to_string())),
            self.total_switches,
            opt(self.fitted_exponent.map(|f| format!("{f:.6}")))
        )
    }
}

/// Outcome of a sweep: rows in deterministic order plus failed checks.
#[derive(Debug, Clone, Default)]
pub struct Sweep {
    pub rows: Vec<Row>,
    pub failures: Vec<String>,
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn render_csv(config: &ExperimentConfig, rows: &[Row]) -> String {
    let mut out = String::new();
    writeln!(out, "# propdyn experiment {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "# config sha256 {}", config_hash(config)).unwrap();
    writeln!(out, "{CSV_COLUMNS}").unwrap();
    for r in rows {
        writeln!(out, "{}", r.csv()).unwrap();
    }
    out
}

fn scheduler_arg(name: &str) -> anyhow::Result<SchedulerArg> {
    match name {
        "margin" => Ok(SchedulerArg::Margin),
        "degree" => Ok(SchedulerArg::Degree),
        "random" => Ok(SchedulerArg::Random),
        _ => anyhow::bail!("unknown scheduler {name:?}"),
    }
}

/// Runs every sweep item on the rayon pool and returns rows sorted by
/// their position in the configuration.
pub fn run_sweep(config: &ExperimentConfig, global_seed: u64, global_tol: f64) -> anyhow::Result<Sweep> {
    let lambdas: Vec<(String, Lambda)> = config
        .lambdas
        .iter()
        .map(|s| Ok((s.clone(), s.parse::<Lambda>().with_context(|| format!("lambda {s:?}"))?)))
        .collect::<anyhow::Result<_>>()?;
    let seed = config.seed.unwrap_or(global_seed);
    let tol = config.tol.unwrap_or(global_tol);
    let mut sweep = Sweep::default();

    if let Some(b) = &config.builder {
        for (name, l) in &lambdas {
            let mut rows = builder_rows(config, b, name, *l, tol, &mut sweep.failures)?;
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.total_switches as f64)).collect();
            if let Ok((slope, _)) = fit_growth_exponent(&pts) {
                rows.iter_mut().for_each(|r| r.fitted_exponent = Some(slope));
            }
            sweep.rows.extend(rows);
        }
    }
    if let Some(r) = &config.random {
        let schedulers: Vec<(String, SchedulerArg)> =
            r.schedulers.iter().map(|s| Ok((s.clone(), scheduler_arg(s)?))).collect::<anyhow::Result<_>>()?;
        let items: Vec<(usize, usize, usize)> = (0..lambdas.len())
            .flat_map(|li| r.sizes.iter().flat_map(move |&n| (0..r.instances).map(move |i| (li, n, i))))
            .collect();
        let results: Vec<anyhow::Result<(Vec<Row>, Vec<String>)>> = items
            .par_iter()
            .map(|&(li, n, i)| {
                let (name, l) = &lambdas[li];
                let item_seed = instance_seed(seed, li, n, i);
                random_rows(config, r, &schedulers, name, *l, n, item_seed)
            })
            .collect();
        for res in results {
            let (rows, fails) = res?;
            sweep.rows.extend(rows);
            sweep.failures.extend(fails);
        }
    }
    Ok(sweep)
}

/// Distinct, reproducible seed per random instance.
pub fn instance_seed(seed: u64, lambda_index: usize, n: usize, i: usize) -> u64 {
    let mut h = Sha256::new();
    for x in [seed, lambda_index as u64, n as u64, i as u64] {
        h.update(x.to_le_bytes());
    }
    u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
}

fn builder_rows(
    config: &ExperimentConfig,
    b: &BuilderSweep,
    name: &str,
    l: Lambda,
    tol: f64,
    failures: &mut Vec<String>,
) -> anyhow::Result<Vec<Row>> {
    let base = PlanConfig {
        relay: if b.relay { RelayMode::Auto } else { RelayMode::Never },
        max_q: b.max_q,
        relay_max_q: b.relay_max_q,
        max_edges: b.max_edges,
        tol,
        ..PlanConfig::default()
    };
    let jobs: Vec<(u64, PlanConfig)> = b
        .n_targets
        .iter()
        .map(|&n| (n, base.clone()))
        .chain(b.levels.iter().map(|&lv| (u64::MAX, PlanConfig { levels: Some(lv), ..base.clone() })))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(n, cfg)| -> anyhow::Result<Option<(Row, Option<String>)>> {
            let p = match plan(l, *n, cfg) {
                Ok(p) => p,
                Err(propdyn_builder::BuildError::TooSmall { .. }) => return Ok(None),
                Err(e) => return Err(e).with_context(|| format!("lambda {name}")),
            };
            let mut failure = None;
            if b.replay {
                let r = realize(&p, config.kind)?;
                let mut ex = CpsExtractor::new(&r.graph);
                let (summary, _) = r.replay(&mut ex)?;
                let cps = ex.into_unchecked(l.value(), config.s0.unwrap_or(p.cps_s0()))?;
                if summary.steps != p.predicted.total {
                    failure = Some(format!("lambda {name} n {}: replay {} != predicted {}", p.node_count(), summary.steps, p.predicted.total));
                } else if !validate(&cps, Form::Relaxed).is_valid() {
                    failure = Some(format!("lambda {name} n {}: extracted CPS is not strict", p.node_count()));
                }
            }
            let row = Row {
                source: "builder".into(),
                lambda: name.to_string(),
                n: p.node_count() as usize,
                edges: p.edge_count() as usize,
                seed: None,
                total_switches: p.predicted.total,
                fitted_exponent: None,
            };
            Ok(Some((row, failure)))
        })
        .collect();
    let mut rows: Vec<Row> = Vec::new();
    for res in results {
        if let Some((row, failure)) = res? {
            failures.extend(failure);
            if !rows.iter().any(|r| r.n == row.n) {
                rows.push(row);
            }
        }
    }
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

fn random_rows(
    config: &ExperimentConfig,
    r: &RandomSweep,
    schedulers: &[(String, SchedulerArg)],
    name: &str,
    l: Lambda,
    n: usize,
    seed: u64,
) -> anyhow::Result<(Vec<Row>, Vec<String>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random::gnp(n, r.edge_probability, &mut rng);
    let colors = random::coloring(n, &mut rng);
    let rule = SwitchRule::Proportional(l);
    let state = ProcessState::new(&g, config.kind, colors)?;
    let edges = g.edge_count();
    let row = |source: &str, total: u64| Row {
        source: source.to_string(),
        lambda: name.to_string(),
        n,
        edges,
        seed: Some(seed),
        total_switches: total,
        fitted_exponent: None,
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut heuristic_max = 0;
    for (sname, s) in schedulers {
        let t = run(&g, &rule, state.clone(), &s.scheduler(seed), default_step_cap(n))?;
        heuristic_max = heuristic_max.max(t.total_steps);
        rows.push(row(sname, t.total_steps));
    }
    if r.oracle {
        let (best, _) = max_stabilization_time(&g, &rule, &state, r.budget)?;
        if best < heuristic_max || best > edges as u64 {
            failures.push(format!("lambda {name} n {n} seed {seed}: oracle {best}, heuristic {heuristic_max}, edges {edges}"));
        }
        rows.push(row("oracle", best));
    }
    Ok((rows, failures))
}

pub fn experiment(g: &Global, a: &ExperimentArgs) -> anyhow::Result<bool> {
    let text = io::read(&a.config)?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", a.config.display()))?;
    let sweep = run_sweep(&config, g.seed, g.tol)?;
    out_or_stdout(&a.out, &render_csv(&config, &sweep.rows))?;
    for f in &sweep.failures {
        eprintln!("check failed: {f}");
    }
    Ok(sweep.failures.is_empty())
}
