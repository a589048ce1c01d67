//! Command-line front end: simulation, spectrum tables, constructions, CPS
//! verification, gadgets, sweeps and the exact oracle.
//!
//! Every command returns `Ok(true)` on success, `Ok(false)` when a requested
//! check fails (exit code 1) and `Err` for usage or parse problems (exit
//! code 2).

mod build;
pub mod experiment;
mod gadget;
mod io;
pub mod random;
mod simulate;
mod spectrum;
mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use propdyn_graph::{Lambda, ProcessKind, SwitchRule};
use propdyn_sim::Scheduler;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Parser)]
#[command(name = "propdyn", version, about = "Sequential majority/minority processes")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Numerical tolerance of the spectrum solver.
    #[arg(long, global = true, default_value_t = propdyn_spectrum::DEFAULT_TOL)]
    pub tol: f64,
    /// Base-node threshold for conflict propagation systems.
    #[arg(long, global = true)]
    pub s0: Option<u64>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a process on a graph and coloring.
    Simulate(simulate::SimulateArgs),
    /// Optimal functions of lambda as CSV.
    Spectrum(spectrum::SpectrumArgs),
    /// Plan and write a lower-bound construction.
    Build(build::BuildArgs),
    /// Check a trace or CPS file.
    VerifyCps(verify::VerifyArgs),
    /// Control sequences, contradictions, partitions and gadgets.
    Gadget(gadget::GadgetArgs),
    /// Sweep constructions or random instances into a CSV.
    Experiment(experiment::ExperimentArgs),
    /// Exact longest execution on a small instance.
    Oracle(simulate::OracleArgs),
}

pub fn run(cli: &Cli) -> anyhow::Result<bool> {
    let g = &cli.global;
    match &cli.command {
        Command::Simulate(a) => simulate::simulate(g, a),
        Command::Spectrum(a) => spectrum::spectrum(g, a),
        Command::Build(a) => build::build(g, a),
        Command::VerifyCps(a) => verify::verify(g, a),
        Command::Gadget(a) => gadget::gadget(g, a),
        Command::Experiment(a) => experiment::experiment(g, a),
        Command::Oracle(a) => simulate::oracle(g, a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Majority,
    Minority,
}

impl From<KindArg> for ProcessKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Majority => ProcessKind::Majority,
            KindArg::Minority => ProcessKind::Minority,
        }
    }
}

/// Switching rule flags shared by several commands.
#[derive(Debug, Clone, Args)]
pub struct RuleArgs {
    /// Proportional threshold, as `p/q` or a decimal.
    #[arg(long, conflicts_with = "basic")]
    pub lambda: Option<Lambda>,
    /// Plain majority rule instead of a proportional threshold.
    #[arg(long)]
    pub basic: bool,
    #[arg(long, value_enum, default_value_t = KindArg::Majority)]
    pub kind: KindArg,
}

impl RuleArgs {
    pub fn rule(&self) -> anyhow::Result<SwitchRule> {
        match (self.lambda, self.basic) {
            (Some(l), _) => Ok(SwitchRule::Proportional(l)),
            (None, true) => Ok(SwitchRule::Basic),
            (None, false) => anyhow::bail!("give --lambda or --basic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchedulerArg {
    /// Largest threshold margin first.
    Margin,
    /// Smallest degree first.
    Degree,
    /// Uniform among switchable nodes, seeded.
    Random,
    /// Exact longest schedule (small graphs only).
    Oracle,
}

impl SchedulerArg {
    pub fn scheduler(self, seed: u64) -> Scheduler {
        match self {
            SchedulerArg::Margin => Scheduler::GreedyMaxMargin,
            SchedulerArg::Degree => Scheduler::GreedyMinDegree,
            SchedulerArg::Random => Scheduler::RandomSeeded(seed),
            SchedulerArg::Oracle => Scheduler::ExhaustiveOracle,
        }
    }
}

fn out_or_stdout(path: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => io::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
