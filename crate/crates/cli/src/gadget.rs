use anyhow::Context;
use clap::Args;
use propdyn_gadget::{
    approximate_mu_above, find_consistent_partition, find_contradictions, group_name, synthesize_gadget_with,
    ControlSequence, PartitionOutcome, RationalRate,
};
use propdyn_graph::Lambda;
use propdyn_spectrum::solve_spectrum;
use serde_json::json;

use crate::Global;

#[derive(Debug, Args)]
pub struct GadgetArgs {
    /// Input rate as `p/q`.
    #[arg(long, conflicts_with = "lambda")]
    pub rate: Option<String>,
    /// Derive the rate from the optimal `mu` of this lambda.
    #[arg(long)]
    pub lambda: Option<Lambda>,
    #[arg(long, default_value_t = 12)]
    pub max_q: u64,
    /// Allow shifting a consistent block by one round.
    #[arg(long)]
    pub shift: bool,
    /// Upper brackets per group in the recorded execution (default `q`).
    #[arg(long)]
    pub brackets: Option<u64>,
}

fn parse_rate(s: &str) -> anyhow::Result<RationalRate> {
    let (p, q) = s.split_once('/').context("rate must look like p/q")?;
    let p = p.trim().parse().context("bad p")?;
    let q = q.trim().parse().context("bad q")?;
    Ok(RationalRate::new(p, q)?)
}

fn names(v: &[u64]) -> String {
    v.iter().map(|&x| group_name(x)).collect()
}

/// Prints the sequence and its analysis. Fails (exit 1) when no gadget can
/// be synthesized for the rate.
pub fn gadget(g: &Global, a: &GadgetArgs) -> anyhow::Result<bool> {
    let rate = match (&a.rate, a.lambda) {
        (Some(r), _) => parse_rate(r)?,
        (None, Some(l)) => {
            let sp = solve_spectrum(l.value(), g.tol)?;
            approximate_mu_above(sp.mu, l.value(), a.max_q)?
        }
        (None, None) => anyhow::bail!("give --rate or --lambda"),
    };
    let seq = ControlSequence::new(rate);
    let report = find_contradictions(&seq);
    let partition = find_consistent_partition(&seq);
    let synthesized = synthesize_gadget_with(rate, a.shift, a.brackets.unwrap_or(rate.q));
    let white: Vec<u64> = (1..=rate.q).filter(|&y| seq.initial_colors[y as usize - 1]).collect();

    if g.json {
        let gadget = match &synthesized {
            Ok(spec) => json!({ "spec": spec, "schedule": spec.pretty_schedule(), "run": spec.run() }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        let v = json!({
            "p": rate.p, "q": rate.q, "b": rate.b,
            "sequence": seq.pretty(),
            "white": white,
            "contradictions": report,
            "partition": partition,
            "gadget": gadget,
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
        return Ok(synthesized.is_ok());
    }

    println!("rate {}/{} (b = {})", rate.p, rate.q, rate.b);
    println!("{}", seq.pretty());
    println!("white {white:?}");
    if report.is_clean() {
        println!("no contradictions");
    }
    for c in &report.contradictions {
        println!(
            "bracket {}: {} (occurrence {}) against {} (occurrence {})",
            c.bracket,
            group_name(c.low),
            c.low_occ,
            group_name(c.high),
            c.high_occ
        );
    }
    match &partition {
        PartitionOutcome::Clean => {}
        PartitionOutcome::Found { shifted, unshifted } => {
            println!("consistent partition: shift {} / keep {}", names(shifted), names(unshifted))
        }
        PartitionOutcome::None { chain } => println!("no consistent partition (chain {})", names(chain)),
    }
    match &synthesized {
        Ok(spec) => {
            let run = spec.run();
            println!("gadget schedule {}", spec.pretty_schedule());
            println!("lower brackets {:?}", spec.lower_brackets);
            println!(
                "upper switches {} lower switches {} unanswered {}",
                run.upper_node_switches, run.lower_node_switches, run.unanswered
            );
        }
        Err(e) => println!("gadget: {e}"),
    }
    Ok(synthesized.is_ok())
}
