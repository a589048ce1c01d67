use std::path::PathBuf;

use clap::Args;
use propdyn_graph::Lambda;
use propdyn_spectrum::{emit_table, grid, to_csv};

use crate::{out_or_stdout, Global};

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Comma-separated lambda values, each `p/q` or a decimal.
    #[arg(long, value_delimiter = ',', conflicts_with = "grid")]
    pub lambda: Vec<Lambda>,
    /// Evenly spaced values `START END STEP`.
    #[arg(long, num_args = 3, value_names = ["START", "END", "STEP"])]
    pub grid: Option<Vec<f64>>,
    /// Digits after the decimal point.
    #[arg(long, default_value_t = 6)]
    pub precision: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn spectrum(g: &Global, a: &SpectrumArgs) -> anyhow::Result<bool> {
    let lambdas = match &a.grid {
        Some(v) if v[2] > 0.0 && v[1] >= v[0] => grid(v[0], v[1], v[2]),
        Some(v) if v[2] > 0.0 => Vec::new(),
        Some(_) => anyhow::bail!("grid step must be positive"),
        None => a.lambda.iter().map(|l| l.value()).collect(),
    };
    let rows = emit_table(&lambdas, g.tol)?;
    let text = if g.json { serde_json::to_string_pretty(&rows)? + "\n" } else { to_csv(&rows, a.precision) };
    out_or_stdout(&a.out, &text)?;
    Ok(true)
}
