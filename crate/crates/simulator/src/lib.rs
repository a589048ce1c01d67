//! Sequential execution of majority and minority processes.
//!
//! [`run`] drives a [`ProcessState`](propdyn_graph::ProcessState) with one of
//! the [`Scheduler`] policies and records a [`Trace`]. Large executions can
//! use [`run_observed`] with an [`Observer`] instead, which streams switch and
//! edge events without materializing per-event edge lists.
//!
//! [`max_stabilization_time`] is the exact adversary for tiny graphs: a
//! memoized longest path over reachable colorings.

mod fit;
mod oracle;
mod run;
mod trace;

pub use fit::fit_growth_exponent;
pub use oracle::{max_stabilization_time, DEFAULT_STATE_BUDGET};
pub use run::{default_step_cap, run, run_observed, Observer, RunSummary, Scheduler};
pub use trace::{Event, Trace, TraceHeader};

use propdyn_graph::GraphError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("step {step}: node {node} is not switchable")]
    NotSwitchable { step: u64, node: usize },
    #[error("step {step}: node {node} out of range for {n} nodes")]
    NodeOutOfRange { step: u64, node: usize, n: usize },
    #[error("state budget of {budget} distinct colorings exceeded")]
    StateBudget { budget: usize },
    #[error("growth fit: {0}")]
    Fit(String),
    #[error("trace: {0}")]
    Trace(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
