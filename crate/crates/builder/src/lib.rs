//! Explicit lower-bound constructions.
//!
//! [`plan`] sizes a layered construction for a rational `lambda`: levels of
//! `2 q^2` node types wired through control gadgets (or relay layers when the
//! gadget rate has contradictions), primed from above by shared chains. The
//! plan carries a scripted type-level schedule and its exact switch counts.
//! [`realize`] expands it into a concrete graph, coloring and node schedule.

mod plan;
mod realize;
mod schedule;
mod types;

pub use plan::{
    plan, ChainPlan, ConstructionPlan, DegreeRatio, LevelPlan, PlanConfig, PlanMode, RelayMode, RelayPlan,
};
pub use realize::{realize, Realization};
pub use schedule::{predict_events, Prediction};
pub use types::{LinkKind, NodeType, Role, TypeGraph, TypeLink};

use propdyn_gadget::GadgetError;
use propdyn_graph::GraphError;
use propdyn_sim::SimError;
use propdyn_spectrum::SpectrumError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("lambda {0} is not an exact rational")]
    InexactLambda(f64),
    #[error("rate {p}/{q} does not exceed lambda")]
    RateBelowLambda { p: u64, q: u64 },
    #[error("rate {p}/{q} unsupported: {detail}")]
    Unsupported { p: u64, q: u64, detail: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error("n_target {n_target} too small: the smallest construction has {needed} nodes and {edges} edges")]
    TooSmall { n_target: u64, needed: u64, edges: u64 },
    #[error("sizes overflow at {levels} levels")]
    TooLarge { levels: usize },
    #[error("wiring at level {level}: {detail}")]
    Wiring { level: i64, detail: String },
    #[error("schedule: {0}")]
    Schedule(String),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
}
