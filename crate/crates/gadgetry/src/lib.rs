//! Control sequences, contradictions, consistent partitions and control
//! gadgets for rational input switching rates `p/q`.

mod rate;
mod sequence;
mod gadget;

pub use gadget::{synthesize_gadget, synthesize_gadget_with, synthesize_shifted, GadgetEvent, GadgetRun, GadgetSpec};
pub use rate::{approximate_mu, approximate_mu_above, RationalRate};
pub use sequence::{
    candidate_shift_blocks, constructive_partition, minimal_shift_block, separates, shifting_resolves,
    find_consistent_partition, find_contradictions, group_name, ConsistencyReport, ControlSequence,
    Contradiction, PartitionOutcome,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GadgetError {
    #[error("invalid rate {p}/{q}: need 0 < p < q")]
    InvalidRate { p: u64, q: u64 },
    #[error("b = {b} and q = {q} are not coprime; the bracket period would not be q")]
    NotCoprime { b: u64, q: u64 },
    #[error("max_q must be at least 2, got {0}")]
    MaxQTooSmall(u64),
    #[error("no admissible rate with q <= {max_q} near {mu}")]
    NoRate { mu: f64, max_q: u64 },
    #[error("rate {p}/{q} has contradictions that no shift block resolves")]
    Unsupported { p: u64, q: u64 },
    #[error("rate {p}/{q} has contradictions; a gadget needs shifting")]
    NeedsShift { p: u64, q: u64 },
    #[error("gadget schedule for {p}/{q} deadlocked in round {round}")]
    Deadlock { p: u64, q: u64, round: usize },
}
