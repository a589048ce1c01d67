//! Core data model for sequential majority and minority processes.
//!
//! A [`Graph`] is an immutable simple undirected graph stored in CSR form.
//! A [`ProcessState`] couples a coloring with incrementally maintained
//! per-node conflict counts, and [`SwitchRule`] decides which nodes may
//! switch.

mod error;
mod graph;
pub mod io;
mod rule;
mod state;

pub use error::GraphError;
pub use graph::Graph;
pub use rule::{Lambda, ProcessKind, SwitchRule};
pub use state::{is_switchable, switch, ProcessState, SwitchEffect};

/// Node colors are booleans; `BLACK` is `false`.
pub type Color = bool;
pub const BLACK: Color = false;
pub const WHITE: Color = true;
