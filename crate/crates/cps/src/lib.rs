//! Conflict propagation systems extracted from process traces.
//!
//! A [`Cps`] assigns every node a switch count `s(v)` and every directed edge
//! a conflict count `c(u, v)`: conflicts created by a switch of `u` and later
//! removed by a switch of `v`. The crate extracts them from traces, checks
//! the defining inequalities, reduces them to DAG form, evaluates edge
//! potentials and dicuts, and runs the responsibility redistribution on a
//! degree band.

mod dag;
mod extract;
mod model;
mod potential;
mod responsibility;
mod validate;

pub use dag::{canonicalize_dag, CpsDag};
pub use extract::{extract_cps, CpsExtractor};
pub use model::{Cps, CpsEdge, CpsFile, EdgeRecord, NodeRecord};
pub use potential::{enumerate_dicuts, potential_report, Dicut, DicutEnumeration, PotentialReport};
pub use responsibility::{
    apply_responsibilities, responsibility_constant, NodeAdjustment, ResponsibilityLedger,
    ResponsibilityStep,
};
pub use validate::{validate, Condition, ConditionCheck, Form, ValidationReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CpsError {
    #[error("{condition} violated at node {node}: {lhs} vs {rhs}")]
    NodeViolation { condition: Condition, node: usize, lhs: f64, rhs: f64 },
    #[error("condition 3 violated on edge ({u}, {v}): c = {c} > s(u) = {s}")]
    EdgeViolation { u: usize, v: usize, c: f64, s: f64 },
    #[error("invalid CPS: {0}")]
    Invalid(String),
    #[error("degree band [{a}, {}) is empty", 2 * .a)]
    EmptyBand { a: u64 },
    #[error("responsibility step for node {v0}: {detail}")]
    Step { v0: usize, detail: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Relative tolerance used when comparing real-valued CPS quantities.
pub(crate) fn le(a: f64, b: f64) -> bool {
    a <= b + 1e-9 * (1.0 + a.abs().max(b.abs()))
}
