use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{le, Cps, CpsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// `c_in + deg >= lambda deg s + c_out` for every node.
    SlackInput,
    /// `c_in >= lambda deg s + c_out` for every non-base node.
    RelaxedInput,
    /// `c_out <= (1 - lambda)/2 deg s`.
    OutputCap,
    /// `c(u, v) <= s(u)`.
    EdgeCap,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::SlackInput => "condition 1",
            Condition::RelaxedInput => "condition 1R",
            Condition::OutputCap => "condition 2",
            Condition::EdgeCap => "condition 3",
        })
    }
}

/// Which version of the input condition to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    /// Condition 1 with the `+ deg(v)` slack, for all nodes.
    Slack,
    /// Condition 1R without slack, for nodes with `s(v) >= s0`.
    Relaxed,
}

/// Outcome for one condition. `worst_margin` is the smallest `rhs - lhs`
/// over checked items (negative means violated); `worst` names the item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub holds: bool,
    pub checked: usize,
    pub worst_margin: Option<f64>,
    /// Node, or `(u, v)` packed as `[u, v]` for edge conditions.
    pub worst: Vec<usize>,
    pub worst_sides: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub form: Form,
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn check(&self, c: Condition) -> Option<&ConditionCheck> {
        self.checks.iter().find(|k| k.condition == c)
    }

    /// First failing condition as an error naming the node or edge.
    pub fn into_result(self) -> Result<(), CpsError> {
        for k in self.checks {
            if k.holds {
                continue;
            }
            let (lhs, rhs) = k.worst_sides.unwrap_or_default();
            return Err(match k.condition {
                Condition::EdgeCap => {
                    CpsError::EdgeViolation { u: k.worst[0], v: k.worst[1], c: lhs, s: rhs }
                }
                condition => CpsError::NodeViolation { condition, node: k.worst[0], lhs, rhs },
            });
        }
        Ok(())
    }
}

struct Tracker {
    check: ConditionCheck,
}

impl Tracker {
    fn new(condition: Condition) -> Self {
        Tracker {
            check: ConditionCheck {
                condition,
                holds: true,
                checked: 0,
                worst_margin: None,
                worst: Vec::new(),
                worst_sides: None,
            },
        }
    }

    /// Records `lhs <= rhs` for `item`.
    fn record(&mut self, item: &[usize], lhs: f64, rhs: f64) {
        let k = &mut self.check;
        k.checked += 1;
        if !le(lhs, rhs) {
            k.holds = false;
        }
        let m = rhs - lhs;
        if k.worst_margin.map_or(true, |w| m < w) {
            k.worst_margin = Some(m);
            k.worst = item.to_vec();
            k.worst_sides = Some((lhs, rhs));
        }
    }
}

/// Checks conditions 1 (in the requested form), 2 and 3 on every node and
/// edge, reporting the worst margin of each.
pub fn validate(cps: &Cps, form: Form) -> ValidationReport {
    validate_nodes(cps, form, 0..cps.node_count())
}

/// Validation restricted to `nodes` (and their output edges).
pub(crate) fn validate_nodes(
    cps: &Cps,
    form: Form,
    nodes: impl IntoIterator<Item = usize>,
) -> ValidationReport {
    validate_nodes_with(cps, form, nodes, &|v| cps.is_base(v))
}

/// Like [`validate_nodes`] with an explicit base-node classification.
pub(crate) fn validate_nodes_with(
    cps: &Cps,
    form: Form,
    nodes: impl IntoIterator<Item = usize>,
    is_base: &dyn Fn(usize) -> bool,
) -> ValidationReport {
    let l = cps.lambda;
    let mut c1 = Tracker::new(match form {
        Form::Slack => Condition::SlackInput,
        Form::Relaxed => Condition::RelaxedInput,
    });
    let mut c2 = Tracker::new(Condition::OutputCap);
    let mut c3 = Tracker::new(Condition::EdgeCap);
    for v in nodes {
        let deg = cps.deg[v] as f64;
        let s = cps.s[v];
        let (cin, cout) = (cps.c_in(v), cps.c_out(v));
        // Written as `need <= have`.
        match form {
            Form::Slack => c1.record(&[v], l * deg * s + cout, cin + deg),
            Form::Relaxed if !is_base(v) => c1.record(&[v], l * deg * s + cout, cin),
            Form::Relaxed => {}
        }
        c2.record(&[v], cout, (1.0 - l) / 2.0 * deg * s);
        for i in cps.out_edges(v) {
            let e = cps.edge(i);
            if e.c > 0.0 {
                c3.record(&[e.u, e.v], e.c, s);
            }
        }
    }
    ValidationReport { form, checks: vec![c1.check, c2.check, c3.check] }
}
