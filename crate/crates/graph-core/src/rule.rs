use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::GraphError;

/// Which edges count as conflicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessKind {
    /// Conflict = endpoints of opposite colors.
    Majority,
    /// Conflict = endpoints of the same color.
    Minority,
}

impl ProcessKind {
    /// Whether an edge between colors `a` and `b` is a conflict.
    #[inline]
    pub fn conflicts(self, a: bool, b: bool) -> bool {
        match self {
            ProcessKind::Majority => a != b,
            ProcessKind::Minority => a == b,
        }
    }

    pub fn dual(self) -> Self {
        match self {
            ProcessKind::Majority => ProcessKind::Minority,
            ProcessKind::Minority => ProcessKind::Majority,
        }
    }
}

impl FromStr for ProcessKind {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, GraphError> {
        match s.to_ascii_lowercase().as_str() {
            "majority" | "maj" => Ok(ProcessKind::Majority),
            "minority" | "min" => Ok(ProcessKind::Minority),
            _ => Err(GraphError::Parse { line: 0, msg: format!("unknown process kind {s:?}") }),
        }
    }
}

/// The proportionality parameter, kept exact when given as a fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Lambda {
    Rational { num: i64, den: i64 },
    Float(f64),
}

impl Lambda {
    /// Exact fraction `num/den` in lowest terms; must lie strictly in (0, 1).
    pub fn rational(num: i64, den: i64) -> Result<Self, GraphError> {
        if den <= 0 || num <= 0 || num >= den {
            return Err(GraphError::InvalidLambda(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Lambda::Rational { num: num / g, den: den / g })
    }

    pub fn float(x: f64) -> Result<Self, GraphError> {
        if !(x > 0.0 && x < 1.0) {
            return Err(GraphError::InvalidLambda(x.to_string()));
        }
        Ok(Lambda::Float(x))
    }

    pub fn value(&self) -> f64 {
        match *self {
            Lambda::Rational { num, den } => num as f64 / den as f64,
            Lambda::Float(x) => x,
        }
    }

    /// `Some((num, den))` for the exact representation.
    pub fn as_fraction(&self) -> Option<(i64, i64)> {
        match *self {
            Lambda::Rational { num, den } => Some((num, den)),
            Lambda::Float(_) => None,
        }
    }

    /// Does `surplus >= lambda * deg` hold?
    #[inline]
    pub fn at_most(&self, surplus: i64, deg: i64) -> bool {
        match *self {
            Lambda::Rational { num, den } => surplus as i128 * den as i128 >= num as i128 * deg as i128,
            Lambda::Float(x) => surplus as f64 >= x * deg as f64,
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Rational { num, den } => write!(f, "{num}/{den}"),
            Lambda::Float(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Lambda {
    type Err = GraphError;

    /// Accepts `p/q` or a plain decimal such as `0.25`; both parse to an
    /// exact fraction. Scientific notation falls back to a float.
    fn from_str(s: &str) -> Result<Self, GraphError> {
        let s = s.trim();
        let bad = || GraphError::InvalidLambda(s.to_string());
        if let Some((a, b)) = s.split_once('/') {
            let num = a.trim().parse().map_err(|_| bad())?;
            let den = b.trim().parse().map_err(|_| bad())?;
            return Lambda::rational(num, den);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if !int.is_empty() && int.chars().all(|c| c.is_ascii_digit())
                && !frac.is_empty()
                && frac.len() <= 15
                && frac.chars().all(|c| c.is_ascii_digit())
            {
                let den = 10i64.pow(frac.len() as u32);
                let num = int.parse::<i64>().map_err(|_| bad())? * den + frac.parse::<i64>().map_err(|_| bad())?;
                return Lambda::rational(num, den);
            }
        }
        Lambda::float(s.parse().map_err(|_| bad())?)
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// Rule I (basic majority) or Rule II (proportional threshold).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SwitchRule {
    /// Switch iff strictly more conflicting than non-conflicting neighbors.
    Basic,
    /// Switch iff `|N_c| - |N_nc| >= lambda * deg`.
    Proportional(Lambda),
}

impl SwitchRule {
    pub fn proportional(lambda: Lambda) -> Self {
        SwitchRule::Proportional(lambda)
    }

    /// Threshold test given a node's conflict count and degree. Isolated
    /// nodes never pass.
    #[inline]
    pub fn allows(&self, conflicts: usize, deg: usize) -> bool {
        if deg == 0 {
            return false;
        }
        let surplus = 2 * conflicts as i64 - deg as i64;
        match self {
            SwitchRule::Basic => surplus > 0,
            SwitchRule::Proportional(l) => surplus >= 1 && l.at_most(surplus, deg as i64),
        }
    }

    pub fn lambda(&self) -> Option<Lambda> {
        match self {
            SwitchRule::Basic => None,
            SwitchRule::Proportional(l) => Some(*l),
        }
    }
}
