use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::GadgetError;

/// Input switching rate `p/q` with `p + q` even and `b = (q - p) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalRate {
    pub p: u64,
    pub q: u64,
    pub b: u64,
}

impl RationalRate {
    /// Validates `p/q`, doubling both when `p + q` is odd.
    pub fn new(p: u64, q: u64) -> Result<Self, GadgetError> {
        if p == 0 || p >= q {
            return Err(GadgetError::InvalidRate { p, q });
        }
        let (p, q) = if (p + q) % 2 == 1 { (2 * p, 2 * q) } else { (p, q) };
        let b = (q - p) / 2;
        if b.gcd(&q) != 1 {
            return Err(GadgetError::NotCoprime { b, q });
        }
        Ok(RationalRate { p, q, b })
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Upper neighbors in conflict at the moment a lower node switches.
    pub fn threshold(&self) -> u64 {
        (self.p + self.q) / 2
    }
}

/// Best admissible `p/q` (after the parity fix) with `q <= max_q`,
/// minimizing `|p/q - mu|`; ties go to the smaller `q`.
///
/// Every reduced fraction is scanned, which subsumes the continued-fraction
/// convergents and also covers the parity constraint exactly.
pub fn approximate_mu(mu: f64, max_q: u64) -> Result<RationalRate, GadgetError> {
    approximate_mu_above(mu, 0.0, max_q)
}

/// Like [`approximate_mu`] but only accepts rates strictly above `floor`.
pub fn approximate_mu_above(mu: f64, floor: f64, max_q: u64) -> Result<RationalRate, GadgetError> {
    if max_q < 2 {
        return Err(GadgetError::MaxQTooSmall(max_q));
    }
    let mut best: Option<(f64, RationalRate)> = None;
    for q in 2..=max_q {
        let centre = (mu * q as f64).round() as i64;
        for p in (centre - 1).max(1)..=(centre + 1).min(q as i64 - 1) {
            let p = p as u64;
            if p.gcd(&q) != 1 || p as f64 / q as f64 <= floor {
                continue;
            }
            let Ok(rate) = RationalRate::new(p, q) else { continue };
            if rate.q > max_q {
                continue;
            }
            let err = (rate.value() - mu).abs();
            if best.map_or(true, |(e, r)| err < e - 1e-15 || (err <= e + 1e-15 && rate.q < r.q)) {
                best = Some((err, rate));
            }
        }
    }
    best.map(|(_, r)| r).ok_or(GadgetError::NoRate { mu, max_q })
}
