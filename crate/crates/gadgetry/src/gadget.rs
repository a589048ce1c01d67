use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::sequence::{
    candidate_shift_blocks, find_consistent_partition, group_name, ControlSequence, PartitionOutcome,
};
use crate::{GadgetError, RationalRate};

/// One step of a gadget execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GadgetEvent {
    /// Upper group performs its next bracket.
    Upper { group: u64, bracket: u64, round: u64 },
    /// Lower group performs its next bracket.
    Lower { group: u64, bracket: u64 },
}

/// A two-level control gadget: `q` upper groups and `q` lower groups of `q`
/// numbered nodes each. Lower node `(Z, x)` is adjacent to every node of
/// upper group `x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetSpec {
    pub rate: RationalRate,
    /// Upper groups delayed by one round.
    pub shift_set: Vec<u64>,
    /// Brackets each upper group performs in the recorded execution.
    pub brackets_per_group: u64,
    /// Upper groups in the order they switched, one list per round.
    pub rounds: Vec<Vec<u64>>,
    pub events: Vec<GadgetEvent>,
    /// Brackets performed by each lower group.
    pub lower_brackets: Vec<u64>,
    /// `lower_switches[Z-1][x-1]`: switches of lower node `(Z, x)`.
    pub lower_switches: Vec<Vec<u64>>,
    /// Upper copy (`false` = as colored, `true` = inverted) each lower label
    /// must attach to so every switch sits exactly at the threshold.
    pub lower_copy: Vec<Vec<bool>>,
    /// Upper brackets dropped in the closing round of a shifted execution.
    pub skipped: u64,
}

/// Execution statistics used by callers and tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GadgetRun {
    pub upper_node_switches: u64,
    pub lower_node_switches: u64,
    /// Upper brackets whose lower neighbors never responded.
    pub unanswered: u64,
}

impl GadgetSpec {
    pub fn q(&self) -> u64 {
        self.rate.q
    }

    /// Nodes per level.
    pub fn level_size(&self) -> u64 {
        self.rate.q * self.rate.q
    }

    /// Edges as `((Z, x), (x, y))` pairs of (group, number).
    pub fn edges(&self) -> Vec<((u64, u64), (u64, u64))> {
        let q = self.rate.q;
        let mut out = Vec::with_capacity((q * q * q) as usize);
        for z in 1..=q {
            for x in 1..=q {
                for y in 1..=q {
                    out.push(((z, x), (x, y)));
                }
            }
        }
        out
    }

    pub fn run(&self) -> GadgetRun {
        let q = self.rate.q;
        let upper: u64 = self.rounds.iter().flatten().count() as u64 * self.rate.p;
        let lower: u64 = self.lower_switches.iter().flatten().sum();
        let mut unanswered = 0;
        for x in 1..=q {
            let done = self.upper_done(x);
            for z in 0..q as usize {
                unanswered += done - self.lower_switches[z][x as usize - 1];
            }
        }
        GadgetRun { upper_node_switches: upper, lower_node_switches: lower, unanswered }
    }

    /// Brackets performed by upper group `x`.
    pub fn upper_done(&self, x: u64) -> u64 {
        self.rounds.iter().flatten().filter(|&&g| g == x).count() as u64
    }

    /// Round notation such as `(ABCD.ABCDE.ABCDE.E)`; letters sorted per round.
    pub fn pretty_schedule(&self) -> String {
        let rounds: Vec<String> = self
            .rounds
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.sort_unstable();
                r.into_iter().map(group_name).collect()
            })
            .collect();
        format!("({})", rounds.join("."))
    }
}

/// Synthesizes a gadget executing one full upper period (`q` brackets per
/// upper group).
pub fn synthesize_gadget(rate: RationalRate, use_shifting: bool) -> Result<GadgetSpec, GadgetError> {
    synthesize_gadget_with(rate, use_shifting, rate.q)
}

/// Synthesizes a gadget where every upper group performs `brackets` brackets.
///
/// Upper groups become available in rounds; unshifted groups use rounds
/// `1..=brackets` and shifted groups rounds `2..=brackets+1`. Round `r+1`
/// opens only once every group due in round `r` has switched, which is what
/// the level above enforces in a full construction. Lower groups switch as
/// soon as their next bracket is supported.
pub fn synthesize_gadget_with(
    rate: RationalRate,
    use_shifting: bool,
    brackets: u64,
) -> Result<GadgetSpec, GadgetError> {
    let seq = ControlSequence::new(rate);
    let (p, q) = (rate.p, rate.q);
    match find_consistent_partition(&seq) {
        PartitionOutcome::Clean => synthesize_shifted(rate, Vec::new(), brackets),
        PartitionOutcome::Found { .. } if use_shifting => candidate_shift_blocks(&seq)
            .into_iter()
            .find_map(|block| synthesize_shifted(rate, block, brackets).ok())
            .ok_or(GadgetError::Unsupported { p, q }),
        PartitionOutcome::Found { .. } => Err(GadgetError::NeedsShift { p, q }),
        PartitionOutcome::None { .. } => Err(GadgetError::Unsupported { p, q }),
    }
}

/// Runs the gadget with an explicit shift block.
pub fn synthesize_shifted(
    rate: RationalRate,
    shift_set: Vec<u64>,
    brackets: u64,
) -> Result<GadgetSpec, GadgetError> {
    let seq = ControlSequence::new(rate);
    let (p, q) = (rate.p, rate.q);
    let shifted: BTreeSet<u64> = shift_set.iter().copied().collect();
    let shift = |x: u64| u64::from(shifted.contains(&x));
    let total_rounds = brackets + u64::from(!shifted.is_empty());

    let qs = q as usize;
    let mut up_done = vec![0u64; qs];
    let mut low_done = vec![0u64; qs];
    let mut events = Vec::new();
    let mut rounds = Vec::new();
    let mut skipped = 0u64;

    // Upper node colors per group (all groups start alike); shifted groups
    // behave as if they had already performed one bracket of a previous
    // period, which only matters for accounting, not for the gadget itself.
    let mut up_colors: Vec<Vec<bool>> = vec![seq.initial_colors.clone(); qs];
    let mut low_colors: Vec<Vec<bool>> = vec![seq.initial_colors.clone(); qs];
    let mut lower_switches = vec![vec![0u64; qs]; qs];
    let mut lower_copy: Vec<Vec<Option<bool>>> = vec![vec![None; qs]; qs];
    let threshold = rate.threshold() as usize;

    let lower_ready = |low_done: &[u64], up_done: &[u64], z: usize| {
        let beta = low_done[z] + 1;
        seq.bracket(beta)
            .iter()
            .all(|&x| up_done[x as usize - 1] >= seq.occurrences(x, beta))
    };
    let upper_ready = |low_done: &[u64], up_done: &[u64], x: u64| {
        let k = up_done[x as usize - 1];
        low_done.iter().all(|&d| seq.occurrences(x, d) >= k)
    };

    for round in 1..=total_rounds {
        let mut due: Vec<u64> = (1..=q)
            .filter(|&x| {
                let k = round.checked_sub(shift(x)).unwrap_or(0);
                k >= 1 && k <= brackets
            })
            .collect();
        let mut order = Vec::new();
        loop {
            // Lower groups first: they never block anything.
            let mut progressed = true;
            while progressed {
                progressed = false;
                for z in 0..qs {
                    while lower_ready(&low_done, &up_done, z) {
                        let beta = low_done[z] + 1;
                        for &x in seq.bracket(beta) {
                            let xi = x as usize - 1;
                            let own = low_colors[z][xi];
                            // Conflicts with upper group x under each copy.
                            let plain = up_colors[xi].iter().filter(|&&c| c != own).count();
                            let copy = if plain == threshold {
                                false
                            } else if q as usize - plain == threshold {
                                true
                            } else {
                                return Err(GadgetError::Deadlock { p, q, round: round as usize });
                            };
                            match lower_copy[z][xi] {
                                None => lower_copy[z][xi] = Some(copy),
                                Some(c) if c != copy => {
                                    return Err(GadgetError::Deadlock { p, q, round: round as usize })
                                }
                                _ => {}
                            }
                            low_colors[z][xi] = !own;
                            lower_switches[z][xi] += 1;
                        }
                        low_done[z] = beta;
                        events.push(GadgetEvent::Lower { group: z as u64 + 1, bracket: beta });
                        progressed = true;
                    }
                }
            }
            if due.is_empty() {
                break;
            }
            let Some(pos) = due.iter().position(|&x| upper_ready(&low_done, &up_done, x)) else {
                // The closing round of a shifted execution may strand a
                // shifted group whose lower neighbors wait on groups that
                // already finished; that bracket is the lost round.
                if round == total_rounds && !shifted.is_empty() {
                    skipped += due.len() as u64;
                    break;
                }
                return Err(GadgetError::Deadlock { p, q, round: round as usize });
            };
            let x = due.remove(pos);
            let xi = x as usize - 1;
            let k = up_done[xi] + 1;
            for &y in seq.bracket(k) {
                let c = &mut up_colors[xi][y as usize - 1];
                *c = !*c;
            }
            up_done[xi] = k;
            order.push(x);
            events.push(GadgetEvent::Upper { group: x, bracket: k, round });
        }
        rounds.push(order);
    }

    let lower_copy = lower_copy
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.unwrap_or(false)).collect())
        .collect();
    Ok(GadgetSpec {
        rate,
        shift_set,
        brackets_per_group: brackets,
        rounds,
        events,
        lower_brackets: low_done,
        lower_switches,
        lower_copy,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_four_doubles() {
        let g = synthesize_gadget(RationalRate::new(2, 4).unwrap(), false).unwrap();
        assert_eq!(g.level_size(), 16);
        assert_eq!(g.lower_brackets, vec![8; 4]);
        let run = g.run();
        assert_eq!(run.unanswered, 0);
        assert_eq!(run.lower_node_switches, 2 * run.upper_node_switches);
    }

    #[test]
    fn constructive_block_also_works() {
        let r = RationalRate::new(3, 5).unwrap();
        let g = synthesize_shifted(r, vec![1, 5], 5).unwrap();
        assert!(g.skipped <= 1);
    }

    #[test]
    fn three_five_needs_shift() {
        let r = RationalRate::new(3, 5).unwrap();
        assert_eq!(synthesize_gadget(r, false), Err(GadgetError::NeedsShift { p: 3, q: 5 }));
        let g = synthesize_gadget_with(r, true, 3).unwrap();
        assert_eq!(g.shift_set, vec![5]);
        assert_eq!(g.pretty_schedule(), "(ABCD.ABCDE.ABCDE.E)");
    }
}
