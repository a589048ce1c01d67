use std::collections::HashMap;

use propdyn_graph::{Graph, ProcessState, SwitchRule};

use crate::SimError;

/// Default cap on distinct colorings visited by the oracle.
pub const DEFAULT_STATE_BUDGET: usize = 2_000_000;

type Key = Vec<u64>;

fn key(state: &ProcessState) -> Key {
    let mut k = vec![0u64; state.colors().len().div_ceil(64).max(1)];
    for (i, &c) in state.colors().iter().enumerate() {
        if c {
            k[i / 64] |= 1 << (i % 64);
        }
    }
    k
}

/// Longest possible execution from `initial` and one schedule attaining it.
///
/// Every switch strictly lowers the number of conflicts, so the reachable
/// configuration graph is acyclic and a memoized depth-first search gives
/// the exact longest path. Fails once more than `budget` distinct colorings
/// have been expanded.
pub fn max_stabilization_time(
    g: &Graph,
    rule: &SwitchRule,
    initial: &ProcessState,
    budget: usize,
) -> Result<(u64, Vec<usize>), SimError> {
    // coloring -> (longest remaining run, first node of an optimal run)
    let mut memo: HashMap<Key, (u64, usize)> = HashMap::new();
    let best = longest(g, rule, initial, &mut memo, budget)?;

    let mut witness = Vec::with_capacity(best as usize);
    let mut state = initial.clone();
    while let Some(&(len, v)) = memo.get(&key(&state)) {
        if len == 0 {
            break;
        }
        witness.push(v);
        state.switch_with(g, rule, v, |_, _| {})?;
    }
    debug_assert_eq!(witness.len() as u64, best);
    Ok((best, witness))
}

fn longest(
    g: &Graph,
    rule: &SwitchRule,
    state: &ProcessState,
    memo: &mut HashMap<Key, (u64, usize)>,
    budget: usize,
) -> Result<u64, SimError> {
    let k = key(state);
    if let Some(&(len, _)) = memo.get(&k) {
        return Ok(len);
    }
    if memo.len() >= budget {
        return Err(SimError::StateBudget { budget });
    }
    let mut best = (0u64, usize::MAX);
    for v in state.switchable_nodes(g, rule) {
        let mut next = state.clone();
        next.switch_with(g, rule, v, |_, _| {})?;
        let len = 1 + longest(g, rule, &next, memo, budget)?;
        if len > best.0 {
            best = (len, v);
        }
    }
    memo.insert(k, best);
    Ok(best.0)
}
