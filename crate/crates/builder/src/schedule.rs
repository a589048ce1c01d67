use propdyn_gadget::{ControlSequence, RationalRate};
use propdyn_graph::SwitchRule;
use serde::{Deserialize, Serialize};

use crate::types::{LinkKind, Role, TypeGraph};
use crate::BuildError;

const EVENT_CAP: usize = 10_000_000;

/// Exact switch accounting of a scripted schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Switches of each type's nodes, summed over the type.
    pub type_switches: Vec<u64>,
    /// Total switches per real level, top first.
    pub per_level: Vec<u64>,
    /// Switches per node at each real level.
    pub per_level_mean: Vec<f64>,
    pub relay: Vec<u64>,
    /// Chain switches (pools never switch).
    pub chain: u64,
    pub total: u64,
}

impl Prediction {
    /// Ratio of per-node means between consecutive levels.
    pub fn growth(&self) -> Vec<f64> {
        self.per_level_mean.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Growth between the two deepest levels.
    pub fn deepest_growth(&self) -> Option<f64> {
        self.growth().last().copied()
    }
}

struct Index {
    levels: Vec<Vec<usize>>,
    relays: Vec<Vec<usize>>,
    chains: Vec<usize>,
}

impl Index {
    fn new(tg: &TypeGraph, q: u64) -> Index {
        let slot = |g: u64, y: u64, c: bool| (((g - 1) * q + (y - 1)) * 2 + c as u64) as usize;
        let width = (2 * q * q) as usize;
        let mut levels: Vec<Vec<usize>> = Vec::new();
        let mut relays: Vec<Vec<usize>> = Vec::new();
        let mut chains = Vec::new();
        for (t, ty) in tg.types.iter().enumerate() {
            match ty.role {
                Role::Level { level, group, number, copy } => {
                    if levels.len() <= level {
                        levels.resize(level + 1, vec![usize::MAX; width]);
                    }
                    levels[level][slot(group, number, copy)] = t;
                }
                Role::Relay { layer, group, number, copy } => {
                    if relays.len() <= layer {
                        relays.resize(layer + 1, vec![usize::MAX; width]);
                    }
                    relays[layer][slot(group, number, copy)] = t;
                }
                Role::Chain { .. } => chains.push(t),
                Role::Pool { .. } => {}
            }
        }
        chains.sort_by_key(|&t| match tg.types[t].role {
            Role::Chain { depth, .. } => depth,
            _ => 0,
        });
        Index { levels, relays, chains }
    }
}

struct TypeSim<'a> {
    tg: &'a TypeGraph,
    rule: &'a SwitchRule,
    adj: Vec<Vec<(usize, usize, u64, bool)>>,
    deg: Vec<u64>,
    color: Vec<bool>,
    count: Vec<u64>,
}

impl TypeSim<'_> {
    fn switchable(&self, t: usize) -> bool {
        let conf: u64 = self.adj[t]
            .iter()
            .filter(|&&(_, o, _, _)| self.color[o] != self.color[t])
            .map(|&(_, _, d, _)| d)
            .sum();
        self.rule.allows(conf as usize, self.deg[t] as usize)
    }

    /// Every lower neighbor has answered the previous switches of `t`.
    fn answered(&self, t: usize, bracket: u64) -> bool {
        self.adj[t].iter().filter(|e| e.3).all(|&(li, o, _, _)| {
            let need = match self.tg.links[li].kind {
                LinkKind::Gadget | LinkKind::FromRelay => bracket - 1,
                LinkKind::ToRelay => self.count[t],
                LinkKind::Chain => self.count[t] + 1,
            };
            self.count[o] == need
        })
    }

    fn ready(&self, types: &[usize], bracket: u64) -> bool {
        types.iter().all(|&t| self.switchable(t) && self.answered(t, bracket))
    }

    fn apply(&mut self, types: &[usize]) {
        for &t in types {
            self.color[t] = !self.color[t];
            self.count[t] += 1;
        }
    }
}

/// Greedy deepest-first schedule over whole types.
///
/// Bottom nodes answer as soon as they can; a group performs its next
/// bracket once its nodes are switchable and every lower neighbor has
/// answered; chains feed the top level on demand.
pub fn schedule(
    tg: &TypeGraph,
    rate: RationalRate,
    rule: &SwitchRule,
) -> Result<(Vec<Vec<u32>>, Prediction), BuildError> {
    let q = rate.q;
    let seq = ControlSequence::new(rate);
    let ix = Index::new(tg, q);
    let levels = ix.levels.len();
    let mut sim = TypeSim {
        tg,
        rule,
        adj: tg.adjacency(),
        deg: tg.degrees(),
        color: tg.types.iter().map(|t| t.color).collect(),
        count: vec![0; tg.types.len()],
    };
    let slot = |g: u64, y: u64, c: bool| (((g - 1) * q + (y - 1)) * 2 + c as u64) as usize;
    let bracket_types = |table: &[usize], g: u64, k: u64| -> Vec<usize> {
        seq.bracket(k).iter().flat_map(|&y| [false, true].map(|c| table[slot(g, y, c)])).collect()
    };
    let mut done = vec![vec![0u64; q as usize]; levels];
    let mut relay_done = vec![vec![0u64; q as usize]; ix.relays.len()];
    let mut events: Vec<Vec<u32>> = Vec::new();

    'outer: loop {
        if events.len() >= EVENT_CAP {
            return Err(BuildError::Schedule(format!("more than {EVENT_CAP} events")));
        }
        for &t in &ix.levels[levels - 1] {
            if sim.ready(&[t], 0) {
                sim.apply(&[t]);
                events.push(vec![t as u32]);
                continue 'outer;
            }
        }
        for l in (0..levels - 1).rev() {
            if let Some(table) = ix.relays.get(l) {
                for g in 1..=q {
                    let j = relay_done[l][g as usize - 1] + 1;
                    let types = bracket_types(table, g, j);
                    if sim.ready(&types, j) {
                        sim.apply(&types);
                        relay_done[l][g as usize - 1] = j;
                        events.push(types.iter().map(|&t| t as u32).collect());
                        continue 'outer;
                    }
                }
            }
            for g in 1..=q {
                let k = done[l][g as usize - 1] + 1;
                let types = bracket_types(&ix.levels[l], g, k);
                if sim.ready(&types, k) {
                    sim.apply(&types);
                    done[l][g as usize - 1] = k;
                    events.push(types.iter().map(|&t| t as u32).collect());
                    continue 'outer;
                }
            }
        }
        for &t in &ix.chains {
            if sim.ready(&[t], 0) {
                sim.apply(&[t]);
                events.push(vec![t as u32]);
                continue 'outer;
            }
        }
        break;
    }
    Ok((events, predict(tg, &sim.count)))
}

fn predict(tg: &TypeGraph, counts: &[u64]) -> Prediction {
    let mut per_level = Vec::new();
    let mut level_nodes = Vec::new();
    let mut relay = Vec::new();
    let mut chain = 0;
    let type_switches: Vec<u64> = tg.types.iter().zip(counts).map(|(t, &c)| t.size * c).collect();
    for (t, &sw) in tg.types.iter().zip(&type_switches) {
        let bump = |v: &mut Vec<u64>, i: usize, x: u64| {
            if v.len() <= i {
                v.resize(i + 1, 0);
            }
            v[i] += x;
        };
        match t.role {
            Role::Level { level, .. } => {
                bump(&mut per_level, level, sw);
                bump(&mut level_nodes, level, t.size);
            }
            Role::Relay { layer, .. } => bump(&mut relay, layer, sw),
            Role::Chain { .. } | Role::Pool { .. } => chain += sw,
        }
    }
    let per_level_mean = per_level.iter().zip(&level_nodes).map(|(&s, &n)| s as f64 / n as f64).collect();
    let total = type_switches.iter().sum();
    Prediction { type_switches, per_level, per_level_mean, relay, chain, total }
}

/// Recomputes the accounting of a scripted type schedule.
pub fn predict_events(tg: &TypeGraph, events: &[Vec<u32>]) -> Prediction {
    let mut counts = vec![0u64; tg.types.len()];
    for e in events {
        for &t in e {
            counts[t as usize] += 1;
        }
    }
    predict(tg, &counts)
}
