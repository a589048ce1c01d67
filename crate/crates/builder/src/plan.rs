use num_integer::Integer;
use propdyn_gadget::{
    approximate_mu_above, find_consistent_partition, find_contradictions, ControlSequence, PartitionOutcome,
    RationalRate,
};
use propdyn_graph::{Lambda, SwitchRule};
use propdyn_spectrum::{solve_spectrum, DEFAULT_TOL};
use serde::{Deserialize, Serialize};

use crate::schedule::{schedule, Prediction};
use crate::types::{LinkKind, Role, TypeGraph};
use crate::BuildError;

/// When to use the relay construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelayMode {
    /// Gadget plan when the rate is contradiction-free, relays otherwise.
    Auto,
    /// Gadget plan or an error.
    Never,
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanMode {
    Gadget,
    Relay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub relay: RelayMode,
    /// Force the number of real levels instead of fitting `n_target`.
    pub levels: Option<usize>,
    /// Switches available to each top node (priming chain depth); defaults
    /// to 2 for gadget plans and 1 for relay plans.
    pub chain_depth: Option<u64>,
    pub max_q: u64,
    pub relay_max_q: u64,
    pub max_edges: u64,
    pub tol: f64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            relay: RelayMode::Auto,
            levels: None,
            chain_depth: None,
            max_q: 12,
            relay_max_q: 24,
            max_edges: 20_000_000,
            tol: DEFAULT_TOL,
        }
    }
}

/// Up/down degree ratio between consecutive levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRatio {
    /// `p'/q' = (1 + lambda) / (p/q - lambda)` in lowest terms.
    pub p_prime: u64,
    pub q_prime: u64,
    /// `floor(p'/q')`.
    pub k: u64,
    /// Integer multiplier actually wired: `ceil(p'/q')`.
    pub used: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelPlan {
    pub level: usize,
    pub types: u64,
    pub nodes_per_type: u64,
    pub nodes: u64,
    pub up_degree: u64,
    pub down_degree: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelayPlan {
    /// Sits between level `layer` and `layer + 1`.
    pub layer: usize,
    pub nodes_per_type: u64,
    pub up_degree: u64,
    pub down_degree: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainPlan {
    /// Switches available to every top node.
    pub depth: u64,
    /// Size of each chain type at depths `1..depth`.
    pub sizes: Vec<u64>,
    /// Size of each of the two pools at depth `depth`.
    pub pool: u64,
}

/// Full blueprint of a construction, reproducible without randomness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionPlan {
    pub lambda: Lambda,
    pub mode: PlanMode,
    /// Relays were chosen because the gadget rate has contradictions.
    pub fallback: bool,
    pub rate: RationalRate,
    /// Rate the construction aims for (`mu` or its relay variant).
    pub target_mu: f64,
    /// Ideal per-level growth `(1 - phi)/(lambda + phi)` for the mode.
    pub ideal_growth: f64,
    pub ratio: DegreeRatio,
    pub levels: Vec<LevelPlan>,
    pub relays: Vec<RelayPlan>,
    pub chain: ChainPlan,
    pub types: TypeGraph,
    /// Scripted schedule: each event switches whole types, in order.
    pub events: Vec<Vec<u32>>,
    pub predicted: Prediction,
}

impl ConstructionPlan {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn node_count(&self) -> u64 {
        self.types.node_count()
    }

    pub fn edge_count(&self) -> u64 {
        self.types.edge_count()
    }

    pub fn rule(&self) -> SwitchRule {
        SwitchRule::Proportional(self.lambda)
    }

    /// Base-node threshold for conflict-path systems of a replay: every top
    /// and chain node switches fewer times.
    pub fn cps_s0(&self) -> u64 {
        self.chain.depth + 1
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Smallest `m >= 1` with `ok(m)`, for a predicate that stays true once true.
fn smallest(ok: impl Fn(u64) -> bool) -> Option<u64> {
    let mut hi = 1u64;
    while !ok(hi) {
        hi = hi.checked_mul(2).filter(|&h| h < 1 << 40)?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn allows(rule: &SwitchRule, conflicts: u64, deg: u64) -> bool {
    rule.allows(conflicts as usize, deg as usize)
}

/// Up-neighbors a node needs, all in conflict, to switch over `down`
/// non-conflicting down-neighbors.
fn primer(rule: &SwitchRule, down: u64) -> Option<u64> {
    smallest(|a| allows(rule, a, a + down))
}

#[derive(Debug, Clone)]
struct Sizing {
    nodes: Vec<u64>,
    m_up: Vec<u64>,
    m_down: Vec<u64>,
    relays: Vec<u64>,
    relay_up: u64,
    chain: Vec<u64>,
    pool: u64,
}

fn size_gadget(rule: &SwitchRule, rate: RationalRate, levels: usize, depth: u64) -> Option<Sizing> {
    let (p, q) = (rate.p, rate.q);
    let half = (p + q) / 2;
    let k = smallest(|m| allows(rule, half * m, q * m + q))?;
    let mut m_up = vec![0u64; levels];
    let mut m_down = vec![0u64; levels];
    m_up[levels - 1] = 1;
    for l in (0..levels - 1).rev() {
        m_down[l] = m_up[l + 1];
        if l > 0 {
            m_up[l] = k.checked_mul(m_down[l])?;
        }
    }
    let n = m_up.iter().chain(&m_down).copied().max().unwrap_or(1);
    let nodes = vec![n; levels];
    let (chain, pool) = size_chain(rule, q * m_down[0], q * n, depth)?;
    Some(Sizing { nodes, m_up, m_down, relays: Vec::new(), relay_up: 0, chain, pool })
}

fn size_relay(rule: &SwitchRule, rate: RationalRate, levels: usize, depth: u64) -> Option<Sizing> {
    let (p, q) = (rate.p, rate.q);
    let half = (p + q) / 2;
    let a = primer(rule, q)?;
    let mut nodes = vec![0u64; levels];
    let mut m_up = vec![0u64; levels];
    let mut m_down = vec![0u64; levels];
    let mut relays = vec![0u64; levels - 1];
    nodes[levels - 1] = 1;
    m_up[levels - 1] = 1;
    for l in (0..levels - 1).rev() {
        relays[l] = nodes[l + 1].checked_mul(m_up[l + 1])?;
        m_down[l] = relays[l];
        nodes[l] = a;
        if l > 0 {
            let d = m_down[l];
            m_up[l] = smallest(|m| allows(rule, half * m, q * m + d))?;
        }
    }
    let (chain, pool) = size_chain(rule, m_down[0], q * nodes[0], depth)?;
    Some(Sizing { nodes, m_up, m_down, relays, relay_up: a, chain, pool })
}

/// Chain sizes for top nodes with `top_down` down-neighbors each; a
/// depth-1 chain node sees `first_down` top nodes.
fn size_chain(rule: &SwitchRule, top_down: u64, first_down: u64, depth: u64) -> Option<(Vec<u64>, u64)> {
    let mut sizes = Vec::new();
    let mut need = top_down;
    for j in 1..=depth {
        let a = primer(rule, need)?;
        if j == depth {
            return Some((sizes, a));
        }
        need = if j == 1 { first_down } else { sizes[sizes.len() - 2] };
        sizes.push(a);
    }
    None
}

fn type_graph(rate: RationalRate, mode: PlanMode, s: &Sizing) -> TypeGraph {
    let q = rate.q;
    let base = ControlSequence::new(rate).initial_colors;
    let white = |y: u64| base[y as usize - 1];
    let levels = s.nodes.len();
    let relay = mode == PlanMode::Relay;
    let mut tg = TypeGraph::default();
    let idx = |x: u64, y: u64, c: bool| (((x - 1) * q + (y - 1)) * 2 + c as u64) as usize;

    let mut level_ids = Vec::with_capacity(levels);
    for l in 0..levels {
        let layer = if relay { 2 * l as i64 } else { l as i64 };
        let mut ids = vec![0usize; (2 * q * q) as usize];
        for x in 1..=q {
            for y in 1..=q {
                for c in [false, true] {
                    let role = Role::Level { level: l, group: x, number: y, copy: c };
                    ids[idx(x, y, c)] = tg.add(role, s.nodes[l], white(y) ^ c, layer);
                }
            }
        }
        level_ids.push(ids);
    }

    for l in 0..levels - 1 {
        for x in 1..=q {
            for y in 1..=q {
                for c in [false, true] {
                    let upper = level_ids[l][idx(x, y, c)];
                    let (above, down) = if relay {
                        let role = Role::Relay { layer: l, group: x, number: y, copy: c };
                        let r = tg.add(role, s.relays[l], white(y) ^ c, 2 * l as i64 + 1);
                        tg.link(upper, r, s.m_down[l], s.relay_up, LinkKind::ToRelay);
                        (r, 1)
                    } else {
                        (upper, s.m_down[l])
                    };
                    let kind = if relay { LinkKind::FromRelay } else { LinkKind::Gadget };
                    for z in 1..=q {
                        let lower = level_ids[l + 1][idx(z, x, white(x) ^ c)];
                        tg.link(above, lower, down, s.m_up[l + 1], kind);
                    }
                }
            }
        }
    }

    // Priming chains, shared by all top groups per (number, copy).
    let mut frontier: Vec<usize> = level_ids[0].clone();
    for (j, &size) in s.chain.iter().enumerate() {
        let depth = j + 1;
        let mut next = Vec::new();
        for y in 1..=q {
            for c in [false, true] {
                let color = white(y) ^ c ^ (depth % 2 == 1);
                let role = Role::Chain { depth, number: y, copy: c };
                let t = tg.add(role, size, color, -(depth as i64));
                let below: Vec<usize> = if depth == 1 {
                    (1..=q).map(|x| level_ids[0][idx(x, y, c)]).collect()
                } else {
                    vec![frontier[((y - 1) * 2 + c as u64) as usize]]
                };
                for b in below {
                    tg.link(t, b, tg.types[b].size, size, LinkKind::Chain);
                }
                next.push(t);
            }
        }
        frontier = next;
    }
    let depth = s.chain.len() as i64 + 1;
    for color in [false, true] {
        let pool = tg.add(Role::Pool { color }, s.pool, color, -depth);
        for &b in &frontier {
            if tg.types[b].color != color {
                tg.link(pool, b, tg.types[b].size, s.pool, LinkKind::Chain);
            }
        }
    }
    tg
}

fn degree_ratio(lambda: Lambda, rate: RationalRate) -> Result<DegreeRatio, BuildError> {
    let (a, b) = lambda.as_fraction().ok_or(BuildError::InexactLambda(lambda.value()))?;
    let (a, b) = (a as u64, b as u64);
    let (p, q) = (rate.p, rate.q);
    if p * b <= a * q {
        return Err(BuildError::RateBelowLambda { p, q });
    }
    let num = (a + b) * q;
    let den = p * b - a * q;
    let g = num.gcd(&den);
    let (pp, qq) = (num / g, den / g);
    Ok(DegreeRatio { p_prime: pp, q_prime: qq, k: pp / qq, used: pp.div_ceil(qq) })
}

/// Plans the largest construction with at most `n_target` nodes.
pub fn plan(lambda: Lambda, n_target: u64, config: &PlanConfig) -> Result<ConstructionPlan, BuildError> {
    let l = lambda.value();
    lambda.as_fraction().ok_or(BuildError::InexactLambda(l))?;
    let sp = solve_spectrum(l, config.tol)?;
    let rule = SwitchRule::Proportional(lambda);

    let gadget = approximate_mu_above(sp.mu, l, config.max_q);
    let clean = gadget.as_ref().is_ok_and(|&r| find_contradictions(&ControlSequence::new(r)).is_clean());
    let (mode, rate, target_mu, ideal_growth) = match (config.relay, clean) {
        (RelayMode::Never, false) => {
            let rate = gadget?;
            let detail = match find_consistent_partition(&ControlSequence::new(rate)) {
                PartitionOutcome::None { .. } => "no consistent partition exists".to_string(),
                _ => "contradictions need shifting, which multi-level plans do not support".to_string(),
            };
            return Err(BuildError::Unsupported { p: rate.p, q: rate.q, detail });
        }
        (RelayMode::Always, _) | (RelayMode::Auto, false) => {
            let mu_hat = (l + sp.phi_hat_star) / (1.0 - sp.phi_hat_star);
            let rate = approximate_mu_above(mu_hat, l, config.relay_max_q)?;
            (PlanMode::Relay, rate, mu_hat, (1.0 - sp.phi_hat_star) / (l + sp.phi_hat_star))
        }
        _ => (PlanMode::Gadget, gadget?, sp.mu, (1.0 - sp.phi_star) / (l + sp.phi_star)),
    };
    let fallback = mode == PlanMode::Relay && config.relay == RelayMode::Auto;
    let ratio = degree_ratio(lambda, rate)?;
    let depth = config.chain_depth.unwrap_or(match mode {
        PlanMode::Gadget => 2,
        PlanMode::Relay => 1,
    });
    if depth == 0 {
        return Err(BuildError::Config("chain depth must be at least 1".into()));
    }

    let sized = |levels: usize| -> Option<(Sizing, TypeGraph)> {
        let s = match mode {
            PlanMode::Gadget => size_gadget(&rule, rate, levels, depth)?,
            PlanMode::Relay => size_relay(&rule, rate, levels, depth)?,
        };
        let tg = type_graph(rate, mode, &s);
        Some((s, tg))
    };
    let fits = |tg: &TypeGraph| tg.node_count() <= n_target && tg.edge_count() <= config.max_edges;

    let (sizing, tg) = match config.levels {
        Some(levels) => {
            if levels < 2 {
                return Err(BuildError::Config("at least two levels are needed".into()));
            }
            let (s, tg) = sized(levels).ok_or(BuildError::TooLarge { levels })?;
            if !fits(&tg) {
                return Err(BuildError::TooSmall { n_target, needed: tg.node_count(), edges: tg.edge_count() });
            }
            (s, tg)
        }
        None => {
            let mut best = None;
            for levels in 2..=12 {
                match sized(levels) {
                    Some((s, tg)) if fits(&tg) => best = Some((s, tg)),
                    Some((_, tg)) if levels == 2 => {
                        return Err(BuildError::TooSmall {
                            n_target,
                            needed: tg.node_count(),
                            edges: tg.edge_count(),
                        })
                    }
                    _ => break,
                }
            }
            best.ok_or(BuildError::TooLarge { levels: 2 })?
        }
    };

    let q2 = 2 * rate.q * rate.q;
    let levels = (0..sizing.nodes.len())
        .map(|l| LevelPlan {
            level: l,
            types: q2,
            nodes_per_type: sizing.nodes[l],
            nodes: q2 * sizing.nodes[l],
            up_degree: match (l, mode) {
                (0, _) => sizing.chain.first().copied().unwrap_or(sizing.pool),
                _ => rate.q * sizing.m_up[l],
            },
            down_degree: match mode {
                PlanMode::Gadget => rate.q * sizing.m_down[l],
                PlanMode::Relay => sizing.m_down[l],
            },
        })
        .collect();
    let relays = sizing
        .relays
        .iter()
        .enumerate()
        .map(|(l, &n)| RelayPlan { layer: l, nodes_per_type: n, up_degree: sizing.relay_up, down_degree: rate.q })
        .collect();
    let chain = ChainPlan { depth, sizes: sizing.chain.clone(), pool: sizing.pool };

    let (events, predicted) = schedule(&tg, rate, &rule)?;
    Ok(ConstructionPlan {
        lambda,
        mode,
        fallback,
        rate,
        target_mu,
        ideal_growth,
        ratio,
        levels,
        relays,
        chain,
        types: tg,
        events,
        predicted,
    })
}
