use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::RationalRate;

/// Letter name of group `n` (1-based): `A`, `B`, ... and `G27`, ... past `Z`.
pub fn group_name(n: u64) -> String {
    if (1..=26).contains(&n) {
        char::from(b'A' + (n - 1) as u8).to_string()
    } else {
        format!("G{n}")
    }
}

/// The periodic control sequence of a rate: `q` brackets of `p` numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlSequence {
    pub rate: RationalRate,
    /// One period; bracket `i` (0-based here) holds `i*b + 1 ..= i*b + p` mod `q`.
    pub brackets: Vec<Vec<u64>>,
    /// Initial color per number, index `y - 1`; `true` is white.
    pub initial_colors: Vec<bool>,
}

impl ControlSequence {
    pub fn new(rate: RationalRate) -> Self {
        let RationalRate { p, q, b } = rate;
        let brackets = (0..q)
            .map(|i| (1..=p).map(|j| (i * b + j - 1) % q + 1).collect())
            .collect();
        let initial_colors = (1..=q).map(|y| y > p && y <= p + b).collect();
        ControlSequence { rate, brackets, initial_colors }
    }

    pub fn p(&self) -> u64 {
        self.rate.p
    }

    pub fn q(&self) -> u64 {
        self.rate.q
    }

    /// Bracket `k` (1-based, any `k >= 1`; the sequence repeats with period `q`).
    pub fn bracket(&self, k: u64) -> &[u64] {
        &self.brackets[((k - 1) % self.rate.q) as usize]
    }

    pub fn contains(&self, k: u64, y: u64) -> bool {
        let RationalRate { p, q, b } = self.rate;
        let start = ((k - 1) % q) * b % q;
        (y - 1 + q - start) % q < p
    }

    /// Occurrences of `y` in brackets `1..=k`.
    pub fn occurrences(&self, y: u64, k: u64) -> u64 {
        let q = self.rate.q;
        let full = k / q * self.rate.p;
        full + (1..=k % q).filter(|&i| self.contains(i, y)).count() as u64
    }

    /// Number of brackets a group can perform when number `y` may switch at
    /// most `limit(y)` times.
    pub fn brackets_within(&self, limit: impl Fn(u64) -> u64) -> u64 {
        let mut counts = vec![0u64; self.rate.q as usize];
        let mut k = 0u64;
        loop {
            let next = self.bracket(k + 1);
            if next.iter().any(|&y| counts[y as usize - 1] + 1 > limit(y)) {
                return k;
            }
            for &y in next {
                counts[y as usize - 1] += 1;
            }
            k += 1;
        }
    }

    /// Replays one period and checks that every bracket is monochromatic,
    /// black on odd brackets and white on even ones.
    pub fn alternates(&self) -> bool {
        let mut colors = self.initial_colors.clone();
        for (i, br) in self.brackets.iter().enumerate() {
            let want = i % 2 == 1;
            if br.iter().any(|&y| colors[y as usize - 1] != want) {
                return false;
            }
            for &y in br {
                colors[y as usize - 1] = !want;
            }
        }
        true
    }

    /// Bracket notation; numbers are concatenated when `q < 10` and
    /// space-separated otherwise.
    pub fn pretty(&self) -> String {
        let sep = if self.rate.q < 10 { "" } else { " " };
        self.brackets
            .iter()
            .map(|br| {
                let items: Vec<String> = br.iter().map(u64::to_string).collect();
                format!("({})", items.join(sep))
            })
            .collect()
    }
}

impl fmt::Display for ControlSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

/// Number `low` at occurrence `low_occ` and number `high` at occurrence
/// `high_occ >= low_occ + 2` inside the same bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contradiction {
    pub bracket: u64,
    pub low: u64,
    pub low_occ: u64,
    pub high: u64,
    pub high_occ: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub contradictions: Vec<Contradiction>,
    /// Longest chain `x0, x1, ...` where each `x_i` must be shifted at least
    /// one round further than `x_{i+1}`.
    pub longest_chain: Vec<u64>,
}

impl ConsistencyReport {
    pub fn is_clean(&self) -> bool {
        self.contradictions.is_empty()
    }

    /// Minimum spread of per-group shifts needed to resolve every contradiction.
    pub fn required_shift(&self) -> usize {
        self.longest_chain.len().saturating_sub(1)
    }
}

/// Lists every contradiction in one period. Occurrence gaps repeat with
/// period `q`, so one period covers the whole sequence.
pub fn find_contradictions(seq: &ControlSequence) -> ConsistencyReport {
    let q = seq.q();
    let mut counts = vec![0u64; q as usize];
    let mut contradictions = Vec::new();
    for (i, br) in seq.brackets.iter().enumerate() {
        for &y in br {
            counts[y as usize - 1] += 1;
        }
        for &x in br {
            for &y in br {
                let (cx, cy) = (counts[x as usize - 1], counts[y as usize - 1]);
                if cy >= cx + 2 {
                    contradictions.push(Contradiction {
                        bracket: i as u64 + 1,
                        low: x,
                        low_occ: cx,
                        high: y,
                        high_occ: cy,
                    });
                }
            }
        }
    }
    let longest_chain = longest_chain(q, &contradictions);
    ConsistencyReport { contradictions, longest_chain }
}

/// Longest path in the "must be shifted further than" relation; a cycle is
/// reported as a chain of length `q + 1`, which no shifting can satisfy.
fn longest_chain(q: u64, cs: &[Contradiction]) -> Vec<u64> {
    let mut succ: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for c in cs {
        succ.entry(c.low).or_default().insert(c.high);
    }
    // Bellman-Ford style relaxation; q rounds bound any simple path.
    let mut best: BTreeMap<u64, Vec<u64>> = (1..=q).map(|y| (y, vec![y])).collect();
    for _ in 0..=q {
        let mut changed = false;
        for (&x, ys) in &succ {
            for &y in ys {
                let cand = best[&y].len() + 1;
                if cand > best[&x].len() && cand <= q as usize + 1 {
                    let mut path = vec![x];
                    path.extend(best[&y].iter().copied());
                    best.insert(x, path);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    best.into_values().max_by_key(|p| p.len()).unwrap_or_default()
}

/// Result of the 2-partition search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionOutcome {
    /// The sequence has no contradictions; no shifting is needed.
    Clean,
    /// `shifted` is delayed by one round relative to `unshifted`.
    Found { shifted: Vec<u64>, unshifted: Vec<u64> },
    /// No two-block shifting resolves the contradictions; the chain witnesses it.
    None { chain: Vec<u64> },
}

/// True if delaying `shifted` by one round resolves every contradiction:
/// each contradiction's low member is shifted and its high member is not.
pub fn shifting_resolves(report: &ConsistencyReport, shifted: &BTreeSet<u64>) -> bool {
    report
        .contradictions
        .iter()
        .all(|c| shifted.contains(&c.low) && !shifted.contains(&c.high))
}

/// Partition from the constructive block rule, available when `p <= 3b`
/// (equivalently `p/q <= 3/5`): the first `b` numbers together with the last
/// `b`, against the rest.
pub fn constructive_partition(rate: RationalRate) -> Option<(Vec<u64>, Vec<u64>)> {
    let RationalRate { p, q, b } = rate;
    if p > 3 * b {
        return None;
    }
    let first: Vec<u64> = (1..=b.min(p)).chain(p + b + 1..=q).collect();
    let rest: Vec<u64> = (1..=q).filter(|y| !first.contains(y)).collect();
    Some((first, rest))
}

/// Two-colors the contradiction graph (an edge joins the two members of each
/// contradiction) so that no contradiction lies inside one block. Returns the
/// block containing the smallest number of each component, or `None` on an
/// odd cycle.
fn two_color(q: u64, report: &ConsistencyReport) -> Option<BTreeSet<u64>> {
    let mut adj: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for c in &report.contradictions {
        adj.entry(c.low).or_default().insert(c.high);
        adj.entry(c.high).or_default().insert(c.low);
    }
    let mut side: BTreeMap<u64, bool> = BTreeMap::new();
    for start in 1..=q {
        if side.contains_key(&start) || !adj.contains_key(&start) {
            continue;
        }
        side.insert(start, true);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            let sx = side[&x];
            for &y in &adj[&x] {
                match side.get(&y) {
                    Some(&sy) if sy == sx => return None,
                    Some(_) => {}
                    None => {
                        side.insert(y, !sx);
                        stack.push(y);
                    }
                }
            }
        }
    }
    Some(side.into_iter().filter(|&(_, s)| s).map(|(y, _)| y).collect())
}

/// Finds a partition of the numbers into two blocks with no contradiction
/// inside a block. The constructive partition is preferred when it works;
/// otherwise the contradiction graph is two-colored, which is exact.
pub fn find_consistent_partition(seq: &ControlSequence) -> PartitionOutcome {
    let report = find_contradictions(seq);
    if report.is_clean() {
        return PartitionOutcome::Clean;
    }
    let q = seq.q();
    let split = |shifted: BTreeSet<u64>| {
        let unshifted = (1..=q).filter(|y| !shifted.contains(y)).collect();
        PartitionOutcome::Found { shifted: shifted.into_iter().collect(), unshifted }
    };
    if let Some((first, _)) = constructive_partition(seq.rate) {
        let set: BTreeSet<u64> = first.into_iter().collect();
        if separates(&report, &set) {
            return split(set);
        }
    }
    match two_color(q, &report) {
        Some(block) => split(block),
        None => PartitionOutcome::None { chain: report.longest_chain },
    }
}

/// True if every contradiction has one member in `block` and one outside.
pub fn separates(report: &ConsistencyReport, block: &BTreeSet<u64>) -> bool {
    report
        .contradictions
        .iter()
        .all(|c| block.contains(&c.low) != block.contains(&c.high))
}

/// The minimal shift block (every low member), if it resolves all contradictions.
pub fn minimal_shift_block(seq: &ControlSequence) -> Option<Vec<u64>> {
    let report = find_contradictions(seq);
    let lows: BTreeSet<u64> = report.contradictions.iter().map(|c| c.low).collect();
    shifting_resolves(&report, &lows).then(|| lows.into_iter().collect())
}

/// Shift blocks worth simulating, most economical first: the minimal block,
/// then both sides of the consistent partition.
pub fn candidate_shift_blocks(seq: &ControlSequence) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = Vec::new();
    let mut push = |v: Vec<u64>| {
        if !v.is_empty() && !out.contains(&v) {
            out.push(v);
        }
    };
    if let Some(m) = minimal_shift_block(seq) {
        push(m);
    }
    if let PartitionOutcome::Found { shifted, unshifted } = find_consistent_partition(seq) {
        push(shifted);
        push(unshifted);
    }
    out
}
