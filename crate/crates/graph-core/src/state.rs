use crate::{Color, Graph, GraphError, ProcessKind, SwitchRule};

/// Coloring plus cached conflict counts `|N_c(v)|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessState {
    kind: ProcessKind,
    colors: Vec<Color>,
    conflicts: Vec<u32>,
    total: u64,
}

/// Edges that became or ceased to be conflicts when a node switched.
/// Each pair is `(switched node, neighbor)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SwitchEffect {
    pub created: Vec<(usize, usize)>,
    pub removed: Vec<(usize, usize)>,
}

impl ProcessState {
    pub fn new(g: &Graph, kind: ProcessKind, colors: Vec<Color>) -> Result<Self, GraphError> {
        if colors.len() != g.node_count() {
            return Err(GraphError::ColoringLength { got: colors.len(), n: g.node_count() });
        }
        let conflicts: Vec<u32> = (0..g.node_count())
            .map(|v| g.neighbors(v).filter(|&u| kind.conflicts(colors[v], colors[u])).count() as u32)
            .collect();
        let total = conflicts.iter().map(|&c| c as u64).sum::<u64>() / 2;
        Ok(ProcessState { kind, colors, conflicts, total })
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn color(&self, v: usize) -> Color {
        self.colors[v]
    }

    /// Cached `|N_c(v)|`.
    pub fn conflict_count(&self, v: usize) -> usize {
        self.conflicts[v] as usize
    }

    /// Number of conflicting edges in the graph.
    pub fn total_conflicts(&self) -> u64 {
        self.total
    }

    pub fn is_switchable(&self, g: &Graph, rule: &SwitchRule, v: usize) -> bool {
        rule.allows(self.conflicts[v] as usize, g.degree(v))
    }

    /// Currently switchable nodes in increasing order.
    pub fn switchable_nodes(&self, g: &Graph, rule: &SwitchRule) -> Vec<usize> {
        (0..g.node_count()).filter(|&v| self.is_switchable(g, rule, v)).collect()
    }

    /// `|N_c(v)| - |N_nc(v)|`.
    pub fn surplus(&self, g: &Graph, v: usize) -> i64 {
        2 * self.conflicts[v] as i64 - g.degree(v) as i64
    }

    /// Flips `v` after checking switchability. `on_edge(slot, created)` is
    /// called for every incident slot of `v`: `created` is true when the edge
    /// turned into a conflict and false when a conflict vanished.
    pub fn switch_with(
        &mut self,
        g: &Graph,
        rule: &SwitchRule,
        v: usize,
        mut on_edge: impl FnMut(usize, bool),
    ) -> Result<(), GraphError> {
        if v >= g.node_count() {
            return Err(GraphError::NodeOutOfRange { node: v, n: g.node_count() });
        }
        if !self.is_switchable(g, rule, v) {
            return Err(GraphError::NotSwitchable(v));
        }
        let old = self.colors[v];
        let new = !old;
        self.colors[v] = new;
        let mut cv = 0u32;
        for s in g.slots(v) {
            let u = g.slot_target(s);
            let was = self.kind.conflicts(old, self.colors[u]);
            let now = !was;
            if now {
                cv += 1;
                self.conflicts[u] += 1;
            } else {
                self.conflicts[u] -= 1;
            }
            on_edge(s, now);
        }
        let before = self.conflicts[v];
        self.conflicts[v] = cv;
        self.total = self.total + cv as u64 - before as u64;
        Ok(())
    }

    /// Recomputes conflict counts from the coloring, for consistency checks.
    pub fn recount(&self, g: &Graph) -> Vec<u32> {
        ProcessState::new(g, self.kind, self.colors.clone()).unwrap().conflicts
    }
}

/// Rule test for node `v` in `state`.
pub fn is_switchable(g: &Graph, state: &ProcessState, rule: &SwitchRule, v: usize) -> bool {
    v < g.node_count() && state.is_switchable(g, rule, v)
}

/// Switches `v` in place and reports the created and removed conflicts.
pub fn switch(
    g: &Graph,
    state: &mut ProcessState,
    rule: &SwitchRule,
    v: usize,
) -> Result<SwitchEffect, GraphError> {
    let mut effect = SwitchEffect::default();
    state.switch_with(g, rule, v, |s, created| {
        let e = (v, g.slot_target(s));
        if created {
            effect.created.push(e)
        } else {
            effect.removed.push(e)
        }
    })?;
    Ok(effect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Lambda, BLACK, WHITE};

    fn half() -> SwitchRule {
        SwitchRule::Proportional(Lambda::rational(1, 2).unwrap())
    }

    #[test]
    fn k2_majority_single_switch() {
        let g = Graph::build(&[(0, 1)]).unwrap();
        let mut st = ProcessState::new(&g, ProcessKind::Majority, vec![BLACK, WHITE]).unwrap();
        assert!(is_switchable(&g, &st, &half(), 0));
        let eff = switch(&g, &mut st, &half(), 0).unwrap();
        assert_eq!(eff.removed, vec![(0, 1)]);
        assert!(eff.created.is_empty());
        assert_eq!(st.total_conflicts(), 0);
        assert!(!is_switchable(&g, &st, &half(), 1));
    }

    #[test]
    fn k2_minority_mirror() {
        let g = Graph::build(&[(0, 1)]).unwrap();
        let mut st = ProcessState::new(&g, ProcessKind::Minority, vec![BLACK, BLACK]).unwrap();
        switch(&g, &mut st, &half(), 0).unwrap();
        assert_eq!(st.total_conflicts(), 0);
    }

    #[test]
    fn non_switchable_rejected() {
        let g = Graph::build(&[(0, 1)]).unwrap();
        let mut st = ProcessState::new(&g, ProcessKind::Majority, vec![BLACK, BLACK]).unwrap();
        assert_eq!(switch(&g, &mut st, &half(), 0), Err(GraphError::NotSwitchable(0)));
    }

    #[test]
    fn five_cycle_decrease_matches_surplus() {
        let g = Graph::build(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let colors = vec![BLACK, WHITE, BLACK, WHITE, WHITE];
        let mut st = ProcessState::new(&g, ProcessKind::Majority, colors).unwrap();
        let rule = SwitchRule::Proportional(Lambda::float(0.3).unwrap());
        let v = st.switchable_nodes(&g, &rule)[0];
        let before = st.total_conflicts() as i64;
        let surplus = st.surplus(&g, v);
        switch(&g, &mut st, &rule, v).unwrap();
        assert_eq!(before - st.total_conflicts() as i64, surplus);
        assert_eq!(st.recount(&g), (0..5).map(|v| st.conflict_count(v) as u32).collect::<Vec<_>>());
    }
}
