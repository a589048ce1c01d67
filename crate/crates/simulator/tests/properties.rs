use propdyn_graph::{Graph, Lambda, ProcessKind, ProcessState, SwitchRule};
use propdyn_sim::{max_stabilization_time, run, run_observed, Observer, Scheduler};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (Graph, Vec<bool>, ProcessKind, SwitchRule)> {
    (3usize..=9)
        .prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            (
                proptest::sample::subsequence(pairs.clone(), 0..=pairs.len()),
                proptest::collection::vec(any::<bool>(), n),
                any::<bool>(),
                1i64..10,
            )
        })
        .prop_map(|(edges, colors, minority, l)| {
            let n = colors.len();
            let g = Graph::from_edges(n, &edges).unwrap();
            let kind = if minority { ProcessKind::Minority } else { ProcessKind::Majority };
            (g, colors, kind, SwitchRule::Proportional(Lambda::rational(l, 10).unwrap()))
        })
}

fn heuristics(seed: u64) -> [Scheduler; 3] {
    [Scheduler::GreedyMaxMargin, Scheduler::GreedyMinDegree, Scheduler::RandomSeeded(seed)]
}

struct Counter {
    switches: u64,
    created: u64,
    removed: u64,
}

impl Observer for Counter {
    fn on_switch(&mut self, _: u64, _: usize) {
        self.switches += 1;
    }
    fn on_edge(&mut self, _: usize, created: bool) {
        if created {
            self.created += 1;
        } else {
            self.removed += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn traces_are_bounded_and_replayable((g, colors, kind, r) in instance(), seed in any::<u64>()) {
        let st = ProcessState::new(&g, kind, colors).unwrap();
        let initial_conflicts = st.total_conflicts();
        prop_assert!(initial_conflicts <= g.edge_count() as u64);
        for s in heuristics(seed) {
            let t = run(&g, &r, st.clone(), &s, 10_000).unwrap();
            prop_assert!(t.stabilized);
            prop_assert_eq!(t.total_steps, t.events.len() as u64);
            prop_assert!(t.total_steps <= initial_conflicts);
            prop_assert_eq!(t.replay(&g, &r).unwrap(), t.final_coloring.clone());
            // Each step strictly lowers the number of conflicts.
            for ev in &t.events {
                prop_assert!(ev.removed.len() > ev.created.len());
            }
        }
    }

    #[test]
    fn runs_are_deterministic((g, colors, kind, r) in instance(), seed in any::<u64>()) {
        let st = ProcessState::new(&g, kind, colors).unwrap();
        for s in heuristics(seed) {
            let a = run(&g, &r, st.clone(), &s, 10_000).unwrap();
            let b = run(&g, &r, st.clone(), &s, 10_000).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn oracle_dominates_heuristics((g, colors, kind, r) in instance(), seed in any::<u64>()) {
        let st = ProcessState::new(&g, kind, colors).unwrap();
        let (opt, witness) = max_stabilization_time(&g, &r, &st, 200_000).unwrap();
        prop_assert!(opt <= st.total_conflicts());
        prop_assert_eq!(witness.len() as u64, opt);
        for s in heuristics(seed) {
            let t = run(&g, &r, st.clone(), &s, 10_000).unwrap();
            prop_assert!(t.total_steps <= opt);
        }
    }

    #[test]
    fn observer_sees_the_same_run((g, colors, kind, r) in instance(), seed in any::<u64>()) {
        let st = ProcessState::new(&g, kind, colors).unwrap();
        let t = run(&g, &r, st.clone(), &Scheduler::RandomSeeded(seed), 10_000).unwrap();
        let mut live = st.clone();
        let mut c = Counter { switches: 0, created: 0, removed: 0 };
        let sum = run_observed(&g, &r, &mut live, &Scheduler::RandomSeeded(seed), 10_000, &mut c).unwrap();
        prop_assert_eq!(sum.steps, t.total_steps);
        prop_assert_eq!(c.switches, t.total_steps);
        prop_assert_eq!(c.created, t.events.iter().map(|e| e.created.len() as u64).sum::<u64>());
        prop_assert_eq!(c.removed, t.events.iter().map(|e| e.removed.len() as u64).sum::<u64>());
        prop_assert_eq!(live.total_conflicts() + c.removed - c.created, st.total_conflicts());
        prop_assert_eq!(live.colors(), &t.final_coloring[..]);
    }
}
