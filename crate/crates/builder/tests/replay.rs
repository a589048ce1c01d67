use propdyn_builder::{plan, predict_events, realize, BuildError, PlanConfig, PlanMode, Prediction, RelayMode};
use propdyn_graph::{Lambda, ProcessKind};
use propdyn_sim::{fit_growth_exponent, Observer};
use proptest::prelude::*;

#[derive(Default)]
struct Counter(Vec<u64>);

impl Observer for Counter {
    fn on_switch(&mut self, _step: u64, node: usize) {
        if self.0.len() <= node {
            self.0.resize(node + 1, 0);
        }
        self.0[node] += 1;
    }
}

fn lambda(a: i64, b: i64) -> Lambda {
    Lambda::rational(a, b).unwrap()
}

fn config(levels: usize) -> PlanConfig {
    PlanConfig { levels: Some(levels), ..Default::default() }
}

/// Replays the plan and returns per-type switch totals counted node by node.
fn replayed(l: Lambda, levels: usize, kind: ProcessKind) -> (Prediction, Vec<u64>) {
    let p = plan(l, u64::MAX, &config(levels)).unwrap();
    let r = realize(&p, kind).unwrap();
    let mut counter = Counter::default();
    let (summary, _) = r.replay(&mut counter).unwrap();
    assert_eq!(summary.steps, p.predicted.total);
    let mut per_type = vec![0u64; p.types.types.len()];
    for (v, &c) in counter.0.iter().enumerate() {
        per_type[r.type_of(v)] += c;
    }
    (p.predicted, per_type)
}

#[test]
fn one_third_doubles_per_level() {
    for levels in 2..=4 {
        let (pred, per_type) = replayed(lambda(1, 3), levels, ProcessKind::Majority);
        assert_eq!(pred.type_switches, per_type);
        let want: Vec<f64> = (0..levels).map(|l| 2f64.powi(l as i32 + 1)).collect();
        assert_eq!(pred.per_level_mean, want);
    }
}

#[test]
fn minority_mirror_replays_identically() {
    let (maj, _) = replayed(lambda(1, 3), 3, ProcessKind::Majority);
    let (min, per_type) = replayed(lambda(1, 3), 3, ProcessKind::Minority);
    assert_eq!(maj, min);
    assert_eq!(min.type_switches, per_type);
}

#[test]
fn one_third_sizes_and_exponent() {
    let sizes: Vec<(u64, u64)> = (2..=4)
        .map(|l| {
            let p = plan(lambda(1, 3), u64::MAX, &config(l)).unwrap();
            (p.node_count(), p.predicted.total)
        })
        .collect();
    assert_eq!(sizes, vec![(144, 256), (1408, 4096), (13312, 65536)]);
    let pts: Vec<(f64, f64)> = sizes.iter().map(|&(n, t)| (n as f64, t as f64)).collect();
    let (slope, _) = fit_growth_exponent(&pts).unwrap();
    assert!(slope >= 1.2, "slope {slope}");
}

#[test]
fn one_fifth_replays_exactly() {
    let (pred, per_type) = replayed(lambda(1, 5), 3, ProcessKind::Majority);
    assert_eq!(pred.type_switches, per_type);
    // Rate 4/10: every level multiplies the mean by 10/4.
    assert_eq!(pred.growth(), vec![2.5, 2.5]);
}

#[test]
fn relay_plan_replays_exactly() {
    let p = plan(lambda(1, 2), u64::MAX, &config(2)).unwrap();
    assert_eq!(p.mode, PlanMode::Relay);
    assert!(p.fallback);
    let (pred, per_type) = replayed(lambda(1, 2), 2, ProcessKind::Majority);
    assert_eq!(pred.type_switches, per_type);
    let g = pred.deepest_growth().unwrap();
    assert!((g / p.ideal_growth - 1.0).abs() <= 0.05, "growth {g} vs {}", p.ideal_growth);
}

#[test]
fn contradictory_rate_without_relays_is_unsupported() {
    let cfg = PlanConfig { relay: RelayMode::Never, max_q: 9, ..config(2) };
    match plan(lambda(7, 10), u64::MAX, &cfg) {
        Err(BuildError::Unsupported { p, q, .. }) => assert_eq!((p, q), (6, 8)),
        other => panic!("expected Unsupported, got {other:?}"),
    }
}

#[test]
fn target_picks_largest_fitting_construction() {
    let p = plan(lambda(1, 3), 5000, &PlanConfig::default()).unwrap();
    assert_eq!(p.level_count(), 3);
    assert!(matches!(plan(lambda(1, 3), 100, &PlanConfig::default()), Err(BuildError::TooSmall { .. })));
    assert!(matches!(plan(Lambda::float(0.3).unwrap(), 5000, &PlanConfig::default()), Err(BuildError::InexactLambda(_))));
}

#[test]
fn plan_json_round_trip() {
    let p = plan(lambda(1, 3), u64::MAX, &config(3)).unwrap();
    let back = propdyn_builder::ConstructionPlan::from_json(&p.to_json().unwrap()).unwrap();
    assert_eq!(p, back);
    assert_eq!(predict_events(&back.types, &back.events), p.predicted);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn small_plans_replay_as_predicted(b in 3i64..12, a_frac in 0.1f64..0.9) {
        let a = ((b as f64 * a_frac).round() as i64).clamp(1, b - 1);
        let cfg = PlanConfig { max_edges: 1_500_000, ..config(2) };
        let l = lambda(a, b);
        match plan(l, u64::MAX, &cfg) {
            Ok(p) => {
                let r = realize(&p, ProcessKind::Majority).unwrap();
                let mut counter = Counter::default();
                let (summary, _) = r.replay(&mut counter).unwrap();
                prop_assert_eq!(summary.steps, p.predicted.total);
                let mut per_type = vec![0u64; p.types.types.len()];
                for (v, &c) in counter.0.iter().enumerate() {
                    per_type[r.type_of(v)] += c;
                }
                prop_assert_eq!(&per_type, &p.predicted.type_switches);
                prop_assert!(p.predicted.total > 0);
            }
            Err(BuildError::TooSmall { .. }) | Err(BuildError::Gadget(_)) => {}
            Err(e) => prop_assert!(false, "lambda {}/{}: {}", a, b, e),
        }
    }
}
