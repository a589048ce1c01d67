mod common;

use common::random_strict_cps;
use propdyn_cps::{
    canonicalize_dag, enumerate_dicuts, extract_cps, potential_report, validate, Cps, CpsEdge, Form,
};
use propdyn_graph::{Graph, Lambda, ProcessKind, ProcessState, SwitchRule};
use propdyn_sim::{run, Scheduler};
use propdyn_spectrum::{solve_spectrum, DEFAULT_TOL};
use proptest::prelude::*;

fn f_of(l: f64) -> f64 {
    solve_spectrum(l, DEFAULT_TOL).unwrap().f
}

#[test]
fn acyclic_input_is_a_fixed_point() {
    let cps = Cps::new(
        0.2,
        1,
        vec![4, 4, 4],
        vec![2.0, 3.0, 4.0],
        vec![CpsEdge { u: 0, v: 1, c: 1.0 }, CpsEdge { u: 1, v: 2, c: 2.0 }],
    )
    .unwrap();
    let dag = canonicalize_dag(&cps);
    assert_eq!(dag.cps, cps);
    assert_eq!(dag.order, vec![0, 1, 2]);
    assert_eq!(dag.cancelled, 0.0);
}

#[test]
fn two_cycle_is_cancelled() {
    let cps = Cps::new(
        0.2,
        1,
        vec![6, 6],
        vec![5.0, 5.0],
        vec![CpsEdge { u: 0, v: 1, c: 3.0 }, CpsEdge { u: 1, v: 0, c: 3.0 }],
    )
    .unwrap();
    let dag = canonicalize_dag(&cps);
    assert_eq!(dag.cps.real_edge_count(), 0);
    assert_eq!(dag.cancelled, 6.0);
    assert_eq!(dag.cps.total_s(), 10.0);
}

#[test]
fn overlapping_cycles() {
    // 0 -> 1 -> 2 -> 0 and 1 -> 0 share edges; everything but a remainder
    // on the heavier edges cancels.
    let edges = vec![
        CpsEdge { u: 0, v: 1, c: 5.0 },
        CpsEdge { u: 1, v: 2, c: 2.0 },
        CpsEdge { u: 2, v: 0, c: 4.0 },
        CpsEdge { u: 1, v: 0, c: 1.0 },
    ];
    let cps = Cps::new(0.2, 1, vec![9, 9, 9], vec![9.0; 3], edges).unwrap();
    let dag = canonicalize_dag(&cps);
    assert!(dag.is_topological());
    // Flow balance around each node changes by the same amount on both sides.
    for v in 0..3 {
        let before = cps.c_in(v) - cps.c_out(v);
        let after = dag.cps.c_in(v) - dag.cps.c_out(v);
        assert!((before - after).abs() < 1e-12);
    }
    assert_eq!(dag.cps.c(0, 1), 2.0);
    assert_eq!(dag.cps.c(2, 0), 2.0);
}

#[test]
fn base_inputs_are_removed() {
    let cps = Cps::new(
        0.2,
        3,
        vec![4, 4],
        vec![2.0, 1.0],
        vec![CpsEdge { u: 0, v: 1, c: 1.0 }],
    )
    .unwrap();
    let dag = canonicalize_dag(&cps);
    assert_eq!(dag.base_inputs_removed, 1.0);
    assert_eq!(dag.sources(), vec![0, 1]);
}

#[test]
fn single_node_margin_by_hand() {
    // Node 1 has degree 2, s = 5, one input c = 4 and one output c = 2; at
    // lambda = 1/5 condition 1R holds (4 >= 0.2*2*5 + 2 = 4).
    let edges = vec![CpsEdge { u: 0, v: 1, c: 4.0 }, CpsEdge { u: 1, v: 2, c: 2.0 }];
    let cps = Cps::new(0.2, 5, vec![4, 2, 1], vec![4.0, 5.0, 5.0], edges).unwrap();
    let dag = canonicalize_dag(&cps);
    assert!(validate(&dag.cps, Form::Relaxed).is_valid());
    let f = f_of(0.2);
    let rep = potential_report(&dag, f);
    let want = 4f64.powf(1.0 / f) - 2f64.powf(1.0 / f);
    assert!((rep.margin[1].unwrap() - want).abs() < 1e-9 * want);
    assert!(rep.margin[0].is_none(), "sources are skipped");
    assert!(rep.violations.is_empty());
    // |E| = 7/2 by degree sum, P(s0) = 5^(1/f).
    assert!((rep.trivial_bound - 3.5 * 5f64.powf(1.0 / f)).abs() < 1e-9);
}

#[test]
fn zero_waste_node_has_zero_margin() {
    // lambda = 1/3, phi* = 1/9, mu = 1/2: with s = 4 and degree 9, eight
    // inputs carry mu s = 2 each and the single output carries s = 4.
    let mut edges: Vec<CpsEdge> = (1..=8).map(|u| CpsEdge { u, v: 0, c: 2.0 }).collect();
    edges.push(CpsEdge { u: 0, v: 9, c: 4.0 });
    let mut s = vec![2.0; 10];
    s[0] = 4.0;
    s[9] = 4.0;
    let mut deg = vec![1; 10];
    deg[0] = 9;
    deg[9] = 12;
    let cps = Cps::new(1.0 / 3.0, 3, deg, s, edges).unwrap();
    let dag = canonicalize_dag(&cps);
    let rep = potential_report(&dag, f_of(1.0 / 3.0));
    assert!(rep.relative_margin(0).unwrap().abs() < 1e-6);
}

#[test]
fn single_edge_has_two_dipartitionings() {
    let cps = Cps::new(0.5, 2, vec![1, 1], vec![1.0, 2.0], vec![CpsEdge { u: 0, v: 1, c: 1.0 }])
        .unwrap();
    let dag = canonicalize_dag(&cps);
    let e = enumerate_dicuts(&dag, 0.5, 100);
    assert!(e.complete);
    assert_eq!(e.dicuts.len(), 2);
    assert_eq!(e.dicuts[0].v1, vec![0]);
    assert_eq!(e.dicuts[1].v1, vec![0, 1]);
    assert_eq!(e.dicuts[1].potential, 0.0);
    let short = enumerate_dicuts(&dag, 0.5, 1);
    assert!(!short.complete);
    assert_eq!(short.dicuts.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonicalized_traces_stay_valid(n in 3usize..25, seed in any::<u64>(), l in 1i64..10) {
        let mut rng_edges = Vec::new();
        let mut x = seed | 1;
        for u in 0..n {
            for v in u + 1..n {
                x ^= x << 13; x ^= x >> 7; x ^= x << 17;
                if x % 3 == 0 { rng_edges.push((u, v)); }
            }
        }
        let g = Graph::from_edges(n, &rng_edges).unwrap();
        let colors = (0..n).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
        let lam = l as f64 / 10.0;
        let rule = SwitchRule::Proportional(Lambda::rational(l, 10).unwrap());
        let st = ProcessState::new(&g, ProcessKind::Minority, colors).unwrap();
        let t = run(&g, &rule, st, &Scheduler::RandomSeeded(seed), 100_000).unwrap();
        let cps = extract_cps(&g, &t, lam, 3).unwrap();
        let dag = canonicalize_dag(&cps);
        prop_assert!(dag.is_topological());
        prop_assert_eq!(dag.cps.total_s(), cps.total_s());
        for (a, b) in cps.edges().iter().zip(dag.cps.edges()) {
            prop_assert!(b.c <= a.c);
        }
        for v in 0..n {
            if dag.cps.is_base(v) {
                prop_assert!(dag.cps.is_source(v));
            }
        }
        prop_assert!(dag.cps.total_c() <= cps.total_c());
        // Conditions 2 and 3 survive; relaxed 1R is not implied by slack 1.
        let rep = validate(&dag.cps, Form::Slack);
        prop_assert!(rep.check(propdyn_cps::Condition::OutputCap).unwrap().holds);
        prop_assert!(rep.check(propdyn_cps::Condition::EdgeCap).unwrap().holds);
    }

    #[test]
    fn injected_cycles_are_removed(seed in any::<u64>(), n in 4usize..14, extra in 0.01f64..1.0) {
        let base = random_strict_cps(seed, n, 0.25, 2);
        // Push `extra` around the cycle 0 -> 1 -> ... -> n-1 -> 0 with room
        // made by raising s, keeping conditions 2 and 3.
        let mut edges: Vec<CpsEdge> = base.edges().to_vec();
        let mut s = base.s.clone();
        for u in 0..n {
            let v = (u + 1) % n;
            s[u] += extra * 10.0;
            match edges.iter_mut().find(|e| e.u == u && e.v == v) {
                Some(e) => e.c += extra,
                None => edges.push(CpsEdge { u, v, c: extra }),
            }
        }
        let cps = Cps::new(0.25, 2, base.deg.clone(), s, edges).unwrap();
        let dag = canonicalize_dag(&cps);
        prop_assert!(dag.is_topological());
        prop_assert!(dag.cancelled > 0.0);
        prop_assert_eq!(dag.cps.total_s(), cps.total_s());
    }

    #[test]
    fn random_strict_cps_is_valid(seed in any::<u64>(), n in 2usize..40, l in 1i64..10) {
        let cps = random_strict_cps(seed, n, l as f64 / 10.0, 2);
        prop_assert!(validate(&cps, Form::Relaxed).is_valid());
        let dag = canonicalize_dag(&cps);
        prop_assert_eq!(&dag.cps, &cps);
    }

    #[test]
    fn potential_never_grows_through_strict_nodes(seed in any::<u64>(), n in 2usize..40, l in 1i64..10) {
        let lam = l as f64 / 10.0;
        let dag = canonicalize_dag(&random_strict_cps(seed, n, lam, 2));
        let rep = potential_report(&dag, f_of(lam));
        prop_assert!(rep.violations.is_empty(), "{:?}", rep.violations);
    }

    #[test]
    fn trivial_dicut_dominates(seed in any::<u64>(), n in 2usize..15, l in 1i64..10) {
        let lam = l as f64 / 10.0;
        let dag = canonicalize_dag(&random_strict_cps(seed, n, lam, 2));
        let f = f_of(lam);
        let e = enumerate_dicuts(&dag, f, 50_000);
        prop_assert!(e.complete);
        prop_assert!(e.bounded_by_trivial);
        prop_assert!(e.source_edges_within_s0);
        let rep = potential_report(&dag, f);
        prop_assert!((rep.trivial_dicut - e.trivial_potential).abs() <= 1e-9 * (1.0 + rep.trivial_dicut));
        prop_assert!(rep.trivial_dicut <= rep.trivial_bound);
    }

    #[test]
    fn potential_inequality_holds_on_strict_nodes(
        l in 0.01f64..0.99,
        deg in 2u64..60,
        s in 1.0f64..50.0,
        outs in proptest::collection::vec(0.0f64..1.0, 1..20),
        ins in proptest::collection::vec(0.01f64..1.0, 1..20),
    ) {
        // Scale outputs to respect conditions 2 and 3, inputs to meet 1R
        // exactly; then the balance must be non-negative.
        let k_out = outs.len().min(deg as usize - 1);
        let outs: Vec<f64> = outs[..k_out].iter().map(|x| x * s).collect();
        let cap = (1.0 - l) / 2.0 * deg as f64 * s;
        let total: f64 = outs.iter().sum();
        let outs: Vec<f64> = if total > cap { outs.iter().map(|x| x * cap / total).collect() } else { outs };
        let k_in = ins.len().min(deg as usize - k_out);
        let need = l * deg as f64 * s + outs.iter().sum::<f64>();
        let isum: f64 = ins[..k_in].iter().sum();
        let ins: Vec<f64> = ins[..k_in].iter().map(|x| x * need / isum).collect();
        let f = f_of(l);
        let p = |c: f64| c.powf(1.0 / f);
        let pin: f64 = ins.iter().map(|&c| p(c)).sum();
        let pout: f64 = outs.iter().map(|&c| p(c)).sum();
        prop_assert!(pout <= pin * (1.0 + 1e-9), "in {pin} out {pout}");
    }
}
