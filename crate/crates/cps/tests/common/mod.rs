#![allow(dead_code)]

use propdyn_cps::{Cps, CpsEdge};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random relaxed-valid CPS in DAG form over nodes `0..n` (index order is
/// topological). Non-base nodes are paid for by inputs from earlier nodes;
/// base nodes are sources with enough degree to fill their output slots.
pub fn random_strict_cps(seed: u64, n: usize, lambda: f64, s0: u64) -> Cps {
    generate(&mut ChaCha8Rng::seed_from_u64(seed), n, lambda, s0)
}

pub fn generate(rng: &mut impl Rng, n: usize, lambda: f64, s0: u64) -> Cps {
    let s0f = s0 as f64;
    let mut deg = vec![0u64; n];
    let mut s = vec![0.0f64; n];
    // Remaining output budget (condition 2) and output edges still allowed.
    let mut budget = vec![0.0f64; n];
    let mut slots = vec![0usize; n];
    let mut edges = Vec::new();
    for v in 0..n {
        let mut incoming = Vec::new();
        for u in 0..v {
            if slots[u] > 0 && budget[u] > 1e-9 && rng.gen_bool(0.8) {
                incoming.push((u, rng.gen_range(0.9..=1.0) * s[u].min(budget[u])));
            }
        }
        let kout = rng.gen_range(0..=3usize);
        let pad = rng.gen_range(0..=1usize);
        let cin: f64 = incoming.iter().map(|x| x.1).sum();
        let d = (incoming.len() + kout + pad).max(1) as f64;
        // Largest s payable with full outputs, scaled down a little.
        let sv = rng.gen_range(0.9..=1.0) * cin / ((1.0 + lambda) / 2.0 * d);
        if sv >= s0f {
            for &(u, c) in &incoming {
                budget[u] -= c;
                slots[u] -= 1;
                edges.push(CpsEdge { u, v, c });
            }
            deg[v] = d as u64;
            s[v] = sv;
            budget[v] = ((1.0 - lambda) / 2.0 * d * sv).min(cin - lambda * d * sv);
        } else {
            let room = (2.0 * kout as f64 / (1.0 - lambda)).ceil() as usize;
            deg[v] = (kout + pad + room).max(1) as u64;
            s[v] = rng.gen_range(0.8..1.0) * s0f;
            budget[v] = (1.0 - lambda) / 2.0 * deg[v] as f64 * s[v];
        }
        slots[v] = kout;
    }
    Cps::new(lambda, s0, deg, s, edges).unwrap()
}
