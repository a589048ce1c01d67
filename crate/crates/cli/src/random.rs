//! Seeded random instances.

use propdyn_graph::{Color, Graph};
use rand::Rng;

/// `G(n, p)` without isolated-node cleanup.
pub fn gnp(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("simple graph")
}

pub fn coloring(n: usize, rng: &mut impl Rng) -> Vec<Color> {
    (0..n).map(|_| rng.gen_bool(0.5)).collect()
}
