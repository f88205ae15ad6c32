//! Random graph generators for tests, benchmarks and the adversary.
//!
//! Real weights are drawn on a `2^-10` grid so that path sums of up to a
//! few thousand edges are exact in `f64` and length comparisons need no
//! tolerance.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Directedness, DynamicGraph, WeightDomain};

const GRID: f64 = 1024.0;

/// A weight in `[1, W]`: uniform integers, or reals on the `2^-10` grid.
pub fn random_weight<R: Rng>(domain: WeightDomain, max_weight: f64, rng: &mut R) -> f64 {
    match domain {
        WeightDomain::Integer => rng.gen_range(1..=max_weight as u64) as f64,
        WeightDomain::Real => {
            let steps = ((max_weight - 1.0) * GRID) as u64;
            1.0 + rng.gen_range(0..=steps) as f64 / GRID
        }
    }
}

/// `m` distinct random edges (no self-loops) with random weights.
pub fn random_graph<R: Rng>(
    n: usize,
    m: usize,
    directedness: Directedness,
    domain: WeightDomain,
    max_weight: f64,
    rng: &mut R,
) -> DynamicGraph {
    let mut g = DynamicGraph::new(n, directedness, domain, max_weight).expect("valid parameters");
    fill_random(&mut g, m, rng);
    g
}

fn fill_random<R: Rng>(g: &mut DynamicGraph, m: usize, rng: &mut R) {
    let n = g.vertex_count();
    let slots = match g.directedness() {
        Directedness::Directed => n * n.saturating_sub(1),
        Directedness::Undirected => n * n.saturating_sub(1) / 2,
    };
    while g.edge_count() < m.min(slots) {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v || g.has_edge(u, v) {
            continue;
        }
        let w = random_weight(g.domain(), g.max_weight(), rng);
        g.set_edge(u, v, w).expect("in domain");
    }
}

/// A random spanning tree plus random extra edges up to `m` edges.
pub fn connected_graph<R: Rng>(
    n: usize,
    m: usize,
    directedness: Directedness,
    domain: WeightDomain,
    max_weight: f64,
    rng: &mut R,
) -> DynamicGraph {
    let mut g = DynamicGraph::new(n, directedness, domain, max_weight).expect("valid parameters");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        let w = random_weight(domain, max_weight, rng);
        g.set_edge(parent, order[i], w).expect("in domain");
    }
    fill_random(&mut g, m, rng);
    g
}

/// `G(n, p)` with unit weights.
pub fn gnp_unweighted<R: Rng>(n: usize, p: f64, rng: &mut R) -> DynamicGraph {
    let mut g = DynamicGraph::new(n, Directedness::Undirected, WeightDomain::Integer, 1.0).expect("valid parameters");
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.set_edge(u, v, 1.0).expect("unit edge");
            }
        }
    }
    g
}

/// `G(n, p)` plus a random spanning tree.
pub fn connected_unweighted<R: Rng>(n: usize, p: f64, rng: &mut R) -> DynamicGraph {
    let mut g = gnp_unweighted(n, p, rng);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        g.set_edge(parent, order[i], 1.0).expect("unit edge");
    }
    g
}
