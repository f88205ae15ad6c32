use std::collections::VecDeque;

use dsp_core::harness::gen::gnp_unweighted;
use dsp_core::unweighted::{bfs, block_range, copy_graph, truncated_tree_edges, SpTree, UNREACHED};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn adj_bfs(adj: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut d = vec![UNREACHED; adj.len()];
    d[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if d[v] == UNREACHED {
                d[v] = d[u] + 1;
                q.push_back(v);
            }
        }
    }
    d
}

// Third-layer distance: cheapest route through a block vertex j adjacent to w,
// entering j's copy from any G-neighbour of j.
#[test]
fn copy_graph_distances_brute_force() {
    for seed in 0..60u64 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = r.gen_range(2..=20);
        let g = gnp_unweighted(n, r.gen_range(0.1..0.6), &mut r);
        let p = r.gen_range(1..=n);
        let dg: Vec<Vec<usize>> = (0..n).map(|s| bfs(&g, s, None)).collect();
        for block in 0..p {
            let adj = copy_graph(&g, p, block);
            for s in 0..n {
                let d = adj_bfs(&adj, s);
                for v in 0..n {
                    assert_eq!(d[v], dg[s][v]);
                }
                for w in 0..n {
                    let want = block_range(n, p, block)
                        .filter(|&j| g.has_edge(j, w))
                        .flat_map(|j| g.out_neighbors(j).iter().map(|&(i, _)| dg[s][i]))
                        .filter(|&x| x != UNREACHED)
                        .min()
                        .map_or(UNREACHED, |x| x + 2);
                    assert_eq!(d[2 * n + w], want, "seed {seed} block {block} s {s} w {w}");
                }
            }
        }
    }
}

#[test]
fn truncated_tree_is_exact_to_depth() {
    for seed in 0..80u64 {
        let mut r = ChaCha8Rng::seed_from_u64(seed + 500);
        let n = r.gen_range(2..=20);
        let g = gnp_unweighted(n, r.gen_range(0.05..0.5), &mut r);
        let p = r.gen_range(1..=n);
        let depth = r.gen_range(1..=6);
        let s = r.gen_range(0..n);
        let edges = truncated_tree_edges(&g, s, depth, p);
        let tree = SpTree::from_edges(n, s, &edges);
        assert!(tree.is_subgraph_of(&g));
        let d = bfs(&g, s, None);
        for v in 0..n {
            if d[v] <= depth {
                assert_eq!(tree.depth[v], d[v], "seed {seed} v {v}");
            }
        }
    }
}
