use dsp_core::graph::{dijkstra, Directedness, WeightDomain};
use dsp_core::harness::gen::{connected_graph, random_graph, random_weight};
use dsp_core::harness::{adversary_run, stats_check, RunConfig, RunVariant, Strategy};
use dsp_core::{Engine, EngineConfig, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[test]
fn approx_undirected_sweep() {
    let eps = 0.25;
    let bound = (1.0 + eps as f64).powi(3);
    let mut r = ChaCha8Rng::seed_from_u64(17);
    let g = connected_graph(50, 120, Directedness::Undirected, WeightDomain::Real, 16.0, &mut r);
    let mut engine = Engine::preprocess(g, EngineConfig::new(Variant::ApproxUndir).with_epsilon(eps)).unwrap();
    for q in 0..500 {
        if q % 5 == 0 {
            let u = r.gen_range(0..50);
            let v = (u + r.gen_range(1..50)) % 50;
            let c = if r.gen_bool(0.3) { f64::INFINITY } else { random_weight(WeightDomain::Real, 16.0, &mut r) };
            engine.update(u, v, c).unwrap();
        }
        let (s, t) = (r.gen_range(0..50), r.gen_range(0..50));
        let res = engine.query(s, t).unwrap();
        let truth = dijkstra(engine.graph(), s, Some(t)).distance(t);
        if truth.is_infinite() {
            assert!(!res.is_connected());
            continue;
        }
        assert_eq!(engine.graph().path_length(&res.vertices), Some(res.length), "query {q}");
        assert!(res.length >= truth && res.length <= bound * truth + 1e-9, "query {q}: {} vs {truth}", res.length);
    }
}

#[test]
fn exact_directed_ledger_passes() {
    let sizes = [25usize, 50, 100];
    sizes.par_iter().for_each(|&n| {
        for seed in 0..3u64 {
            let mut r = ChaCha8Rng::seed_from_u64(seed * 1000 + n as u64);
            let g = random_graph(n, 4 * n, Directedness::Directed, WeightDomain::Integer, 8.0, &mut r);
            let cfg = RunConfig::new(RunVariant::ExactDir).with_seed(seed);
            let report = adversary_run(g, &cfg, 60, Strategy::Random).unwrap();
            let ledger = stats_check(&report);
            assert!(report.passed() && ledger.passed(), "n={n} seed={seed}\n{ledger}");
        }
    });
}

fn mean_plausible(n: usize, seeds: u64) -> f64 {
    let totals: Vec<f64> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed + 77);
            let g = random_graph(n, 4 * n, Directedness::Directed, WeightDomain::Integer, 4.0, &mut r);
            let report = adversary_run(g, &RunConfig::new(RunVariant::ExactDir).with_seed(seed), 20, Strategy::Random)
                .unwrap();
            let vals: Vec<f64> = report.rows.iter().filter_map(|r| r.plausible).map(|p| p as f64).collect();
            vals.iter().sum::<f64>() / vals.len().max(1) as f64
        })
        .collect();
    totals.iter().sum::<f64>() / totals.len() as f64
}

// Σ|P_i| should grow roughly like n log n, so doubling n must not blow it up.
#[test]
fn plausible_growth_under_doubling() {
    let small = mean_plausible(50, 20);
    let large = mean_plausible(100, 20);
    assert!(large <= 2.5 * small.max(1.0), "Σ|P_i|: {small} at n=50, {large} at n=100");
}
