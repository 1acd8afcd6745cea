mod common;

use proptest::prelude::*;
use roadgnn::backend::Exact;
use roadgnn::hazard::{apply_scenario, delay_ratios, summarize, FloodScenario};
use roadgnn::oracle::dijkstra;
use roadgnn::par::ExecMode;
use roadgnn::{Graph, NodeId};

use common::{arb_connected, arb_graph};

fn scaled(g: &Graph, k: f64) -> Graph {
    let w: Vec<f64> = g.edges().iter().map(|e| e.weight * k).collect();
    g.with_weights(&w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn delta_within_speed_bounds(
        g in arb_connected(60),
        flags in prop::collection::vec(any::<bool>(), 60),
        sf in 0.1..=1.0f64,
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..4),
    ) {
        let n = g.node_count();
        let shelters: Vec<NodeId> = picks.iter().map(|p| NodeId::from(p.index(n))).collect();
        let scenario = FloodScenario::new(flags[..n].to_vec(), sf, "p").unwrap();
        let after = apply_scenario(&g, &scenario).unwrap();
        let r = delay_ratios(&g, &after, &shelters, &Exact, ExecMode::default()).unwrap();
        for d in r.defined() {
            prop_assert!(d >= 1.0);
            prop_assert!(d <= (1.0 / sf) * (1.0 + 1e-12), "{} > {}", d, 1.0 / sf);
        }
        let s = summarize(&r, sf).unwrap();
        prop_assert_eq!(s.counts.iter().sum::<usize>(), s.count);
        prop_assert_eq!(s.count, r.defined().count());
    }

    #[test]
    fn delta_ignores_uniform_rescaling(
        g in arb_connected(40),
        flags in prop::collection::vec(any::<bool>(), 40),
        k in 0.01..100.0f64,
        pick in any::<prop::sample::Index>(),
    ) {
        let n = g.node_count();
        let shelters = [NodeId::from(pick.index(n))];
        let scenario = FloodScenario::new(flags[..n].to_vec(), 1.0 / 3.0, "p").unwrap();
        let a = delay_ratios(&g, &apply_scenario(&g, &scenario).unwrap(), &shelters, &Exact, ExecMode::Sequential).unwrap();
        let h = scaled(&g, k);
        let b = delay_ratios(&h, &apply_scenario(&h, &scenario).unwrap(), &shelters, &Exact, ExecMode::Sequential).unwrap();
        for (x, y) in a.delta.iter().zip(&b.delta) {
            match (x, y) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-9 * x),
                (None, None) => {}
                _ => prop_assert!(false, "definedness changed"),
            }
        }
    }

    #[test]
    fn reverse_search_matches_per_node_forward(
        g in arb_graph(25),
        flags in prop::collection::vec(any::<bool>(), 25),
        pick in any::<prop::sample::Index>(),
    ) {
        let n = g.node_count();
        let shelter = NodeId::from(pick.index(n));
        let scenario = FloodScenario::new(flags[..n].to_vec(), 1.0 / 3.0, "p").unwrap();
        let after = apply_scenario(&g, &scenario).unwrap();
        let r = delay_ratios(&g, &after, &[shelter], &Exact, ExecMode::Sequential).unwrap();
        let sd = &r.shelters[0];
        for v in g.nodes() {
            let tb = dijkstra(&g, v).unwrap().dist[shelter.index()];
            let ta = dijkstra(&after, v).unwrap().dist[shelter.index()];
            prop_assert!((sd.before[v.index()] - tb).abs() <= 1e-9 * tb.max(1.0) || sd.before[v.index()] == tb);
            prop_assert!((sd.after[v.index()] - ta).abs() <= 1e-9 * ta.max(1.0) || sd.after[v.index()] == ta);
        }
    }

    #[test]
    fn dry_scenario_gives_unit_delta(g in arb_graph(40), pick in any::<prop::sample::Index>()) {
        let n = g.node_count();
        let after = apply_scenario(&g, &FloodScenario::dry(n)).unwrap();
        let r = delay_ratios(&g, &after, &[NodeId::from(pick.index(n))], &Exact, ExecMode::default()).unwrap();
        prop_assert!(r.defined().all(|d| d == 1.0));
    }
}
