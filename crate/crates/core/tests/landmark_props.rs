mod common;

use proptest::prelude::*;
use roadgnn::landmark::{respects_bound, select_landmarks, LandmarkIndex, Strategy};
use roadgnn::oracle::dijkstra;
use roadgnn::par::ExecMode;
use roadgnn::NodeId;

use common::arb_graph;

fn strategy() -> impl proptest::strategy::Strategy<Value = Strategy> {
    prop_oneof![Just(Strategy::Random), Just(Strategy::Farthest)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn estimates_upper_bound_exact(g in arb_graph(40), k in 1usize..6, strat in strategy(), seed in any::<u64>()) {
        let k = k.min(g.node_count());
        let idx = LandmarkIndex::build(&g, k, strat, seed, ExecMode::default()).unwrap();
        for s in g.nodes() {
            let exact = dijkstra(&g, s).unwrap().dist;
            for t in g.nodes() {
                prop_assert!(respects_bound(idx.estimate(s, t), exact[t.index()]));
            }
        }
        for &l in &idx.landmarks {
            prop_assert_eq!(idx.estimate(l, l), 0.0);
        }
    }

    #[test]
    fn adding_a_landmark_never_raises_estimates(g in arb_graph(30), seed in any::<u64>(), extra in any::<prop::sample::Index>()) {
        let n = g.node_count();
        let base = select_landmarks(&g, 1.max(n / 4), Strategy::Random, seed).unwrap();
        let mut more = base.clone();
        let e = NodeId::from(extra.index(n));
        if !more.contains(&e) {
            more.push(e);
        }
        let a = LandmarkIndex::from_landmarks(&g, base, Strategy::Random, seed, ExecMode::Sequential).unwrap();
        let b = LandmarkIndex::from_landmarks(&g, more, Strategy::Random, seed, ExecMode::Sequential).unwrap();
        for s in g.nodes() {
            for t in g.nodes() {
                prop_assert!(b.estimate(s, t) <= a.estimate(s, t));
            }
        }
    }

    #[test]
    fn selection_is_distinct_and_seeded(g in arb_graph(50), k in 1usize..10, strat in strategy(), seed in any::<u64>()) {
        let k = k.min(g.node_count());
        let a = select_landmarks(&g, k, strat, seed).unwrap();
        let mut sorted = a.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), k);
        prop_assert_eq!(select_landmarks(&g, k, strat, seed).unwrap(), a);
    }

    #[test]
    fn parallel_build_matches_sequential(g in arb_graph(50), seed in any::<u64>()) {
        let k = 3.min(g.node_count());
        let a = LandmarkIndex::build(&g, k, Strategy::Farthest, seed, ExecMode::Parallel).unwrap();
        let b = LandmarkIndex::build(&g, k, Strategy::Farthest, seed, ExecMode::Sequential).unwrap();
        prop_assert_eq!(a, b);
    }
}
