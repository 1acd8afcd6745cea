use proptest::prelude::*;
use roadgnn::oracle::{bfs_hops, Direction, bfs_hops_dir};
use roadgnn::synth::{generate, SynthConfig};
use roadgnn::NodeId;

fn arb_config() -> impl Strategy<Value = SynthConfig> {
    (2usize..20, 2usize..20, 0.0..0.3f64, 0.0..0.3f64, 0.0..1.0f64, 0.0..0.45f64, any::<u64>()).prop_map(
        |(rows, cols, node_drop_prob, edge_drop_prob, diagonal_prob, coord_jitter, seed)| SynthConfig {
            rows,
            cols,
            node_drop_prob,
            edge_drop_prob,
            diagonal_prob,
            coord_jitter,
            seed,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_graphs_are_connected_symmetric_road_networks(cfg in arb_config()) {
        let g = match generate(&cfg) {
            Ok(g) => g,
            // Heavy dropout on a tiny grid may leave too little to keep.
            Err(roadgnn::Error::ComponentTooSmall(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let reach = bfs_hops(&g, NodeId(0)).unwrap();
        prop_assert!(reach.iter().all(Option::is_some));
        let back = bfs_hops_dir(&g, NodeId(0), Direction::Backward).unwrap();
        prop_assert!(back.iter().all(Option::is_some));
        for e in g.edges() {
            prop_assert_eq!(g.edge_weight(e.to, e.from), Some(e.weight));
            let (a, b) = (g.coord(e.from), g.coord(e.to));
            let euclid = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            prop_assert!((e.weight - euclid).abs() <= 1e-12 * euclid);
        }
        prop_assert_eq!(generate(&cfg).unwrap(), g);
    }
}
