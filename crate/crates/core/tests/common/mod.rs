#![allow(dead_code)]

use proptest::prelude::*;
use roadgnn::{Edge, Graph};

/// Arbitrary directed graph with up to `max_n` nodes and about three
/// out-edges per node, possibly disconnected, with parallel edges allowed.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let coords = prop::collection::vec((0.0..100.0f64, 0.0..100.0f64), n);
        let edges = prop::collection::vec((0..n, 0..n, 0.01..50.0f64), 0..=3 * n);
        (coords, edges).prop_map(|(coords, edges)| {
            let edges = edges
                .into_iter()
                .filter(|(a, b, _)| a != b)
                .map(|(a, b, w)| Edge::new(a, b, w))
                .collect();
            Graph::from_coords(coords.into_iter().map(|(x, y)| [x, y]).collect(), edges).unwrap()
        })
    })
}

/// Strongly connected graph: a bidirectional ring plus random chords.
pub fn arb_connected(max_n: usize) -> impl Strategy<Value = Graph> {
    (3..=max_n).prop_flat_map(|n| {
        let coords = prop::collection::vec((0.0..100.0f64, 0.0..100.0f64), n);
        let ring = prop::collection::vec(0.01..20.0f64, n);
        let chords = prop::collection::vec((0..n, 0..n, 0.01..20.0f64), 0..=n);
        (coords, ring, chords).prop_map(move |(coords, ring, chords)| {
            let mut links: Vec<Edge> = ring.iter().enumerate().map(|(i, &w)| Edge::new(i, (i + 1) % n, w)).collect();
            links.extend(chords.into_iter().filter(|(a, b, _)| a != b).map(|(a, b, w)| Edge::new(a, b, w)));
            Graph::from_undirected(coords.into_iter().map(|(x, y)| [x, y]).collect(), &links).unwrap()
        })
    })
}
