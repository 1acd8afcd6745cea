//! Exact single-source shortest distances, predecessors and hop counts.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::io::Write;

use crate::error::Result;
use crate::graph::{Graph, NodeId};

/// Which adjacency a search follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Out-edges: distances from the source.
    Forward,
    /// In-edges: distances to the source.
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsspResult {
    pub source: NodeId,
    /// `f64::INFINITY` where unreachable.
    pub dist: Vec<f64>,
    /// Previous node on the search tree (next node toward the source for
    /// backward searches).
    pub pred: Vec<Option<NodeId>>,
}

impl SsspResult {
    pub fn is_reachable(&self, v: NodeId) -> bool {
        self.dist[v.index()].is_finite()
    }

    /// Node sequence from the source to `t` along the tree, if reachable.
    pub fn path_to(&self, t: NodeId) -> Option<Vec<NodeId>> {
        if !self.is_reachable(t) {
            return None;
        }
        let mut path = vec![t];
        let mut cur = t;
        while let Some(p) = self.pred[cur.index()] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct QueueEntry {
    dist: f64,
    node: NodeId,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    // Reversed so BinaryHeap pops the smallest distance, then the smallest id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn dijkstra(graph: &Graph, source: NodeId) -> Result<SsspResult> {
    dijkstra_dir(graph, source, Direction::Forward)
}

/// Binary-heap Dijkstra with lazy deletion.
pub fn dijkstra_dir(graph: &Graph, source: NodeId, dir: Direction) -> Result<SsspResult> {
    graph.check_node(source)?;
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source.index()] = 0.0;
    heap.push(QueueEntry {
        dist: 0.0,
        node: source,
    });

    let mut relax = |u: NodeId, v: NodeId, w: f64, du: f64, heap: &mut BinaryHeap<QueueEntry>| {
        let nd = du + w;
        if nd < dist[v.index()] {
            dist[v.index()] = nd;
            pred[v.index()] = Some(u);
            heap.push(QueueEntry { dist: nd, node: v });
        }
    };
    while let Some(QueueEntry { dist: du, node: u }) = heap.pop() {
        if done[u.index()] {
            continue;
        }
        done[u.index()] = true;
        match dir {
            Direction::Forward => {
                for e in graph.out_edges(u) {
                    relax(u, e.to, e.weight, du, &mut heap);
                }
            }
            Direction::Backward => {
                for e in graph.in_edges(u) {
                    relax(u, e.from, e.weight, du, &mut heap);
                }
            }
        }
    }
    Ok(SsspResult { source, dist, pred })
}

/// Minimum edge counts from `source` over out-edges; `None` if unreachable.
pub fn bfs_hops(graph: &Graph, source: NodeId) -> Result<Vec<Option<u32>>> {
    bfs_hops_dir(graph, source, Direction::Forward)
}

pub fn bfs_hops_dir(graph: &Graph, source: NodeId, dir: Direction) -> Result<Vec<Option<u32>>> {
    graph.check_node(source)?;
    let mut hops = vec![None; graph.node_count()];
    hops[source.index()] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let h = hops[u.index()].expect("queued nodes are labelled") + 1;
        let mut visit = |v: NodeId| {
            if hops[v.index()].is_none() {
                hops[v.index()] = Some(h);
                queue.push_back(v);
            }
        };
        match dir {
            Direction::Forward => graph.out_edges(u).iter().for_each(|e| visit(e.to)),
            Direction::Backward => graph.in_edges(u).for_each(|e| visit(e.from)),
        }
    }
    Ok(hops)
}

/// Edge-relaxation rounds until a fixed point; used as an independent check
/// on [`dijkstra`].
pub fn bellman_ford(graph: &Graph, source: NodeId) -> Result<SsspResult> {
    graph.check_node(source)?;
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    dist[source.index()] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for e in graph.edges() {
            let du = dist[e.from.index()];
            if du.is_finite() && du + e.weight < dist[e.to.index()] {
                dist[e.to.index()] = du + e.weight;
                pred[e.to.index()] = Some(e.from);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(SsspResult { source, dist, pred })
}

pub const GROUND_TRUTH_HEADER: &str = "source,node,dist,pred,hops";

/// Writes ground-truth rows `source,node,dist,pred,hops`. Distances keep
/// full precision; unreachable entries are `inf` with empty pred and hops.
pub fn write_ground_truth(
    w: &mut impl Write,
    result: &SsspResult,
    hops: &[Option<u32>],
) -> std::io::Result<()> {
    for (v, (&d, p)) in result.dist.iter().zip(&result.pred).enumerate() {
        let p = p.map(|p| p.to_string()).unwrap_or_default();
        let h = hops[v].map(|h| h.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{}", result.source, v, d, p, h)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::Error;

    fn path_graph() -> Graph {
        Graph::from_coords(
            vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            vec![Edge::new(0usize, 1usize, 2.0), Edge::new(1usize, 2usize, 3.0)],
        )
        .unwrap()
    }

    #[test]
    fn single_node() {
        let g = Graph::from_coords(vec![[0.0, 0.0]], vec![]).unwrap();
        let r = dijkstra(&g, NodeId(0)).unwrap();
        assert_eq!(r.dist, vec![0.0]);
        assert_eq!(r.pred, vec![None]);
    }

    #[test]
    fn path_sums() {
        let g = path_graph();
        let r = dijkstra(&g, NodeId(0)).unwrap();
        assert_eq!(r.dist, vec![0.0, 2.0, 5.0]);
        assert_eq!(r.path_to(NodeId(2)).unwrap(), vec![NodeId(0), NodeId(1), NodeId(2)]);
        assert_eq!(bellman_ford(&g, NodeId(0)).unwrap().dist, r.dist);
        assert_eq!(
            bfs_hops(&g, NodeId(0)).unwrap(),
            vec![Some(0), Some(1), Some(2)]
        );
        let back = dijkstra_dir(&g, NodeId(2), Direction::Backward).unwrap();
        assert_eq!(back.dist, vec![5.0, 3.0, 0.0]);
        let from_end = dijkstra(&g, NodeId(2)).unwrap();
        assert!(!from_end.is_reachable(NodeId(0)));
        assert_eq!(from_end.pred[0], None);
    }

    #[test]
    fn out_of_range_source() {
        let g = path_graph();
        assert!(matches!(dijkstra(&g, NodeId(3)), Err(Error::NodeOutOfRange(_))));
        assert!(bfs_hops(&g, NodeId(9)).is_err());
        assert!(bellman_ford(&g, NodeId(9)).is_err());
    }

    #[test]
    fn ties_prefer_smaller_ids() {
        // 0 -> {1, 2} -> 3 with equal lengths: 3 is reached through node 1.
        let g = Graph::from_coords(
            vec![[0.0; 2]; 4],
            vec![
                Edge::new(0usize, 2usize, 1.0),
                Edge::new(0usize, 1usize, 1.0),
                Edge::new(2usize, 3usize, 1.0),
                Edge::new(1usize, 3usize, 1.0),
            ],
        )
        .unwrap();
        let r = dijkstra(&g, NodeId(0)).unwrap();
        assert_eq!(r.pred[3], Some(NodeId(1)));
    }

    #[test]
    fn csv_rows() {
        let g = path_graph();
        let r = dijkstra(&g, NodeId(1)).unwrap();
        let hops = bfs_hops(&g, NodeId(1)).unwrap();
        let mut out = Vec::new();
        write_ground_truth(&mut out, &r, &hops).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "1,0,inf,,\n1,1,0,,0\n1,2,3,1,1\n"
        );
    }
}
