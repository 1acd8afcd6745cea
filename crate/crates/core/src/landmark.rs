//! Landmark distance oracle: `d(s, t) <= d(s, L) + d(L, t)` for every
//! landmark `L`, so the minimum over landmarks is an upper bound.

use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::oracle::{bfs_hops_dir, dijkstra_dir, write_ground_truth, Direction, SsspResult};
use crate::par::{self, ExecMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    #[default]
    Farthest,
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Strategy::Random),
            "farthest" => Ok(Strategy::Farthest),
            _ => Err(Error::Config(format!("unknown landmark strategy {s:?}"))),
        }
    }
}

/// Landmark count rule: 2% of `|V|` below 10k nodes, 0.5% from 10k up, at least one.
pub fn landmark_count(node_count: usize) -> usize {
    let frac = if node_count < 10_000 { 0.02 } else { 0.005 };
    ((frac * node_count as f64).round() as usize).clamp(1, node_count.max(1))
}

pub fn select_landmarks(graph: &Graph, count: usize, strategy: Strategy, seed: u64) -> Result<Vec<NodeId>> {
    let n = graph.node_count();
    if count == 0 || count > n {
        return Err(Error::Config(format!("landmark count {count} not in [1, {n}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match strategy {
        Strategy::Random => Ok(index::sample(&mut rng, n, count)
            .into_iter()
            .map(NodeId::from)
            .collect()),
        Strategy::Farthest => {
            let first = NodeId::from(rng.gen_range(0..n));
            let mut chosen = vec![first];
            let mut taken = vec![false; n];
            taken[first.index()] = true;
            let mut nearest = dijkstra_dir(graph, first, Direction::Forward)?.dist;
            while chosen.len() < count {
                // Unreachable nodes count as infinitely far; ties go to the smaller id.
                let next = (0..n)
                    .filter(|&v| !taken[v])
                    .fold(None::<usize>, |best, v| match best {
                        Some(b) if nearest[b] >= nearest[v] => Some(b),
                        _ => Some(v),
                    })
                    .expect("count <= n leaves a candidate");
                taken[next] = true;
                let id = NodeId::from(next);
                chosen.push(id);
                let d = dijkstra_dir(graph, id, Direction::Forward)?.dist;
                for (a, b) in nearest.iter_mut().zip(d) {
                    *a = a.min(b);
                }
            }
            Ok(chosen)
        }
    }
}

/// Relative rounding allowance for [`respects_bound`]: the two legs are
/// summed in a different order than a direct search sums the same path.
pub const BOUND_SLACK: f64 = 1e-12;

/// `estimate >= exact`, up to [`BOUND_SLACK`].
pub fn respects_bound(estimate: f64, exact: f64) -> bool {
    if exact.is_infinite() {
        return estimate >= exact;
    }
    estimate >= exact - BOUND_SLACK * exact.abs()
}

/// Exact distance tables from and to each landmark.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkIndex {
    pub landmarks: Vec<NodeId>,
    /// `dist_from[l][v]`: landmark `l` to `v` over out-edges.
    pub dist_from: Vec<Vec<f64>>,
    /// `dist_to[l][v]`: `v` to landmark `l`.
    pub dist_to: Vec<Vec<f64>>,
    pub strategy: Strategy,
    pub seed: u64,
}

impl LandmarkIndex {
    pub fn build(graph: &Graph, count: usize, strategy: Strategy, seed: u64, mode: ExecMode) -> Result<Self> {
        let landmarks = select_landmarks(graph, count, strategy, seed)?;
        Self::from_landmarks(graph, landmarks, strategy, seed, mode)
    }

    pub fn from_landmarks(
        graph: &Graph,
        landmarks: Vec<NodeId>,
        strategy: Strategy,
        seed: u64,
        mode: ExecMode,
    ) -> Result<Self> {
        if landmarks.is_empty() {
            return Err(Error::Empty("landmark set"));
        }
        let tables = par::try_map_slice(mode, &landmarks, |&l| {
            let from = dijkstra_dir(graph, l, Direction::Forward)?.dist;
            let to = dijkstra_dir(graph, l, Direction::Backward)?.dist;
            Ok::<_, Error>((from, to))
        })?;
        let (dist_from, dist_to) = tables.into_iter().unzip();
        Ok(LandmarkIndex {
            landmarks,
            dist_from,
            dist_to,
            strategy,
            seed,
        })
    }

    /// `min_L d(s, L) + d(L, t)`; infinite when no landmark links them.
    pub fn estimate(&self, s: NodeId, t: NodeId) -> f64 {
        self.dist_to
            .iter()
            .zip(&self.dist_from)
            .map(|(to, from)| to[s.index()] + from[t.index()])
            .fold(f64::INFINITY, f64::min)
    }

    /// Estimates from `s` to every node.
    pub fn estimate_all(&self, s: NodeId) -> Vec<f64> {
        let n = self.dist_from.first().map_or(0, Vec::len);
        let mut out = vec![f64::INFINITY; n];
        for (to, from) in self.dist_to.iter().zip(&self.dist_from) {
            let leg = to[s.index()];
            if !leg.is_finite() {
                continue;
            }
            for (o, d) in out.iter_mut().zip(from) {
                *o = o.min(leg + d);
            }
        }
        out
    }

    /// Ground-truth CSV blocks: per landmark a `forward` block (landmark to
    /// node) and a `backward` block (node to landmark, `pred` being the next
    /// hop toward the landmark), each preceded by a `# landmark` comment.
    pub fn write_csv(&self, graph: &Graph, w: &mut impl Write) -> Result<()> {
        writeln!(w, "{}", crate::oracle::GROUND_TRUTH_HEADER)?;
        for &l in &self.landmarks {
            for (dir, label) in [(Direction::Forward, "forward"), (Direction::Backward, "backward")] {
                writeln!(w, "# landmark {l} {label}")?;
                let r: SsspResult = dijkstra_dir(graph, l, dir)?;
                let hops = bfs_hops_dir(graph, l, dir)?;
                write_ground_truth(w, &r, &hops)?;
            }
        }
        Ok(())
    }

    /// Rebuilds the distance tables from [`LandmarkIndex::write_csv`] output.
    pub fn read_csv(r: impl BufRead, strategy: Strategy, seed: u64) -> Result<Self> {
        let mut landmarks = Vec::new();
        let mut dist_from: Vec<Vec<f64>> = Vec::new();
        let mut dist_to: Vec<Vec<f64>> = Vec::new();
        let mut forward = true;
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let perr = |m: &str| Error::Parse {
                path: "landmark csv".into(),
                line: i + 1,
                message: m.to_string(),
            };
            if i == 0 {
                if line != crate::oracle::GROUND_TRUTH_HEADER {
                    return Err(perr("missing header"));
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("# landmark ") {
                let mut parts = rest.split(' ');
                let id: u32 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| perr("bad landmark id"))?;
                forward = match parts.next() {
                    Some("forward") => {
                        landmarks.push(NodeId(id));
                        dist_from.push(Vec::new());
                        true
                    }
                    Some("backward") => {
                        dist_to.push(Vec::new());
                        false
                    }
                    _ => return Err(perr("bad block direction")),
                };
                continue;
            }
            let dist: f64 = line
                .split(',')
                .nth(2)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| perr("bad dist field"))?;
            let table = if forward { dist_from.last_mut() } else { dist_to.last_mut() };
            table.ok_or_else(|| perr("row outside a block"))?.push(dist);
        }
        if landmarks.is_empty() || dist_from.len() != dist_to.len() {
            return Err(Error::Empty("landmark blocks"));
        }
        Ok(LandmarkIndex {
            landmarks,
            dist_from,
            dist_to,
            strategy,
            seed,
        })
    }
}
