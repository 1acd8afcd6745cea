//! Randomized grid road networks: jittered grid points, axis-aligned links,
//! occasional cell hypotenuses, then random node and link removal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

/// Graph-size presets, in nodes after dropout.
pub const PRESETS: [(&str, usize); 8] = [
    ("1k", 1_000),
    ("2k", 2_000),
    ("3k", 3_000),
    ("4k", 4_000),
    ("10k", 10_000),
    ("20k", 20_000),
    ("50k", 50_000),
    ("100k", 100_000),
];

const PRESET_DROP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub rows: usize,
    pub cols: usize,
    pub node_drop_prob: f64,
    pub edge_drop_prob: f64,
    pub diagonal_prob: f64,
    /// Per-axis jitter amplitude as a fraction of the unit cell.
    pub coord_jitter: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// Intact grid with no jitter, diagonals or dropout.
    pub fn plain_grid(rows: usize, cols: usize) -> Self {
        SynthConfig {
            rows,
            cols,
            node_drop_prob: 0.0,
            edge_drop_prob: 0.0,
            diagonal_prob: 0.0,
            coord_jitter: 0.0,
            seed: 0,
        }
    }

    /// Square grid sized so that roughly `name` nodes survive dropout.
    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        let target = preset_nodes(name)?;
        let side = (target as f64 / (1.0 - PRESET_DROP)).sqrt().ceil() as usize;
        Ok(SynthConfig {
            rows: side,
            cols: side,
            node_drop_prob: PRESET_DROP,
            edge_drop_prob: PRESET_DROP,
            diagonal_prob: 0.2,
            coord_jitter: 0.2,
            seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.rows < 2 || self.cols < 2 {
            return bad(format!("grid must be at least 2x2, got {}x{}", self.rows, self.cols));
        }
        if !(0.0..1.0).contains(&self.node_drop_prob) {
            return bad(format!("node_drop_prob {} not in [0,1)", self.node_drop_prob));
        }
        if !(0.0..1.0).contains(&self.edge_drop_prob) {
            return bad(format!("edge_drop_prob {} not in [0,1)", self.edge_drop_prob));
        }
        if !(0.0..=1.0).contains(&self.diagonal_prob) {
            return bad(format!("diagonal_prob {} not in [0,1]", self.diagonal_prob));
        }
        if !(self.coord_jitter >= 0.0 && self.coord_jitter.is_finite()) {
            return bad(format!("coord_jitter {} must be >= 0", self.coord_jitter));
        }
        Ok(())
    }
}

pub fn preset_nodes(name: &str) -> Result<usize> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|&(_, v)| v)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

/// Generates a synthetic road network; deterministic in `config`.
pub fn generate(config: &SynthConfig) -> Result<Graph> {
    config.validate()?;
    let SynthConfig { rows, cols, .. } = *config;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let id = |r: usize, c: usize| r * cols + c;

    let jitter = config.coord_jitter;
    let coords: Vec<[f64; 2]> = (0..rows * cols)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            let dx = jitter * (2.0 * rng.gen::<f64>() - 1.0);
            let dy = jitter * (2.0 * rng.gen::<f64>() - 1.0);
            [c as f64 + dx, r as f64 + dy]
        })
        .collect();

    let mut links: Vec<(usize, usize)> = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                links.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                links.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    for r in 0..rows - 1 {
        for c in 0..cols - 1 {
            if rng.gen::<f64>() < config.diagonal_prob {
                if rng.gen::<bool>() {
                    links.push((id(r, c), id(r + 1, c + 1)));
                } else {
                    links.push((id(r, c + 1), id(r + 1, c)));
                }
            }
        }
    }

    let alive: Vec<bool> = (0..rows * cols)
        .map(|_| rng.gen::<f64>() >= config.node_drop_prob)
        .collect();
    let kept: Vec<(usize, usize)> = links
        .into_iter()
        .filter(|_| rng.gen::<f64>() >= config.edge_drop_prob)
        .filter(|&(a, b)| alive[a] && alive[b])
        .collect();

    let keep = largest_component(rows * cols, &alive, &kept);
    let mut remap = vec![usize::MAX; rows * cols];
    let mut new_coords = Vec::new();
    for (old, &k) in keep.iter().enumerate() {
        if k {
            remap[old] = new_coords.len();
            new_coords.push(coords[old]);
        }
    }
    if new_coords.len() < 4 {
        return Err(Error::ComponentTooSmall(new_coords.len()));
    }
    let undirected: Vec<Edge> = kept
        .iter()
        .filter(|&&(a, _)| keep[a])
        .map(|&(a, b)| {
            let (pa, pb) = (coords[a], coords[b]);
            Edge::new(remap[a], remap[b], (pa[0] - pb[0]).hypot(pa[1] - pb[1]))
        })
        .collect();
    Graph::from_undirected(new_coords, &undirected)
}

/// Membership mask of the largest weakly connected component among alive
/// nodes; ties go to the component holding the smallest node index.
fn largest_component(n: usize, alive: &[bool], links: &[(usize, usize)]) -> Vec<bool> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in links {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut size = vec![0usize; n];
    for v in 0..n {
        if alive[v] {
            let r = find(&mut parent, v);
            size[r] += 1;
        }
    }
    // Roots are the smallest index in their set, so the first max wins ties.
    let best = (0..n).fold(None::<usize>, |best, r| match best {
        Some(b) if size[b] >= size[r] => Some(b),
        _ if size[r] > 0 => Some(r),
        _ => best,
    });
    (0..n)
        .map(|v| alive[v] && Some(find(&mut parent, v)) == best)
        .collect()
}
