use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::model::TrainSample;
use crate::oracle::{bfs_hops, dijkstra};
use crate::par::{self, ExecMode};
use crate::synth::{generate, preset_nodes, SynthConfig};

/// Topology and sample counts for one graph size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub preset: String,
    pub train_topologies: usize,
    pub test_topologies: usize,
    pub train_samples: usize,
    pub test_samples: usize,
    pub batch_size: usize,
    pub seed: u64,
}

/// Full-size `(topologies, train samples, test samples, batch size)` per preset.
const TABLE: [(&str, usize, usize, usize, usize); 8] = [
    ("1k", 10, 6400, 1600, 64),
    ("2k", 10, 6400, 1600, 64),
    ("3k", 10, 3200, 800, 32),
    ("4k", 10, 3200, 800, 32),
    ("10k", 5, 2500, 500, 16),
    ("20k", 5, 2500, 500, 16),
    ("50k", 5, 2500, 500, 4),
    ("100k", 5, 2500, 500, 4),
];

/// Desk runs divide sample counts by this.
pub const DESK_SHRINK: usize = 10;

impl DatasetSpec {
    /// Standard split for `preset`. Topologies are divided between train
    /// and test in the ratio of the sample counts; without `full`, sample
    /// counts shrink by [`DESK_SHRINK`].
    pub fn standard(preset: &str, full: bool, seed: u64) -> Result<Self> {
        let &(_, topologies, train, test, batch) = TABLE
            .iter()
            .find(|r| r.0 == preset)
            .ok_or_else(|| Error::UnknownPreset(preset.to_string()))?;
        let train_topologies = ((topologies * train) as f64 / (train + test) as f64).round() as usize;
        let shrink = if full { 1 } else { DESK_SHRINK };
        Ok(DatasetSpec {
            preset: preset.to_string(),
            train_topologies,
            test_topologies: topologies - train_topologies,
            train_samples: train / shrink,
            test_samples: test / shrink,
            batch_size: batch,
            seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let nodes = preset_nodes(&self.preset)?;
        if self.train_topologies == 0 || self.test_topologies == 0 {
            return Err(Error::Config("need at least one train and one test topology".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        // Generated components can be slightly smaller than the preset, so
        // this is rechecked against the real graphs.
        for (samples, topos) in [
            (self.train_samples, self.train_topologies),
            (self.test_samples, self.test_topologies),
        ] {
            if samples > nodes * topos {
                return Err(Error::Config(format!(
                    "{samples} samples exceed {topos} topologies of about {nodes} nodes"
                )));
            }
        }
        Ok(())
    }

    pub fn topologies(&self) -> usize {
        self.train_topologies + self.test_topologies
    }

    /// Generator settings of topology `i`.
    pub fn synth_config(&self, i: usize) -> Result<SynthConfig> {
        SynthConfig::preset(&self.preset, mix(self.seed, i as u64))
    }
}

fn mix(seed: u64, i: u64) -> u64 {
    // splitmix64 finalizer over the pair.
    let mut z = seed ^ (i.wrapping_add(1)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Which split a manifest row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub spec: DatasetSpec,
    /// Train topologies first, then test topologies.
    pub graphs: Vec<Graph>,
    pub train: Vec<TrainSample>,
    pub test: Vec<TrainSample>,
}

impl Dataset {
    pub fn train_graphs(&self) -> &[Graph] {
        &self.graphs[..self.spec.train_topologies]
    }

    /// `split,topology,source` rows.
    pub fn manifest(&self) -> String {
        let mut out = String::from("split,topology,source\n");
        for (split, set) in [(Split::Train, &self.train), (Split::Test, &self.test)] {
            for s in set {
                writeln!(out, "{},{},{}", split.as_str(), s.topology, s.source).unwrap();
            }
        }
        out
    }

    /// Writes `spec.json`, `manifest.csv` and `topo_<i>.txt` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("spec.json"), serde_json::to_string_pretty(&self.spec)? + "\n")?;
        fs::write(dir.join("manifest.csv"), self.manifest())?;
        for (i, g) in self.graphs.iter().enumerate() {
            g.save_edge_list(dir.join(format!("topo_{i}.txt")))?;
        }
        Ok(())
    }

    /// Reads a directory written by [`Dataset::save`] and recomputes labels.
    pub fn load(dir: &Path, mode: ExecMode) -> Result<Self> {
        let spec: DatasetSpec = serde_json::from_str(&fs::read_to_string(dir.join("spec.json"))?)?;
        let graphs = (0..spec.topologies())
            .map(|i| Graph::load_edge_list(dir.join(format!("topo_{i}.txt"))))
            .collect::<Result<Vec<_>>>()?;
        let path = dir.join("manifest.csv");
        let text = fs::read_to_string(&path)?;
        let mut picks: [Vec<(usize, NodeId)>; 2] = [Vec::new(), Vec::new()];
        for (i, line) in text.lines().enumerate().skip(1) {
            let perr = |m: &str| Error::Parse {
                path: path.clone(),
                line: i + 1,
                message: m.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            let [split, topo, src] = f[..] else {
                return Err(perr("expected split,topology,source"));
            };
            let topo: usize = topo.parse().map_err(|_| perr("bad topology"))?;
            let src: u32 = src.parse().map_err(|_| perr("bad source"))?;
            let g = graphs.get(topo).ok_or_else(|| perr("topology out of range"))?;
            g.check_node(NodeId(src))?;
            let slot = match split {
                "train" => 0,
                "test" => 1,
                _ => return Err(perr("split must be train or test")),
            };
            picks[slot].push((topo, NodeId(src)));
        }
        let [train, test] = picks.map(|p| label(&graphs, &p, mode));
        Ok(Dataset {
            spec,
            graphs,
            train: train?,
            test: test?,
        })
    }
}

fn label(graphs: &[Graph], picks: &[(usize, NodeId)], mode: ExecMode) -> Result<Vec<TrainSample>> {
    par::try_map_slice(mode, picks, |&(topology, source)| {
        let g = &graphs[topology];
        Ok(TrainSample {
            topology,
            source,
            dist: dijkstra(g, source)?.dist,
            hops: bfs_hops(g, source)?,
        })
    })
}

/// `total` split over `parts` as evenly as possible, larger shares first.
fn shares(total: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|i| total / parts + usize::from(i < total % parts)).collect()
}

/// Generates the topologies, draws sources uniformly without replacement
/// per topology, and labels every sample with exact distances and hops.
pub fn build_dataset(spec: &DatasetSpec, mode: ExecMode) -> Result<Dataset> {
    spec.validate()?;
    let graphs = par::try_map_range(mode, spec.topologies(), |i| generate(&spec.synth_config(i)?))?;
    let mut picks: [Vec<(usize, NodeId)>; 2] = [Vec::new(), Vec::new()];
    let ranges = [
        (0..spec.train_topologies, spec.train_samples),
        (spec.train_topologies..spec.topologies(), spec.test_samples),
    ];
    for (slot, (range, total)) in ranges.into_iter().enumerate() {
        let counts = shares(total, range.len());
        for (t, k) in range.zip(counts) {
            let n = graphs[t].node_count();
            if k > n {
                return Err(Error::Config(format!("{k} sources requested from topology {t} with {n} nodes")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(t as u64 + 1);
            let mut chosen: Vec<usize> = index::sample(&mut rng, n, k).into_vec();
            chosen.sort_unstable();
            picks[slot].extend(chosen.into_iter().map(|v| (t, NodeId::from(v))));
        }
    }
    let [train, test] = picks.map(|p| label(&graphs, &p, mode));
    Ok(Dataset {
        spec: spec.clone(),
        graphs,
        train: train?,
        test: test?,
    })
}
