use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{read_tensors, write_tensors, Parameter, Tensor};

pub const NODE_FEATURES: usize = 3;
pub const EDGE_FEATURES: usize = 1;

/// Activation applied to the projection-weighted layer sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalActivation {
    #[default]
    Relu,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden: usize,
    /// Message-passing steps.
    pub layers: usize,
    /// Linear layers in each embedding MLP and in the prediction head.
    pub mlp_depth: usize,
    pub final_activation: FinalActivation,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: 64,
            layers: 3,
            mlp_depth: 3,
            final_activation: FinalActivation::Relu,
        }
    }
}

impl ModelConfig {
    fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.layers == 0 || self.mlp_depth == 0 {
            return Err(Error::Config(format!("degenerate model shape {self:?}")));
        }
        Ok(())
    }

    /// `(name, rows, cols)` of every tensor, in storage order.
    fn shapes(&self) -> Vec<(String, usize, usize)> {
        let h = self.hidden;
        let mut out = Vec::new();
        let mut mlp = |prefix: &str, dims: Vec<usize>| {
            for (l, w) in dims.windows(2).enumerate() {
                out.push((format!("{prefix}.{l}.weight"), w[0], w[1]));
                out.push((format!("{prefix}.{l}.bias"), 1, w[1]));
            }
        };
        let widths = |input: usize, output: usize| {
            let mut d = vec![input];
            d.extend(std::iter::repeat_n(h, self.mlp_depth - 1));
            d.push(output);
            d
        };
        mlp("node_mlp", widths(NODE_FEATURES, h));
        mlp("edge_mlp", widths(EDGE_FEATURES, h));
        for k in 0..self.layers {
            out.push((format!("mp.{k}.weight"), 3 * h, h));
            out.push((format!("mp.{k}.bias"), 1, h));
        }
        out.push(("proj".into(), 1, self.layers + 1));
        let mut head = vec![2 * h];
        head.extend(std::iter::repeat_n(h, self.mlp_depth - 1));
        head.push(1);
        for (l, w) in head.windows(2).enumerate() {
            out.push((format!("head.{l}.weight"), w[0], w[1]));
            out.push((format!("head.{l}.bias"), 1, w[1]));
        }
        out
    }
}

/// Positions of each block inside [`ModelParams::params`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub node_mlp: usize,
    pub edge_mlp: usize,
    pub mp: usize,
    pub proj: usize,
    pub head: usize,
    pub depth: usize,
    pub layers: usize,
}

impl Layout {
    fn of(cfg: &ModelConfig) -> Self {
        let d = 2 * cfg.mlp_depth;
        Layout {
            node_mlp: 0,
            edge_mlp: d,
            mp: 2 * d,
            proj: 2 * d + 2 * cfg.layers,
            head: 2 * d + 2 * cfg.layers + 1,
            depth: cfg.mlp_depth,
            layers: cfg.layers,
        }
    }
}

/// All learnable tensors of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub params: Vec<Parameter>,
}

impl ModelParams {
    /// Glorot-uniform weights, zero biases, and a uniform projection vector.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = config
            .shapes()
            .into_iter()
            .map(|(name, r, c)| {
                let value = if name == "proj" {
                    Tensor::filled(r, c, 1.0 / c as f64)
                } else if name.ends_with(".bias") {
                    Tensor::zeros(r, c)
                } else {
                    Tensor::glorot(r, c, &mut rng)
                };
                Parameter::new(name, value)
            })
            .collect();
        Ok(ModelParams { config, params })
    }

    /// Every tensor zero, including the projection vector.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let params = config
            .shapes()
            .into_iter()
            .map(|(name, r, c)| Parameter::new(name, Tensor::zeros(r, c)))
            .collect();
        Ok(ModelParams { config, params })
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout::of(&self.config)
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.value.data().len()).sum()
    }

    pub fn get(&self, name: &str) -> Option<&Parameter> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Parameter> {
        self.params.iter_mut().find(|p| p.name == name)
    }

    fn config_tensor(&self) -> Tensor {
        let c = &self.config;
        let act = match c.final_activation {
            FinalActivation::Relu => 1.0,
            FinalActivation::Identity => 0.0,
        };
        Tensor::from_vec(
            1,
            4,
            vec![c.hidden as f64, c.layers as f64, c.mlp_depth as f64, act],
        )
        .expect("fixed shape")
    }

    pub fn write(&self, w: &mut impl Write) -> Result<()> {
        let cfg = self.config_tensor();
        let items = std::iter::once(("config", &cfg))
            .chain(self.params.iter().map(|p| (p.name.as_str(), &p.value)));
        write_tensors(w, items)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        buf
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut tensors = read_tensors(&mut &bytes[..])?.into_iter();
        let bad = |m: String| Error::Container(m);
        let (name, cfg) = tensors
            .next()
            .ok_or_else(|| bad("empty container".into()))?;
        if name != "config" || cfg.shape() != (1, 4) {
            return Err(bad("first tensor must be the 1x4 config".into()));
        }
        let c = cfg.data();
        let config = ModelConfig {
            hidden: c[0] as usize,
            layers: c[1] as usize,
            mlp_depth: c[2] as usize,
            final_activation: if c[3] != 0.0 {
                FinalActivation::Relu
            } else {
                FinalActivation::Identity
            },
        };
        config.validate()?;
        let shapes = config.shapes();
        let mut params = Vec::with_capacity(shapes.len());
        for (name, r, c) in shapes {
            let (got, t) = tensors
                .next()
                .ok_or_else(|| bad(format!("missing tensor {name}")))?;
            if got != name || t.shape() != (r, c) {
                return Err(bad(format!(
                    "expected {name} {r}x{c}, found {got} {}x{}",
                    t.rows(),
                    t.cols()
                )));
            }
            params.push(Parameter::new(name, t));
        }
        if let Some((name, _)) = tensors.next() {
            return Err(bad(format!("unexpected tensor {name}")));
        }
        Ok(ModelParams { config, params })
    }
}
