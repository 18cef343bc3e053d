//! Run configuration: a TOML file with one table per stage, overridden by
//! command-line flags.
//!
//! ```toml
//! graph = "facebook_combined.txt"
//! kind = "node2vec"
//! dim = 128
//! operator = "avg"
//! seed = 7
//!
//! [walks]
//! walks_per_node = 10
//!
//! [pairs]
//! landmarks = 100
//! cap = 7
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer};
use spdist_core::linreg::DEFAULT_RIDGE;
use spdist_core::mlp::MlpConfig;
use spdist_core::node2vec::WalkConfig;
use spdist_core::pairs::{Operator, SplitSpec};
use spdist_core::poincare::PoincareConfig;
use spdist_core::seed::{self, Stream};
use spdist_core::shared::TrainMode;
use spdist_core::skipgram::SkipGramConfig;
use spdist_core::sssp::{Hops, LandmarkStrategy};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmbeddingKind {
    #[default]
    Node2Vec,
    Poincare,
}

impl FromStr for EmbeddingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "node2vec" => Ok(EmbeddingKind::Node2Vec),
            "poincare" => Ok(EmbeddingKind::Poincare),
            other => Err(format!("unknown embedding kind {other:?} (expected node2vec or poincare)")),
        }
    }
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingKind::Node2Vec => "node2vec",
            EmbeddingKind::Poincare => "poincare",
        })
    }
}

fn from_str_de<'de, D, T>(d: D) -> Result<T, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr,
    T::Err: fmt::Display,
{
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkSection {
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub p: f64,
    pub q: f64,
}

impl Default for WalkSection {
    fn default() -> Self {
        WalkSection { walks_per_node: 10, walk_length: 80, p: 1.0, q: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SkipGramSection {
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub min_lr: f64,
}

impl Default for SkipGramSection {
    fn default() -> Self {
        let d = SkipGramConfig::default();
        SkipGramSection {
            window: d.window,
            negatives: d.negatives,
            epochs: d.epochs,
            initial_lr: d.initial_lr,
            min_lr: d.min_lr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoincareSection {
    pub epochs: usize,
    pub lr: f64,
    pub negatives: usize,
    pub burn_in_epochs: usize,
    pub burn_in_factor: f64,
    pub margin: f64,
}

impl Default for PoincareSection {
    fn default() -> Self {
        let d = PoincareConfig::default();
        PoincareSection {
            epochs: d.epochs,
            lr: d.lr,
            negatives: d.negatives,
            burn_in_epochs: d.burn_in_epochs,
            burn_in_factor: d.burn_in_factor,
            margin: d.margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairSection {
    pub landmarks: usize,
    pub test_landmarks: usize,
    /// Longest kept distance; chosen from the graph's mean distance if unset.
    pub cap: Option<Hops>,
    pub harvest: bool,
    #[serde(deserialize_with = "from_str_de")]
    pub strategy: LandmarkStrategy,
    pub balance: bool,
    /// Per-distance cap used by balancing; derived from the histogram if unset.
    pub class_target: Option<usize>,
    /// Sources sampled when estimating the mean distance for the default cap.
    pub mean_samples: usize,
    /// Train order-dependent operators (sub, concat) on both orientations.
    pub augment_reversed: bool,
}

impl Default for PairSection {
    fn default() -> Self {
        PairSection {
            landmarks: 100,
            test_landmarks: 10,
            cap: None,
            harvest: true,
            strategy: LandmarkStrategy::UniformRandom,
            balance: true,
            class_target: None,
            mean_samples: 100,
            augment_reversed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpSection {
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for MlpSection {
    fn default() -> Self {
        let d = MlpConfig::new(1);
        MlpSection { hidden: d.hidden_dim, lr: d.lr, epochs: d.epochs, batch_size: d.batch_size }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinRegSection {
    pub ridge: f64,
}

impl Default for LinRegSection {
    fn default() -> Self {
        LinRegSection { ridge: DEFAULT_RIDGE }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub graph: Option<PathBuf>,
    #[serde(deserialize_with = "from_str_de")]
    pub kind: EmbeddingKind,
    pub dim: usize,
    #[serde(deserialize_with = "from_str_de")]
    pub operator: Operator,
    pub seed: u64,
    /// Single-threaded, bit-reproducible training.
    pub deterministic: bool,
    /// Worker threads for asynchronous training; 0 means all cores.
    pub threads: usize,
    pub walks: WalkSection,
    pub skipgram: SkipGramSection,
    pub poincare: PoincareSection,
    pub pairs: PairSection,
    pub mlp: MlpSection,
    pub linreg: LinRegSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            graph: None,
            kind: EmbeddingKind::Node2Vec,
            dim: 128,
            operator: Operator::Avg,
            seed: 0,
            deterministic: false,
            threads: 0,
            walks: WalkSection::default(),
            skipgram: SkipGramSection::default(),
            poincare: PoincareSection::default(),
            pairs: PairSection::default(),
            mlp: MlpSection::default(),
            linreg: LinRegSection::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Defaults, or the file at `path` if given.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn graph_path(&self) -> Result<&Path, CliError> {
        self.graph
            .as_deref()
            .ok_or_else(|| CliError::Usage("no graph given (use --graph or set `graph` in the config)".into()))
    }

    pub fn mode(&self) -> TrainMode {
        if self.deterministic {
            TrainMode::Deterministic
        } else {
            let threads = match self.threads {
                0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
                t => t,
            };
            TrainMode::Hogwild { threads }
        }
    }

    pub fn walk_config(&self) -> WalkConfig {
        WalkConfig {
            walks_per_node: self.walks.walks_per_node,
            walk_length: self.walks.walk_length,
            p: self.walks.p,
            q: self.walks.q,
            seed: seed::derive(self.seed, Stream::Walks),
        }
    }

    pub fn skipgram_config(&self) -> SkipGramConfig {
        let s = &self.skipgram;
        SkipGramConfig {
            dim: self.dim,
            window: s.window,
            negatives: s.negatives,
            epochs: s.epochs,
            initial_lr: s.initial_lr,
            min_lr: s.min_lr,
            seed: seed::derive(self.seed, Stream::SkipGram),
            mode: self.mode(),
        }
    }

    pub fn poincare_config(&self) -> PoincareConfig {
        let s = &self.poincare;
        PoincareConfig {
            dim: self.dim,
            epochs: s.epochs,
            lr: s.lr,
            negatives: s.negatives,
            burn_in_epochs: s.burn_in_epochs,
            burn_in_factor: s.burn_in_factor,
            margin: s.margin,
            seed: seed::derive(self.seed, Stream::Poincare),
            mode: self.mode(),
        }
    }

    pub fn split_spec(&self, length_cap: Hops) -> SplitSpec {
        SplitSpec {
            train_landmarks: self.pairs.landmarks,
            test_landmarks: self.pairs.test_landmarks,
            length_cap,
            harvest_subpaths: self.pairs.harvest,
            strategy: self.pairs.strategy,
            seed: seed::derive(self.seed, Stream::Landmarks),
        }
    }

    pub fn mlp_config(&self, input_dim: usize) -> MlpConfig {
        MlpConfig {
            hidden_dim: self.mlp.hidden,
            lr: self.mlp.lr,
            epochs: self.mlp.epochs,
            batch_size: self.mlp.batch_size,
            seed: seed::derive(self.seed, Stream::Mlp),
            ..MlpConfig::new(input_dim)
        }
    }
}
