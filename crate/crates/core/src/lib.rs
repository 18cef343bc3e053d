//! Approximate shortest-path hop distances in unweighted, undirected graphs.
//!
//! The pipeline learns a vector per node (random-walk skip-gram or a
//! Poincaré-ball embedding), harvests exact `(u, v, hops)` pairs by running
//! BFS from a handful of landmark nodes, and trains a small feedforward
//! regressor that maps a composed pair of node vectors to a hop count.
//! Once trained, a query costs one embedding lookup per endpoint plus a
//! forward pass, independent of the size of the graph.

pub mod embedding;
pub mod error;
pub mod graph;
pub mod linreg;
pub mod metrics;
pub mod mlp;
pub mod node2vec;
pub mod pairs;
pub mod poincare;
pub mod predictor;
pub mod seed;
pub mod shared;
pub mod skipgram;
pub mod sssp;

pub use embedding::{Embedding, Geometry};
pub use error::{Error, Result};
pub use graph::{Graph, NodeId, ParseReport};
pub use pairs::{DistancePair, Operator, PairDataset};
