//! Second-order biased random walks.
//!
//! From a walker that arrived at `cur` from `prev`, a neighbor `x` of `cur`
//! gets unnormalized weight `1/p` if `x == prev`, `1` if `x` is adjacent to
//! `prev`, and `1/q` otherwise. Weights are evaluated on the fly with a
//! binary search in `prev`'s sorted neighbor list rather than from per-edge
//! alias tables.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_node: 10,
            walk_length: 80,
            p: 1.0,
            q: 1.0,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_node < 1 {
            return Err(Error::invalid("walks_per_node must be at least 1"));
        }
        if self.walk_length < 2 {
            return Err(Error::invalid("walk_length must be at least 2"));
        }
        if !(self.p > 0.0 && self.p.is_finite() && self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::invalid("p and q must be positive and finite"));
        }
        Ok(())
    }
}

/// Walk sequences, `walks_per_node` rounds of one walk per node.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub walks: Vec<Vec<NodeId>>,
}

impl Corpus {
    pub fn token_count(&self) -> usize {
        self.walks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.token_count() == 0
    }
}

struct Walker<'g> {
    g: &'g Graph,
    inv_p: f64,
    inv_q: f64,
    uniform: bool,
}

impl Walker<'_> {
    fn walk(&self, start: NodeId, len: usize, rng: &mut ChaCha8Rng, weights: &mut Vec<f64>) -> Vec<NodeId> {
        let mut walk = Vec::with_capacity(len);
        walk.push(start);
        while walk.len() < len {
            let cur = *walk.last().unwrap();
            let nbrs = self.g.row(cur);
            if nbrs.is_empty() {
                break;
            }
            let next = if walk.len() == 1 || self.uniform {
                nbrs[rng.random_range(0..nbrs.len())]
            } else {
                let prev = walk[walk.len() - 2];
                self.biased_step(prev, nbrs, rng, weights)
            };
            walk.push(next);
        }
        walk
    }

    fn biased_step(&self, prev: NodeId, nbrs: &[NodeId], rng: &mut ChaCha8Rng, weights: &mut Vec<f64>) -> NodeId {
        weights.clear();
        let mut total = 0.0;
        for &x in nbrs {
            let w = if x == prev {
                self.inv_p
            } else if self.g.has_edge(prev, x) {
                1.0
            } else {
                self.inv_q
            };
            total += w;
            weights.push(total);
        }
        let r = rng.random::<f64>() * total;
        let k = weights.partition_point(|&c| c <= r).min(nbrs.len() - 1);
        nbrs[k]
    }
}

/// Samples `walks_per_node` walks from every node.
///
/// Node `v` draws from its own generator stream (`v`), so the corpus does
/// not depend on thread scheduling. Within each round the node order is
/// shuffled by a separate seeded stream.
pub fn generate_walks(g: &Graph, cfg: &WalkConfig) -> Result<Corpus> {
    cfg.validate()?;
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let walker = Walker {
        g,
        inv_p: 1.0 / cfg.p,
        inv_q: 1.0 / cfg.q,
        uniform: cfg.p == 1.0 && cfg.q == 1.0,
    };
    let per_node: Vec<Vec<Vec<NodeId>>> = g
        .nodes()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map_init(Vec::new, |weights, v| {
            let mut rng = seed::rng_for(cfg.seed, v as u64);
            (0..cfg.walks_per_node)
                .map(|_| walker.walk(v, cfg.walk_length, &mut rng, weights))
                .collect()
        })
        .collect();

    let mut per_node: Vec<std::vec::IntoIter<Vec<NodeId>>> =
        per_node.into_iter().map(Vec::into_iter).collect();
    let mut walks = Vec::with_capacity(n * cfg.walks_per_node);
    let mut order: Vec<usize> = (0..n).collect();
    for round in 0..cfg.walks_per_node {
        let mut rng = seed::rng_for(cfg.seed, u64::MAX - round as u64);
        order.shuffle(&mut rng);
        for &v in &order {
            walks.push(per_node[v].next().expect("one walk per round"));
        }
    }
    Ok(Corpus { walks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: u32) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::from_edges(n as usize, &edges).unwrap()
    }

    #[test]
    fn walk_count_contract() {
        let g = path(100);
        let c = generate_walks(&g, &WalkConfig { walk_length: 10, ..Default::default() }).unwrap();
        assert_eq!(c.walks.len(), 1_000);
        assert!(c.walks.iter().all(|w| w.len() == 10));
    }

    #[test]
    fn walks_follow_edges() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]).unwrap();
        let cfg = WalkConfig { p: 0.5, q: 2.0, walk_length: 20, seed: 3, ..Default::default() };
        let c = generate_walks(&g, &cfg).unwrap();
        for w in &c.walks {
            for pair in w.windows(2) {
                assert!(g.has_edge(pair[0], pair[1]));
            }
        }
        // node 5 is isolated: walks stop immediately
        assert!(c.walks.iter().filter(|w| w[0] == 5).all(|w| w.len() == 1));
    }

    #[test]
    fn deterministic() {
        let g = path(30);
        let cfg = WalkConfig { p: 2.0, q: 0.5, seed: 9, ..Default::default() };
        assert_eq!(generate_walks(&g, &cfg).unwrap(), generate_walks(&g, &cfg).unwrap());
    }

    #[test]
    fn config_validation() {
        let g = path(3);
        for cfg in [
            WalkConfig { walks_per_node: 0, ..Default::default() },
            WalkConfig { walk_length: 1, ..Default::default() },
            WalkConfig { p: 0.0, ..Default::default() },
            WalkConfig { q: -1.0, ..Default::default() },
        ] {
            assert!(generate_walks(&g, &cfg).is_err());
        }
    }
}
