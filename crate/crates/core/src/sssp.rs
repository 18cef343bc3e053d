//! Exact hop distances: single-source BFS, landmark selection and a small
//! all-pairs table for verification.

use std::collections::VecDeque;
use std::io::Write;

use rand::seq::index::sample;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed;

/// Hop count. `UNREACHABLE` marks nodes in another component.
pub type Hops = u32;

pub const UNREACHABLE: Hops = Hops::MAX;

/// Largest graph `all_pairs_oracle` accepts without an explicit override.
pub const ORACLE_MAX_NODES: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceVector {
    pub source: NodeId,
    pub dist: Vec<Hops>,
}

impl DistanceVector {
    pub fn get(&self, v: NodeId) -> Option<Hops> {
        match self.dist.get(v as usize) {
            Some(&d) if d != UNREACHABLE => Some(d),
            _ => None,
        }
    }

    pub fn reachable(&self) -> usize {
        self.dist.iter().filter(|&&d| d != UNREACHABLE).count()
    }

    /// Dumps `source<TAB>node<TAB>distance` lines for reachable nodes.
    pub fn write_tsv<W: Write>(&self, g: &Graph, mut w: W) -> Result<()> {
        let src = g.label(self.source)?;
        for (v, &d) in self.dist.iter().enumerate() {
            if d != UNREACHABLE {
                writeln!(w, "{}\t{}\t{}", src, g.labels()[v], d)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// BFS output with the discovering parent of each reached node.
///
/// Following `parent` from any reached node walks a shortest path back to
/// the source.
#[derive(Debug, Clone)]
pub struct BfsTree {
    pub source: NodeId,
    pub dist: Vec<Hops>,
    pub parent: Vec<NodeId>,
    /// Reached nodes in nondecreasing distance order.
    pub order: Vec<NodeId>,
}

impl BfsTree {
    pub fn into_distances(self) -> DistanceVector {
        DistanceVector {
            source: self.source,
            dist: self.dist,
        }
    }
}

fn check_node(g: &Graph, v: NodeId) -> Result<()> {
    if (v as usize) < g.node_count() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange {
            what: "source",
            index: v as usize,
            len: g.node_count(),
        })
    }
}

pub fn bfs(g: &Graph, source: NodeId) -> Result<DistanceVector> {
    bfs_tree(g, source).map(BfsTree::into_distances)
}

pub fn bfs_tree(g: &Graph, source: NodeId) -> Result<BfsTree> {
    check_node(g, source)?;
    let n = g.node_count();
    let mut dist = vec![UNREACHABLE; n];
    let mut parent = vec![source; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    dist[source as usize] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        let du = dist[u as usize];
        for &v in g.row(u) {
            if dist[v as usize] == UNREACHABLE {
                dist[v as usize] = du + 1;
                parent[v as usize] = u;
                queue.push_back(v);
            }
        }
    }
    Ok(BfsTree {
        source,
        dist,
        parent,
        order,
    })
}

/// BFS from every source, in parallel. Output order follows `sources`.
pub fn bfs_many(g: &Graph, sources: &[NodeId]) -> Result<Vec<BfsTree>> {
    sources.par_iter().map(|&s| bfs_tree(g, s)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LandmarkStrategy {
    UniformRandom,
    HighestDegree,
}

impl std::str::FromStr for LandmarkStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uniform-random" | "random" => Ok(LandmarkStrategy::UniformRandom),
            "degree" | "highest-degree" => Ok(LandmarkStrategy::HighestDegree),
            other => Err(Error::invalid(format!("unknown landmark strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandmarkSet {
    pub landmarks: Vec<NodeId>,
    pub strategy: LandmarkStrategy,
    pub seed: u64,
}

impl LandmarkSet {
    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }
}

/// Picks `count` distinct landmarks.
///
/// Uniform draws are without replacement from a generator seeded by `seed`;
/// highest-degree takes the top `count` nodes, ties going to the smaller index.
pub fn select_landmarks(
    g: &Graph,
    count: usize,
    strategy: LandmarkStrategy,
    seed: u64,
) -> Result<LandmarkSet> {
    let n = g.node_count();
    if count == 0 || count >= n {
        return Err(Error::invalid(format!(
            "landmark count must be in [1, {n}), got {count}"
        )));
    }
    let landmarks = match strategy {
        LandmarkStrategy::UniformRandom => {
            let mut rng = seed::rng_for(seed, 0);
            sample(&mut rng, n, count)
                .into_iter()
                .map(|i| i as NodeId)
                .collect()
        }
        LandmarkStrategy::HighestDegree => {
            let mut nodes: Vec<NodeId> = g.nodes().collect();
            nodes.sort_by_key(|&v| (std::cmp::Reverse(g.row(v).len()), v));
            nodes.truncate(count);
            nodes
        }
    };
    Ok(LandmarkSet {
        landmarks,
        strategy,
        seed,
    })
}

/// Dense `n x n` hop table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<Hops>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> Hops {
        self.data[u as usize * self.n + v as usize]
    }

    pub fn row(&self, u: NodeId) -> &[Hops] {
        &self.data[u as usize * self.n..(u as usize + 1) * self.n]
    }
}

/// All-pairs hop distances by repeated BFS.
///
/// Refuses graphs above [`ORACLE_MAX_NODES`] unless `allow_large` is set.
pub fn all_pairs_oracle(g: &Graph, allow_large: bool) -> Result<DistanceMatrix> {
    let n = g.node_count();
    if n > ORACLE_MAX_NODES && !allow_large {
        return Err(Error::invalid(format!(
            "all-pairs oracle refused for {n} nodes (limit {ORACLE_MAX_NODES}); pass the override to force it"
        )));
    }
    let mut data = Vec::with_capacity(n * n);
    for s in g.nodes() {
        data.extend(bfs(g, s)?.dist);
    }
    Ok(DistanceMatrix { n, data })
}
