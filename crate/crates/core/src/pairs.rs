//! Training and test pairs `(u, v, hops)` harvested from landmark BFS trees,
//! class balancing, and pair featurization.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::index::sample;
use rayon::prelude::*;

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed;
use crate::sssp::{bfs_tree, select_landmarks, Hops, LandmarkSet, LandmarkStrategy, UNREACHABLE};

/// Exact hop distance between two distinct nodes, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DistancePair {
    pub u: NodeId,
    pub v: NodeId,
    pub d: Hops,
}

impl DistancePair {
    pub fn new(a: NodeId, b: NodeId, d: Hops) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        DistancePair { u, v, d }
    }

    pub fn key(&self) -> (NodeId, NodeId) {
        (self.u, self.v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairDataset {
    pairs: Vec<DistancePair>,
    length_cap: Hops,
    landmarks: LandmarkSet,
    histogram: BTreeMap<Hops, usize>,
}

fn histogram_of(pairs: &[DistancePair]) -> BTreeMap<Hops, usize> {
    let mut h = BTreeMap::new();
    for p in pairs {
        *h.entry(p.d).or_insert(0) += 1;
    }
    h
}

impl PairDataset {
    fn new(pairs: Vec<DistancePair>, length_cap: Hops, landmarks: LandmarkSet) -> Self {
        let histogram = histogram_of(&pairs);
        PairDataset {
            pairs,
            length_cap,
            landmarks,
            histogram,
        }
    }

    pub fn pairs(&self) -> &[DistancePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn length_cap(&self) -> Hops {
        self.length_cap
    }

    pub fn landmarks(&self) -> &LandmarkSet {
        &self.landmarks
    }

    /// Pair count per hop distance.
    pub fn histogram(&self) -> &BTreeMap<Hops, usize> {
        &self.histogram
    }

    /// Pairs as TSV `u<TAB>v<TAB>d` with external labels.
    pub fn write_tsv<W: Write>(&self, labels: &[String], w: W) -> Result<()> {
        write_pairs_tsv(&self.pairs, labels, w)
    }

    /// Histogram as CSV `distance,count`.
    pub fn write_histogram_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "distance,count")?;
        for (d, c) in &self.histogram {
            writeln!(w, "{d},{c}")?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_pairs_tsv<W: Write>(pairs: &[DistancePair], labels: &[String], mut w: W) -> Result<()> {
    for p in pairs {
        let lu = labels.get(p.u as usize);
        let lv = labels.get(p.v as usize);
        let (Some(lu), Some(lv)) = (lu, lv) else {
            return Err(Error::IndexOutOfRange {
                what: "pair node",
                index: p.u.max(p.v) as usize,
                len: labels.len(),
            });
        };
        writeln!(w, "{lu}\t{lv}\t{}", p.d)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a pair TSV, resolving labels through `index`.
pub fn read_pairs_tsv<R: BufRead>(reader: R, index: &HashMap<&str, NodeId>) -> Result<Vec<DistancePair>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(lineno, "expected u<TAB>v<TAB>d"));
        }
        let node = |label: &str| {
            index
                .get(label)
                .copied()
                .ok_or_else(|| Error::parse(lineno, format!("unknown node label {label:?}")))
        };
        let d: Hops = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad distance {:?}", fields[2])))?;
        out.push(DistancePair::new(node(fields[0])?, node(fields[1])?, d));
    }
    Ok(out)
}

/// Landmark rows and, optionally, every ancestor/descendant pair on the
/// BFS-tree paths from one landmark.
fn pairs_from_landmark(g: &Graph, source: NodeId, cap: Hops, harvest: bool) -> Result<Vec<DistancePair>> {
    let tree = bfs_tree(g, source)?;
    let mut out = Vec::new();
    for &v in tree.order.iter().skip(1) {
        let dv = tree.dist[v as usize];
        if dv > cap {
            break;
        }
        if dv >= 2 {
            out.push(DistancePair::new(source, v, dv));
        }
        if harvest && dv >= 3 {
            // Any stretch of a shortest path is itself shortest, so the depth
            // difference along the tree path is the exact distance.
            let mut a = tree.parent[tree.parent[v as usize] as usize];
            while a != source {
                let da = tree.dist[a as usize];
                debug_assert!(da != UNREACHABLE);
                out.push(DistancePair::new(a, v, dv - da));
                a = tree.parent[a as usize];
            }
        }
    }
    Ok(out)
}

/// Exact pairs with `2 <= d <= length_cap` from BFS rooted at each landmark.
///
/// With `harvest_subpaths`, intermediate pairs along one BFS-tree shortest
/// path per (landmark, node) are added too. Duplicates across landmarks
/// collapse to one pair; output is sorted by `(u, v)`.
pub fn build_pairs(g: &Graph, landmarks: &LandmarkSet, length_cap: Hops, harvest_subpaths: bool) -> Result<PairDataset> {
    if length_cap < 2 {
        return Err(Error::invalid("length cap must be at least 2"));
    }
    if landmarks.is_empty() {
        return Err(Error::invalid("empty landmark set"));
    }
    let chunks: Vec<Vec<DistancePair>> = landmarks
        .landmarks
        .par_iter()
        .map(|&x| pairs_from_landmark(g, x, length_cap, harvest_subpaths))
        .collect::<Result<_>>()?;
    let mut pairs: Vec<DistancePair> = chunks.into_iter().flatten().collect();
    pairs.sort_unstable();
    pairs.dedup_by_key(|p| p.key());
    Ok(PairDataset::new(pairs, length_cap, landmarks.clone()))
}

/// Keeps at most `per_class_target` pairs of each distance, drawn uniformly
/// without replacement. Smaller classes are kept whole.
pub fn balance(ds: &PairDataset, per_class_target: usize, seed: u64) -> Result<PairDataset> {
    if ds.is_empty() {
        return Err(Error::invalid("cannot balance an empty dataset"));
    }
    if per_class_target == 0 {
        return Err(Error::invalid("per-class target must be at least 1"));
    }
    let mut by_class: BTreeMap<Hops, Vec<usize>> = BTreeMap::new();
    for (i, p) in ds.pairs.iter().enumerate() {
        by_class.entry(p.d).or_default().push(i);
    }
    let mut keep = Vec::with_capacity(ds.len());
    for (&d, members) in &by_class {
        if members.len() <= per_class_target {
            keep.extend_from_slice(members);
        } else {
            let mut rng = seed::rng_for(seed, d as u64);
            keep.extend(sample(&mut rng, members.len(), per_class_target).into_iter().map(|k| members[k]));
        }
    }
    keep.sort_unstable();
    let pairs = keep.into_iter().map(|i| ds.pairs[i]).collect();
    Ok(PairDataset::new(pairs, ds.length_cap, ds.landmarks.clone()))
}

/// Size of the smallest distance class holding at least 1% of the pairs.
pub fn default_class_target(ds: &PairDataset) -> usize {
    let floor = ds.len().div_ceil(100);
    ds.histogram
        .values()
        .copied()
        .filter(|&c| c >= floor)
        .min()
        .unwrap_or(ds.len())
        .max(1)
}

/// Cap of 5 hops for graphs with mean distance under 3, otherwise 7.
pub fn default_length_cap(mean_distance: f64) -> Hops {
    if mean_distance < 3.0 {
        5
    } else {
        7
    }
}

/// Mean hop distance over reachable nodes from `samples` random sources.
pub fn estimate_mean_distance(g: &Graph, samples: usize, seed: u64) -> Result<f64> {
    let n = g.node_count();
    let sources: Vec<NodeId> = if samples + 1 >= n {
        g.nodes().collect()
    } else {
        select_landmarks(g, samples, LandmarkStrategy::UniformRandom, seed)?.landmarks
    };
    let (mut sum, mut count) = (0u64, 0u64);
    for s in sources {
        for &d in &bfs_tree(g, s)?.dist {
            if d != UNREACHABLE && d > 0 {
                sum += d as u64;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::invalid("no reachable pairs to estimate mean distance"));
    }
    Ok(sum as f64 / count as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub train_landmarks: usize,
    pub test_landmarks: usize,
    pub length_cap: Hops,
    pub harvest_subpaths: bool,
    pub strategy: LandmarkStrategy,
    pub seed: u64,
}

/// Draws disjoint train and test landmark sets and builds both datasets,
/// removing from the test set every pair already present in training.
pub fn split_disjoint(g: &Graph, spec: &SplitSpec) -> Result<(PairDataset, PairDataset)> {
    let total = spec.train_landmarks + spec.test_landmarks;
    if spec.train_landmarks == 0 || spec.test_landmarks == 0 {
        return Err(Error::invalid("train and test landmark counts must be positive"));
    }
    if total >= g.node_count() {
        return Err(Error::invalid(format!(
            "{total} landmarks requested for {} nodes",
            g.node_count()
        )));
    }
    let all = select_landmarks(g, total, spec.strategy, spec.seed)?;
    let (train_ids, test_ids) = all.landmarks.split_at(spec.train_landmarks);
    let subset = |ids: &[NodeId]| LandmarkSet {
        landmarks: ids.to_vec(),
        strategy: all.strategy,
        seed: all.seed,
    };
    let train = build_pairs(g, &subset(train_ids), spec.length_cap, spec.harvest_subpaths)?;
    let test_raw = build_pairs(g, &subset(test_ids), spec.length_cap, spec.harvest_subpaths)?;
    let seen: HashSet<(NodeId, NodeId)> = train.pairs.iter().map(DistancePair::key).collect();
    let test_pairs: Vec<DistancePair> = test_raw
        .pairs
        .into_iter()
        .filter(|p| !seen.contains(&p.key()))
        .collect();
    if test_pairs.is_empty() {
        return Err(Error::invalid("test set is empty after removing training pairs"));
    }
    let test = PairDataset::new(test_pairs, spec.length_cap, test_raw.landmarks);
    Ok((train, test))
}

/// Binary operator combining two node vectors into one feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    /// `u_i − v_i`
    Sub,
    /// `(u, v)`
    Concat,
    /// `(u_i + v_i) / 2`
    Avg,
    /// `u_i · v_i`
    Hadamard,
}

impl Operator {
    pub const ALL: [Operator; 4] = [Operator::Sub, Operator::Concat, Operator::Avg, Operator::Hadamard];

    pub fn output_dim(self, dim: usize) -> usize {
        match self {
            Operator::Concat => 2 * dim,
            _ => dim,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Operator::Sub => "sub",
            Operator::Concat => "concat",
            Operator::Avg => "avg",
            Operator::Hadamard => "hadamard",
        }
    }
}

impl std::fmt::Display for Operator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sub" => Ok(Operator::Sub),
            "concat" => Ok(Operator::Concat),
            "avg" => Ok(Operator::Avg),
            "hadamard" => Ok(Operator::Hadamard),
            other => Err(Error::invalid(format!(
                "unknown operator {other:?} (expected sub, concat, avg or hadamard)"
            ))),
        }
    }
}

/// Appends `op(a, b)` to `out`.
pub fn compose_into(a: &[f64], b: &[f64], op: Operator, out: &mut Vec<f64>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("vector lengths differ: {} vs {}", a.len(), b.len())));
    }
    let pairs = a.iter().zip(b);
    match op {
        Operator::Sub => out.extend(pairs.map(|(x, y)| x - y)),
        Operator::Concat => {
            out.extend_from_slice(a);
            out.extend_from_slice(b);
        }
        Operator::Avg => out.extend(pairs.map(|(x, y)| (x + y) / 2.0)),
        Operator::Hadamard => out.extend(pairs.map(|(x, y)| x * y)),
    }
    Ok(())
}

pub fn compose(a: &[f64], b: &[f64], op: Operator) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(op.output_dim(a.len()));
    compose_into(a, b, op, &mut out)?;
    Ok(out)
}

/// Dense row-major feature matrix with regression targets.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub cols: usize,
    pub data: Vec<f64>,
    pub targets: Vec<f64>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.targets.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Features as CSV: `f0,...,f{k-1},target`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (0..self.cols).map(|i| format!("f{i}")).collect();
        writeln!(w, "{},target", header.join(","))?;
        for i in 0..self.rows() {
            for x in self.row(i) {
                write!(w, "{x},")?;
            }
            writeln!(w, "{}", self.targets[i])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Composes features for `pairs` in stored `(u, v)` order. With
/// `add_reversed`, every pair also contributes its `(v, u)` orientation.
pub fn featurize(emb: &Embedding, pairs: &[DistancePair], op: Operator, add_reversed: bool) -> Result<FeatureMatrix> {
    let cols = op.output_dim(emb.dim());
    let copies = if add_reversed { 2 } else { 1 };
    let mut data = Vec::with_capacity(pairs.len() * cols * copies);
    let mut targets = Vec::with_capacity(pairs.len() * copies);
    for p in pairs {
        let (a, b) = (emb.lookup(p.u)?, emb.lookup(p.v)?);
        compose_into(a, b, op, &mut data)?;
        targets.push(p.d as f64);
        if add_reversed {
            compose_into(b, a, op, &mut data)?;
            targets.push(p.d as f64);
        }
    }
    Ok(FeatureMatrix { cols, data, targets })
}
