//! Compressed adjacency storage for simple undirected graphs.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Dense node index in `[0, n)`.
pub type NodeId = u32;

/// Counters collected while reading an edge list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub lines_read: usize,
    pub edges_kept: usize,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

/// Immutable undirected graph in CSR layout.
///
/// Every neighbor list is sorted ascending with no duplicates and no
/// self-loops, and each undirected edge is stored in both directions, so
/// `neighbors.len() == 2 * edge_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl Graph {
    /// Builds a graph on `n` nodes labelled `"0".."n-1"`.
    ///
    /// Self-loops and repeated edges are dropped; an edge list may be empty.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph needs at least one node"));
        }
        if n > NodeId::MAX as usize {
            return Err(Error::invalid(format!("{n} nodes exceed the index type")));
        }
        for &(u, v) in edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::IndexOutOfRange {
                        what: "node",
                        index: x as usize,
                        len: n,
                    });
                }
            }
        }
        let labels = (0..n).map(|i| i.to_string()).collect();
        let (g, _, _) = Self::assemble(labels, edges.to_vec());
        Ok(g)
    }

    /// Reads a whitespace-separated edge list.
    ///
    /// Lines starting with `#` and blank lines are skipped. Labels are
    /// arbitrary tokens, assigned dense indices in order of first
    /// appearance. Every line inserts the edge in both directions.
    pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<(Self, ParseReport)> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, NodeId> = HashMap::new();
        let mut edges = Vec::new();
        let mut report = ParseReport::default();

        let mut intern = |tok: &str, labels: &mut Vec<String>, line: usize| -> Result<NodeId> {
            if let Some(&id) = index.get(tok) {
                return Ok(id);
            }
            let id = NodeId::try_from(labels.len())
                .map_err(|_| Error::parse(line, "too many distinct nodes"))?;
            index.insert(tok.to_owned(), id);
            labels.push(tok.to_owned());
            Ok(id)
        };

        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            report.lines_read += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut toks = trimmed.split_whitespace();
            let (a, b) = match (toks.next(), toks.next(), toks.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(Error::parse(
                        lineno,
                        format!("expected two node labels, got {:?}", trimmed),
                    ))
                }
            };
            let u = intern(a, &mut labels, lineno)?;
            let v = intern(b, &mut labels, lineno)?;
            edges.push((u, v));
        }

        let (g, loops, dups) = Self::assemble(labels, edges);
        report.self_loops_dropped = loops;
        report.duplicates_dropped = dups;
        report.edges_kept = g.edge_count();
        if g.edge_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok((g, report))
    }

    /// Returns the graph plus the number of self-loops and duplicates dropped.
    fn assemble(labels: Vec<String>, edges: Vec<(NodeId, NodeId)>) -> (Self, usize, usize) {
        let n = labels.len();
        let before = edges.len();
        let mut keys: Vec<(NodeId, NodeId)> = edges
            .into_iter()
            .filter(|&(u, v)| u != v)
            .map(|(u, v)| if u < v { (u, v) } else { (v, u) })
            .collect();
        let loops = before - keys.len();
        keys.sort_unstable();
        keys.dedup();
        let dups = before - loops - keys.len();

        let mut degree = vec![0usize; n];
        for &(u, v) in &keys {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0 as NodeId; 2 * keys.len()];
        for &(u, v) in &keys {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as NodeId))
            .collect();
        let g = Graph {
            offsets,
            neighbors,
            labels,
            index,
        };
        (g, loops, dups)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    fn check(&self, v: NodeId) -> Result<usize> {
        let i = v as usize;
        if i < self.node_count() {
            Ok(i)
        } else {
            Err(Error::IndexOutOfRange {
                what: "node",
                index: i,
                len: self.node_count(),
            })
        }
    }

    /// Sorted neighbor slice of `v`.
    pub fn neighbors(&self, v: NodeId) -> Result<&[NodeId]> {
        let i = self.check(v)?;
        Ok(&self.neighbors[self.offsets[i]..self.offsets[i + 1]])
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        let i = self.check(v)?;
        Ok(self.offsets[i + 1] - self.offsets[i])
    }

    /// Unchecked-by-`Result` neighbor access for inner loops.
    ///
    /// Panics if `v` is out of range.
    #[inline]
    pub fn row(&self, v: NodeId) -> &[NodeId] {
        let i = v as usize;
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.row(u).binary_search(&v).is_ok()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> {
        0..self.node_count() as NodeId
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes().flat_map(move |u| {
            self.row(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn label(&self, v: NodeId) -> Result<&str> {
        let i = self.check(v)?;
        Ok(&self.labels[i])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn max_degree(&self) -> usize {
        self.offsets.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    /// Writes every edge once, using external labels.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        for (u, v) in self.edges() {
            writeln!(w, "{} {}", self.labels[u as usize], self.labels[v as usize])?;
        }
        w.flush()?;
        Ok(())
    }
}
