//! Row-major node embedding matrix and its word2vec text serialization.
//!
//! File layout: an optional `#space=poincare` line, then `n d`, then one
//! line per node: `<label> <f1> ... <fd>`. Floats are written in shortest
//! round-trip form, so reading a file back reproduces the matrix exactly.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::NodeId;

pub const POINCARE_HEADER: &str = "#space=poincare";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Euclidean,
    Poincare,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    dim: usize,
    geometry: Geometry,
    data: Vec<f64>,
}

impl Embedding {
    pub fn from_vec(dim: usize, geometry: Geometry, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "{} values do not form rows of dimension {dim}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite embedding entry {bad}")));
        }
        Ok(Embedding {
            dim,
            geometry,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn lookup(&self, v: NodeId) -> Result<&[f64]> {
        let i = v as usize;
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                what: "embedding row",
                index: i,
                len: self.len(),
            });
        }
        Ok(self.row(i))
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn write_word2vec<W: Write>(&self, labels: &[String], mut w: W) -> Result<()> {
        if labels.len() != self.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} embedding rows",
                labels.len(),
                self.len()
            )));
        }
        if self.geometry == Geometry::Poincare {
            writeln!(w, "{POINCARE_HEADER}")?;
        }
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (i, label) in labels.iter().enumerate() {
            write!(w, "{label}")?;
            for x in self.row(i) {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a word2vec text file, returning the matrix and the row labels.
    pub fn read_word2vec<R: BufRead>(reader: R) -> Result<(Self, Vec<String>)> {
        let mut geometry = Geometry::Euclidean;
        let mut shape: Option<(usize, usize)> = None;
        let mut labels = Vec::new();
        let mut data = Vec::new();

        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let Some((n, d)) = shape else {
                if let Some(comment) = trimmed.strip_prefix('#') {
                    if comment.trim() == "space=poincare" {
                        geometry = Geometry::Poincare;
                    }
                    continue;
                }
                let mut toks = trimmed.split_whitespace();
                let parsed = match (toks.next(), toks.next(), toks.next()) {
                    (Some(a), Some(b), None) => a.parse().ok().zip(b.parse().ok()),
                    _ => None,
                };
                let (n, d) = parsed.ok_or_else(|| Error::parse(lineno, "expected header \"n d\""))?;
                if d == 0 {
                    return Err(Error::parse(lineno, "dimension must be positive"));
                }
                shape = Some((n, d));
                labels.reserve(n);
                data.reserve(n * d);
                continue;
            };
            if labels.len() == n {
                return Err(Error::parse(lineno, format!("more than {n} rows")));
            }
            let mut toks = trimmed.split_whitespace();
            let label = toks.next().unwrap_or_default();
            let before = data.len();
            for tok in toks {
                let x: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad float {tok:?}")))?;
                data.push(x);
            }
            if data.len() - before != d {
                return Err(Error::parse(
                    lineno,
                    format!("expected {d} values, found {}", data.len() - before),
                ));
            }
            labels.push(label.to_owned());
        }

        let (n, d) = shape.ok_or_else(|| Error::parse(0, "missing header"))?;
        if labels.len() != n {
            return Err(Error::parse(
                0,
                format!("header promises {n} rows, found {}", labels.len()),
            ));
        }
        Ok((Embedding::from_vec(d, geometry, data)?, labels))
    }
}
