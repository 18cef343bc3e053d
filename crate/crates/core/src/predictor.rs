//! Trained regressors behind one interface, plus model-file dispatch.

use std::io::{BufRead, Write};

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::linreg::LinRegModel;
use crate::mlp::{round_distance, MlpModel, TextRows};
use crate::pairs::{compose_into, Operator};

#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Mlp(MlpModel),
    Linear(LinRegModel),
}

impl Predictor {
    pub fn input_dim(&self) -> usize {
        match self {
            Predictor::Mlp(m) => m.input_dim,
            Predictor::Linear(m) => m.input_dim(),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        match self {
            Predictor::Mlp(m) => m.forward(x),
            Predictor::Linear(m) => m.forward(x),
        }
    }

    pub fn predict_distance(&self, x: &[f64]) -> Result<u32> {
        self.forward(x).map(round_distance)
    }

    pub fn write_text<W: Write>(&self, w: W) -> Result<()> {
        match self {
            Predictor::Mlp(m) => m.write_text(w),
            Predictor::Linear(m) => m.write_text(w),
        }
    }

    /// Parses a model file tagged `mlp` or `linreg`.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows = TextRows::new(reader);
        let header = rows.next_line()?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let dim = |s: &str| {
            s.parse::<usize>()
                .ok()
                .filter(|&d| d > 0)
                .ok_or_else(|| Error::parse(1, format!("bad dimension {s:?}")))
        };
        match toks.as_slice() {
            ["mlp", i, h] => Ok(Predictor::Mlp(MlpModel::read_body(&mut rows, dim(i)?, dim(h)?)?)),
            ["linreg", i] => Ok(Predictor::Linear(LinRegModel::read_body(&mut rows, dim(i)?)?)),
            _ => Err(Error::parse(1, format!("unrecognized model header {header:?}"))),
        }
    }
}

/// Answers distance queries from an embedding and a trained regressor.
///
/// Each query composes two embedding rows and runs one forward pass, so its
/// cost depends on the embedding dimension only.
pub struct DistanceEstimator<'a> {
    embedding: &'a Embedding,
    predictor: &'a Predictor,
    op: Operator,
    buf: Vec<f64>,
}

impl<'a> DistanceEstimator<'a> {
    pub fn new(embedding: &'a Embedding, predictor: &'a Predictor, op: Operator) -> Result<Self> {
        let want = op.output_dim(embedding.dim());
        if want != predictor.input_dim() {
            return Err(Error::invalid(format!(
                "operator {op} on dimension {} gives {want} features but the model expects {}",
                embedding.dim(),
                predictor.input_dim()
            )));
        }
        Ok(DistanceEstimator {
            embedding,
            predictor,
            op,
            buf: Vec::with_capacity(want),
        })
    }

    pub fn estimate(&mut self, u: NodeId, v: NodeId) -> Result<u32> {
        self.buf.clear();
        compose_into(self.embedding.lookup(u)?, self.embedding.lookup(v)?, self.op, &mut self.buf)?;
        self.predictor.predict_distance(&self.buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::Geometry;
    use crate::mlp::{init_mlp, MlpConfig};

    #[test]
    fn model_file_dispatch() {
        let lin = Predictor::Linear(LinRegModel { w: vec![0.5, -1.0], b: 2.0 });
        let mut buf = Vec::new();
        lin.write_text(&mut buf).unwrap();
        assert!(buf.starts_with(b"linreg 2\n"));
        assert_eq!(Predictor::read_text(&buf[..]).unwrap(), lin);

        let mlp = Predictor::Mlp(init_mlp(&MlpConfig { hidden_dim: 4, ..MlpConfig::new(3) }).unwrap());
        let mut buf = Vec::new();
        mlp.write_text(&mut buf).unwrap();
        assert_eq!(Predictor::read_text(&buf[..]).unwrap(), mlp);

        assert!(Predictor::read_text("svm 3\n".as_bytes()).is_err());
        assert!(Predictor::read_text("linreg 2\n1 2\n".as_bytes()).is_err());
    }

    #[test]
    fn estimator_checks_widths() {
        let emb = Embedding::from_vec(2, Geometry::Euclidean, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let p = Predictor::Linear(LinRegModel { w: vec![1.0; 4], b: 2.0 });
        assert!(DistanceEstimator::new(&emb, &p, Operator::Avg).is_err());
        let mut est = DistanceEstimator::new(&emb, &p, Operator::Concat).unwrap();
        assert_eq!(est.estimate(0, 1).unwrap(), 3);
        assert!(est.estimate(0, 2).is_err());
    }
}
