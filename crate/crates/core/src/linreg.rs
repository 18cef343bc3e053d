//! Ridge-regularized least-squares baseline solved through the normal
//! equations.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mlp::{round_distance, write_row, TextRows};
use crate::pairs::FeatureMatrix;

pub const DEFAULT_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LinRegModel {
    pub w: Vec<f64>,
    pub b: f64,
}

/// Solves `(XᵀX + ridge·I) w = Xᵀy` with an unpenalized intercept.
pub fn fit_linreg(data: &FeatureMatrix, ridge: f64) -> Result<LinRegModel> {
    if data.rows() == 0 {
        return Err(Error::invalid("empty training set"));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::invalid("ridge must be a finite nonnegative number"));
    }
    let k = data.cols;
    let p = k + 1;
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    let mut aug = vec![1.0; p];
    for r in 0..data.rows() {
        aug[..k].copy_from_slice(data.row(r));
        let y = data.targets[r];
        for i in 0..p {
            let ai = aug[i];
            rhs[i] += ai * y;
            for j in i..p {
                gram[(i, j)] += ai * aug[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }
    for i in 0..k {
        gram[(i, i)] += ridge;
    }
    let singular = || {
        Error::Numerical(format!(
            "normal equations are singular with ridge {ridge}; use a positive ridge term"
        ))
    };
    let scale = (0..p).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    let chol = gram.cholesky().ok_or_else(singular)?;
    let l = chol.l();
    if (0..p).any(|i| l[(i, i)] * l[(i, i)] <= 1e-12 * scale) {
        return Err(singular());
    }
    let theta = chol.solve(&rhs);
    if theta.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("linear regression produced non-finite weights".into()));
    }
    Ok(LinRegModel {
        w: theta.as_slice()[..k].to_vec(),
        b: theta[k],
    })
}

impl LinRegModel {
    pub fn input_dim(&self) -> usize {
        self.w.len()
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.w.len() {
            return Err(Error::invalid(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.w.len()
            )));
        }
        Ok(self.w.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.b)
    }

    pub fn predict_distance(&self, x: &[f64]) -> Result<u32> {
        self.forward(x).map(round_distance)
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "linreg {}", self.w.len())?;
        write_row(&mut w, &self.w)?;
        writeln!(w, "{}", self.b)?;
        w.flush()?;
        Ok(())
    }

    pub(crate) fn read_body<R: BufRead>(lines: &mut TextRows<R>, input_dim: usize) -> Result<Self> {
        let w = lines.row(input_dim)?;
        let b = lines.row(1)?[0];
        Ok(LinRegModel { w, b })
    }
}
