//! One-hidden-layer regressor: `softplus(w2 · relu(W1 x + b1) + b2)`,
//! trained on squared error by mini-batch SGD.

use std::io::{BufRead, Write};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::pairs::FeatureMatrix;
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl MlpConfig {
    pub fn new(input_dim: usize) -> Self {
        MlpConfig {
            input_dim,
            hidden_dim: 100,
            lr: 0.01,
            epochs: 15,
            batch_size: 64,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_dim == 0 || self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("input_dim, hidden_dim, epochs and batch_size must be at least 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        Ok(())
    }
}

#[inline]
pub fn relu(z: f64) -> f64 {
    z.max(0.0)
}

/// `ln(1 + e^z)`, stable for large |z|.
#[inline]
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[inline]
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Round half up, floored at zero.
pub fn round_distance(y: f64) -> u32 {
    let r = (y + 0.5).floor();
    if r <= 0.0 || r.is_nan() {
        0
    } else if r >= u32::MAX as f64 {
        u32::MAX
    } else {
        r as u32
    }
}

/// Weights of the regressor. `w1` is row-major `hidden_dim x input_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// Gradient with the same layout as [`MlpModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpGradient {
    fn zeros(m: &MlpModel) -> Self {
        MlpGradient {
            w1: vec![0.0; m.w1.len()],
            b1: vec![0.0; m.hidden_dim],
            w2: vec![0.0; m.hidden_dim],
            b2: 0.0,
        }
    }

    fn clear(&mut self) {
        self.w1.fill(0.0);
        self.b1.fill(0.0);
        self.w2.fill(0.0);
        self.b2 = 0.0;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epoch_mse: Vec<f64>,
    pub epoch_time: Vec<Duration>,
}

impl TrainReport {
    /// CSV `epoch,mse` (times are left out so reruns compare byte-for-byte).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epoch,mse")?;
        for (i, mse) in self.epoch_mse.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, mse)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Glorot-uniform weights, zero biases.
pub fn init_mlp(cfg: &MlpConfig) -> Result<MlpModel> {
    cfg.validate()?;
    let mut rng = seed::rng_for(cfg.seed, 0);
    let (i, h) = (cfg.input_dim, cfg.hidden_dim);
    let a1 = (6.0 / (i + h) as f64).sqrt();
    let a2 = (6.0 / (h + 1) as f64).sqrt();
    let w1 = (0..h * i).map(|_| rng.random_range(-a1..a1)).collect();
    let w2 = (0..h).map(|_| rng.random_range(-a2..a2)).collect();
    Ok(MlpModel {
        input_dim: i,
        hidden_dim: h,
        w1,
        b1: vec![0.0; h],
        w2,
        b2: 0.0,
    })
}

impl MlpModel {
    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::invalid(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    /// Hidden activations into `hidden`; returns the output pre-activation.
    #[inline]
    fn hidden_and_logit(&self, x: &[f64], hidden: &mut [f64]) -> f64 {
        let mut z2 = self.b2;
        for (j, h) in hidden.iter_mut().enumerate() {
            let row = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
            let z: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.b1[j];
            *h = relu(z);
            z2 += self.w2[j] * *h;
        }
        z2
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let mut hidden = vec![0.0; self.hidden_dim];
        Ok(softplus(self.hidden_and_logit(x, &mut hidden)))
    }

    pub fn predict_distance(&self, x: &[f64]) -> Result<u32> {
        self.forward(x).map(round_distance)
    }

    /// Multiply-adds per forward pass; depends only on the layer sizes.
    pub fn forward_flops(&self) -> usize {
        2 * self.hidden_dim * self.input_dim + 2 * self.hidden_dim + 2
    }

    pub fn parameter_count(&self) -> usize {
        self.w1.len() + 2 * self.hidden_dim + 1
    }

    pub fn is_finite(&self) -> bool {
        self.w1.iter().chain(&self.b1).chain(&self.w2).all(|x| x.is_finite()) && self.b2.is_finite()
    }

    /// Adds the gradient of `scale * (ŷ − y)²` for one sample into `grad`
    /// and returns the unscaled squared error.
    fn accumulate(&self, x: &[f64], y: f64, scale: f64, hidden: &mut [f64], grad: &mut MlpGradient) -> f64 {
        let z2 = self.hidden_and_logit(x, hidden);
        let err = softplus(z2) - y;
        let delta2 = scale * 2.0 * err * logistic(z2);
        grad.b2 += delta2;
        for j in 0..self.hidden_dim {
            let h = hidden[j];
            grad.w2[j] += delta2 * h;
            if h > 0.0 {
                let delta1 = delta2 * self.w2[j];
                grad.b1[j] += delta1;
                let row = &mut grad.w1[j * self.input_dim..(j + 1) * self.input_dim];
                for (g, xi) in row.iter_mut().zip(x) {
                    *g += delta1 * xi;
                }
            }
        }
        err * err
    }

    /// Mean squared error over `rows` and its gradient.
    pub fn loss_and_gradient(&self, data: &FeatureMatrix, rows: &[usize]) -> Result<(f64, MlpGradient)> {
        if data.cols != self.input_dim {
            return Err(Error::invalid("feature width does not match model input"));
        }
        let mut grad = MlpGradient::zeros(self);
        let mut hidden = vec![0.0; self.hidden_dim];
        let scale = 1.0 / rows.len() as f64;
        let mut sse = 0.0;
        for &r in rows {
            sse += self.accumulate(data.row(r), data.targets[r], scale, &mut hidden, &mut grad);
        }
        Ok((sse * scale, grad))
    }

    /// Mean squared error over `rows`.
    pub fn loss(&self, data: &FeatureMatrix, rows: &[usize]) -> f64 {
        let mut hidden = vec![0.0; self.hidden_dim];
        let sse: f64 = rows
            .iter()
            .map(|&r| {
                let e = softplus(self.hidden_and_logit(data.row(r), &mut hidden)) - data.targets[r];
                e * e
            })
            .sum();
        sse / rows.len() as f64
    }

    fn apply(&mut self, grad: &MlpGradient, lr: f64) {
        for (w, g) in self.w1.iter_mut().zip(&grad.w1) {
            *w -= lr * g;
        }
        for (w, g) in self.b1.iter_mut().zip(&grad.b1) {
            *w -= lr * g;
        }
        for (w, g) in self.w2.iter_mut().zip(&grad.w2) {
            *w -= lr * g;
        }
        self.b2 -= lr * grad.b2;
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "mlp {} {}", self.input_dim, self.hidden_dim)?;
        for j in 0..self.hidden_dim {
            write_row(&mut w, &self.w1[j * self.input_dim..(j + 1) * self.input_dim])?;
        }
        write_row(&mut w, &self.b1)?;
        write_row(&mut w, &self.w2)?;
        writeln!(w, "{}", self.b2)?;
        w.flush()?;
        Ok(())
    }

    /// Reads the body that follows an `mlp <input_dim> <hidden_dim>` header.
    pub(crate) fn read_body<R: BufRead>(lines: &mut TextRows<R>, input_dim: usize, hidden_dim: usize) -> Result<Self> {
        let mut w1 = Vec::with_capacity(input_dim * hidden_dim);
        for _ in 0..hidden_dim {
            w1.extend(lines.row(input_dim)?);
        }
        let b1 = lines.row(hidden_dim)?;
        let w2 = lines.row(hidden_dim)?;
        let b2 = lines.row(1)?[0];
        Ok(MlpModel {
            input_dim,
            hidden_dim,
            w1,
            b1,
            w2,
            b2,
        })
    }
}

pub(crate) fn write_row<W: Write>(w: &mut W, row: &[f64]) -> Result<()> {
    let text: Vec<String> = row.iter().map(|x| x.to_string()).collect();
    writeln!(w, "{}", text.join(" "))?;
    Ok(())
}

/// Line reader for whitespace-separated float rows.
pub(crate) struct TextRows<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> TextRows<R> {
    pub(crate) fn new(reader: R) -> Self {
        TextRows {
            inner: reader.lines(),
            line: 0,
        }
    }

    pub(crate) fn next_line(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok(l?),
            None => Err(Error::parse(self.line, "unexpected end of model file")),
        }
    }

    pub(crate) fn row(&mut self, len: usize) -> Result<Vec<f64>> {
        let line = self.next_line()?;
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::parse(self.line, "bad float"))?;
        if row.len() != len {
            return Err(Error::parse(self.line, format!("expected {len} values, found {}", row.len())));
        }
        Ok(row)
    }
}

/// Mini-batch SGD on squared error, reshuffling every epoch.
pub fn train_mlp(model: &mut MlpModel, data: &FeatureMatrix, cfg: &MlpConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if data.rows() == 0 {
        return Err(Error::invalid("empty training set"));
    }
    if data.cols != model.input_dim || cfg.input_dim != model.input_dim {
        return Err(Error::invalid(format!(
            "feature width {} does not match model input {}",
            data.cols, model.input_dim
        )));
    }
    let mut order: Vec<usize> = (0..data.rows()).collect();
    let mut grad = MlpGradient::zeros(model);
    let mut hidden = vec![0.0; model.hidden_dim];
    let mut report = TrainReport {
        epoch_mse: Vec::with_capacity(cfg.epochs),
        epoch_time: Vec::with_capacity(cfg.epochs),
    };
    for epoch in 0..cfg.epochs {
        let start = Instant::now();
        order.shuffle(&mut seed::rng_for(cfg.seed, 1 + epoch as u64));
        let mut sse = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            grad.clear();
            let scale = 1.0 / batch.len() as f64;
            let mut batch_sse = 0.0;
            for &r in batch {
                batch_sse += model.accumulate(data.row(r), data.targets[r], scale, &mut hidden, &mut grad);
            }
            if !batch_sse.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite loss in epoch {} batch {b}; try a smaller learning rate",
                    epoch + 1
                )));
            }
            sse += batch_sse;
            model.apply(&grad, cfg.lr);
        }
        if !model.is_finite() {
            return Err(Error::Numerical(format!("non-finite weights after epoch {}", epoch + 1)));
        }
        report.epoch_mse.push(sse / data.rows() as f64);
        report.epoch_time.push(start.elapsed());
    }
    Ok(report)
}
