//! Poincaré-ball embeddings trained by Riemannian SGD.
//!
//! Each directed edge `(u, v)` contributes the softmax loss
//!
//! ```text
//! L = d(u, v) + ln Σ_{c ∈ {v} ∪ negatives} exp(−d(u, c))
//! ```
//!
//! with negatives drawn proportionally to `degree^{3/4}`. The Euclidean
//! gradient of every vector involved is rescaled by the inverse metric
//! `(1 − ‖θ‖²)² / 4`, applied, and the result projected back to norm at most
//! `1 − margin`.

use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rayon::prelude::*;

use crate::embedding::{Embedding, Geometry};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed;
use crate::shared::{SharedRows, TrainMode};

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareConfig {
    pub dim: usize,
    pub epochs: usize,
    pub lr: f64,
    pub negatives: usize,
    pub burn_in_epochs: usize,
    /// Learning-rate multiplier during burn-in.
    pub burn_in_factor: f64,
    pub margin: f64,
    pub seed: u64,
    pub mode: TrainMode,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        PoincareConfig {
            dim: 128,
            epochs: 50,
            lr: 0.01,
            negatives: 10,
            burn_in_epochs: 10,
            burn_in_factor: 0.1,
            margin: 1e-5,
            seed: 0,
            mode: TrainMode::Deterministic,
        }
    }
}

impl PoincareConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 || self.negatives < 1 {
            return Err(Error::invalid("dim and negatives must be at least 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid("poincare lr must be positive"));
        }
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return Err(Error::invalid("ball margin must lie in (0, 1)"));
        }
        if !(self.burn_in_factor > 0.0) {
            return Err(Error::invalid("burn-in factor must be positive"));
        }
        if let TrainMode::Hogwild { threads: 0 } = self.mode {
            return Err(Error::invalid("hogwild mode needs at least one thread"));
        }
        Ok(())
    }

    /// Step size for `epoch` (zero-based), including the burn-in reduction.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        if epoch < self.burn_in_epochs {
            self.lr * self.burn_in_factor
        } else {
            self.lr
        }
    }
}

#[inline]
fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[inline]
fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `arcosh(1 + δ)` without cancellation for small δ.
#[inline]
fn acosh_1p(delta: f64) -> f64 {
    (delta + (delta * (delta + 2.0)).sqrt()).ln_1p()
}

/// Hyperbolic distance without the domain check.
#[inline]
pub fn distance_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let alpha = 1.0 - sq_norm(x);
    let beta = 1.0 - sq_norm(y);
    acosh_1p(2.0 * sq_dist(x, y) / (alpha * beta))
}

/// `arcosh(1 + 2‖x−y‖² / ((1−‖x‖²)(1−‖y‖²)))`.
///
/// Both points must lie strictly inside the unit ball.
pub fn poincare_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("dimension mismatch {} vs {}", x.len(), y.len())));
    }
    for p in [x, y] {
        let n2 = sq_norm(p);
        if !(n2 < 1.0) {
            return Err(Error::Domain { norm: n2.sqrt() });
        }
    }
    Ok(distance_unchecked(x, y))
}

/// Adds `scale * ∂d(x, y)/∂x` into `out`.
fn add_distance_grad(x: &[f64], y: &[f64], scale: f64, out: &mut [f64]) {
    let xx = sq_norm(x);
    let yy = sq_norm(y);
    let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let alpha = 1.0 - xx;
    let beta = 1.0 - yy;
    let gamma = 1.0 + 2.0 * sq_dist(x, y) / (alpha * beta);
    let root = (gamma * gamma - 1.0).sqrt();
    if !(root > 1e-15) {
        // d is not differentiable at x == y; the subgradient 0 is used.
        return;
    }
    let k = scale * 4.0 / (beta * root);
    let cx = k * (yy - 2.0 * xy + 1.0) / (alpha * alpha);
    let cy = k / alpha;
    for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
        *o += cx * a - cy * b;
    }
}

/// Loss of one anchor against its positive (`candidates[0]`) and negatives.
pub fn edge_loss(anchor: &[f64], candidates: &[&[f64]]) -> f64 {
    let d: Vec<f64> = candidates.iter().map(|c| distance_unchecked(anchor, c)).collect();
    d[0] + log_sum_exp_neg(&d)
}

fn log_sum_exp_neg(d: &[f64]) -> f64 {
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    -lo + d.iter().map(|x| (lo - x).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGradient {
    pub loss: f64,
    pub anchor: Vec<f64>,
    /// One gradient per candidate slot, positive first.
    pub candidates: Vec<Vec<f64>>,
}

/// Euclidean gradient of [`edge_loss`].
pub fn edge_gradient(anchor: &[f64], candidates: &[&[f64]]) -> EdgeGradient {
    let d: Vec<f64> = candidates.iter().map(|c| distance_unchecked(anchor, c)).collect();
    let lse = log_sum_exp_neg(&d);
    let mut g_anchor = vec![0.0; anchor.len()];
    let mut g_cands = Vec::with_capacity(candidates.len());
    for (j, (c, dj)) in candidates.iter().zip(&d).enumerate() {
        let softmax = (-dj - lse).exp();
        let coeff = if j == 0 { 1.0 - softmax } else { -softmax };
        add_distance_grad(anchor, c, coeff, &mut g_anchor);
        let mut gc = vec![0.0; anchor.len()];
        add_distance_grad(c, anchor, coeff, &mut gc);
        g_cands.push(gc);
    }
    EdgeGradient {
        loss: d[0] + lse,
        anchor: g_anchor,
        candidates: g_cands,
    }
}

/// Rescales `x` onto the sphere of radius `1 − margin` if it lies outside.
#[inline]
pub fn project(x: &mut [f64], margin: f64) {
    let limit = 1.0 - margin;
    let norm = sq_norm(x).sqrt();
    if norm >= limit {
        let s = limit / norm;
        x.iter_mut().for_each(|v| *v *= s);
        // Rounding can leave the norm one ulp above the limit.
        while sq_norm(x).sqrt() > limit {
            x.iter_mut().for_each(|v| *v *= 1.0 - f64::EPSILON);
        }
    }
}

/// In-place Riemannian SGD step followed by projection.
#[inline]
pub fn rsgd_step(theta: &mut [f64], euclidean_grad: &[f64], lr: f64, margin: f64) {
    let scale = lr * (1.0 - sq_norm(theta)).powi(2) / 4.0;
    for (t, g) in theta.iter_mut().zip(euclidean_grad) {
        *t -= scale * g;
    }
    project(theta, margin);
}

/// State handed to a step observer after every optimizer update.
pub struct StepView<'a> {
    pub vectors: &'a [f64],
    pub dim: usize,
    /// Rows modified by this step.
    pub touched: &'a [usize],
}

#[derive(Debug, Clone)]
pub struct PoincareTrained {
    pub embedding: Embedding,
    /// Mean per-edge loss of each epoch.
    pub epoch_loss: Vec<f64>,
}

struct NegativeSampler<'g> {
    table: WeightedAliasIndex<f64>,
    g: &'g Graph,
}

impl NegativeSampler<'_> {
    fn new(g: &Graph) -> Result<NegativeSampler<'_>> {
        let weights = g.nodes().map(|v| (g.row(v).len() as f64).powf(0.75)).collect();
        let table = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::invalid(format!("negative table: {e}")))?;
        Ok(NegativeSampler { table, g })
    }

    /// Draws a node that is neither `u` nor one of its neighbors, giving up
    /// after a few rejections on very dense nodes.
    fn draw(&self, u: NodeId, rng: &mut ChaCha8Rng) -> usize {
        let mut k = self.table.sample(rng);
        for _ in 0..16 {
            if k != u as usize && !self.g.has_edge(u, k as NodeId) {
                break;
            }
            k = self.table.sample(rng);
        }
        k
    }
}

fn init_vectors(n: usize, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng_for(seed, 1);
    (0..n * dim).map(|_| rng.random_range(-0.001..0.001)).collect()
}

fn directed_edges(g: &Graph) -> Vec<(NodeId, NodeId)> {
    g.edges().flat_map(|(u, v)| [(u, v), (v, u)]).collect()
}

pub fn train_poincare(g: &Graph, cfg: &PoincareConfig) -> Result<PoincareTrained> {
    train_poincare_with(g, cfg, |_| {})
}

/// Trains with an observer invoked after every update (deterministic mode
/// only; asynchronous training does not call it).
pub fn train_poincare_with<F>(g: &Graph, cfg: &PoincareConfig, mut observe: F) -> Result<PoincareTrained>
where
    F: FnMut(StepView<'_>),
{
    cfg.validate()?;
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = g.node_count();
    let d = cfg.dim;
    let sampler = NegativeSampler::new(g)?;
    let mut edges = directed_edges(g);
    let mut vectors = init_vectors(n, d, cfg.seed);
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);

    match cfg.mode {
        TrainMode::Deterministic => {
            let mut rng = seed::rng_for(cfg.seed, 0);
            let mut slots: Vec<usize> = Vec::with_capacity(cfg.negatives + 2);
            for epoch in 0..cfg.epochs {
                let lr = cfg.lr_at(epoch);
                edges.shuffle(&mut rng);
                let mut total = 0.0;
                for &(u, v) in &edges {
                    slots.clear();
                    slots.push(u as usize);
                    slots.push(v as usize);
                    for _ in 0..cfg.negatives {
                        slots.push(sampler.draw(u, &mut rng));
                    }
                    let grad = {
                        let row = |i: usize| &vectors[i * d..(i + 1) * d];
                        let cands: Vec<&[f64]> = slots[1..].iter().map(|&i| row(i)).collect();
                        edge_gradient(row(u as usize), &cands)
                    };
                    total += grad.loss;
                    let updates = std::iter::once(&grad.anchor).chain(&grad.candidates);
                    for (&i, gi) in slots.iter().zip(updates) {
                        rsgd_step(&mut vectors[i * d..(i + 1) * d], gi, lr, cfg.margin);
                    }
                    observe(StepView {
                        vectors: &vectors,
                        dim: d,
                        touched: &slots,
                    });
                }
                epoch_loss.push(total / edges.len() as f64);
            }
        }
        TrainMode::Hogwild { threads } => {
            let shared = SharedRows::new(&vectors, d);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            let chunk = edges.len().div_ceil(threads).max(1);
            for epoch in 0..cfg.epochs {
                let lr = cfg.lr_at(epoch);
                edges.shuffle(&mut seed::rng_for(cfg.seed, epoch as u64));
                let total: f64 = pool.install(|| {
                    edges
                        .par_chunks(chunk)
                        .enumerate()
                        .map(|(worker, part)| {
                            let mut rng = seed::rng_for(cfg.seed, ((epoch as u64) << 32) | (worker as u64 + 1));
                            let mut rows = vec![vec![0.0; d]; cfg.negatives + 2];
                            let mut slots = Vec::with_capacity(cfg.negatives + 2);
                            let mut sum = 0.0;
                            for &(u, v) in part {
                                slots.clear();
                                slots.push(u as usize);
                                slots.push(v as usize);
                                for _ in 0..cfg.negatives {
                                    slots.push(sampler.draw(u, &mut rng));
                                }
                                for (row, &i) in rows.iter_mut().zip(&slots) {
                                    shared.load(i, row);
                                }
                                let cands: Vec<&[f64]> = rows[1..].iter().map(Vec::as_slice).collect();
                                let grad = edge_gradient(&rows[0], &cands);
                                sum += grad.loss;
                                let updates = std::iter::once(&grad.anchor).chain(&grad.candidates);
                                for ((row, &i), gi) in rows.iter_mut().zip(&slots).zip(updates) {
                                    rsgd_step(row, gi, lr, cfg.margin);
                                    shared.store(i, row);
                                }
                            }
                            sum
                        })
                        .sum()
                });
                epoch_loss.push(total / edges.len() as f64);
            }
            vectors = shared.into_vec();
        }
    }

    if vectors.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("poincare training produced non-finite weights".into()));
    }
    Ok(PoincareTrained {
        embedding: Embedding::from_vec(d, Geometry::Poincare, vectors)?,
        epoch_loss,
    })
}
