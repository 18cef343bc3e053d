//! Skip-gram with negative sampling over a walk corpus.
//!
//! For every center `c` and every context `v` within `window` positions on
//! either side, SGD ascends
//!
//! ```text
//! log σ(ctx(v)·emb(c)) + Σ_j log σ(−ctx(n_j)·emb(c)),   n_j ~ unigram^{3/4}
//! ```
//!
//! The learning rate decays linearly from `initial_lr` to `min_lr` over all
//! tokens of all epochs. Center vectors start uniform in `±0.5/d`, context
//! vectors at zero; the trained center matrix is the embedding.

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rayon::prelude::*;

use crate::embedding::{Embedding, Geometry};
use crate::error::{Error, Result};
use crate::node2vec::Corpus;
use crate::seed;
use crate::shared::{SharedRows, TrainMode};

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub min_lr: f64,
    pub seed: u64,
    pub mode: TrainMode,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 128,
            window: 5,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            min_lr: 1e-4,
            seed: 0,
            mode: TrainMode::Deterministic,
        }
    }
}

impl SkipGramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 || self.window < 1 || self.negatives < 1 || self.epochs < 1 {
            return Err(Error::invalid("dim, window, negatives and epochs must be at least 1"));
        }
        if !(self.initial_lr > 0.0 && self.min_lr >= 0.0 && self.min_lr <= self.initial_lr) {
            return Err(Error::invalid("need 0 <= min_lr <= initial_lr and initial_lr > 0"));
        }
        if let TrainMode::Hogwild { threads: 0 } = self.mode {
            return Err(Error::invalid("hogwild mode needs at least one thread"));
        }
        Ok(())
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x)`, stable for large |x|.
#[inline]
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `−∂loss/∂(dot)` for a logistic term with target `label` (1 or 0).
#[inline]
fn logistic_coeff(dot: f64, label: f64) -> f64 {
    label - sigmoid(dot)
}

/// Negative log-likelihood of one (center, context) pair with its negatives.
pub fn sgns_loss(center: &[f64], positive: &[f64], negatives: &[&[f64]]) -> f64 {
    let mut loss = -log_sigmoid(dot(center, positive));
    for neg in negatives {
        loss -= log_sigmoid(-dot(center, neg));
    }
    loss
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradient {
    pub center: Vec<f64>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Gradient of [`sgns_loss`] with respect to every vector involved.
pub fn sgns_gradient(center: &[f64], positive: &[f64], negatives: &[&[f64]]) -> SgnsGradient {
    let d = center.len();
    let mut g_center = vec![0.0; d];
    let c = logistic_coeff(dot(center, positive), 1.0);
    axpy(-c, positive, &mut g_center);
    let g_positive = center.iter().map(|x| -c * x).collect();
    let g_negatives = negatives
        .iter()
        .map(|neg| {
            let c = logistic_coeff(dot(center, neg), 0.0);
            axpy(-c, neg, &mut g_center);
            center.iter().map(|x| -c * x).collect()
        })
        .collect();
    SgnsGradient {
        center: g_center,
        positive: g_positive,
        negatives: g_negatives,
    }
}

/// One SGD step for `center` against the context rows named in `targets`
/// (`(node, label)`, positive first).
#[inline]
fn step(center: &mut [f64], ctx: &mut [f64], targets: &[(usize, f64)], lr: f64, acc: &mut [f64]) {
    let d = center.len();
    acc.fill(0.0);
    for &(k, label) in targets {
        let row = &mut ctx[k * d..(k + 1) * d];
        let g = logistic_coeff(dot(center, row), label) * lr;
        axpy(g, row, acc);
        axpy(g, center, row);
    }
    for (c, a) in center.iter_mut().zip(acc.iter()) {
        *c += *a;
    }
}

struct Schedule {
    initial: f64,
    floor: f64,
    total: f64,
}

impl Schedule {
    #[inline]
    fn lr(&self, processed: usize) -> f64 {
        let frac = (processed as f64 / self.total).min(1.0);
        (self.initial - (self.initial - self.floor) * frac).max(self.floor)
    }
}

fn negative_table(corpus: &Corpus, n: usize) -> Result<WeightedAliasIndex<f64>> {
    let mut counts = vec![0usize; n];
    for w in &corpus.walks {
        for &v in w {
            counts[v as usize] += 1;
        }
    }
    let weights = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    WeightedAliasIndex::new(weights).map_err(|e| Error::invalid(format!("negative table: {e}")))
}

fn init_centers(n: usize, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng_for(seed, 1);
    let bound = 0.5 / dim as f64;
    (0..n * dim).map(|_| rng.random_range(-bound..bound)).collect()
}

/// Trains center vectors for `node_count` nodes from the walk corpus.
pub fn train_skipgram(corpus: &Corpus, node_count: usize, cfg: &SkipGramConfig) -> Result<Embedding> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::invalid("empty corpus"));
    }
    if let Some(&bad) = corpus.walks.iter().flatten().find(|&&v| v as usize >= node_count) {
        return Err(Error::IndexOutOfRange {
            what: "corpus token",
            index: bad as usize,
            len: node_count,
        });
    }
    let table = negative_table(corpus, node_count)?;
    let sched = Schedule {
        initial: cfg.initial_lr,
        floor: cfg.min_lr,
        total: (cfg.epochs * corpus.token_count()) as f64,
    };
    let emb = init_centers(node_count, cfg.dim, cfg.seed);
    let data = match cfg.mode {
        TrainMode::Deterministic => train_sequential(corpus, emb, &table, &sched, cfg),
        TrainMode::Hogwild { threads } => train_hogwild(corpus, emb, &table, &sched, cfg, threads)?,
    };
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("skip-gram produced non-finite weights".into()));
    }
    Embedding::from_vec(cfg.dim, Geometry::Euclidean, data)
}

fn draw_negatives(
    rng: &mut ChaCha8Rng,
    table: &WeightedAliasIndex<f64>,
    positive: usize,
    count: usize,
    out: &mut Vec<usize>,
) {
    out.clear();
    for _ in 0..count {
        let neg = table.sample(rng);
        if neg != positive {
            out.push(neg);
        }
    }
}

fn train_sequential(
    corpus: &Corpus,
    mut emb: Vec<f64>,
    table: &WeightedAliasIndex<f64>,
    sched: &Schedule,
    cfg: &SkipGramConfig,
) -> Vec<f64> {
    let d = cfg.dim;
    let mut ctx = vec![0.0; emb.len()];
    let mut rng = seed::rng_for(cfg.seed, 0);
    let mut acc = vec![0.0; d];
    let mut negs = Vec::with_capacity(cfg.negatives);
    let mut targets = Vec::with_capacity(cfg.negatives + 1);
    let mut processed = 0usize;

    for _ in 0..cfg.epochs {
        for walk in &corpus.walks {
            for (i, &c) in walk.iter().enumerate() {
                let lr = sched.lr(processed);
                processed += 1;
                let lo = i.saturating_sub(cfg.window);
                let hi = (i + cfg.window).min(walk.len() - 1);
                let center = &mut emb[c as usize * d..(c as usize + 1) * d];
                for j in (lo..=hi).filter(|&j| j != i) {
                    let pos = walk[j] as usize;
                    draw_negatives(&mut rng, table, pos, cfg.negatives, &mut negs);
                    targets.clear();
                    targets.push((pos, 1.0));
                    targets.extend(negs.iter().map(|&k| (k, 0.0)));
                    step(center, &mut ctx, &targets, lr, &mut acc);
                }
            }
        }
    }
    emb
}

fn train_hogwild(
    corpus: &Corpus,
    emb: Vec<f64>,
    table: &WeightedAliasIndex<f64>,
    sched: &Schedule,
    cfg: &SkipGramConfig,
    threads: usize,
) -> Result<Vec<f64>> {
    let d = cfg.dim;
    let centers = SharedRows::new(&emb, d);
    let contexts = SharedRows::new(&vec![0.0; emb.len()], d);
    let processed = AtomicUsize::new(0);
    let chunk = corpus.walks.len().div_ceil(threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;

    pool.install(|| {
        corpus
            .walks
            .par_chunks(chunk.max(1))
            .enumerate()
            .for_each(|(worker, walks)| {
                let mut rng = seed::rng_for(cfg.seed, 2 + worker as u64);
                let mut center = vec![0.0; d];
                let mut acc = vec![0.0; d];
                let mut rows: Vec<Vec<f64>> = vec![vec![0.0; d]; cfg.negatives + 1];
                let mut negs = Vec::with_capacity(cfg.negatives);
                for _ in 0..cfg.epochs {
                    for walk in walks {
                        for (i, &c) in walk.iter().enumerate() {
                            let lr = sched.lr(processed.fetch_add(1, Ordering::Relaxed));
                            let lo = i.saturating_sub(cfg.window);
                            let hi = (i + cfg.window).min(walk.len() - 1);
                            centers.load(c as usize, &mut center);
                            for j in (lo..=hi).filter(|&j| j != i) {
                                let pos = walk[j] as usize;
                                draw_negatives(&mut rng, table, pos, cfg.negatives, &mut negs);
                                let ids: Vec<(usize, f64)> = std::iter::once((pos, 1.0))
                                    .chain(negs.iter().map(|&k| (k, 0.0)))
                                    .collect();
                                acc.fill(0.0);
                                for (slot, &(k, label)) in ids.iter().enumerate() {
                                    let row = &mut rows[slot];
                                    contexts.load(k, row);
                                    let g = logistic_coeff(dot(&center, row), label) * lr;
                                    axpy(g, row, &mut acc);
                                    axpy(g, &center, row);
                                    contexts.store(k, row);
                                }
                                for (x, a) in center.iter_mut().zip(&acc) {
                                    *x += a;
                                }
                            }
                            centers.store(c as usize, &center);
                        }
                    }
                }
            });
    });
    Ok(centers.into_vec())
}
