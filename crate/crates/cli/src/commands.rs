//! Pipeline stages. Each stage reads its inputs from files and writes its
//! outputs atomically, so running them one by one and running `pipeline`
//! produce the same bytes.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use spdist_core::linreg::fit_linreg;
use spdist_core::metrics::{evaluate, EvalReport};
use spdist_core::mlp::{init_mlp, train_mlp};
use spdist_core::node2vec::generate_walks;
use spdist_core::pairs::{
    balance, default_class_target, default_length_cap, estimate_mean_distance, featurize, read_pairs_tsv,
    split_disjoint, DistancePair, Operator, PairDataset,
};
use spdist_core::poincare::train_poincare;
use spdist_core::predictor::{DistanceEstimator, Predictor};
use spdist_core::seed::{self, Stream};
use spdist_core::skipgram::train_skipgram;
use spdist_core::sssp::{bfs, Hops};
use spdist_core::{Embedding, Graph, NodeId};

use crate::config::{EmbeddingKind, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{io_error, write_atomic};

pub const EMBEDDING_FILE: &str = "embedding.txt";
pub const TRAIN_FILE: &str = "train.tsv";
pub const TEST_FILE: &str = "test.tsv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const MODEL_FILE: &str = "model.txt";
pub const TRAIN_REPORT_FILE: &str = "train_report.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const PER_LENGTH_FILE: &str = "per_length.csv";

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| io_error(path, e))
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    let (g, _) = Graph::parse_edge_list(open(path)?)?;
    Ok(g)
}

pub fn load_embedding(path: &Path) -> Result<(Embedding, Vec<String>)> {
    Ok(Embedding::read_word2vec(open(path)?)?)
}

fn label_index(labels: &[String]) -> HashMap<&str, NodeId> {
    labels.iter().enumerate().map(|(i, l)| (l.as_str(), i as NodeId)).collect()
}

fn lookup_label(index: &HashMap<&str, NodeId>, label: &str) -> Result<NodeId> {
    index
        .get(label)
        .copied()
        .ok_or_else(|| CliError::Data(format!("unknown node label {label:?}")))
}

#[derive(Debug, Clone)]
pub struct EmbedSummary {
    pub nodes: usize,
    pub dim: usize,
    pub elapsed: Duration,
}

pub fn embed_graph(g: &Graph, cfg: &RunConfig) -> Result<Embedding> {
    Ok(match cfg.kind {
        EmbeddingKind::Node2Vec => {
            let corpus = generate_walks(g, &cfg.walk_config())?;
            train_skipgram(&corpus, g.node_count(), &cfg.skipgram_config())?
        }
        EmbeddingKind::Poincare => train_poincare(g, &cfg.poincare_config())?.embedding,
    })
}

/// Trains the configured embedding and writes it in word2vec text format.
pub fn embed(cfg: &RunConfig, out: &Path) -> Result<EmbedSummary> {
    let g = load_graph(cfg.graph_path()?)?;
    let start = Instant::now();
    let emb = embed_graph(&g, cfg)?;
    let elapsed = start.elapsed();
    write_atomic(out, |w| emb.write_word2vec(g.labels(), w))?;
    Ok(EmbedSummary { nodes: emb.len(), dim: emb.dim(), elapsed })
}

#[derive(Debug, Clone)]
pub struct PairsSummary {
    pub length_cap: Hops,
    pub class_target: Option<usize>,
    pub train: usize,
    pub test: usize,
}

/// Landmark-disjoint train/test pair sets, with the training set balanced.
pub fn build_split(g: &Graph, cfg: &RunConfig) -> Result<(PairDataset, PairDataset, Hops, Option<usize>)> {
    let cap = match cfg.pairs.cap {
        Some(c) => c,
        None => {
            let mean = estimate_mean_distance(g, cfg.pairs.mean_samples, seed::derive(cfg.seed, Stream::Landmarks))?;
            default_length_cap(mean)
        }
    };
    let (train, test) = split_disjoint(g, &cfg.split_spec(cap))?;
    if !cfg.pairs.balance {
        return Ok((train, test, cap, None));
    }
    let target = cfg.pairs.class_target.unwrap_or_else(|| default_class_target(&train));
    let train = balance(&train, target, seed::derive(cfg.seed, Stream::Balance))?;
    Ok((train, test, cap, Some(target)))
}

/// Writes `train.tsv`, `test.tsv` and `histogram.csv` into `out_dir`.
pub fn pairs(cfg: &RunConfig, out_dir: &Path) -> Result<PairsSummary> {
    let g = load_graph(cfg.graph_path()?)?;
    let (train, test, length_cap, class_target) = build_split(&g, cfg)?;
    write_atomic(&out_dir.join(TRAIN_FILE), |w| train.write_tsv(g.labels(), w))?;
    write_atomic(&out_dir.join(TEST_FILE), |w| test.write_tsv(g.labels(), w))?;
    write_atomic(&out_dir.join(HISTOGRAM_FILE), |w| {
        writeln!(w, "split,distance,count")?;
        for (name, ds) in [("train", &train), ("test", &test)] {
            for (d, c) in ds.histogram() {
                writeln!(w, "{name},{d},{c}")?;
            }
        }
        Ok(())
    })?;
    Ok(PairsSummary { length_cap, class_target, train: train.len(), test: test.len() })
}

pub fn read_pairs(path: &Path, labels: &[String]) -> Result<Vec<DistancePair>> {
    Ok(read_pairs_tsv(open(path)?, &label_index(labels))?)
}

/// Whether training also sees the `(v, u)` orientation of each pair. Only
/// operators that depend on argument order gain anything from it.
pub fn trains_on_reversed(cfg: &RunConfig) -> bool {
    cfg.pairs.augment_reversed && matches!(cfg.operator, Operator::Sub | Operator::Concat)
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub input_dim: usize,
    pub rows: usize,
    pub epoch_mse: Vec<f64>,
}

pub fn fit_predictor(emb: &Embedding, train: &[DistancePair], cfg: &RunConfig, baseline: bool) -> Result<(Predictor, Vec<f64>)> {
    let data = featurize(emb, train, cfg.operator, trains_on_reversed(cfg))?;
    if baseline {
        let model = fit_linreg(&data, cfg.linreg.ridge)?;
        let p = Predictor::Linear(model);
        let rows: Vec<usize> = (0..data.rows()).collect();
        let mse = rows
            .iter()
            .map(|&r| p.forward(data.row(r)).map(|y| (y - data.targets[r]).powi(2)))
            .sum::<spdist_core::Result<f64>>()?
            / data.rows() as f64;
        return Ok((p, vec![mse]));
    }
    let mlp_cfg = cfg.mlp_config(data.cols);
    let mut model = init_mlp(&mlp_cfg)?;
    let report = train_mlp(&mut model, &data, &mlp_cfg)?;
    Ok((Predictor::Mlp(model), report.epoch_mse))
}

/// Composes features, fits the regressor, and writes `model.txt` and
/// `train_report.csv` into `out_dir`.
#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    pub baseline: bool,
    /// Rejects embeddings of any other dimension before training.
    pub expect_dim: Option<usize>,
    /// Writes the composed training features here as CSV.
    pub dump_features: Option<PathBuf>,
}

pub fn train(cfg: &RunConfig, embedding: &Path, train_pairs: &Path, out_dir: &Path, opts: &TrainOptions) -> Result<TrainSummary> {
    let (baseline, expect_dim) = (opts.baseline, opts.expect_dim);
    let (emb, labels) = load_embedding(embedding)?;
    if let Some(d) = expect_dim.filter(|&d| d != emb.dim()) {
        return Err(CliError::Usage(format!(
            "--dim {d} does not match the embedding dimension {}",
            emb.dim()
        )));
    }
    let pairs = read_pairs(train_pairs, &labels)?;
    if pairs.is_empty() {
        return Err(CliError::Data(format!("{}: no training pairs", train_pairs.display())));
    }
    let input_dim = cfg.operator.output_dim(emb.dim());
    if let Some(path) = &opts.dump_features {
        let data = featurize(&emb, &pairs, cfg.operator, trains_on_reversed(cfg))?;
        write_atomic(path, |w| data.write_csv(w))?;
    }
    let (predictor, epoch_mse) = fit_predictor(&emb, &pairs, cfg, baseline)?;
    write_model(&out_dir.join(MODEL_FILE), cfg.operator, &predictor)?;
    write_atomic(&out_dir.join(TRAIN_REPORT_FILE), |w| {
        writeln!(w, "epoch,mse")?;
        for (i, m) in epoch_mse.iter().enumerate() {
            writeln!(w, "{},{m}", i + 1)?;
        }
        Ok(())
    })?;
    let rows = pairs.len() * if trains_on_reversed(cfg) { 2 } else { 1 };
    Ok(TrainSummary { input_dim, rows, epoch_mse })
}

/// Model files start with an `operator <name>` line followed by the
/// regressor's own text format.
pub fn write_model(path: &Path, op: Operator, p: &Predictor) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "operator {op}")?;
        p.write_text(w)
    })
}

pub fn read_model(path: &Path) -> Result<(Operator, Predictor)> {
    let mut r = open(path)?;
    let mut first = String::new();
    r.read_line(&mut first).map_err(|e| io_error(path, e))?;
    let op = first
        .trim()
        .strip_prefix("operator ")
        .ok_or_else(|| CliError::Data(format!("{}: missing operator line", path.display())))?
        .parse::<Operator>()?;
    Ok((op, Predictor::read_text(r)?))
}

pub fn evaluate_pairs(emb: &Embedding, op: Operator, p: &Predictor, pairs: &[DistancePair]) -> Result<EvalReport> {
    let mut est = DistanceEstimator::new(emb, p, op)?;
    let preds = pairs
        .iter()
        .map(|q| est.estimate(q.u, q.v))
        .collect::<spdist_core::Result<Vec<u32>>>()?;
    let truths: Vec<Hops> = pairs.iter().map(|q| q.d).collect();
    Ok(evaluate(&preds, &truths)?)
}

/// Scores the model on the test pairs; writes `metrics.csv` and
/// `per_length.csv` into `out_dir`.
pub fn eval(embedding: &Path, test_pairs: &Path, model: &Path, out_dir: &Path) -> Result<EvalReport> {
    let (emb, labels) = load_embedding(embedding)?;
    let (op, predictor) = read_model(model)?;
    let pairs = read_pairs(test_pairs, &labels)?;
    let report = evaluate_pairs(&emb, op, &predictor, &pairs)?;
    write_atomic(&out_dir.join(METRICS_FILE), |w| report.write_metrics_csv(w))?;
    write_atomic(&out_dir.join(PER_LENGTH_FILE), |w| report.write_per_length_csv(w))?;
    Ok(report)
}

pub fn query(embedding: &Path, model: &Path, u: &str, v: &str) -> Result<u32> {
    let (emb, labels) = load_embedding(embedding)?;
    let (op, predictor) = read_model(model)?;
    let index = label_index(&labels);
    let (u, v) = (lookup_label(&index, u)?, lookup_label(&index, v)?);
    Ok(DistanceEstimator::new(&emb, &predictor, op)?.estimate(u, v)?)
}

/// Exact hop distance, `None` when `v` is unreachable from `u`.
pub fn oracle(graph: &Path, u: &str, v: &str) -> Result<Option<Hops>> {
    let g = load_graph(graph)?;
    let find = |l: &str| g.index_of(l).ok_or_else(|| CliError::Data(format!("unknown node label {l:?}")));
    let (u, v) = (find(u)?, find(v)?);
    Ok(bfs(&g, u)?.get(v))
}

#[derive(Debug, Clone)]
pub struct PipelineSummary {
    pub embed: EmbedSummary,
    pub pairs: PairsSummary,
    pub train: TrainSummary,
    pub report: EvalReport,
}

/// `embed`, `pairs`, `train` and `eval` in sequence, all files in `out_dir`.
pub fn pipeline(cfg: &RunConfig, out_dir: &Path, baseline: bool) -> Result<PipelineSummary> {
    let path = |name: &str| -> PathBuf { out_dir.join(name) };
    let embed_summary = embed(cfg, &path(EMBEDDING_FILE))?;
    let pairs_summary = pairs(cfg, out_dir)?;
    let train_summary = train(cfg, &path(EMBEDDING_FILE), &path(TRAIN_FILE), out_dir, &TrainOptions { baseline, ..Default::default() })?;
    let report = eval(&path(EMBEDDING_FILE), &path(TEST_FILE), &path(MODEL_FILE), out_dir)?;
    Ok(PipelineSummary { embed: embed_summary, pairs: pairs_summary, train: train_summary, report })
}
