use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use spdist_cli::commands;
use spdist_cli::config::{EmbeddingKind, RunConfig};
use spdist_cli::error::Result;
use spdist_core::pairs::Operator;
use spdist_core::sssp::Hops;

/// Approximate shortest-path hop distances from node embeddings.
#[derive(Parser)]
#[command(name = "spdist", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a node embedding and write it in word2vec text format.
    Embed {
        #[command(flatten)]
        run: RunFlags,
        #[command(flatten)]
        embed: EmbedFlags,
        /// Learning-rate / epoch overrides for the embedding trainer.
        #[command(flatten)]
        opt: OptFlags,
        #[arg(long, default_value = commands::EMBEDDING_FILE)]
        out: PathBuf,
    },
    /// Build landmark-disjoint train/test pair files.
    Pairs {
        #[command(flatten)]
        run: RunFlags,
        #[command(flatten)]
        pairs: PairFlags,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Fit the distance regressor on a training pair file.
    Train {
        #[command(flatten)]
        run: RunFlags,
        #[command(flatten)]
        model: ModelFlags,
        #[command(flatten)]
        opt: OptFlags,
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        /// Expected embedding dimension; a mismatch is rejected before training.
        #[arg(long)]
        dim: Option<usize>,
        /// Also write the composed training features as CSV.
        #[arg(long = "dump-features")]
        dump_features: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Score a trained model on a test pair file.
    Eval {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Predict the distance between two node labels.
    Query {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        model: PathBuf,
        u: String,
        v: String,
    },
    /// Exact BFS distance between two node labels.
    Oracle {
        #[arg(long)]
        graph: PathBuf,
        u: String,
        v: String,
    },
    /// embed, pairs, train and eval in one go.
    Pipeline {
        #[command(flatten)]
        run: RunFlags,
        #[command(flatten)]
        embed: EmbedFlags,
        #[command(flatten)]
        pairs: PairFlags,
        #[command(flatten)]
        model: ModelFlags,
        /// Learning-rate / epoch overrides for the regressor.
        #[command(flatten)]
        opt: OptFlags,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunFlags {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Single-threaded, bit-reproducible training.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct EmbedFlags {
    #[arg(long)]
    kind: Option<EmbeddingKind>,
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args)]
struct PairFlags {
    #[arg(long)]
    landmarks: Option<usize>,
    #[arg(long = "test-landmarks")]
    test_landmarks: Option<usize>,
    #[arg(long)]
    cap: Option<Hops>,
}

#[derive(Args)]
struct ModelFlags {
    #[arg(long)]
    operator: Option<Operator>,
    #[arg(long)]
    hidden: Option<usize>,
    /// Fit ridge linear regression instead of the neural network.
    #[arg(long)]
    baseline: bool,
}

#[derive(Args)]
struct OptFlags {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
}

fn base_config(run: &RunFlags) -> Result<RunConfig> {
    let mut cfg = RunConfig::load_or_default(run.config.as_deref())?;
    if let Some(g) = &run.graph {
        cfg.graph = Some(g.clone());
    }
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    cfg.deterministic |= run.deterministic;
    Ok(cfg)
}

impl EmbedFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(k) = self.kind {
            cfg.kind = k;
        }
        if let Some(d) = self.dim {
            cfg.dim = d;
        }
    }
}

impl PairFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(l) = self.landmarks {
            cfg.pairs.landmarks = l;
        }
        if let Some(t) = self.test_landmarks {
            cfg.pairs.test_landmarks = t;
        }
        if self.cap.is_some() {
            cfg.pairs.cap = self.cap;
        }
    }
}

impl ModelFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(op) = self.operator {
            cfg.operator = op;
        }
        if let Some(h) = self.hidden {
            cfg.mlp.hidden = h;
        }
    }
}

impl OptFlags {
    fn apply_embedding(&self, cfg: &mut RunConfig) {
        match cfg.kind {
            EmbeddingKind::Node2Vec => {
                if let Some(e) = self.epochs {
                    cfg.skipgram.epochs = e;
                }
                if let Some(lr) = self.lr {
                    cfg.skipgram.initial_lr = lr;
                }
            }
            EmbeddingKind::Poincare => {
                if let Some(e) = self.epochs {
                    cfg.poincare.epochs = e;
                }
                if let Some(lr) = self.lr {
                    cfg.poincare.lr = lr;
                }
            }
        }
    }

    fn apply_model(&self, cfg: &mut RunConfig) {
        if let Some(e) = self.epochs {
            cfg.mlp.epochs = e;
        }
        if let Some(lr) = self.lr {
            cfg.mlp.lr = lr;
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Embed { run, embed, opt, out } => {
            let mut cfg = base_config(&run)?;
            embed.apply(&mut cfg);
            opt.apply_embedding(&mut cfg);
            let s = commands::embed(&cfg, &out)?;
            println!(
                "embedded {} nodes in {} dimensions in {:.2}s -> {}",
                s.nodes,
                s.dim,
                s.elapsed.as_secs_f64(),
                out.display()
            );
        }
        Command::Pairs { run, pairs, out } => {
            let mut cfg = base_config(&run)?;
            pairs.apply(&mut cfg);
            let s = commands::pairs(&cfg, &out)?;
            println!("cap {}: {} train pairs, {} test pairs -> {}", s.length_cap, s.train, s.test, out.display());
        }
        Command::Train { run, model, opt, embedding, pairs, dim, dump_features, out } => {
            let mut cfg = base_config(&run)?;
            model.apply(&mut cfg);
            opt.apply_model(&mut cfg);
            let opts = commands::TrainOptions { baseline: model.baseline, expect_dim: dim, dump_features };
            let s = commands::train(&cfg, &embedding, &pairs, &out, &opts)?;
            let last = s.epoch_mse.last().copied().unwrap_or(f64::NAN);
            println!("trained on {} rows of {} features, final mse {last:.6}", s.rows, s.input_dim);
        }
        Command::Eval { embedding, pairs, model, out } => {
            let r = commands::eval(&embedding, &pairs, &model, &out)?;
            println!("mae {:.6} mre {:.6} over {} pairs", r.mae, r.mre, r.n_samples);
        }
        Command::Query { embedding, model, u, v } => {
            println!("{}", commands::query(&embedding, &model, &u, &v)?);
        }
        Command::Oracle { graph, u, v } => match commands::oracle(&graph, &u, &v)? {
            Some(d) => println!("{d}"),
            None => println!("unreachable"),
        },
        Command::Pipeline { run, embed, pairs, model, opt, out } => {
            let mut cfg = base_config(&run)?;
            embed.apply(&mut cfg);
            pairs.apply(&mut cfg);
            model.apply(&mut cfg);
            opt.apply_model(&mut cfg);
            let s = commands::pipeline(&cfg, &out, model.baseline)?;
            println!("embedding wall time {:.2}s", s.embed.elapsed.as_secs_f64());
            println!("mae {:.6} mre {:.6} over {} pairs", s.report.mae, s.report.mre, s.report.n_samples);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
