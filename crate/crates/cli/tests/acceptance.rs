//! Acceptance suite. Runs as a plain binary and prints one PASS/FAIL line
//! per criterion, then a summary; exits nonzero if any criterion fails.
//!
//! The Facebook criteria read the SNAP `facebook_combined.txt` edge list from
//! `$SPDIST_FACEBOOK_EDGES` or `data/facebook_combined.txt` at the workspace
//! root. Without it they run on a synthetic graph of the same size and
//! density (see `support::proxy`), their lines are tagged `[proxy]`, and
//! their failures are reported without failing the run.

mod support;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdist_cli::commands::{self, evaluate_pairs, fit_predictor, load_embedding, load_graph, read_pairs};
use spdist_cli::{EmbeddingKind, RunConfig};
use spdist_core::metrics::EvalReport;
use spdist_core::mlp::{init_mlp, MlpConfig, MlpModel};
use spdist_core::pairs::{compose, DistancePair, FeatureMatrix, Operator};
use spdist_core::poincare::{edge_gradient, edge_loss, poincare_distance, train_poincare_with, PoincareConfig};
use spdist_core::predictor::{DistanceEstimator, Predictor};
use spdist_core::skipgram::{sgns_gradient, sgns_loss};
use spdist_core::sssp::bfs;
use spdist_core::{Embedding, Geometry, Graph};
use support::{central_diff, floyd_warshall, in_ball, rel_err, uniform_vec};

const GROUND_TRUTH_GRAPHS: usize = 50;
const GROUND_TRUTH_MAX_N: usize = 200;
const GROUND_TRUTH_BUDGET: Duration = Duration::from_secs(10);

const GRADIENT_TOL: f64 = 1e-4;
const GRADIENT_POINTS: usize = 100;
const MLP_GRADIENT_POINTS: usize = 50;
const GRADIENT_BUDGET: Duration = Duration::from_secs(30);
const FD_STEP: f64 = 1e-5;

const OPERATOR_BUDGET: Duration = Duration::from_secs(1);

const ORIGIN_DISTANCE_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;
const GEOMETRY_POINTS: usize = 1_000;

const MAE_LIMIT: f64 = 0.30;
const MRE_LIMIT: f64 = 0.10;
const PIPELINE_BUDGET: Duration = Duration::from_secs(30 * 60);
const LINREG_MAE_RANGE: (f64, f64) = (0.35, 0.80);
const FACEBOOK_NODES: usize = 4_039;
const TRAIN_LANDMARKS: usize = 100;
const LENGTH_CAP: u32 = 7;
const ROOT_SEED: u64 = 0;
const PROXY_SEED: u64 = 1;

/// Criteria defined on the Facebook graph.
const DATASET_CRITERIA: [u8; 6] = [5, 6, 7, 8, 9, 11];

const LATENCY_QUERIES: usize = 10_000;
const LATENCY_SMALL: usize = 4_000;
const LATENCY_LARGE: usize = 100_000;
const LATENCY_RATIO_LIMIT: f64 = 2.0;

struct Outcome {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn line(o: &Outcome) -> String {
    format!(
        "{} {:>2} {:<32} {} ({:.1}s)",
        if o.pass { "PASS" } else { "FAIL" },
        o.id,
        o.name,
        o.detail,
        o.elapsed.as_secs_f64()
    )
}

fn run(id: u8, name: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f();
    let o = Outcome { id, name, pass, detail, elapsed: start.elapsed() };
    println!("{}", line(&o));
    o
}

fn ground_truth() -> (bool, String) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut mismatches, mut checked) = (0usize, 0usize);
    for i in 0..GROUND_TRUTH_GRAPHS {
        let n = rng.random_range(20..=GROUND_TRUTH_MAX_N);
        // Mean degree from 0.5 (fragmented) to about 30 (dense).
        let mean_degree = 0.5 * 60f64.powf(i as f64 / (GROUND_TRUTH_GRAPHS - 1) as f64);
        let p = (mean_degree / (n - 1) as f64).min(1.0);
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(n, &edges).unwrap();
        let fw = floyd_warshall(n, &edges);
        for s in g.nodes() {
            let d = bfs(&g, s).unwrap();
            for v in 0..n {
                checked += 1;
                mismatches += (d.dist[v] != fw[s as usize * n + v]) as usize;
            }
        }
    }
    let t = start.elapsed();
    (
        mismatches == 0 && t < GROUND_TRUTH_BUDGET,
        format!("{GROUND_TRUTH_GRAPHS} graphs, {checked} distances, {mismatches} mismatches vs Floyd-Warshall"),
    )
}

fn mlp_param(m: &mut MlpModel, k: usize) -> &mut f64 {
    let (a, b, c) = (m.w1.len(), m.b1.len(), m.w2.len());
    match k {
        k if k < a => &mut m.w1[k],
        k if k < a + b => &mut m.b1[k - a],
        k if k < a + b + c => &mut m.w2[k - a - b],
        _ => &mut m.b2,
    }
}

fn gradients() -> (bool, String) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut sgns_worst, mut poincare_worst, mut mlp_worst) = (0.0f64, 0.0f64, 0.0f64);

    for _ in 0..GRADIENT_POINTS {
        let d = 32;
        let mut center = uniform_vec(&mut rng, d, 1.0);
        let positive = uniform_vec(&mut rng, d, 1.0);
        let negs: Vec<Vec<f64>> = (0..5).map(|_| uniform_vec(&mut rng, d, 1.0)).collect();
        let refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
        let g = sgns_gradient(&center, &positive, &refs);
        for i in 0..d {
            let num = central_diff(&mut center, i, FD_STEP, |c| sgns_loss(c, &positive, &refs));
            sgns_worst = sgns_worst.max(rel_err(g.center[i], num));
        }
    }

    for _ in 0..GRADIENT_POINTS {
        let d = 8;
        let mut anchor = in_ball(&mut rng, d, 0.9);
        let cands: Vec<Vec<f64>> = (0..11).map(|_| in_ball(&mut rng, d, 0.9)).collect();
        let refs: Vec<&[f64]> = cands.iter().map(Vec::as_slice).collect();
        let g = edge_gradient(&anchor, &refs);
        for i in 0..d {
            let num = central_diff(&mut anchor, i, FD_STEP, |a| edge_loss(a, &refs));
            poincare_worst = poincare_worst.max(rel_err(g.anchor[i], num));
        }
    }

    for point in 0..MLP_GRADIENT_POINTS {
        let (inputs, rows) = (16, 32);
        let data = FeatureMatrix {
            cols: inputs,
            data: uniform_vec(&mut rng, inputs * rows, 1.0),
            targets: (0..rows).map(|_| rng.random_range(2.0..7.0)).collect(),
        };
        let idx: Vec<usize> = (0..rows).collect();
        let cfg = MlpConfig { hidden_dim: 24, seed: point as u64, ..MlpConfig::new(inputs) };
        let mut model = init_mlp(&cfg).unwrap();
        let (_, g) = model.loss_and_gradient(&data, &idx).unwrap();
        let flat: Vec<f64> = g.w1.iter().chain(&g.b1).chain(&g.w2).copied().chain([g.b2]).collect();
        let k = rng.random_range(0..flat.len());
        let orig = *mlp_param(&mut model, k);
        *mlp_param(&mut model, k) = orig + FD_STEP;
        let up = model.loss(&data, &idx);
        *mlp_param(&mut model, k) = orig - FD_STEP;
        let down = model.loss(&data, &idx);
        *mlp_param(&mut model, k) = orig;
        mlp_worst = mlp_worst.max(rel_err(flat[k], (up - down) / (2.0 * FD_STEP)));
    }

    let t = start.elapsed();
    let worst = sgns_worst.max(poincare_worst).max(mlp_worst);
    (
        worst < GRADIENT_TOL && t < GRADIENT_BUDGET,
        format!(
            "max rel err: sgns {sgns_worst:.1e} ({GRADIENT_POINTS} pts), poincare {poincare_worst:.1e} ({GRADIENT_POINTS} pts), mlp {mlp_worst:.1e} ({MLP_GRADIENT_POINTS} pts)"
        ),
    )
}

fn operators() -> (bool, String) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = 0usize;
    let cases = 2_000;
    for _ in 0..cases {
        let d = rng.random_range(1..=64);
        let (a, b) = (uniform_vec(&mut rng, d, 5.0), uniform_vec(&mut rng, d, 5.0));
        let sub_ab = compose(&a, &b, Operator::Sub).unwrap();
        let sub_ba = compose(&b, &a, Operator::Sub).unwrap();
        failures += !sub_ab.iter().zip(&sub_ba).all(|(x, y)| *x == -*y) as usize;
        failures += !compose(&a, &a, Operator::Sub).unwrap().iter().all(|&x| x == 0.0) as usize;
        let cat = compose(&a, &b, Operator::Concat).unwrap();
        failures += (cat.len() != 2 * d || cat[..d] != a[..] || cat[d..] != b[..]) as usize;
        for op in [Operator::Avg, Operator::Hadamard] {
            failures += (compose(&a, &b, op).unwrap() != compose(&b, &a, op).unwrap()) as usize;
        }
    }
    failures += (compose(&[1.0, 3.0], &[3.0, 1.0], Operator::Avg).unwrap() != [2.0, 2.0]) as usize;
    failures += (compose(&[2.0, 0.0], &[3.0, 5.0], Operator::Hadamard).unwrap() != [6.0, 0.0]) as usize;
    failures += compose(&[1.0], &[1.0, 2.0], Operator::Sub).is_ok() as usize;
    let t = start.elapsed();
    (failures == 0 && t < OPERATOR_BUDGET, format!("{cases} random vector pairs, {failures} violations"))
}

fn geometry() -> (bool, String) {
    // Containment is observed on every update of a full training run.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 300;
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.random::<f64>() < 0.02 {
                edges.push((u, v));
            }
        }
    }
    let g = Graph::from_edges(n, &edges).unwrap();
    let cfg = PoincareConfig { dim: 10, seed: 4, ..Default::default() };
    let (mut steps, mut escapes, mut max_norm) = (0usize, 0usize, 0.0f64);
    train_poincare_with(&g, &cfg, |view| {
        steps += 1;
        for &row in view.touched {
            let x = &view.vectors[row * view.dim..(row + 1) * view.dim];
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            max_norm = max_norm.max(norm);
            escapes += (norm >= 1.0) as usize;
        }
    })
    .unwrap();

    let mut origin_worst = 0.0f64;
    let mut symmetry_worst = 0.0f64;
    for _ in 0..GEOMETRY_POINTS {
        let d = rng.random_range(1..=32);
        let x = in_ball(&mut rng, d, 0.999);
        let y = in_ball(&mut rng, d, 0.999);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let got = poincare_distance(&vec![0.0; d], &x).unwrap();
        origin_worst = origin_worst.max((got - 2.0 * norm.atanh()).abs());
        let (xy, yx) = (poincare_distance(&x, &y).unwrap(), poincare_distance(&y, &x).unwrap());
        symmetry_worst = symmetry_worst.max((xy - yx).abs());
    }
    (
        steps > 0 && escapes == 0 && origin_worst <= ORIGIN_DISTANCE_TOL && symmetry_worst <= SYMMETRY_TOL,
        format!(
            "{steps} steps, {escapes} escapes (max norm {max_norm:.6}); |d(0,x)-2artanh|x|| max {origin_worst:.1e}; asymmetry max {symmetry_worst:.1e}"
        ),
    )
}

fn latency() -> (bool, String) {
    let dim = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let model = Predictor::Mlp(init_mlp(&MlpConfig { seed: 10, ..MlpConfig::new(dim) }).unwrap());
    let mut mean_for = |n: usize| {
        let data = uniform_vec(&mut rng, n * dim, 0.5);
        let emb = Embedding::from_vec(dim, Geometry::Euclidean, data).unwrap();
        let queries: Vec<(u32, u32)> = (0..LATENCY_QUERIES)
            .map(|_| (rng.random_range(0..n as u32), rng.random_range(0..n as u32)))
            .collect();
        let mut est = DistanceEstimator::new(&emb, &model, Operator::Avg).unwrap();
        let mut sink = 0u64;
        for &(u, v) in queries.iter().take(1_000) {
            sink += est.estimate(u, v).unwrap() as u64;
        }
        let start = Instant::now();
        for &(u, v) in &queries {
            sink += est.estimate(u, v).unwrap() as u64;
        }
        let mean = start.elapsed().as_secs_f64() / LATENCY_QUERIES as f64;
        std::hint::black_box(sink);
        mean
    };
    let small = mean_for(LATENCY_SMALL);
    let large = mean_for(LATENCY_LARGE);
    let ratio = small.max(large) / small.min(large);
    (
        ratio < LATENCY_RATIO_LIMIT,
        format!(
            "mean query {:.2}us at {LATENCY_SMALL} nodes, {:.2}us at {LATENCY_LARGE} nodes, ratio {ratio:.2}",
            small * 1e6,
            large * 1e6
        ),
    )
}

/// Facebook graph (or its stand-in) plus everything the later criteria reuse.
struct Facebook {
    graph_path: PathBuf,
    proxy: bool,
    _dir: tempfile::TempDir,
    work: PathBuf,
}

impl Facebook {
    fn prepare() -> Facebook {
        let dir = tempfile::tempdir().unwrap();
        let work = dir.path().to_path_buf();
        let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
        let real = std::env::var_os("SPDIST_FACEBOOK_EDGES")
            .map(PathBuf::from)
            .or_else(|| Some(root.join("data/facebook_combined.txt")))
            .filter(|p| p.is_file());
        match real {
            Some(p) => Facebook { graph_path: p, proxy: false, _dir: dir, work },
            None => {
                let p = work.join("facebook_proxy.txt");
                fs::write(&p, support::proxy::edge_list_text(PROXY_SEED)).unwrap();
                Facebook { graph_path: p, proxy: true, _dir: dir, work }
            }
        }
    }

    fn tag(&self) -> &'static str {
        if self.proxy {
            "[proxy] "
        } else {
            ""
        }
    }

    fn config(&self) -> RunConfig {
        let mut cfg = RunConfig {
            graph: Some(self.graph_path.clone()),
            kind: EmbeddingKind::Node2Vec,
            dim: 128,
            operator: Operator::Avg,
            seed: ROOT_SEED,
            deterministic: true,
            ..Default::default()
        };
        cfg.pairs.landmarks = TRAIN_LANDMARKS;
        cfg.pairs.cap = Some(LENGTH_CAP);
        cfg
    }
}

fn fmt_mae(r: &EvalReport) -> String {
    format!("mae {:.3} mre {:.3}", r.mae, r.mre)
}

fn main() {
    println!("acceptance suite");
    let mut outcomes = vec![
        run(1, "ground-truth exactness", ground_truth),
        run(2, "gradient suite", gradients),
        run(3, "operator identities", operators),
        run(4, "poincare geometry", geometry),
        run(10, "query latency independence", latency),
    ];

    let fb = Facebook::prepare();
    let tag = fb.tag();
    let g = load_graph(&fb.graph_path).unwrap();
    println!(
        "graph {}: {} nodes, {} edges{}",
        fb.graph_path.display(),
        g.node_count(),
        g.edge_count(),
        if fb.proxy { " (synthetic stand-in; Facebook edge list not found)" } else { "" }
    );
    let cfg = fb.config();
    let run_a = fb.work.join("run_a");

    let mut summary = None;
    outcomes.push(run(5, "end-to-end reproduction", || {
        let start = Instant::now();
        let s = commands::pipeline(&cfg, &run_a, false).unwrap();
        let wall = start.elapsed();
        let pass = s.report.mae <= MAE_LIMIT
            && s.report.mre <= MRE_LIMIT
            && wall <= PIPELINE_BUDGET
            && g.node_count() == FACEBOOK_NODES;
        let detail = format!(
            "{tag}n2v-128 avg: {} (limits {MAE_LIMIT}/{MRE_LIMIT}), {} train / {} test pairs, wall {:.0}s",
            fmt_mae(&s.report),
            s.pairs.train,
            s.pairs.test,
            wall.as_secs_f64()
        );
        summary = Some(s);
        (pass, detail)
    }));
    let summary = summary.unwrap();
    let n2v_avg = summary.report.clone();

    let (emb128, labels) = load_embedding(&run_a.join(commands::EMBEDDING_FILE)).unwrap();
    let train: Vec<DistancePair> = read_pairs(&run_a.join(commands::TRAIN_FILE), &labels).unwrap();
    let test: Vec<DistancePair> = read_pairs(&run_a.join(commands::TEST_FILE), &labels).unwrap();
    let score = |emb: &Embedding, op: Operator, baseline: bool| {
        let c = RunConfig { operator: op, ..cfg.clone() };
        let (p, _) = fit_predictor(emb, &train, &c, baseline).unwrap();
        evaluate_pairs(emb, op, &p, &test).unwrap()
    };

    outcomes.push(run(6, "baseline ordering", || {
        let lin = score(&emb128, Operator::Avg, true);
        let pass = n2v_avg.mae < lin.mae && (LINREG_MAE_RANGE.0..=LINREG_MAE_RANGE.1).contains(&lin.mae);
        (
            pass,
            format!(
                "{tag}mlp mae {:.3} vs linear mae {:.3} (linear range [{}, {}])",
                n2v_avg.mae, lin.mae, LINREG_MAE_RANGE.0, LINREG_MAE_RANGE.1
            ),
        )
    }));

    outcomes.push(run(8, "dimension effect", || {
        let c32 = RunConfig { dim: 32, ..cfg.clone() };
        let emb32 = commands::embed_graph(&g, &c32).unwrap();
        let r32 = score(&emb32, Operator::Avg, false);
        (
            n2v_avg.mae <= r32.mae,
            format!("{tag}n2v avg mae d=128 {:.3} vs d=32 {:.3}", n2v_avg.mae, r32.mae),
        )
    }));

    outcomes.push(run(9, "per-length trend", || {
        let at = |len: u32| n2v_avg.per_length.get(&len).map(|s| s.mae);
        let detail_lengths: Vec<String> = n2v_avg
            .per_length
            .iter()
            .map(|(l, s)| format!("{l}:{:.2}", s.mae))
            .collect();
        match (at(2), at(LENGTH_CAP)) {
            (Some(short), Some(long)) => (
                short <= long,
                format!("{tag}mae at 2 = {short:.3}, at cap {LENGTH_CAP} = {long:.3} [{}]", detail_lengths.join(" ")),
            ),
            _ => (false, format!("{tag}no test pairs at length 2 or {LENGTH_CAP}")),
        }
    }));

    outcomes.push(run(7, "embedding ordering", || {
        let best = |emb: &Embedding, known: Option<(Operator, f64)>| {
            let mut all: Vec<(Operator, f64)> = known.into_iter().collect();
            for op in Operator::ALL {
                if known.map_or(true, |(k, _)| k != op) {
                    all.push((op, score(emb, op, false).mae));
                }
            }
            all.sort_by(|a, b| a.1.total_cmp(&b.1));
            all
        };
        let n2v = best(&emb128, Some((Operator::Avg, n2v_avg.mae)));
        let pc = RunConfig { kind: EmbeddingKind::Poincare, ..cfg.clone() };
        let poincare = commands::embed_graph(&g, &pc).unwrap();
        let hyp = best(&poincare, None);
        let list = |v: &[(Operator, f64)]| v.iter().map(|(o, m)| format!("{o}:{m:.3}")).collect::<Vec<_>>().join(" ");
        (
            n2v[0].1 <= hyp[0].1,
            format!("{tag}best n2v {:.3} vs best poincare {:.3} [n2v {}] [poincare {}]", n2v[0].1, hyp[0].1, list(&n2v), list(&hyp)),
        )
    }));

    outcomes.push(run(11, "determinism", || {
        let run_b = fb.work.join("run_b");
        commands::pipeline(&cfg, &run_b, false).unwrap();
        let same = |name: &str| fs::read(run_a.join(name)).unwrap() == fs::read(run_b.join(name)).unwrap();
        let files = [commands::METRICS_FILE, commands::PER_LENGTH_FILE];
        let differing: Vec<&str> = files.iter().copied().filter(|f| !same(f)).collect();
        (
            differing.is_empty(),
            format!("{tag}two deterministic pipeline runs; differing metrics files: {differing:?}"),
        )
    }));

    outcomes.sort_by_key(|o| o.id);
    println!("\nsummary");
    for o in &outcomes {
        println!("{}", line(o));
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    // Proxy outcomes describe the stand-in graph, not the dataset the
    // thresholds were set on, so only real-data failures set the exit status.
    let gating = outcomes
        .iter()
        .filter(|o| !o.pass && !(fb.proxy && DATASET_CRITERIA.contains(&o.id)))
        .count();
    if fb.proxy && gating < failed {
        println!(
            "{} of the failures are [proxy] results and do not gate; set SPDIST_FACEBOOK_EDGES to the SNAP edge list to evaluate them",
            failed - gating
        );
    }
    if gating > 0 {
        std::process::exit(1);
    }
}
