//! Analytic gradients against central finite differences.

mod common;

use common::{central_diff, rel_err, rng};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use spdist_core::mlp::{init_mlp, MlpConfig, MlpModel};
use spdist_core::pairs::FeatureMatrix;
use spdist_core::poincare::{edge_gradient, edge_loss};
use spdist_core::skipgram::{sgns_gradient, sgns_loss};

const TOL: f64 = 1e-4;
const H: f64 = 1e-5;

fn normal_vec(r: &mut impl Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| scale * Distribution::<f64>::sample(&StandardNormal, r)).collect()
}

fn in_ball(r: &mut impl Rng, d: usize, max_norm: f64) -> Vec<f64> {
    let v = normal_vec(r, d, 1.0);
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let radius = max_norm * r.random::<f64>();
    v.iter().map(|x| x / n * radius).collect()
}

#[test]
fn sgns_gradient_matches_finite_differences() {
    let mut r = rng(1);
    let d = 16;
    for _ in 0..100 {
        let mut center = normal_vec(&mut r, d, 0.5);
        let mut positive = normal_vec(&mut r, d, 0.5);
        let negs: Vec<Vec<f64>> = (0..5).map(|_| normal_vec(&mut r, d, 0.5)).collect();
        let neg_refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
        let g = sgns_gradient(&center, &positive, &neg_refs);
        for i in 0..d {
            let p = positive.clone();
            let num = central_diff(&mut center, i, H, |c| sgns_loss(c, &p, &neg_refs));
            assert!(rel_err(g.center[i], num) < TOL, "center[{i}]: {} vs {num}", g.center[i]);
            let c = center.clone();
            let num = central_diff(&mut positive, i, H, |p| sgns_loss(&c, p, &neg_refs));
            assert!(rel_err(g.positive[i], num) < TOL);
        }
        // One negative slot per point.
        let j = r.random_range(0..negs.len());
        let mut neg = negs[j].clone();
        for i in 0..d {
            let num = central_diff(&mut neg, i, H, |x| {
                let mut refs = neg_refs.clone();
                refs[j] = x;
                sgns_loss(&center, &positive, &refs)
            });
            assert!(rel_err(g.negatives[j][i], num) < TOL);
        }
    }
}

#[test]
fn poincare_gradient_matches_finite_differences() {
    let mut r = rng(2);
    let d = 6;
    for _ in 0..100 {
        let mut anchor = in_ball(&mut r, d, 0.9);
        let cands: Vec<Vec<f64>> = (0..11).map(|_| in_ball(&mut r, d, 0.9)).collect();
        let refs: Vec<&[f64]> = cands.iter().map(Vec::as_slice).collect();
        let g = edge_gradient(&anchor, &refs);
        assert!((g.loss - edge_loss(&anchor, &refs)).abs() < 1e-12);
        for i in 0..d {
            let num = central_diff(&mut anchor, i, H, |a| edge_loss(a, &refs));
            assert!(rel_err(g.anchor[i], num) < TOL, "anchor[{i}]: {} vs {num}", g.anchor[i]);
        }
        for j in [0, r.random_range(1..cands.len())] {
            let mut c = cands[j].clone();
            for i in 0..d {
                let num = central_diff(&mut c, i, H, |x| {
                    let mut rr = refs.clone();
                    rr[j] = x;
                    edge_loss(&anchor, &rr)
                });
                assert!(rel_err(g.candidates[j][i], num) < TOL, "cand {j}[{i}]");
            }
        }
    }
}

fn param_mut(m: &mut MlpModel, k: usize) -> &mut f64 {
    let (a, b, c) = (m.w1.len(), m.b1.len(), m.w2.len());
    match k {
        k if k < a => &mut m.w1[k],
        k if k < a + b => &mut m.b1[k - a],
        k if k < a + b + c => &mut m.w2[k - a - b],
        _ => &mut m.b2,
    }
}

#[test]
fn mlp_backprop_matches_finite_differences() {
    let mut r = rng(3);
    let (inputs, rows) = (12, 40);
    let data = FeatureMatrix {
        cols: inputs,
        data: normal_vec(&mut r, inputs * rows, 1.0),
        targets: (0..rows).map(|_| r.random_range(2.0..7.0)).collect(),
    };
    let idx: Vec<usize> = (0..rows).collect();
    let cfg = MlpConfig { hidden_dim: 20, seed: 4, ..MlpConfig::new(inputs) };
    let mut model = init_mlp(&cfg).unwrap();
    let (_, grad) = model.loss_and_gradient(&data, &idx).unwrap();
    let flat: Vec<f64> = grad.w1.iter().chain(&grad.b1).chain(&grad.w2).copied().chain([grad.b2]).collect();
    assert_eq!(flat.len(), model.parameter_count());

    let mut coords: Vec<usize> = (0..50).map(|_| r.random_range(0..flat.len())).collect();
    coords.push(flat.len() - 1);
    for k in coords {
        let orig = *param_mut(&mut model, k);
        *param_mut(&mut model, k) = orig + H;
        let up = model.loss(&data, &idx);
        *param_mut(&mut model, k) = orig - H;
        let down = model.loss(&data, &idx);
        *param_mut(&mut model, k) = orig;
        let num = (up - down) / (2.0 * H);
        assert!(rel_err(flat[k], num) < TOL, "param {k}: {} vs {num}", flat[k]);
    }
}
