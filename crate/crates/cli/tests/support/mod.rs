pub mod proxy;

use rand::Rng;
use rand_distr::StandardNormal;

pub const INF: u32 = u32::MAX;

/// Floyd–Warshall over an explicit adjacency matrix.
pub fn floyd_warshall(n: usize, edges: &[(u32, u32)]) -> Vec<u32> {
    let mut d = vec![INF; n * n];
    for i in 0..n {
        d[i * n + i] = 0;
    }
    for &(u, v) in edges {
        if u != v {
            d[u as usize * n + v as usize] = 1;
            d[v as usize * n + u as usize] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == INF {
                continue;
            }
            for j in 0..n {
                let dkj = d[k * n + j];
                if dkj != INF && dik + dkj < d[i * n + j] {
                    d[i * n + j] = dik + dkj;
                }
            }
        }
    }
    d
}

pub fn central_diff(x: &mut [f64], i: usize, h: f64, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let orig = x[i];
    x[i] = orig + h;
    let up = f(x);
    x[i] = orig - h;
    let down = f(x);
    x[i] = orig;
    (up - down) / (2.0 * h)
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

pub fn uniform_vec(r: &mut impl Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| r.random_range(-scale..scale)).collect()
}

/// Uniform direction, radius uniform in `[0, max_norm)`.
pub fn in_ball(r: &mut impl Rng, d: usize, max_norm: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| r.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            let radius = max_norm * r.random::<f64>();
            return v.iter().map(|x| x / n * radius).collect();
        }
    }
}
