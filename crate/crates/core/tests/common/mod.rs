//! Reference implementations used as test oracles. Everything here is
//! written from the likelihood definitions with plain loops and shares no
//! code with the library's evaluators.
#![allow(dead_code)]

use nalgebra::DMatrix;
use prosgpv::simulation::{draw_dataset, SurvivalSettings};
use prosgpv::{Dataset, Family, Response};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dataset with a mild signal on the first columns.
pub fn random_dataset(family: Family, n: usize, p: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let beta: Vec<f64> = (0..p).map(|j| if j < 2 { r.random_range(-0.6..0.6) } else { 0.0 }).collect();
    loop {
        let rho = r.random_range(0.0..0.5);
        if let Ok(d) = draw_dataset(family, n, &beta, rho, 1.0, &SurvivalSettings::default(), &mut r) {
            if nondegenerate(&d) {
                return d;
            }
        }
    }
}

fn nondegenerate(d: &Dataset) -> bool {
    match d.y() {
        Response::Binary(y) => {
            let ones = y.iter().filter(|&&v| v == 1.0).count();
            ones >= 3 && ones + 3 <= y.len()
        }
        Response::Count(y) => y.iter().any(|&v| v != y[0]),
        Response::Survival { status, .. } => status.iter().filter(|&&s| s).count() >= 3,
    }
}

/// Rows of the design with the intercept column prepended for GLMs.
pub fn design(family: Family, x: &DMatrix<f64>, cols: &[usize]) -> Vec<Vec<f64>> {
    (0..x.nrows())
        .map(|i| {
            let mut row = Vec::new();
            if family != Family::Cox {
                row.push(1.0);
            }
            row.extend(cols.iter().map(|&j| x[(i, j)]));
            row
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean negative log-likelihood (GLM) or Breslow negative log partial
/// likelihood over n, straight from the definitions.
pub fn naive_loss(z: &[Vec<f64>], y: &Response, theta: &[f64]) -> f64 {
    let n = z.len() as f64;
    let eta: Vec<f64> = z.iter().map(|row| dot(row, theta)).collect();
    match y {
        Response::Binary(y) => {
            -eta.iter()
                .zip(y)
                .map(|(e, yi)| yi * e - (1.0 + e.exp()).ln())
                .sum::<f64>()
                / n
        }
        Response::Count(y) => -eta.iter().zip(y).map(|(e, yi)| yi * e - e.exp()).sum::<f64>() / n,
        Response::Survival { time, status } => {
            let mut total = 0.0;
            for i in 0..time.len() {
                if status[i] {
                    let risk: f64 = (0..time.len())
                        .filter(|&j| time[j] >= time[i])
                        .map(|j| eta[j].exp())
                        .sum();
                    total += eta[i] - risk.ln();
                }
            }
            -total / n
        }
    }
}

/// Gradient of [`naive_loss`].
pub fn naive_gradient(z: &[Vec<f64>], y: &Response, theta: &[f64]) -> Vec<f64> {
    let n = z.len();
    let d = theta.len();
    let eta: Vec<f64> = z.iter().map(|row| dot(row, theta)).collect();
    let mut g = vec![0.0; d];
    match y {
        Response::Binary(_) | Response::Count(_) => {
            let (y, count) = match y {
                Response::Binary(v) => (v, false),
                Response::Count(v) => (v, true),
                _ => unreachable!(),
            };
            for i in 0..n {
                let mu = if count { eta[i].exp() } else { 1.0 / (1.0 + (-eta[i]).exp()) };
                for k in 0..d {
                    g[k] += (mu - y[i]) * z[i][k];
                }
            }
        }
        Response::Survival { time, status } => {
            for i in 0..n {
                if !status[i] {
                    continue;
                }
                let mut s0 = 0.0;
                let mut s1 = vec![0.0; d];
                for j in 0..n {
                    if time[j] >= time[i] {
                        let w = eta[j].exp();
                        s0 += w;
                        for k in 0..d {
                            s1[k] += w * z[j][k];
                        }
                    }
                }
                for k in 0..d {
                    g[k] -= z[i][k] - s1[k] / s0;
                }
            }
        }
    }
    g.iter().map(|v| v / n as f64).collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Unpenalized minimizer by gradient descent with Barzilai–Borwein steps
/// and a backtracking safeguard.
pub fn gd_minimize(z: &[Vec<f64>], y: &Response, tol: f64, max_iter: usize) -> Option<Vec<f64>> {
    let d = z[0].len();
    let f = |t: &[f64]| naive_loss(z, y, t);
    let grad = |t: &[f64]| naive_gradient(z, y, t);
    let mut theta = vec![0.0; d];
    let mut g = grad(&theta);
    let mut step = 1.0;
    for _ in 0..max_iter {
        if inf_norm(&g) < tol {
            return Some(theta);
        }
        let fx = f(&theta);
        let gg = dot(&g, &g);
        let mut t = step;
        let mut next: Vec<f64>;
        loop {
            next = theta.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let fn_ = f(&next);
            if fn_.is_finite() && fn_ <= fx - 1e-4 * t * gg {
                break;
            }
            t *= 0.5;
            if t < 1e-20 {
                // rounding floor reached
                return (inf_norm(&g) < 1e-7).then_some(theta);
            }
        }
        let g_next = grad(&next);
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        if s.iter().all(|&v| v == 0.0) {
            return (inf_norm(&g) < 1e-7).then_some(theta);
        }
        let sy = dot(&s, &yv);
        step = if sy > 0.0 { dot(&s, &s) / sy } else { 1.0 };
        theta = next;
        g = g_next;
    }
    None
}

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Lasso minimizer of `loss + λ Σ|β_j|` (intercept, when present, at
/// index 0 and unpenalized) by accelerated proximal gradient with
/// backtracking and restarts.
pub fn fista(family: Family, z: &[Vec<f64>], y: &Response, lambda: f64, iters: usize) -> Vec<f64> {
    let d = z[0].len();
    let first_penalized = usize::from(family != Family::Cox);
    let f = |t: &[f64]| naive_loss(z, y, t);
    let grad = |t: &[f64]| naive_gradient(z, y, t);
    let penalty = |t: &[f64]| lambda * t[first_penalized..].iter().map(|v| v.abs()).sum::<f64>();
    let prox = |v: Vec<f64>, t: f64| -> Vec<f64> {
        v.into_iter()
            .enumerate()
            .map(|(k, x)| if k < first_penalized { x } else { soft(x, t * lambda) })
            .collect()
    };
    let mut x = vec![0.0; d];
    let mut yk = x.clone();
    let mut tk: f64 = 1.0;
    let mut lip: f64 = 1.0;
    let mut obj = f(&x) + penalty(&x);
    for _ in 0..iters {
        let fy = f(&yk);
        let gy = grad(&yk);
        let next = loop {
            let step = 1.0 / lip;
            let cand = prox(yk.iter().zip(&gy).map(|(a, b)| a - step * b).collect(), step);
            let diff: Vec<f64> = cand.iter().zip(&yk).map(|(a, b)| a - b).collect();
            let q = fy + dot(&gy, &diff) + lip / 2.0 * dot(&diff, &diff);
            let fc = f(&cand);
            if fc.is_finite() && fc <= q + 1e-15 {
                break cand;
            }
            lip *= 2.0;
        };
        let new_obj = f(&next) + penalty(&next);
        if new_obj > obj {
            // restart momentum
            yk = x.clone();
            tk = 1.0;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * tk * tk).sqrt()) / 2.0;
        yk = next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + (tk - 1.0) / t_next * (a - b))
            .collect();
        x = next;
        tk = t_next;
        obj = new_obj;
        lip = (lip / 1.5).max(1e-3);
    }
    x
}

/// Central finite-difference gradient of `f`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[k] += h;
            b[k] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}
