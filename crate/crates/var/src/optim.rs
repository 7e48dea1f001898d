//! Gradient-based minimizers with multi-restart driver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::collections::VecDeque;

/// A differentiable scalar function of a flat real vector.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    /// Returns `f(x)` and writes `∇f(x)` into `grad`.
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn value(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; self.dim()];
        self.value_grad(x, &mut g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lbfgs,
    Momentum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    pub restarts: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub seed: u64,
    pub memory_size: usize,
    pub step_size: f64,
    pub momentum: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::Lbfgs,
            restarts: 10,
            max_iterations: 1000,
            gradient_tolerance: 1e-10,
            seed: 0,
            memory_size: 10,
            step_size: 0.05,
            momentum: 0.9,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmeEstimate {
    pub value: f64,
    pub best_params: Vec<f64>,
    pub per_restart_values: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

struct Probe {
    alpha: f64,
    f: f64,
    dg: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

fn probe(obj: &dyn Objective, x: &[f64], d: &[f64], alpha: f64) -> Probe {
    let xn = axpy(x, alpha, d);
    let mut g = vec![0.0; x.len()];
    let f = obj.value_grad(&xn, &mut g);
    let dg = dot(&g, d);
    Probe { alpha, f, dg, x: xn, g }
}

/// Minimizer of the cubic interpolating `(a, fa, ga)` and `(b, fb, gb)`,
/// safeguarded to the interior of the bracket.
fn cubic_min(a: f64, fa: f64, ga: f64, b: f64, fb: f64, gb: f64) -> f64 {
    let lo = a.min(b);
    let hi = a.max(b);
    let d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - ga * gb;
    let t = if disc >= 0.0 {
        let d2 = (b - a).signum() * disc.sqrt();
        b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2)
    } else {
        f64::NAN
    };
    let width = hi - lo;
    if t.is_finite() && t > lo + 0.1 * width && t < hi - 0.1 * width {
        t
    } else {
        0.5 * (lo + hi)
    }
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

/// Strong-Wolfe line search along `d` starting from step `alpha0`.
fn strong_wolfe(obj: &dyn Objective, x: &[f64], f0: f64, g0d: f64, d: &[f64], alpha0: f64) -> Option<Probe> {
    let mut prev = Probe {
        alpha: 0.0,
        f: f0,
        dg: g0d,
        x: x.to_vec(),
        g: Vec::new(),
    };
    let mut alpha = alpha0;
    for i in 0..30 {
        let cur = probe(obj, x, d, alpha);
        if !cur.f.is_finite() {
            alpha = 0.5 * (prev.alpha + alpha);
            continue;
        }
        if cur.f > f0 + C1 * alpha * g0d || (i > 0 && cur.f >= prev.f) {
            return zoom(obj, x, f0, g0d, d, prev, cur);
        }
        if cur.dg.abs() <= -C2 * g0d {
            return Some(cur);
        }
        if cur.dg >= 0.0 {
            return zoom(obj, x, f0, g0d, d, cur, prev);
        }
        let next = (2.0 * alpha).min(alpha + 1e3 * alpha.max(1.0));
        prev = cur;
        alpha = next;
    }
    None
}

fn zoom(obj: &dyn Objective, x: &[f64], f0: f64, g0d: f64, d: &[f64], mut lo: Probe, mut hi: Probe) -> Option<Probe> {
    for _ in 0..40 {
        let alpha = cubic_min(lo.alpha, lo.f, lo.dg, hi.alpha, hi.f, hi.dg);
        if (hi.alpha - lo.alpha).abs() < 1e-16 * lo.alpha.abs().max(1e-300) {
            break;
        }
        let cur = probe(obj, x, d, alpha);
        if cur.f > f0 + C1 * alpha * g0d || cur.f >= lo.f {
            hi = cur;
        } else {
            if cur.dg.abs() <= -C2 * g0d {
                return Some(cur);
            }
            if cur.dg * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    (lo.alpha > 0.0 && lo.f < f0).then_some(lo)
}

pub fn lbfgs(obj: &dyn Objective, x0: &[f64], cfg: &OptimizerConfig) -> RunResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = obj.value_grad(&x, &mut g);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut stalls = 0;
    for it in 0..cfg.max_iterations {
        if inf_norm(&g) <= cfg.gradient_tolerance {
            return RunResult { x, value: f, iterations: it, converged: true };
        }
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut gd = dot(&g, &d);
        if gd >= 0.0 || !gd.is_finite() {
            hist.clear();
            d = g.iter().map(|v| -v).collect();
            gd = dot(&g, &d);
        }
        let alpha0 = if hist.is_empty() { (1.0 / inf_norm(&g)).min(1.0) } else { 1.0 };
        let step = match strong_wolfe(obj, &x, f, gd, &d, alpha0) {
            Some(p) => p,
            None if !hist.is_empty() => {
                hist.clear();
                continue;
            }
            None => return RunResult { x, value: f, iterations: it, converged: true },
        };
        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 && sy.is_finite() {
            if hist.len() == cfg.memory_size {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        let decrease = f - step.f;
        if decrease <= 1e-16 * f.abs().max(1e-300) {
            stalls += 1;
        } else {
            stalls = 0;
        }
        x = step.x;
        g = step.g;
        f = step.f;
        if stalls >= 5 {
            return RunResult { x, value: f, iterations: it + 1, converged: true };
        }
    }
    let converged = inf_norm(&g) <= cfg.gradient_tolerance;
    RunResult { x, value: f, iterations: cfg.max_iterations, converged }
}

pub fn momentum(obj: &dyn Objective, x0: &[f64], cfg: &OptimizerConfig) -> RunResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut v = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut best = (f64::INFINITY, x.clone());
    for it in 0..cfg.max_iterations {
        let f = obj.value_grad(&x, &mut g);
        if f < best.0 {
            best = (f, x.clone());
        }
        if inf_norm(&g) <= cfg.gradient_tolerance {
            return RunResult { x: best.1, value: best.0, iterations: it, converged: true };
        }
        for i in 0..n {
            v[i] = cfg.momentum * v[i] + cfg.step_size * g[i];
            x[i] -= v[i];
        }
    }
    let f = obj.value_grad(&x, &mut g);
    if f < best.0 {
        best = (f, x);
    }
    RunResult { x: best.1, value: best.0, iterations: cfg.max_iterations, converged: false }
}

pub fn initial_point(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn run_from(obj: &dyn Objective, x0: &[f64], cfg: &OptimizerConfig) -> RunResult {
    match cfg.method {
        Method::Lbfgs => lbfgs(obj, x0, cfg),
        Method::Momentum => momentum(obj, x0, cfg),
    }
}

/// Multi-restart minimization; restart `i` starts from a standard-normal
/// point drawn with seed `cfg.seed + i`. Ties go to the lowest index.
pub fn minimize(obj: &dyn Objective, cfg: &OptimizerConfig) -> GmeEstimate {
    let restarts = cfg.restarts.max(1);
    let runs: Vec<RunResult> = (0..restarts)
        .into_par_iter()
        .map(|i| run_from(obj, &initial_point(obj.dim(), cfg.seed.wrapping_add(i as u64)), cfg))
        .collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value < runs[best].value || runs[best].value.is_nan() {
            best = i;
        }
    }
    GmeEstimate {
        value: runs[best].value,
        best_params: runs[best].x.clone(),
        per_restart_values: runs.iter().map(|r| r.value).collect(),
        converged: runs[best].converged,
        iterations_used: runs.iter().map(|r| r.iterations).sum(),
    }
}
