//! Closed-form statistics of Haar-random `d ⊗ d` pure states.

use crate::error::{QError, Result};
use std::sync::OnceLock;

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Density of `E^{(d)} = λ_min` on `[0, 1/d]`.
pub fn haar_egd_density(d: usize, x: f64) -> f64 {
    let df = d as f64;
    if !(0.0..=1.0 / df).contains(&x) {
        return 0.0;
    }
    df * (df * df - 1.0) * (1.0 - df * x).powi((d * d - 2) as i32)
}

/// Tail probability `Pr[E^{(d)} ≥ x]`.
pub fn haar_egd_cdf(d: usize, x: f64) -> f64 {
    let df = d as f64;
    let t = (1.0 - df * x).clamp(0.0, 1.0);
    t.powi((d * d - 1) as i32)
}

/// Density of `p = d·λ_min`, the optimal probability of distilling the
/// `d`-dimensional maximally entangled state.
pub fn haar_psucc_full_density(d: usize, x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    let n = (d * d) as f64;
    (n - 1.0) * (1.0 - x).powi((d * d - 2) as i32)
}

fn a4(x: f64) -> f64 {
    60.0 * (1.0 - 4.0 * x).powi(14)
}

fn a3(x: f64) -> f64 {
    let p = [3.0, -96.0, 1308.0, -6128.0, 29818.0, -70160.0, 67812.0];
    60.0 * (1.0 - 3.0 * x).powi(8) * horner(&p, x)
}

fn a2(x: f64) -> f64 {
    let p = [
        6.0, -264.0, 5208.0, -45920.0, 229936.0, -859040.0, 2706592.0, -5570528.0, 5517256.0,
    ];
    30.0 * (1.0 - 2.0 * x).powi(6) * horner(&p, x)
}

fn a1(x: f64) -> f64 {
    let p = [1.0, -48.0, 1044.0, -9904.0, 44934.0, -94128.0, 73116.0];
    60.0 * (1.0 - x).powi(8) * horner(&p, x)
}

fn step(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        0.0
    }
}

fn raw_marginal(i: usize, x: f64) -> f64 {
    let t4 = a4(x) * step(1.0 - 4.0 * x);
    let t3 = a3(x) * step(1.0 - 3.0 * x);
    let t2 = a2(x) * step(1.0 - 2.0 * x);
    let t1 = a1(x) * step(1.0 - x);
    match i {
        1 => -t4 + t3 - t2 + t1,
        2 => 3.0 * t4 - 2.0 * t3 + t2,
        3 => -3.0 * t4 + t3,
        _ => t4,
    }
}

/// Gauss–Legendre integration on `[a, b]` split into `pieces` panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    for p in 0..pieces {
        let mid = a + (p as f64 + 0.5) * h;
        for (n, w) in NODES.iter().zip(WEIGHTS) {
            total += w * f(mid + 0.5 * h * n);
        }
    }
    0.5 * h * total
}

/// Integrates a marginal exactly, with panel edges at the step points.
fn integrate_marginal(f: impl Fn(f64) -> f64 + Copy) -> f64 {
    let cuts = [0.0, 0.25, 1.0 / 3.0, 0.5, 1.0];
    cuts.windows(2).map(|w| integrate(f, w[0], w[1], 8)).sum()
}

fn norms() -> &'static [f64; 4] {
    static N: OnceLock<[f64; 4]> = OnceLock::new();
    N.get_or_init(|| {
        let mut out = [1.0; 4];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = 1.0 / integrate_marginal(|x| raw_marginal(i + 1, x));
        }
        out
    })
}

/// Density of the `i`-th largest reduced eigenvalue (`i` in 1..=4) of a
/// Haar-random `4 ⊗ 4` state.
pub fn haar_eigmarginal_d4(i: usize, x: f64) -> Result<f64> {
    if !(1..=4).contains(&i) {
        return Err(QError::ParameterOutOfRange(format!("eigenvalue index must be 1..=4, got {i}")));
    }
    if !(0.0..=1.0).contains(&x) || (i == 1 && x < 0.25) {
        return Ok(0.0);
    }
    Ok(norms()[i - 1] * raw_marginal(i, x))
}

/// Density of `E^{(2)} = 1 − λ_1` for Haar-random `4 ⊗ 4` states.
pub fn haar_e2_density_d4(x: f64) -> f64 {
    haar_eigmarginal_d4(1, 1.0 - x).unwrap_or(0.0)
}

/// `Pr[a ≤ E^{(2)} ≤ b]` for Haar-random `4 ⊗ 4` states.
pub fn haar_e2_probability_d4(a: f64, b: f64) -> f64 {
    let a = a.clamp(0.0, 1.0);
    let b = b.clamp(0.0, 1.0);
    if b <= a {
        return 0.0;
    }
    let mut cuts = vec![a];
    for c in [0.5, 2.0 / 3.0, 0.75] {
        if c > a && c < b {
            cuts.push(c);
        }
    }
    cuts.push(b);
    cuts.windows(2).map(|w| integrate(haar_e2_density_d4, w[0], w[1], 8)).sum()
}
