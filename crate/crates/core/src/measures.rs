//! Closed-form entanglement measures and LOCC transformation laws for pure
//! states, plus the two-qubit mixed-state formulas.

use crate::error::{QError, Result};
use crate::linalg::*;
use crate::state::*;

const MAJ_TOL: f64 = 1e-12;

/// `E^{(k)} = Σ_{i≥k} λ_i` from a descending reduced spectrum.
pub fn k_gme_from_spectrum(spectrum: &[f64], k: usize) -> f64 {
    if k <= 1 {
        return 1.0;
    }
    spectrum.iter().skip(k - 1).sum::<f64>().clamp(0.0, 1.0)
}

pub fn k_gme_pure(psi: &PureState, kept: &[usize], k: usize) -> Result<f64> {
    if k <= 1 {
        return Ok(1.0);
    }
    let spec = schmidt_spectrum(psi, kept)?;
    Ok(k_gme_from_spectrum(&spec, k))
}

/// Von Neumann entropy of the reduced state, in bits.
pub fn entanglement_entropy(psi: &PureState, kept: &[usize]) -> Result<f64> {
    let spec = schmidt_spectrum(psi, kept)?;
    Ok(spec.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum::<f64>().max(0.0))
}

pub fn linear_entropy(psi: &PureState, kept: &[usize]) -> Result<f64> {
    let spec = schmidt_spectrum(psi, kept)?;
    Ok((1.0 - spec.iter().map(|l| l * l).sum::<f64>()).max(0.0))
}

pub fn concurrence_pure(psi: &PureState, kept: &[usize]) -> Result<f64> {
    Ok((2.0 * linear_entropy(psi, kept)?).sqrt())
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.layout().dims() != [2, 2] {
        return Err(QError::DimensionMismatch(format!(
            "two-qubit formula needs a 2x2 layout, got {:?}",
            rho.layout().dims()
        )));
    }
    Ok(())
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence_2q(rho: &DensityMatrix) -> Result<f64> {
    check_two_qubit(rho)?;
    let sy = CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
    let yy = kron(&sy, &sy);
    let flipped = &yy * rho.matrix().conjugate() * &yy;
    let root = psd_sqrt(rho.matrix());
    let inner = &root * flipped * &root;
    let mut mu: Vec<f64> = eigvalsh(&inner).into_iter().map(|v| v.max(0.0).sqrt()).collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    Ok((mu[0] - mu[1] - mu[2] - mu[3]).max(0.0))
}

pub fn binary_entropy(x: f64) -> f64 {
    let h = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    h(x) + h(1.0 - x)
}

/// Entanglement of formation of a two-qubit state, in bits.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt()))
}

pub fn eof_2q(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence_2q(rho)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MajorizationVerdict {
    pub majorizes: bool,
    pub weakly_majorizes: bool,
    pub partial_sums: (Vec<f64>, Vec<f64>),
}

fn sorted_desc_padded(x: &[f64], len: usize) -> Vec<f64> {
    let mut v = x.to_vec();
    v.resize(len, 0.0);
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn prefix_sums(x: &[f64]) -> Vec<f64> {
    x.iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Whether `x` majorizes `y` (`x ≻ y`).
pub fn majorization(x: &[f64], y: &[f64]) -> MajorizationVerdict {
    let n = x.len().max(y.len());
    let px = prefix_sums(&sorted_desc_padded(x, n));
    let py = prefix_sums(&sorted_desc_padded(y, n));
    let weakly = px.iter().zip(&py).all(|(a, b)| *a >= *b - MAJ_TOL);
    let totals = match (px.last(), py.last()) {
        (Some(a), Some(b)) => (a - b).abs() <= MAJ_TOL,
        _ => true,
    };
    MajorizationVerdict {
        majorizes: weakly && totals,
        weakly_majorizes: weakly,
        partial_sums: (px, py),
    }
}

fn check_same_layout(psi: &PureState, phi: &PureState) -> Result<()> {
    if psi.layout() != phi.layout() {
        return Err(QError::DimensionMismatch("states have different layouts".into()));
    }
    Ok(())
}

/// Deterministic LOCC convertibility of `ψ → φ`.
pub fn nielsen_transformable(psi: &PureState, phi: &PureState, kept: &[usize]) -> Result<bool> {
    check_same_layout(psi, phi)?;
    let lp = schmidt_spectrum(psi, kept)?;
    let lf = schmidt_spectrum(phi, kept)?;
    Ok(majorization(&lf, &lp).majorizes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformReport {
    pub deterministic_possible: bool,
    pub optimal_probability: f64,
    pub binding_index: usize,
}

impl TransformReport {
    fn from_terms(terms: impl Iterator<Item = (usize, f64)>) -> Self {
        let mut best = (1, f64::INFINITY);
        for (k, v) in terms {
            if v < best.1 {
                best = (k, v);
            }
        }
        let p = best.1.clamp(0.0, 1.0);
        TransformReport {
            deterministic_possible: (1.0 - p).abs() <= 1e-10,
            optimal_probability: p,
            binding_index: best.0,
        }
    }
}

/// Optimal probability of converting `ψ` into `φ` by LOCC.
pub fn vidal_probability(psi: &PureState, phi: &PureState, kept: &[usize]) -> Result<TransformReport> {
    check_same_layout(psi, phi)?;
    let sp = schmidt_spectrum(psi, kept)?;
    let sf = schmidt_spectrum(phi, kept)?;
    let rank = sf.iter().filter(|&&l| l > 0.0).count().max(1);
    Ok(TransformReport::from_terms((1..=rank).map(|k| {
        let num = k_gme_from_spectrum(&sp, k);
        (k, if num <= 0.0 { 0.0 } else { num / k_gme_from_spectrum(&sf, k) })
    })))
}

/// Optimal probability of distilling `|Ψ_m⁺⟩` from `ψ`; the binding index
/// is the minimizing `n` in `B_n^m = (m/n)·E^{(m−n+1)}`.
pub fn distill_probability(psi: &PureState, m: usize, kept: &[usize]) -> Result<TransformReport> {
    let layout = psi.layout();
    layout.check_bipartition(kept)?;
    let da = layout.local_dim(kept);
    let db = layout.total() / da;
    if m == 0 || m > da.min(db) {
        return Err(QError::ParameterOutOfRange(format!(
            "target dimension {m} exceeds min local dimension {}",
            da.min(db)
        )));
    }
    let spec = schmidt_spectrum(psi, kept)?;
    let mf = m as f64;
    Ok(TransformReport::from_terms((1..=m).map(|n| {
        (n, mf / n as f64 * k_gme_from_spectrum(&spec, m - n + 1))
    })))
}
