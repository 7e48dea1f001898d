//! Eigenvalue separability criteria and witnesses.

use gme_core::linalg::*;
use gme_core::{partial_transpose, reduction_map_matrix, CMat, DensityMatrix, PureState, QError, Result};
use gme_var::{kgme_pure_multipartite, OptimizerConfig};

/// Minimum eigenvalue of `ρ^{T_parties}`; negative certifies entanglement.
pub fn ppt_min_eig(rho: &DensityMatrix, parties: &[usize]) -> Result<f64> {
    Ok(min_eigenvalue(&partial_transpose(rho, parties)?))
}

/// Minimum eigenvalue of `(I ⊗ R_{1/k})(ρ)` with the map on `parties`;
/// negative certifies Schmidt number `> k`.
pub fn reduction_min_eig(rho: &DensityMatrix, parties: &[usize], k: usize) -> Result<f64> {
    if k < 1 {
        return Err(QError::ParameterOutOfRange("k must be positive".into()));
    }
    let m = reduction_map_matrix(rho.matrix(), rho.layout(), parties, 1.0 / k as f64)?;
    Ok(min_eigenvalue(&m))
}

/// `W = α·I − |ψ⟩⟨ψ|` with `α` the squared maximal product overlap.
#[derive(Debug, Clone)]
pub struct Witness {
    pub matrix: CMat,
    pub threshold: f64,
}

pub fn witness_from_pure(psi: &PureState, config: &OptimizerConfig) -> Result<Witness> {
    let est = kgme_pure_multipartite(psi, 2, config)?;
    let alpha = 1.0 - est.value;
    if alpha >= 1.0 - 1e-10 {
        return Err(QError::ParameterOutOfRange("product state has no witness".into()));
    }
    let a = psi.amplitudes();
    let matrix = identity(psi.dim()) * cr(alpha) - outer(a, a);
    Ok(Witness { matrix, threshold: alpha })
}

pub fn evaluate_witness(w: &Witness, rho: &DensityMatrix) -> Result<f64> {
    if w.matrix.nrows() != rho.dim() {
        return Err(QError::DimensionMismatch("witness and state differ in dimension".into()));
    }
    Ok((&w.matrix * rho.matrix()).trace().re)
}
