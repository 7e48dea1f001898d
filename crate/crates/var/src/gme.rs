//! Variational k-GME upper bounds for pure states, subspaces and mixed states.

use crate::objective::*;
use crate::optim::{minimize, GmeEstimate, OptimizerConfig};
use crate::triv::SumOfProducts;
use gme_core::linalg::*;
use gme_core::{CMat, DensityMatrix, DimsLayout, PureState, QError, Result, Subspace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(QError::ParameterOutOfRange(format!("k = {k}, need k ≥ 2")));
    }
    Ok(())
}

fn bipartite(layout: &DimsLayout) -> Result<()> {
    if layout.parties() != 2 {
        return Err(QError::InvalidLayout(format!(
            "expected a bipartite layout, got {} parties",
            layout.parties()
        )));
    }
    Ok(())
}

fn clamp(mut est: GmeEstimate) -> GmeEstimate {
    est.per_restart_values.iter_mut().for_each(|v| *v = v.max(0.0));
    est.value = est.value.max(0.0);
    est
}

fn column(psi: &PureState) -> CMat {
    CMat::from_column_slice(psi.dim(), 1, psi.amplitudes().as_slice())
}

pub fn kgme_pure_multipartite(psi: &PureState, k: usize, config: &OptimizerConfig) -> Result<GmeEstimate> {
    check_k(k)?;
    let obj = OverlapObjective::new(column(psi), SumOfProducts::bounded_rank(psi.layout().dims(), k))?;
    Ok(clamp(minimize(&obj, config)))
}

/// Minimum of `⟨φ|P_S⊥|φ⟩` over Schmidt rank `< k` states of a bipartite space.
pub fn kgme_subspace(s: &Subspace, k: usize, config: &OptimizerConfig) -> Result<GmeEstimate> {
    check_k(k)?;
    bipartite(s.layout())?;
    let obj = OverlapObjective::new(s.basis().clone(), SumOfProducts::bounded_rank(s.layout().dims(), k))?;
    Ok(clamp(minimize(&obj, config)))
}

/// Minimum of `⟨φ|P_S⊥|φ⟩` over fully product states.
pub fn gme_subspace_multipartite(s: &Subspace, config: &OptimizerConfig) -> Result<GmeEstimate> {
    let obj = OverlapObjective::new(s.basis().clone(), SumOfProducts::product(s.layout().dims()))?;
    Ok(clamp(minimize(&obj, config)))
}

/// `min(r², (dim)²)`.
pub fn default_n_entries(rho: &DensityMatrix) -> usize {
    let r = rho.rank(1e-10);
    (r * r).min(rho.dim() * rho.dim()).max(r)
}

pub fn kgme_mixed(
    rho: &DensityMatrix,
    k: usize,
    n_entries: Option<usize>,
    config: &OptimizerConfig,
) -> Result<GmeEstimate> {
    check_k(k)?;
    bipartite(rho.layout())?;
    let n = n_entries.unwrap_or_else(|| default_n_entries(rho));
    let obj = RoofObjective::new(rho, n, SumOfProducts::bounded_rank(rho.layout().dims(), k))?;
    Ok(clamp(minimize(&obj, config)))
}

/// Roof over fully product closest states on the parties of `rho`'s layout.
pub fn gme_mixed_multipartite(
    rho: &DensityMatrix,
    n_entries: Option<usize>,
    config: &OptimizerConfig,
) -> Result<GmeEstimate> {
    let n = n_entries.unwrap_or_else(|| default_n_entries(rho));
    let obj = RoofObjective::new(rho, n, SumOfProducts::product(rho.layout().dims()))?;
    Ok(clamp(minimize(&obj, config)))
}

/// [`gme_mixed_multipartite`] after merging parties into `groups`,
/// e.g. `[[0], [1, 2]]` for the cut A|BC.
pub fn gme_mixed_partitioned(
    rho: &DensityMatrix,
    groups: &[Vec<usize>],
    n_entries: Option<usize>,
    config: &OptimizerConfig,
) -> Result<GmeEstimate> {
    gme_mixed_multipartite(&rho.regroup(groups)?, n_entries, config)
}

/// k-GME of the range of `rho`, a lower bound on the k-GME of `rho`.
pub fn range_lower_bound(rho: &DensityMatrix, k: usize, config: &OptimizerConfig) -> Result<f64> {
    bipartite(rho.layout())?;
    let (vals, vecs) = rho.eigen();
    let spanning = (0..vals.len())
        .filter(|&j| vals[j] > 1e-10)
        .map(|j| PureState::new(vecs.column(j).into_owned(), rho.layout().clone()))
        .collect::<Result<Vec<_>>>()?;
    if spanning.len() == rho.dim() {
        return Ok(0.0);
    }
    Ok(kgme_subspace(&Subspace::new(spanning)?, k, config)?.value)
}

/// Rank-`(k−1)` truncation value of the decomposition at parameters `x`,
/// an exact inner maximization for fixed `X`.
pub fn roof_truncation_oracle(rho: &DensityMatrix, k: usize, n_entries: usize, x: &[f64]) -> Result<f64> {
    bipartite(rho.layout())?;
    let dims = rho.layout().dims();
    let obj = RoofObjective::new(rho, n_entries, SumOfProducts::bounded_rank(dims, k))?;
    if x.len() < 2 * n_entries * obj.rank() {
        return Err(QError::DimensionMismatch("too few parameters".into()));
    }
    Ok(roof_truncation_value(&obj.decomposition(x), [dims[0], dims[1]], k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub unperturbed: f64,
    pub values: Vec<f64>,
    pub min: f64,
    pub mean: f64,
}

/// Hermitian matrix with Gaussian entries rescaled to operator norm `bound`.
pub fn random_hermitian(n: usize, bound: f64, rng: &mut ChaCha8Rng) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        c(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
    });
    let h = hermitian_part(&g);
    let norm = operator_norm(&h);
    if norm == 0.0 {
        return h;
    }
    h * cr(bound / norm)
}

/// k-GME of `S` after `trials` random rotations `exp(−iH)` with `‖H‖ = norm_bound`.
pub fn perturbation_experiment(
    s: &Subspace,
    k: usize,
    norm_bound: f64,
    trials: usize,
    seed: u64,
    config: &OptimizerConfig,
) -> Result<PerturbationReport> {
    if !(norm_bound >= 0.0) {
        return Err(QError::ParameterOutOfRange(format!("norm bound {norm_bound}")));
    }
    let unperturbed = kgme_subspace(s, k, config)?.value;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(trials);
    for _ in 0..trials {
        let h = random_hermitian(s.layout().total(), norm_bound, &mut rng);
        let u = expi_hermitian(&(-h));
        values.push(kgme_subspace(&s.transform(&u)?, k, config)?.value);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    Ok(PerturbationReport {
        unperturbed,
        values,
        min,
        mean,
    })
}
