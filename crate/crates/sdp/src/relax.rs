//! SDP relaxations giving certified lower bounds on k-GME.

use crate::solver::*;
use gme_core::linalg::*;
use gme_core::{
    partial_transpose_matrix, reduction_map_matrix, CMat, DensityMatrix, DimsLayout, QError, Result, Subspace,
};

/// Outer relaxation of the set of states with Schmidt number `< k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relaxation {
    Ppt,
    Reduction,
}

impl Relaxation {
    pub fn default_for(k: usize) -> Self {
        if k == 2 {
            Relaxation::Ppt
        } else {
            Relaxation::Reduction
        }
    }
}

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

/// Adds a block constrained to equal the relaxation map applied to the
/// `side`-sized sub-block of `source` at `offset`; returns the map's trace factor.
fn add_relaxation_block(
    p: &mut SdpProblem,
    source: usize,
    offset: usize,
    layout: &DimsLayout,
    relaxation: Relaxation,
    parties: &[usize],
    k: usize,
) -> Result<f64> {
    let side = layout.total();
    let target = p.blocks.len();
    let mut blocks = p.blocks.clone();
    blocks.push(side);
    let mut grown = SdpProblem::new(p.sense, blocks);
    for (b, cost) in p.objective.iter().enumerate() {
        grown.objective[b] = cost.clone();
        grown.trace_bounds[b] = p.trace_bounds[b];
    }
    grown.constraints = std::mem::take(&mut p.constraints);
    *p = grown;
    let factor = match relaxation {
        Relaxation::Ppt => {
            p.link_map(target, source, offset, side, |m| partial_transpose_matrix(m, layout, parties))?;
            1.0
        }
        Relaxation::Reduction => {
            let q = 1.0 / (k - 1) as f64;
            p.link_map(target, source, offset, side, |m| reduction_map_matrix(m, layout, parties, q))?;
            layout.local_dim(parties) as f64 - q
        }
    };
    Ok(factor)
}

fn subspace_problem(s: &Subspace) -> Result<SdpProblem> {
    let n = s.layout().total();
    let mut p = SdpProblem::new(Sense::Minimize, vec![n]);
    p.set_objective(0, s.complement_projector().matrix.clone())?;
    p.add_constraint(&[(0, identity(n))], 1.0)?;
    p.set_trace_bound(0, 1.0);
    Ok(p)
}

/// `min Tr[P_S⊥ ρ]` over PPT states; every single-party partial transpose
/// is constrained for multipartite layouts.
pub fn subspace_ppt_problem(s: &Subspace) -> Result<SdpProblem> {
    let mut p = subspace_problem(s)?;
    let parties = s.layout().parties();
    let cuts: Vec<usize> = if parties == 2 { vec![0] } else { (0..parties).collect() };
    for party in cuts {
        let tau = add_relaxation_block(&mut p, 0, 0, s.layout(), Relaxation::Ppt, &[party], 2)?;
        let last = p.blocks.len() - 1;
        p.set_trace_bound(last, tau);
    }
    Ok(p)
}

/// `min Tr[P_S⊥ ρ]` subject to `I ⊗ R_{1/(k−1)}(ρ) ⪰ 0`.
pub fn subspace_reduction_problem(s: &Subspace, k: usize) -> Result<SdpProblem> {
    check_k(k)?;
    bipartite(s.layout())?;
    let mut p = subspace_problem(s)?;
    let tau = add_relaxation_block(&mut p, 0, 0, s.layout(), Relaxation::Reduction, &[1], k)?;
    p.set_trace_bound(1, tau);
    Ok(p)
}

fn certified(p: &SdpProblem) -> Result<f64> {
    let sol = solve_sdp(p, 1e-7, 100_000)?;
    Ok(sol.dual_value)
}

pub fn lower_bound_subspace_ppt(s: &Subspace) -> Result<f64> {
    certified(&subspace_ppt_problem(s)?)
}

pub fn lower_bound_subspace_reduction(s: &Subspace, k: usize) -> Result<f64> {
    certified(&subspace_reduction_problem(s, k)?)
}

/// `m = VΛV†` restricted to eigenvalues above `1e-12`.
fn support(m: &CMat) -> (CMat, CMat) {
    let (vals, vecs) = eigh(m);
    let keep: Vec<usize> = (0..vals.len()).rev().filter(|&j| vals[j] > 1e-12).collect();
    let lambda = CMat::from_fn(keep.len(), keep.len(), |a, b| if a == b { cr(vals[keep[a]]) } else { cr(0.0) });
    let basis = CMat::from_fn(m.nrows(), keep.len(), |i, a| vecs[(i, keep[a])]);
    (lambda, basis)
}

/// Block `[[Λ, Y], [Y†, Σ]]` maximizing `Re Tr[Y·coupling]`, with `Λ` fixed.
fn fidelity_block(lambda: &CMat, coupling: &CMat) -> Result<SdpProblem> {
    let (r, n) = (lambda.nrows(), coupling.nrows());
    let mut p = SdpProblem::new(Sense::Maximize, vec![r + n]);
    let mut cost = CMat::zeros(r + n, r + n);
    for a in 0..r {
        for i in 0..n {
            cost[(a, r + i)] = coupling[(i, a)].conj() * 0.5;
            cost[(r + i, a)] = coupling[(i, a)] * 0.5;
        }
    }
    p.set_objective(0, cost)?;
    p.fix_sub_block(0, 0, lambda)?;
    p.set_trace_bound(0, 2.0);
    Ok(p)
}

/// `max √F(ρ, σ)` over `σ` in the relaxed set of Schmidt number `< k`.
pub fn mixed_fidelity_problem(rho: &DensityMatrix, k: usize, relaxation: Relaxation) -> Result<SdpProblem> {
    check_k(k)?;
    bipartite(rho.layout())?;
    let n = rho.dim();
    let (lambda, v) = support(rho.matrix());
    let r = lambda.nrows();
    let mut p = fidelity_block(&lambda, &v)?;
    p.add_sub_block_constraint(0, r, &identity(n), 1.0)?;
    let tau = add_relaxation_block(&mut p, 0, r, rho.layout(), relaxation, &[1], k)?;
    p.set_trace_bound(1, tau);
    Ok(p)
}

pub fn lower_bound_mixed_with(rho: &DensityMatrix, k: usize, relaxation: Relaxation) -> Result<f64> {
    let root = certified(&mixed_fidelity_problem(rho, k, relaxation)?)?;
    Ok(1.0 - root * root)
}

/// PPT relaxation for `k = 2`, generalized reduction map otherwise.
pub fn lower_bound_mixed(rho: &DensityMatrix, k: usize) -> Result<f64> {
    lower_bound_mixed_with(rho, k, Relaxation::default_for(k))
}

pub fn fidelity_problem(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<SdpProblem> {
    if rho.dim() != sigma.dim() {
        return Err(QError::DimensionMismatch("fidelity of different dimensions".into()));
    }
    let (lambda, v) = support(rho.matrix());
    let (mu, w) = support(sigma.matrix());
    let mut p = fidelity_block(&lambda, &(w.adjoint() * v))?;
    p.fix_sub_block(0, lambda.nrows(), &mu)?;
    Ok(p)
}

/// `√F(ρ, σ)` from the block-matrix program.
pub fn fidelity_root_sdp(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let sol = solve_sdp(&fidelity_problem(rho, sigma)?, 1e-9, 100_000)?;
    Ok(sol.primal_value)
}
