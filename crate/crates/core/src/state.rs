//! Pure states, density matrices and the reshaping operations on them.
//!
//! Amplitudes use row-major party order: party 0 is the slowest-varying
//! index of the flattened vector.

use crate::error::{QError, Result};
use crate::linalg::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-10;
pub const RANK_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimsLayout {
    dims: Vec<usize>,
}

impl DimsLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(QError::InvalidLayout("no parties".into()));
        }
        if dims.contains(&0) {
            return Err(QError::InvalidLayout(format!("zero local dimension in {dims:?}")));
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self { dims: vec![2; n] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &DimsLayout) -> DimsLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DimsLayout { dims }
    }

    pub fn check_parties(&self, parties: &[usize]) -> Result<()> {
        for &p in parties {
            if p >= self.dims.len() {
                return Err(QError::InvalidParty {
                    index: p,
                    parties: self.dims.len(),
                });
            }
        }
        Ok(())
    }

    /// Validates `parties` as one side of a bipartition (non-empty, proper).
    pub fn check_bipartition(&self, parties: &[usize]) -> Result<()> {
        self.check_parties(parties)?;
        let set = sorted_unique(parties);
        if set.is_empty() || set.len() == self.dims.len() {
            return Err(QError::InvalidLayout(format!(
                "{parties:?} is not a proper non-empty subset of {} parties",
                self.dims.len()
            )));
        }
        Ok(())
    }

    pub fn local_dim(&self, parties: &[usize]) -> usize {
        sorted_unique(parties).iter().map(|&p| self.dims[p]).product()
    }
}

fn sorted_unique(parties: &[usize]) -> Vec<usize> {
    let mut v = parties.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Index bookkeeping for splitting the flattened space into a `kept` and a
/// `rest` factor, each in row-major order of its own parties.
#[derive(Debug, Clone)]
pub struct PartySplit {
    pub kept_len: usize,
    pub rest_len: usize,
    /// `map[k * rest_len + t]` is the full index of `(k, t)`.
    pub map: Vec<usize>,
}

impl PartySplit {
    pub fn new(layout: &DimsLayout, kept: &[usize]) -> Result<Self> {
        layout.check_parties(kept)?;
        let kept = sorted_unique(kept);
        let n = layout.parties();
        let rest: Vec<usize> = (0..n).filter(|p| !kept.contains(p)).collect();
        let dims = layout.dims();
        let kept_len: usize = kept.iter().map(|&p| dims[p]).product();
        let rest_len: usize = rest.iter().map(|&p| dims[p]).product();
        let total = layout.total();
        let mut map = vec![0usize; total];
        let mut digits = vec![0usize; n];
        for full in 0..total {
            let mut r = full;
            for p in (0..n).rev() {
                digits[p] = r % dims[p];
                r /= dims[p];
            }
            let k = kept.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            let t = rest.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            map[k * rest_len + t] = full;
        }
        Ok(Self {
            kept_len,
            rest_len,
            map,
        })
    }

    #[inline]
    pub fn full(&self, k: usize, t: usize) -> usize {
        self.map[k * self.rest_len + t]
    }
}

/// Permutation taking amplitudes of `layout` to the party order `order`
/// (`order[i]` is the old index of new party `i`). Returns `perm` with
/// `new[i] = old[perm[i]]` and the new layout.
pub fn party_permutation(layout: &DimsLayout, order: &[usize]) -> Result<(Vec<usize>, DimsLayout)> {
    layout.check_parties(order)?;
    let n = layout.parties();
    if sorted_unique(order).len() != n || order.len() != n {
        return Err(QError::InvalidLayout(format!("{order:?} is not a permutation of {n} parties")));
    }
    let dims = layout.dims();
    let new_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
    let total = layout.total();
    let mut old_strides = vec![1usize; n];
    for p in (0..n.saturating_sub(1)).rev() {
        old_strides[p] = old_strides[p + 1] * dims[p + 1];
    }
    let mut perm = vec![0usize; total];
    let mut digits = vec![0usize; n];
    for (new_idx, slot) in perm.iter_mut().enumerate() {
        let mut r = new_idx;
        for q in (0..n).rev() {
            digits[q] = r % new_dims[q];
            r /= new_dims[q];
        }
        *slot = order
            .iter()
            .zip(&digits)
            .map(|(&p, &dig)| dig * old_strides[p])
            .sum();
    }
    Ok((perm, DimsLayout { dims: new_dims }))
}

/// Groups parties into super-parties; e.g. `[[0], [1, 2]]` yields the A|BC cut.
pub fn grouping(layout: &DimsLayout, groups: &[Vec<usize>]) -> Result<(Vec<usize>, DimsLayout)> {
    let order: Vec<usize> = groups.iter().flatten().copied().collect();
    let (perm, _) = party_permutation(layout, &order)?;
    if groups.iter().any(|g| g.is_empty()) {
        return Err(QError::InvalidLayout("empty party group".into()));
    }
    let dims = groups
        .iter()
        .map(|g| g.iter().map(|&p| layout.dims()[p]).product())
        .collect();
    Ok((perm, DimsLayout::new(dims)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVec,
    layout: DimsLayout,
}

impl PureState {
    /// Normalizes `amplitudes`; fails on a zero vector or size mismatch.
    /// Vectors already normalized to rounding are stored unchanged.
    pub fn new(amplitudes: CVec, layout: DimsLayout) -> Result<Self> {
        if amplitudes.len() != layout.total() {
            return Err(QError::DimensionMismatch(format!(
                "{} amplitudes for layout {:?}",
                amplitudes.len(),
                layout.dims()
            )));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm <= RANK_CUTOFF {
            return Err(QError::ZeroVector);
        }
        let amplitudes = if (norm - 1.0).abs() <= 1e-14 {
            amplitudes
        } else {
            amplitudes.unscale(norm)
        };
        Ok(Self { amplitudes, layout })
    }

    /// Accepts only vectors already normalized within `tol`.
    pub fn from_normalized(amplitudes: CVec, layout: DimsLayout, tol: f64) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol {
            return Err(QError::ParameterOutOfRange(format!("state norm {norm} is not one")));
        }
        Self::new(amplitudes, layout)
    }

    pub fn from_real(values: &[f64], dims: &[usize]) -> Result<Self> {
        Self::new(from_real(values), DimsLayout::new(dims.to_vec())?)
    }

    pub fn basis(dims: &[usize], digits: &[usize]) -> Result<Self> {
        let layout = DimsLayout::new(dims.to_vec())?;
        if digits.len() != dims.len() || digits.iter().zip(dims).any(|(&i, &d)| i >= d) {
            return Err(QError::DimensionMismatch(format!("basis digits {digits:?} for {dims:?}")));
        }
        let idx = digits.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i);
        Self::new(basis_vec(layout.total(), idx), layout)
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn layout(&self) -> &DimsLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
            layout: self.layout.concat(&other.layout),
        }
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: outer(&self.amplitudes, &self.amplitudes),
            layout: self.layout.clone(),
        }
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn apply(&self, op: &CMat) -> Result<PureState> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(QError::DimensionMismatch("operator does not match state".into()));
        }
        PureState::new(op * &self.amplitudes, self.layout.clone())
    }

    /// Coefficient matrix `M[k, t]` of the cut `kept | rest`.
    pub fn coefficient_matrix(&self, kept: &[usize]) -> Result<CMat> {
        let split = PartySplit::new(&self.layout, kept)?;
        Ok(CMat::from_fn(split.kept_len, split.rest_len, |k, t| {
            self.amplitudes[split.full(k, t)]
        }))
    }

    pub fn regroup(&self, groups: &[Vec<usize>]) -> Result<PureState> {
        let (perm, layout) = grouping(&self.layout, groups)?;
        let amplitudes = CVec::from_iterator(perm.len(), perm.iter().map(|&p| self.amplitudes[p]));
        Ok(PureState { amplitudes, layout })
    }

    pub fn reduced(&self, kept: &[usize]) -> Result<DensityMatrix> {
        let m = self.coefficient_matrix(kept)?;
        let layout = DimsLayout::new(sorted_unique(kept).iter().map(|&p| self.layout.dims()[p]).collect())?;
        DensityMatrix::new(&m * m.adjoint(), layout)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
    layout: DimsLayout,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity. Small asymmetry is
    /// symmetrized away and the trace is renormalized to one.
    pub fn new(matrix: CMat, layout: DimsLayout) -> Result<Self> {
        let n = layout.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(QError::DimensionMismatch(format!(
                "{}x{} matrix for layout {:?}",
                matrix.nrows(),
                matrix.ncols(),
                layout.dims()
            )));
        }
        let defect = hermitian_defect(&matrix);
        if !(defect < HERMITIAN_TOL) {
            return Err(QError::NotHermitian(defect));
        }
        let matrix = hermitian_part(&matrix);
        let tr = trace(&matrix).re;
        if !((tr - 1.0).abs() <= TRACE_TOL) {
            return Err(QError::TraceNotOne(tr));
        }
        let matrix = if (tr - 1.0).abs() <= 1e-14 {
            matrix
        } else {
            matrix.unscale(tr)
        };
        let lmin = min_eigenvalue(&matrix);
        if lmin < -PSD_TOL {
            return Err(QError::NotPositive(lmin));
        }
        Ok(Self { matrix, layout })
    }

    /// Normalizes a positive semidefinite operator to unit trace.
    pub fn from_unnormalized(matrix: CMat, layout: DimsLayout) -> Result<Self> {
        let tr = trace(&matrix).re;
        if !(tr > 0.0) {
            return Err(QError::TraceNotOne(tr));
        }
        Self::new(matrix.unscale(tr), layout)
    }

    pub fn maximally_mixed(layout: DimsLayout) -> Self {
        let n = layout.total();
        Self {
            matrix: identity(n).unscale(n as f64),
            layout,
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn layout(&self) -> &DimsLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: kron(&self.matrix, &other.matrix),
            layout: self.layout.concat(&other.layout),
        }
    }

    pub fn regroup(&self, groups: &[Vec<usize>]) -> Result<DensityMatrix> {
        let (perm, layout) = grouping(&self.layout, groups)?;
        let n = perm.len();
        let matrix = CMat::from_fn(n, n, |i, j| self.matrix[(perm[i], perm[j])]);
        Ok(DensityMatrix { matrix, layout })
    }

    pub fn eigen(&self) -> (Vec<f64>, CMat) {
        eigh(&self.matrix)
    }

    pub fn rank(&self, cutoff: f64) -> usize {
        eigvalsh(&self.matrix).iter().filter(|&&x| x > cutoff).count()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn unitary_conjugate(&self, u: &CMat) -> Result<DensityMatrix> {
        DensityMatrix::new(u * &self.matrix * u.adjoint(), self.layout.clone())
    }

    /// `p·ρ1 + (1 − p)·ρ2`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
        if self.layout != other.layout {
            return Err(QError::DimensionMismatch("mixing different layouts".into()));
        }
        DensityMatrix::new(
            &self.matrix * cr(p) + &other.matrix * cr(1.0 - p),
            self.layout.clone(),
        )
    }
}

/// Either operand kind accepted by [`tensor_product`].
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Vector(CVec, DimsLayout),
    Matrix(CMat, DimsLayout),
}

pub fn tensor_product(a: &Operand, b: &Operand) -> Result<Operand> {
    match (a, b) {
        (Operand::Vector(x, lx), Operand::Vector(y, ly)) => Ok(Operand::Vector(kron_vec(x, y), lx.concat(ly))),
        (Operand::Matrix(x, lx), Operand::Matrix(y, ly)) => Ok(Operand::Matrix(kron(x, y), lx.concat(ly))),
        _ => Err(QError::MixedOperands),
    }
}

/// Partial trace of a raw operator over `traced`; returns the operator on
/// the remaining parties and their layout.
pub fn partial_trace_matrix(m: &CMat, layout: &DimsLayout, traced: &[usize]) -> Result<(CMat, Option<DimsLayout>)> {
    layout.check_parties(traced)?;
    let traced = sorted_unique(traced);
    let kept: Vec<usize> = (0..layout.parties()).filter(|p| !traced.contains(p)).collect();
    let split = PartySplit::new(layout, &kept)?;
    let mut out = CMat::zeros(split.kept_len, split.kept_len);
    for a in 0..split.kept_len {
        for b in 0..split.kept_len {
            let mut acc = ZERO;
            for t in 0..split.rest_len {
                acc += m[(split.full(a, t), split.full(b, t))];
            }
            out[(a, b)] = acc;
        }
    }
    let kept_layout = if kept.is_empty() {
        None
    } else {
        Some(DimsLayout::new(kept.iter().map(|&p| layout.dims()[p]).collect())?)
    };
    Ok((out, kept_layout))
}

/// Traces out `parties`. Tracing out every party yields the 1x1 state `[1]`.
pub fn partial_trace(rho: &DensityMatrix, parties: &[usize]) -> Result<DensityMatrix> {
    let (m, layout) = partial_trace_matrix(&rho.matrix, &rho.layout, parties)?;
    let layout = layout.unwrap_or(DimsLayout { dims: vec![1] });
    DensityMatrix::new(m, layout)
}

pub fn partial_transpose_matrix(m: &CMat, layout: &DimsLayout, parties: &[usize]) -> Result<CMat> {
    let split = PartySplit::new(layout, parties)?;
    let n = layout.total();
    let mut out = CMat::zeros(n, n);
    for a in 0..split.kept_len {
        for s in 0..split.rest_len {
            let row = split.full(a, s);
            for b in 0..split.kept_len {
                for t in 0..split.rest_len {
                    out[(row, split.full(b, t))] = m[(split.full(b, s), split.full(a, t))];
                }
            }
        }
    }
    Ok(out)
}

/// Transposes the indices of `parties`; the result is Hermitian but not
/// necessarily positive.
pub fn partial_transpose(rho: &DensityMatrix, parties: &[usize]) -> Result<CMat> {
    partial_transpose_matrix(&rho.matrix, &rho.layout, parties)
}

/// Applies `I ⊗ R_p` where `R_p(X) = Tr[X]·I − p·X` acts on `parties`.
pub fn reduction_map_matrix(m: &CMat, layout: &DimsLayout, parties: &[usize], p: f64) -> Result<CMat> {
    layout.check_parties(parties)?;
    let target = sorted_unique(parties);
    let others: Vec<usize> = (0..layout.parties()).filter(|q| !target.contains(q)).collect();
    let split = PartySplit::new(layout, &others)?;
    let (reduced, _) = partial_trace_matrix(m, layout, &target)?;
    let mut out = m * cr(-p);
    for a in 0..split.kept_len {
        for b in 0..split.kept_len {
            let r = reduced[(a, b)];
            for t in 0..split.rest_len {
                out[(split.full(a, t), split.full(b, t))] += r;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_basis: CMat,
    pub right_basis: CMat,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Squared coefficients, i.e. the spectrum of either reduced state.
    pub fn spectrum(&self) -> Vec<f64> {
        self.coefficients.iter().map(|m| m * m).collect()
    }

    /// `Σ μ_k |α_k⟩ ⊗ |β_k⟩` as the coefficient matrix of the cut.
    pub fn coefficient_matrix(&self) -> CMat {
        let mut m = CMat::zeros(self.left_basis.nrows(), self.right_basis.nrows());
        for (k, &mu) in self.coefficients.iter().enumerate() {
            m += self.left_basis.column(k) * self.right_basis.column(k).transpose() * cr(mu);
        }
        m
    }
}

/// Schmidt decomposition across `kept | rest` by SVD of the coefficient
/// matrix; coefficients below the rank cutoff are dropped.
pub fn schmidt_decompose(psi: &PureState, kept: &[usize]) -> Result<SchmidtDecomposition> {
    psi.layout.check_bipartition(kept)?;
    let m = psi.coefficient_matrix(kept)?;
    if m.norm() <= RANK_CUTOFF {
        return Err(QError::ZeroVector);
    }
    let dec = svd(&m);
    let r = dec.s.iter().filter(|&&s| s > RANK_CUTOFF).count();
    let left_basis = dec.u.columns(0, r).into_owned();
    // M = U S V†, so the right Schmidt vectors are the conjugated columns of V.
    let right_basis = dec.v.columns(0, r).map(|z| z.conj());
    Ok(SchmidtDecomposition {
        coefficients: dec.s[..r].to_vec(),
        left_basis,
        right_basis,
    })
}

/// Reduced-state spectrum of a bipartite cut, non-increasing and padded with
/// zeros to the smaller local dimension.
pub fn schmidt_spectrum(psi: &PureState, kept: &[usize]) -> Result<Vec<f64>> {
    psi.layout.check_bipartition(kept)?;
    let m = psi.coefficient_matrix(kept)?;
    let s = svd(&m).s;
    Ok(s.iter().map(|x| if *x > RANK_CUTOFF { x * x } else { 0.0 }).collect())
}

#[derive(Debug, Clone)]
pub struct Projector {
    pub matrix: CMat,
    pub rank: usize,
}

impl Projector {
    pub fn from_orthonormal_columns(basis: &CMat) -> Self {
        Self {
            matrix: basis * basis.adjoint(),
            rank: basis.ncols(),
        }
    }

    pub fn complement(&self) -> Projector {
        let n = self.matrix.nrows();
        Projector {
            matrix: identity(n) - &self.matrix,
            rank: n - self.rank,
        }
    }

    pub fn expectation(&self, v: &CVec) -> f64 {
        inner(v, &(&self.matrix * v)).re
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass; vectors whose
/// residual norm falls below the rank cutoff are dropped.
pub fn orthonormalize(vectors: &[CVec]) -> CMat {
    let n = vectors.first().map(|v| v.len()).unwrap_or(0);
    let mut basis: Vec<CVec> = Vec::new();
    for v in vectors {
        let scale = v.norm();
        if scale <= RANK_CUTOFF {
            continue;
        }
        let mut w = v.unscale(scale);
        for _ in 0..2 {
            for e in &basis {
                let proj = inner(e, &w);
                w -= e * proj;
            }
        }
        let r = w.norm();
        if r > RANK_CUTOFF {
            basis.push(w.unscale(r));
        }
    }
    let mut out = CMat::zeros(n, basis.len());
    for (j, e) in basis.iter().enumerate() {
        out.set_column(j, e);
    }
    out
}

/// `P_S⊥ = I − Σ|e_i⟩⟨e_i|` for the span of `states`.
pub fn complement_projector(states: &[PureState]) -> Result<Projector> {
    let first = states
        .first()
        .ok_or_else(|| QError::InvalidLayout("empty spanning set".into()))?;
    if states.iter().any(|s| s.layout != first.layout) {
        return Err(QError::DimensionMismatch("spanning states have different layouts".into()));
    }
    let vecs: Vec<CVec> = states.iter().map(|s| s.amplitudes.clone()).collect();
    Ok(Projector::from_orthonormal_columns(&orthonormalize(&vecs)).complement())
}

#[derive(Debug, Clone)]
pub struct Subspace {
    spanning: Vec<PureState>,
    basis: CMat,
    complement: Projector,
    layout: DimsLayout,
}

impl Subspace {
    pub fn new(spanning: Vec<PureState>) -> Result<Self> {
        let complement = complement_projector(&spanning)?;
        let layout = spanning[0].layout.clone();
        let vecs: Vec<CVec> = spanning.iter().map(|s| s.amplitudes.clone()).collect();
        let basis = orthonormalize(&vecs);
        Ok(Self {
            spanning,
            basis,
            complement,
            layout,
        })
    }

    /// The orthogonal complement of `self` as a subspace.
    pub fn orthogonal_complement(&self) -> Result<Subspace> {
        let n = self.layout.total();
        let mut cols = Vec::new();
        for i in 0..n {
            cols.push(basis_vec(n, i));
        }
        let mut vecs: Vec<CVec> = (0..self.basis.ncols()).map(|j| self.basis.column(j).into_owned()).collect();
        let own = vecs.len();
        vecs.extend(cols);
        let full = orthonormalize(&vecs);
        let states = (own..full.ncols())
            .map(|j| PureState::new(full.column(j).into_owned(), self.layout.clone()))
            .collect::<Result<Vec<_>>>()?;
        if states.is_empty() {
            return Err(QError::InvalidLayout("complement of the full space is empty".into()));
        }
        Subspace::new(states)
    }

    pub fn spanning(&self) -> &[PureState] {
        &self.spanning
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn complement_projector(&self) -> &Projector {
        &self.complement
    }

    pub fn layout(&self) -> &DimsLayout {
        &self.layout
    }

    pub fn regroup(&self, groups: &[Vec<usize>]) -> Result<Subspace> {
        let spanning = self
            .spanning
            .iter()
            .map(|s| s.regroup(groups))
            .collect::<Result<Vec<_>>>()?;
        Subspace::new(spanning)
    }

    pub fn transform(&self, u: &CMat) -> Result<Subspace> {
        let spanning = self
            .spanning
            .iter()
            .map(|s| s.apply(u))
            .collect::<Result<Vec<_>>>()?;
        Subspace::new(spanning)
    }
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))² = ‖√ρ √σ‖₁²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(QError::DimensionMismatch("fidelity of different dimensions".into()));
    }
    let root = |m: &CMat| spectral_map(m, |x| if x > 1e-14 { x.sqrt() } else { 0.0 });
    let nuclear: f64 = svd(&(root(&rho.matrix) * root(&sigma.matrix))).s.iter().sum();
    Ok((nuclear * nuclear).clamp(0.0, 1.0))
}

pub fn haar_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    CVec::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

pub fn sample_haar_pure_with<R: Rng + ?Sized>(layout: &DimsLayout, rng: &mut R) -> PureState {
    loop {
        let v = haar_vector(layout.total(), rng);
        if let Ok(s) = PureState::new(v, layout.clone()) {
            return s;
        }
    }
}

/// Haar-random pure state; identical seeds give identical states.
pub fn sample_haar_pure(layout: &DimsLayout, seed: u64) -> PureState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_haar_pure_with(layout, &mut rng)
}

/// Haar-random unitary by QR of a complex Ginibre matrix with phase fix.
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// `(1 − p)ρ + p·I/dim`.
pub fn apply_depolarizing(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QError::ParameterOutOfRange(format!("depolarizing p = {p}")));
    }
    let n = rho.dim();
    let m = &rho.matrix * cr(1.0 - p) + identity(n) * cr(p / n as f64);
    DensityMatrix::new(m, rho.layout.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> PureState {
        PureState::from_real(&[1.0, 0.0, 0.0, 1.0], &[2, 2]).unwrap()
    }

    #[test]
    fn tensor_of_basis_kets() {
        let z = PureState::basis(&[2], &[0]).unwrap();
        let o = PureState::basis(&[2], &[1]).unwrap();
        let t = z.tensor(&o);
        assert_eq!(t.amplitudes().as_slice(), &[ZERO, ONE, ZERO, ZERO]);
        assert_eq!(t.layout().dims(), &[2, 2]);
    }

    #[test]
    fn tensor_identities_and_mixed_operands() {
        let l = DimsLayout::new(vec![2]).unwrap();
        let a = Operand::Matrix(identity(2), l.clone());
        match tensor_product(&a, &a).unwrap() {
            Operand::Matrix(m, lay) => {
                assert_eq!(m, identity(4));
                assert_eq!(lay.dims(), &[2, 2]);
            }
            _ => panic!(),
        }
        let v = Operand::Vector(basis_vec(2, 0), l);
        assert_eq!(tensor_product(&a, &v), Err(QError::MixedOperands));
    }

    #[test]
    fn tensor_matches_block_entries() {
        let a = CMat::from_fn(2, 2, |i, j| c((i * 2 + j) as f64 + 1.0, 0.0));
        let b = CMat::from_fn(2, 2, |i, j| c(0.0, (i * 2 + j) as f64 + 5.0));
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k[(2 * i + p, 2 * j + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_examples() {
        let rho = bell().projector();
        let red = partial_trace(&rho, &[1]).unwrap();
        assert!((red.matrix() - identity(2) * cr(0.5)).norm() < 1e-14);

        let diag = DensityMatrix::new(
            CMat::from_diagonal(&from_real(&[0.5, 0.0, 0.0, 0.5])),
            DimsLayout::new(vec![2, 2]).unwrap(),
        )
        .unwrap();
        let red = partial_trace(&diag, &[1]).unwrap();
        assert!((red.matrix() - identity(2) * cr(0.5)).norm() < 1e-14);
        assert!(matches!(
            partial_trace(&diag, &[2]),
            Err(QError::InvalidParty { .. })
        ));
    }

    #[test]
    fn partial_transpose_of_bell() {
        let pt = partial_transpose(&bell().projector(), &[0]).unwrap();
        assert!((min_eigenvalue(&pt) + 0.5).abs() < 1e-12);
        assert!(partial_transpose(&bell().projector(), &[3]).is_err());
    }

    #[test]
    fn schmidt_of_bell_and_product() {
        let d = schmidt_decompose(&bell(), &[0]).unwrap();
        assert_eq!(d.rank(), 2);
        for mu in &d.coefficients {
            assert!((mu - 0.5f64.sqrt()).abs() < 1e-12);
        }
        let p = PureState::from_real(&[1.0, 1.0, 1.0, 1.0], &[2, 2]).unwrap();
        let d = schmidt_decompose(&p, &[0]).unwrap();
        assert_eq!(d.rank(), 1);
        assert!((d.coefficients[0] - 1.0).abs() < 1e-12);
        assert!(schmidt_decompose(&p, &[0, 1]).is_err());
    }

    #[test]
    fn complement_of_single_basis_vector() {
        let s = PureState::basis(&[2, 2], &[0, 0]).unwrap();
        let p = complement_projector(&[s.clone(), s.clone()]).unwrap();
        assert_eq!(p.rank, 3);
        assert!(p.expectation(s.amplitudes()).abs() < 1e-14);
        let other = PureState::basis(&[2], &[0]).unwrap();
        assert!(complement_projector(&[s, other]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let l = DimsLayout::new(vec![2]).unwrap();
        let z = PureState::basis(&[2], &[0]).unwrap().projector();
        let o = PureState::basis(&[2], &[1]).unwrap().projector();
        let mixed = DensityMatrix::maximally_mixed(l);
        assert!((fidelity(&z, &z).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&z, &o).unwrap().abs() < 1e-12);
        assert!((fidelity(&z, &mixed).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn haar_is_deterministic_per_seed() {
        let l = DimsLayout::new(vec![3, 3]).unwrap();
        let a = sample_haar_pure(&l, 7);
        let b = sample_haar_pure(&l, 7);
        assert_eq!(a, b);
        assert!((a.amplitudes().norm() - 1.0).abs() < 1e-12);
        assert_ne!(a, sample_haar_pure(&l, 8));
    }

    #[test]
    fn depolarizing_endpoints() {
        let rho = bell().projector();
        assert!((apply_depolarizing(&rho, 0.0).unwrap().matrix() - rho.matrix()).norm() < 1e-15);
        let full = apply_depolarizing(&rho, 1.0).unwrap();
        assert!((full.matrix() - identity(4) * cr(0.25)).norm() < 1e-14);
        let mid = apply_depolarizing(&rho, 0.3).unwrap();
        assert!((trace(mid.matrix()).re - 1.0).abs() < 1e-14);
        assert!(apply_depolarizing(&rho, 1.5).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let l = DimsLayout::new(vec![2]).unwrap();
        let bad = CMat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { ONE } else { ZERO });
        assert!(matches!(DensityMatrix::new(bad, l.clone()), Err(QError::NotHermitian(_))));
        let neg = CMat::from_diagonal(&from_real(&[1.5, -0.5]));
        assert!(matches!(DensityMatrix::new(neg, l.clone()), Err(QError::NotPositive(_))));
        let tr = CMat::from_diagonal(&from_real(&[0.5, 0.6]));
        assert!(matches!(DensityMatrix::new(tr, l), Err(QError::TraceNotOne(_))));
    }

    #[test]
    fn regroup_reorders_parties() {
        let s = PureState::basis(&[2, 3, 2], &[1, 2, 0]).unwrap();
        let g = s.regroup(&[vec![2], vec![0, 1]]).unwrap();
        assert_eq!(g.layout().dims(), &[2, 6]);
        let expect = PureState::basis(&[2, 2, 3], &[0, 1, 2]).unwrap();
        assert_eq!(g.amplitudes(), expect.amplitudes());
    }

    #[test]
    fn reduction_map_on_maximally_entangled() {
        let d = 3;
        let mut v = CVec::zeros(d * d);
        for i in 0..d {
            v[i * d + i] = ONE;
        }
        let psi = PureState::new(v, DimsLayout::new(vec![d, d]).unwrap()).unwrap();
        let rho = psi.projector();
        let layout = rho.layout().clone();
        // R_{1/k} detects Schmidt number > k: negative for k < d, not for k = d.
        let m2 = reduction_map_matrix(rho.matrix(), &layout, &[1], 1.0 / (d as f64 - 1.0)).unwrap();
        assert!(min_eigenvalue(&m2) < -1e-3);
        let md = reduction_map_matrix(rho.matrix(), &layout, &[1], 1.0 / d as f64).unwrap();
        assert!(min_eigenvalue(&md) > -1e-12);
    }
}
