//! Trivializations: smooth surjections from flat real parameters onto
//! constraint sets, each with a reverse-mode gradient pullback.
//!
//! Complex gradients follow `g = ∂f/∂Re z + i·∂f/∂Im z`, so a first-order
//! change is `δf = Re⟨g, δz⟩`. Complex entries are stored interleaved as
//! `(re, im)` pairs in the parameter vector.

use gme_core::linalg::*;
use gme_core::{QError, Result};

pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn complex_vec(theta: &[f64]) -> CVec {
    CVec::from_fn(theta.len() / 2, |i, _| c(theta[2 * i], theta[2 * i + 1]))
}

/// Reads an `rows × cols` complex matrix stored row by row.
pub fn complex_mat(theta: &[f64], rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        c(theta[k], theta[k + 1])
    })
}

pub fn add_complex_grad(g: &CVec, out: &mut [f64]) {
    for (i, z) in g.iter().enumerate() {
        out[2 * i] += z.re;
        out[2 * i + 1] += z.im;
    }
}

pub fn add_complex_mat_grad(g: &CMat, out: &mut [f64]) {
    let cols = g.ncols();
    for i in 0..g.nrows() {
        for j in 0..cols {
            let k = 2 * (i * cols + j);
            out[k] += g[(i, j)].re;
            out[k + 1] += g[(i, j)].im;
        }
    }
}

/// Pullback of `v = u/‖u‖`.
pub fn normalize_backward(v: &CVec, norm: f64, gv: &CVec) -> CVec {
    let along = v.dotc(gv).re;
    (gv - v * cr(along)) / cr(norm)
}

pub const STIEFEL_EPS: f64 = 1e-12;

/// Polar map `A ↦ A (A†A + εI)^{-1/2}` with the data needed for its pullback.
pub struct Polar {
    pub x: CMat,
    a: CMat,
    evecs: CMat,
    roots: Vec<f64>,
}

impl Polar {
    pub fn new(a: CMat) -> Self {
        let r = a.ncols();
        let m = a.adjoint() * &a + identity(r) * cr(STIEFEL_EPS);
        let (vals, evecs) = eigh(&m);
        let roots: Vec<f64> = vals.iter().map(|v| v.max(STIEFEL_EPS).sqrt()).collect();
        let inv = scale_cols(&evecs, &roots, |s| 1.0 / s) * evecs.adjoint();
        let x = &a * inv;
        Polar { x, a, evecs, roots }
    }

    fn p_inv(&self) -> CMat {
        scale_cols(&self.evecs, &self.roots, |s| 1.0 / s) * self.evecs.adjoint()
    }

    /// Gradient with respect to `A` given the gradient `gx` with respect to `X`.
    pub fn backward(&self, gx: &CMat) -> CMat {
        let pinv = self.p_inv();
        let k = &pinv * self.a.adjoint() * gx * &pinv;
        let rhs = &k + k.adjoint();
        let w = &self.evecs;
        let mut h = w.adjoint() * rhs * w;
        let r = self.roots.len();
        for i in 0..r {
            for j in 0..r {
                h[(i, j)] /= cr(self.roots[i] + self.roots[j]);
            }
        }
        let h = w * h * w.adjoint();
        gx * pinv - &self.a * h
    }
}

fn scale_cols(m: &CMat, s: &[f64], f: impl Fn(f64) -> f64) -> CMat {
    let mut out = m.clone();
    for (j, &v) in s.iter().enumerate() {
        let k = cr(f(v));
        for i in 0..m.nrows() {
            out[(i, j)] *= k;
        }
    }
    out
}

/// Sum of `terms` weighted product states over parties with `dims`:
/// `φ̃ = Σ_l μ_l ⊗_j v_l^{(j)}` with `μ_l = softplus(θ)` (when weighted)
/// and each `v_l^{(j)}` a normalized complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SumOfProducts {
    pub dims: Vec<usize>,
    pub terms: usize,
    pub weighted: bool,
}

pub struct SopCache {
    pub phi: CVec,
    mu: Vec<f64>,
    factors: Vec<Vec<CVec>>,
    norms: Vec<Vec<f64>>,
}

impl SumOfProducts {
    /// Tensor rank `< k`: `k − 1` weighted terms.
    pub fn bounded_rank(dims: &[usize], k: usize) -> Self {
        SumOfProducts {
            dims: dims.to_vec(),
            terms: k.saturating_sub(1).max(1),
            weighted: true,
        }
    }

    pub fn product(dims: &[usize]) -> Self {
        SumOfProducts {
            dims: dims.to_vec(),
            terms: 1,
            weighted: false,
        }
    }

    fn term_len(&self) -> usize {
        usize::from(self.weighted) + 2 * self.dims.iter().sum::<usize>()
    }

    pub fn input_len(&self) -> usize {
        self.terms * self.term_len()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn forward(&self, theta: &[f64]) -> SopCache {
        let tl = self.term_len();
        let n = self.total();
        let mut phi = CVec::zeros(n);
        let mut mu = Vec::with_capacity(self.terms);
        let mut factors = Vec::with_capacity(self.terms);
        let mut norms = Vec::with_capacity(self.terms);
        for l in 0..self.terms {
            let block = &theta[l * tl..(l + 1) * tl];
            let (m, rest) = if self.weighted {
                (softplus(block[0]), &block[1..])
            } else {
                (1.0, block)
            };
            let mut off = 0;
            let mut fs = Vec::with_capacity(self.dims.len());
            let mut ns = Vec::with_capacity(self.dims.len());
            for &d in &self.dims {
                let u = complex_vec(&rest[off..off + 2 * d]);
                off += 2 * d;
                let nu = u.norm().max(1e-300);
                fs.push(u / cr(nu));
                ns.push(nu);
            }
            add_product(&mut phi, &self.dims, &fs, cr(m));
            mu.push(m);
            factors.push(fs);
            norms.push(ns);
        }
        SopCache {
            phi,
            mu,
            factors,
            norms,
        }
    }

    /// Accumulates `∂f/∂θ` into `out` given `g_φ̃`.
    pub fn backward(&self, theta: &[f64], cache: &SopCache, g: &CVec, out: &mut [f64]) {
        let tl = self.term_len();
        let np = self.dims.len();
        for l in 0..self.terms {
            let base = l * tl;
            let fs = &cache.factors[l];
            let mut hs: Vec<CVec> = self.dims.iter().map(|&d| CVec::zeros(d)).collect();
            let mut overlap = ZERO;
            let mut digits = vec![0usize; np];
            let mut vals = vec![ZERO; np];
            let mut prefix = vec![ONE; np + 1];
            for gi in g.iter() {
                for j in 0..np {
                    vals[j] = fs[j][digits[j]].conj();
                    prefix[j + 1] = prefix[j] * vals[j];
                }
                overlap += gi * prefix[np];
                let mut suffix = *gi;
                for j in (0..np).rev() {
                    hs[j][digits[j]] += prefix[j] * suffix;
                    suffix *= vals[j];
                }
                for j in (0..np).rev() {
                    digits[j] += 1;
                    if digits[j] < self.dims[j] {
                        break;
                    }
                    digits[j] = 0;
                }
            }
            let mut off = base;
            if self.weighted {
                out[base] += overlap.re * sigmoid(theta[base]);
                off += 1;
            }
            let m = cache.mu[l];
            for j in 0..np {
                let gv = &hs[j] * cr(m);
                let gu = normalize_backward(&fs[j], cache.norms[l][j], &gv);
                add_complex_grad(&gu, &mut out[off..off + 2 * self.dims[j]]);
                off += 2 * self.dims[j];
            }
        }
    }
}

/// `phi += m ⊗_j fs[j]` without forming intermediate Kronecker products.
fn add_product(phi: &mut CVec, dims: &[usize], fs: &[CVec], m: C64) {
    let np = dims.len();
    let mut digits = vec![0usize; np];
    for amp in phi.iter_mut() {
        let mut v = m;
        for j in 0..np {
            v *= fs[j][digits[j]];
        }
        *amp += v;
        for j in (0..np).rev() {
            digits[j] += 1;
            if digits[j] < dims[j] {
                break;
            }
            digits[j] = 0;
        }
    }
}

/// The constraint sets reachable from flat parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Trivialization {
    Positive,
    Simplex { n: usize },
    Sphere { n: usize },
    Hermitian { n: usize },
    Unitary { n: usize },
    Stiefel { n: usize, r: usize },
    BoundedRank { k: usize, dims: Vec<usize> },
    Product { dims: Vec<usize> },
    Roof { n_entries: usize, rank: usize, inner: Box<Trivialization> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trivialized {
    Scalar(f64),
    Real(Vec<f64>),
    Vector(CVec),
    Matrix(CMat),
    Roof { x: CMat, states: Vec<CVec> },
}

impl Trivialization {
    pub fn input_len(&self) -> usize {
        match self {
            Trivialization::Positive => 1,
            Trivialization::Simplex { n } | Trivialization::Sphere { n } => *n,
            Trivialization::Hermitian { n } | Trivialization::Unitary { n } => 2 * n * n,
            Trivialization::Stiefel { n, r } => 2 * n * r,
            Trivialization::BoundedRank { k, dims } => SumOfProducts::bounded_rank(dims, *k).input_len(),
            Trivialization::Product { dims } => SumOfProducts::product(dims).input_len(),
            Trivialization::Roof { n_entries, rank, inner } => 2 * n_entries * rank + n_entries * inner.input_len(),
        }
    }

    fn sop(&self) -> Option<SumOfProducts> {
        match self {
            Trivialization::BoundedRank { k, dims } => Some(SumOfProducts::bounded_rank(dims, *k)),
            Trivialization::Product { dims } => Some(SumOfProducts::product(dims)),
            _ => None,
        }
    }

    pub fn apply(&self, theta: &[f64]) -> Result<Trivialized> {
        if theta.len() != self.input_len() {
            return Err(QError::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                self.input_len(),
                theta.len()
            )));
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(QError::ParameterOutOfRange("non-finite parameter".into()));
        }
        Ok(match self {
            Trivialization::Positive => Trivialized::Scalar(softplus(theta[0])),
            Trivialization::Simplex { .. } => {
                let m = theta.iter().copied().fold(f64::MIN, f64::max);
                let e: Vec<f64> = theta.iter().map(|x| (x - m).exp()).collect();
                let s: f64 = e.iter().sum();
                Trivialized::Real(e.iter().map(|x| x / s).collect())
            }
            Trivialization::Sphere { .. } => {
                let n = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n == 0.0 {
                    return Err(QError::ZeroVector);
                }
                Trivialized::Real(theta.iter().map(|x| x / n).collect())
            }
            Trivialization::Hermitian { n } => Trivialized::Matrix(hermitian_part(&complex_mat(theta, *n, *n))),
            Trivialization::Unitary { n } => {
                Trivialized::Matrix(expi_hermitian(&hermitian_part(&complex_mat(theta, *n, *n))))
            }
            Trivialization::Stiefel { n, r } => Trivialized::Matrix(Polar::new(complex_mat(theta, *n, *r)).x),
            Trivialization::BoundedRank { .. } | Trivialization::Product { .. } => {
                let sop = self.sop().expect("sum of products");
                let phi = sop.forward(theta).phi;
                let n = phi.norm();
                if n == 0.0 {
                    return Err(QError::ZeroVector);
                }
                Trivialized::Vector(phi / cr(n))
            }
            Trivialization::Roof { n_entries, rank, inner } => {
                let split = 2 * n_entries * rank;
                let x = Polar::new(complex_mat(&theta[..split], *n_entries, *rank)).x;
                let il = inner.input_len();
                let states = (0..*n_entries)
                    .map(|i| match inner.apply(&theta[split + i * il..split + (i + 1) * il])? {
                        Trivialized::Vector(v) => Ok(v),
                        _ => Err(QError::Unsupported("roof inner map must produce states".into())),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Trivialized::Roof { x, states }
            }
        })
    }
}
