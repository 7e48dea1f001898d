//! Dense complex linear-algebra helpers shared across the workspace.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Kronecker product with the first operand as the slow index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, ai) in a.iter().enumerate() {
        for (k, bk) in b.iter().enumerate() {
            out[i * b.len() + k] = ai * bk;
        }
    }
    out
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
/// Columns of the returned matrix are the matching eigenvectors.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = hermitian_part(m);
    let evd = faer::Mat::<C64>::from_fn(n, n, |i, j| h[(i, j)])
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigensolver did not converge");
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|i| s[i].re).collect();
    (values, CMat::from_fn(n, n, |i, j| u[(i, j)]))
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let h = hermitian_part(m);
    faer::Mat::<C64>::from_fn(n, n, |i, j| h[(i, j)])
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("Hermitian eigensolver did not converge")
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

/// Thin SVD with singular values in non-increasing order.
/// Columns of `v` are the right singular vectors, so `m = U·diag(s)·V†`.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(m: &CMat) -> Svd {
    let (r, cdim) = m.shape();
    if r < cdim {
        let t = svd(&m.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    if cdim == 0 {
        return Svd {
            u: CMat::zeros(r, 0),
            s: Vec::new(),
            v: CMat::zeros(0, 0),
        };
    }
    let (a, v) = jacobi_columns(m.clone());
    let norms: Vec<f64> = (0..cdim).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cdim).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let floor = norms[order[0]] * f64::EPSILON * r as f64;
    let mut su = CMat::zeros(r, cdim);
    let mut sv = CMat::zeros(cdim, cdim);
    let mut s = Vec::with_capacity(cdim);
    let mut filled = 0;
    for (dst, &src) in order.iter().enumerate() {
        sv.set_column(dst, &v.column(src));
        s.push(norms[src]);
        if norms[src] > floor && norms[src] > 0.0 {
            su.set_column(dst, &(a.column(src) / cr(norms[src])));
            filled += 1;
        }
    }
    complete_columns(&mut su, filled);
    Svd { u: su, s, v: sv }
}

/// One-sided Jacobi: rotates the columns of `a` until pairwise orthogonal.
/// Returns the rotated matrix `A·V` and the accumulated unitary `V`.
fn jacobi_columns(mut a: CMat) -> (CMat, CMat) {
    let n = a.ncols();
    let mut v = identity(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let ph = (gamma / g).conj();
                rotate_pair(&mut a, p, q, cs, sn, ph);
                rotate_pair(&mut v, p, q, cs, sn, ph);
            }
        }
        if !rotated {
            break;
        }
    }
    (a, v)
}

fn rotate_pair(m: &mut CMat, p: usize, q: usize, cs: f64, sn: f64, ph: C64) {
    for i in 0..m.nrows() {
        let xp = m[(i, p)];
        let xq = m[(i, q)] * ph;
        m[(i, p)] = xp * cs - xq * sn;
        m[(i, q)] = xp * sn + xq * cs;
    }
}

/// Extends the first `filled` orthonormal columns of `u` to a full
/// orthonormal set by Gram–Schmidt on standard basis vectors.
fn complete_columns(u: &mut CMat, filled: usize) {
    let (r, k) = u.shape();
    let mut have: Vec<usize> = (0..k).filter(|&j| u.column(j).norm() > 0.5).collect();
    debug_assert_eq!(have.len(), filled);
    let mut empty: Vec<usize> = (0..k).filter(|&j| u.column(j).norm() <= 0.5).collect();
    let mut e = 0;
    while let Some(slot) = empty.first().copied() {
        if e >= r {
            break;
        }
        let mut w = basis_vec(r, e);
        e += 1;
        for _ in 0..2 {
            for &j in &have {
                let proj = u.column(j).dotc(&w);
                w -= u.column(j) * proj;
            }
        }
        let n = w.norm();
        if n > 1e-8 {
            u.set_column(slot, &(w / cr(n)));
            have.push(slot);
            empty.remove(0);
        }
    }
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * cr(0.5)
}

/// Largest absolute entry of `m - m†`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn spectral_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let fj = cr(f(vals[j]));
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    &scaled * vecs.adjoint()
}

/// Principal square root of a positive semidefinite matrix; tiny negative
/// eigenvalues from rounding are clipped.
pub fn psd_sqrt(m: &CMat) -> CMat {
    spectral_map(m, |x| x.max(0.0).sqrt())
}

/// `exp(i·H)` for Hermitian `H`.
pub fn expi_hermitian(h: &CMat) -> CMat {
    let (vals, vecs) = eigh(h);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let ph = C64::from_polar(1.0, vals[j]);
        for i in 0..n {
            scaled[(i, j)] *= ph;
        }
    }
    &scaled * vecs.adjoint()
}

pub fn operator_norm(m: &CMat) -> f64 {
    svd(m).s.first().copied().unwrap_or(0.0)
}

pub fn frobenius_distance(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm()
}

pub fn outer(a: &CVec, b: &CVec) -> CMat {
    a * b.adjoint()
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn basis_vec(n: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[i] = ONE;
    v
}

pub fn from_real(values: &[f64]) -> CVec {
    CVec::from_iterator(values.len(), values.iter().map(|&x| cr(x)))
}

/// `⟨a|b⟩` (conjugate-linear in the first argument).
pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.dotc(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_is_sorted_and_reconstructs() {
        let m = CMat::from_fn(3, 2, |i, j| c((i + 2 * j) as f64, (i as f64) - (j as f64)));
        let d = svd(&m);
        assert!(d.s[0] >= d.s[1]);
        let mut recon = CMat::zeros(3, 2);
        for k in 0..2 {
            recon += d.u.column(k) * d.v.column(k).adjoint() * cr(d.s[k]);
        }
        assert!((recon - m).norm() < 1e-12);
    }

    #[test]
    fn svd_handles_rank_deficient_complex() {
        let a = CVec::from_fn(5, |i, _| c(i as f64 - 1.5, 0.3 * i as f64 + 0.2));
        let b = CVec::from_fn(5, |i, _| c(0.7 - i as f64 * 0.1, (i * i) as f64 * 0.05 - 0.4));
        let m = outer(&a, &b);
        let d = svd(&m);
        assert!((d.s[0] - a.norm() * b.norm()).abs() < 1e-12);
        assert!(d.s[1..].iter().all(|&x| x < 1e-12));
        assert!((d.u.adjoint() * &d.u - identity(5)).norm() < 1e-12);
        assert!((d.v.adjoint() * &d.v - identity(5)).norm() < 1e-12);
        let recon = &d.u * CMat::from_diagonal(&from_real(&d.s)) * d.v.adjoint();
        assert!((recon - m).norm() < 1e-12);
        let wide = CMat::from_fn(2, 4, |i, j| c((i * j) as f64, (i + j) as f64 * 0.5));
        let d = svd(&wide);
        assert_eq!((d.u.shape(), d.v.shape()), ((2, 2), (4, 2)));
        let recon = &d.u * CMat::from_diagonal(&from_real(&d.s)) * d.v.adjoint();
        assert!((recon - wide).norm() < 1e-12);
    }

    #[test]
    fn eigh_sorted_ascending() {
        let m = CMat::from_diagonal(&from_real(&[3.0, 1.0, 2.0]));
        let (v, _) = eigh(&m);
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn expi_of_zero_is_identity() {
        let u = expi_hermitian(&CMat::zeros(3, 3));
        assert!((u - identity(3)).norm() < 1e-14);
    }
}
