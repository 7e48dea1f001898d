//! Objectives with analytic gradients over trivialized parameters.

use crate::optim::Objective;
use crate::triv::*;
use gme_core::linalg::*;
use gme_core::{CMat, CVec, DensityMatrix, QError, Result};

/// `‖θ − c‖²`.
pub struct Quadratic {
    pub center: Vec<f64>,
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut f = 0.0;
        for ((g, xi), ci) in grad.iter_mut().zip(x).zip(&self.center) {
            *g = 2.0 * (xi - ci);
            f += (xi - ci).powi(2);
        }
        f
    }
}

/// Rayleigh quotient `⟨φ|H|φ⟩` with `φ` on the complex unit sphere.
pub struct SphereRayleigh {
    pub h: CMat,
}

impl Objective for SphereRayleigh {
    fn dim(&self) -> usize {
        2 * self.h.nrows()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let z = complex_vec(x);
        let n2 = z.norm_squared();
        let hz = &self.h * &z;
        let f = inner(&z, &hz).re / n2;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let g = (hz - &z * cr(f)) * cr(2.0 / n2);
        add_complex_grad(&g, grad);
        f
    }
}

/// `1 − ‖B†φ̃‖²/‖φ̃‖²` for a sum-of-products ansatz `φ̃`. With `B = |ψ⟩`
/// this is one minus the overlap; with `B` an orthonormal basis of `S` it is
/// `⟨φ|P_S⊥|φ⟩`.
pub struct OverlapObjective {
    pub basis: CMat,
    pub ansatz: SumOfProducts,
}

impl OverlapObjective {
    pub fn new(basis: CMat, ansatz: SumOfProducts) -> Result<Self> {
        if basis.nrows() != ansatz.total() {
            return Err(QError::DimensionMismatch(format!(
                "basis rows {} vs ansatz dimension {}",
                basis.nrows(),
                ansatz.total()
            )));
        }
        Ok(OverlapObjective { basis, ansatz })
    }
}

impl Objective for OverlapObjective {
    fn dim(&self) -> usize {
        self.ansatz.input_len()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let cache = self.ansatz.forward(x);
        let phi = &cache.phi;
        let d = phi.norm_squared();
        if d < 1e-300 {
            return 1.0;
        }
        let proj = self.basis.adjoint() * phi;
        let n = proj.norm_squared();
        let gn = &self.basis * proj * cr(2.0);
        let g = (gn * cr(1.0 / d) - phi * cr(2.0 * n / (d * d))) * cr(-1.0);
        self.ansatz.backward(x, &cache, &g, grad);
        1.0 - n / d
    }
}

/// Convex-roof objective over decompositions `ψ̃_i = Σ_j X_ij √p_j |e_j⟩`
/// with Stiefel `X` and one ansatz state per entry:
/// `1 − Σ_i |⟨φ̃_i|ψ̃_i⟩|² / ‖φ̃_i‖²`.
pub struct RoofObjective {
    /// Columns `√p_j |e_j⟩`.
    pub lambda: CMat,
    pub n_entries: usize,
    pub ansatz: SumOfProducts,
}

impl RoofObjective {
    pub fn new(rho: &DensityMatrix, n_entries: usize, ansatz: SumOfProducts) -> Result<Self> {
        let lambda = weighted_eigenvectors(rho, 1e-10);
        if n_entries < lambda.ncols() {
            return Err(QError::ParameterOutOfRange(format!(
                "n_entries {n_entries} below rank {}",
                lambda.ncols()
            )));
        }
        if ansatz.total() != rho.dim() {
            return Err(QError::DimensionMismatch("ansatz does not match the state".into()));
        }
        Ok(RoofObjective {
            lambda,
            n_entries,
            ansatz,
        })
    }

    pub fn rank(&self) -> usize {
        self.lambda.ncols()
    }

    fn stiefel_len(&self) -> usize {
        2 * self.n_entries * self.rank()
    }

    /// The unnormalized decomposition vectors `ψ̃_i` for parameters `x`.
    pub fn decomposition(&self, x: &[f64]) -> Vec<CVec> {
        let polar = Polar::new(complex_mat(&x[..self.stiefel_len()], self.n_entries, self.rank()));
        (0..self.n_entries)
            .map(|i| &self.lambda * polar.x.row(i).transpose())
            .collect()
    }
}

/// Eigenvectors of `ρ` above `cutoff` scaled by `√p`, as columns.
pub fn weighted_eigenvectors(rho: &DensityMatrix, cutoff: f64) -> CMat {
    let (vals, vecs) = rho.eigen();
    let keep: Vec<usize> = (0..vals.len()).rev().filter(|&j| vals[j] > cutoff).collect();
    let mut out = CMat::zeros(rho.dim(), keep.len());
    for (c, &j) in keep.iter().enumerate() {
        out.set_column(c, &(vecs.column(j) * cr(vals[j].sqrt())));
    }
    out
}

impl Objective for RoofObjective {
    fn dim(&self) -> usize {
        self.stiefel_len() + self.n_entries * self.ansatz.input_len()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let split = self.stiefel_len();
        let r = self.rank();
        let polar = Polar::new(complex_mat(&x[..split], self.n_entries, r));
        let il = self.ansatz.input_len();
        let mut gx = CMat::zeros(self.n_entries, r);
        let mut total = 0.0;
        let (head, tail) = grad.split_at_mut(split);
        for i in 0..self.n_entries {
            let theta = &x[split + i * il..split + (i + 1) * il];
            let psi = &self.lambda * polar.x.row(i).transpose();
            let cache = self.ansatz.forward(theta);
            let phi = &cache.phi;
            let n = phi.norm_squared();
            if n < 1e-300 {
                continue;
            }
            let c = inner(phi, &psi);
            let c2 = c.norm_sqr();
            total += c2 / n;
            let g_psi = phi * (c * cr(-2.0 / n));
            let g_phi = (&psi * (c.conj() * cr(-2.0 / n))) + phi * cr(2.0 * c2 / (n * n));
            self.ansatz
                .backward(theta, &cache, &g_phi, &mut tail[i * il..(i + 1) * il]);
            let row = self.lambda.adjoint() * g_psi;
            for j in 0..r {
                gx[(i, j)] = row[j];
            }
        }
        add_complex_mat_grad(&polar.backward(&gx), head);
        1.0 - total
    }
}

/// Value of the roof objective when each `φ_i` is replaced by the optimal
/// rank-`(k−1)` truncation of `ψ̃_i` across the bipartition `dims = [dA, dB]`.
pub fn roof_truncation_value(states: &[CVec], dims: [usize; 2], k: usize) -> f64 {
    let mut kept = 0.0;
    for psi in states {
        let m = CMat::from_fn(dims[0], dims[1], |a, b| psi[a * dims[1] + b]);
        let s = svd(&m).s;
        kept += s.iter().take(k.saturating_sub(1)).map(|x| x * x).sum::<f64>();
    }
    1.0 - kept
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_gradient() {
        let q = Quadratic { center: vec![1.0, -2.0] };
        let mut g = vec![0.0; 2];
        let f = q.value_grad(&[0.0, 0.0], &mut g);
        assert_eq!(f, 5.0);
        assert_eq!(g, vec![-2.0, 4.0]);
    }
}
