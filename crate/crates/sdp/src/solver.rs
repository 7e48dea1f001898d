//! First-order splitting solver for block-PSD programs over Hermitian
//! matrices: `opt Σ_b Re Tr[C_b X_b]` subject to affine equalities and
//! `X_b ⪰ 0`.
//!
//! Blocks are vectorized isometrically (diagonal entries, then `√2·Re` and
//! `√2·Im` of the strict upper triangle), so `Re Tr[A X] = vec(A)·vec(X)`.

use gme_core::linalg::*;
use gme_core::{CMat, QError, Result};
use std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    MaxIterations,
    InfeasibleSuspected,
}

/// One affine equality `Σ (coefficient · x) = rhs` stored sparsely over the
/// global vectorized coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub row: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub sense: Sense,
    pub blocks: Vec<usize>,
    pub objective: Vec<CMat>,
    pub constraints: Vec<Constraint>,
    /// Upper bounds on `Tr X_b` over the feasible set, used to certify the
    /// dual value when the dual slack is slightly indefinite.
    pub trace_bounds: Vec<f64>,
    offsets: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub primal_value: f64,
    /// Certified bound: a lower bound on the optimum when minimizing, an
    /// upper bound when maximizing.
    pub dual_value: f64,
    pub blocks: Vec<CMat>,
    pub multipliers: Vec<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: Status,
    /// Certified dual values at every convergence check.
    pub dual_history: Vec<f64>,
}

impl SdpSolution {
    pub fn relative_gap(&self) -> f64 {
        (self.primal_value - self.dual_value).abs() / (1.0 + self.primal_value.abs() + self.dual_value.abs())
    }
}

/// Coordinate of entry `(i, j)` of an `n × n` block, `i < j`, real part.
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let before = i * (2 * n - i - 1) / 2;
    n + 2 * (before + (j - i - 1))
}

pub fn herm_len(n: usize) -> usize {
    n * n
}

pub fn vec_herm(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i] = m[(i, i)].re;
        for j in i + 1..n {
            let k = pair_index(n, i, j);
            v[k] = SQRT_2 * m[(i, j)].re;
            v[k + 1] = SQRT_2 * m[(i, j)].im;
        }
    }
    v
}

pub fn unvec_herm(v: &[f64], n: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = cr(v[i]);
        for j in i + 1..n {
            let k = pair_index(n, i, j);
            let z = c(v[k], v[k + 1]) / SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// The orthonormal Hermitian basis element dual to coordinate `k`.
pub fn herm_basis(n: usize, k: usize) -> CMat {
    let mut v = vec![0.0; n * n];
    v[k] = 1.0;
    unvec_herm(&v, n)
}

/// Maps a coordinate of an `m × m` sub-block at diagonal offset `o` into the
/// coordinates of the enclosing `n × n` block.
fn embed_coord(m: usize, o: usize, n: usize, k: usize) -> usize {
    if k < m {
        return o + k;
    }
    let rel = k - m;
    let pair = rel / 2;
    let part = rel % 2;
    let mut i = 0;
    let mut start = 0;
    while start + (m - i - 1) <= pair {
        start += m - i - 1;
        i += 1;
    }
    let j = i + 1 + (pair - start);
    pair_index(n, o + i, o + j) + part
}

impl SdpProblem {
    pub fn new(sense: Sense, blocks: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut acc = 0;
        for &n in &blocks {
            offsets.push(acc);
            acc += herm_len(n);
        }
        offsets.push(acc);
        SdpProblem {
            sense,
            objective: blocks.iter().map(|&n| CMat::zeros(n, n)).collect(),
            trace_bounds: vec![f64::INFINITY; blocks.len()],
            blocks,
            constraints: Vec::new(),
            offsets,
        }
    }

    pub fn dim(&self) -> usize {
        self.offsets[self.blocks.len()]
    }

    fn check_block(&self, b: usize, m: &CMat) -> Result<()> {
        let n = *self
            .blocks
            .get(b)
            .ok_or_else(|| QError::DimensionMismatch(format!("no block {b}")))?;
        if m.nrows() != n || m.ncols() != n {
            return Err(QError::DimensionMismatch(format!(
                "block {b} has side {n}, coefficient is {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = hermitian_defect(m);
        if defect > 1e-12 * (1.0 + m.norm()) {
            return Err(QError::NotHermitian(defect));
        }
        Ok(())
    }

    pub fn set_objective(&mut self, b: usize, cost: CMat) -> Result<()> {
        self.check_block(b, &cost)?;
        self.objective[b] = cost;
        Ok(())
    }

    pub fn set_trace_bound(&mut self, b: usize, tau: f64) {
        self.trace_bounds[b] = tau;
    }

    /// Adds `Σ_t Re Tr[A_t X_{b_t}] = rhs`.
    pub fn add_constraint(&mut self, terms: &[(usize, CMat)], rhs: f64) -> Result<()> {
        let mut row = Vec::new();
        for (b, a) in terms {
            self.check_block(*b, a)?;
            let off = self.offsets[*b];
            for (k, v) in vec_herm(a).into_iter().enumerate() {
                if v != 0.0 {
                    row.push((off + k, v));
                }
            }
        }
        self.push_row(row, rhs);
        Ok(())
    }

    fn push_row(&mut self, mut row: Vec<(usize, f64)>, rhs: f64) {
        row.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (k, v) in row {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 += v,
                _ => merged.push((k, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        self.constraints.push(Constraint { row: merged, rhs });
    }

    fn sub_block_coords(&self, b: usize, offset: usize, m: usize) -> Result<impl Fn(usize) -> usize> {
        let n = self.blocks[b];
        if offset + m > n {
            return Err(QError::DimensionMismatch(format!(
                "sub-block {m} at {offset} exceeds block side {n}"
            )));
        }
        let base = self.offsets[b];
        Ok(move |k| base + embed_coord(m, offset, n, k))
    }

    /// Fixes the `value.nrows()`-sized diagonal sub-block of block `b` at
    /// `offset` to `value`.
    pub fn fix_sub_block(&mut self, b: usize, offset: usize, value: &CMat) -> Result<()> {
        let m = value.nrows();
        let coord = self.sub_block_coords(b, offset, m)?;
        let rows: Vec<(usize, f64)> = vec_herm(value).into_iter().enumerate().map(|(k, v)| (coord(k), v)).collect();
        for (k, v) in rows {
            self.push_row(vec![(k, 1.0)], v);
        }
        Ok(())
    }

    /// Adds `Re Tr[A · sub-block] = rhs` for the sub-block of `b` at `offset`.
    pub fn add_sub_block_constraint(&mut self, b: usize, offset: usize, a: &CMat, rhs: f64) -> Result<()> {
        let coord = self.sub_block_coords(b, offset, a.nrows())?;
        let row = vec_herm(a)
            .into_iter()
            .enumerate()
            .filter(|e| e.1 != 0.0)
            .map(|(k, v)| (coord(k), v))
            .collect();
        self.push_row(row, rhs);
        Ok(())
    }

    /// Adds `X_target = L(sub-block of X_source at offset)` for a
    /// self-adjoint linear map `L` on Hermitian matrices.
    pub fn link_map(
        &mut self,
        target: usize,
        source: usize,
        offset: usize,
        source_side: usize,
        map: impl Fn(&CMat) -> Result<CMat>,
    ) -> Result<()> {
        let nt = self.blocks[target];
        let coord = self.sub_block_coords(source, offset, source_side)?;
        let toff = self.offsets[target];
        let mut pending = Vec::with_capacity(nt * nt);
        for k in 0..herm_len(nt) {
            let image = map(&herm_basis(nt, k))?;
            if image.nrows() != source_side {
                return Err(QError::DimensionMismatch("map changes the block side".into()));
            }
            let mut row = vec![(toff + k, 1.0)];
            for (q, v) in vec_herm(&image).into_iter().enumerate() {
                if v.abs() > 1e-15 {
                    row.push((coord(q), -v));
                }
            }
            pending.push(row);
        }
        for row in pending {
            self.push_row(row, 0.0);
        }
        Ok(())
    }

    fn cost_vector(&self) -> Vec<f64> {
        let sign = match self.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        self.objective
            .iter()
            .flat_map(vec_herm)
            .map(|v| sign * v)
            .collect()
    }
}

struct Affine<'a> {
    rows: &'a [Constraint],
    n: usize,
    diag: Vec<f64>,
}

impl<'a> Affine<'a> {
    fn new(rows: &'a [Constraint], n: usize) -> Self {
        let diag = rows
            .iter()
            .map(|r| r.row.iter().map(|e| e.1 * e.1).sum::<f64>().max(1e-300))
            .collect();
        Affine { rows, n, diag }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.row.iter().map(|&(k, v)| v * x[k]).sum())
            .collect()
    }

    fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (r, &yi) in self.rows.iter().zip(y) {
            if yi != 0.0 {
                for &(k, v) in &r.row {
                    out[k] += v * yi;
                }
            }
        }
        out
    }

    /// Preconditioned CG on `A Aᵀ w = rhs`, warm-started from `w`.
    fn solve_normal(&self, rhs: &[f64], w: &mut [f64]) {
        let m = rhs.len();
        if m == 0 {
            return;
        }
        let aat = |v: &[f64]| self.apply(&self.apply_t(v));
        let q = aat(w);
        let mut r: Vec<f64> = (0..m).map(|i| rhs[i] - q[i]).collect();
        let target = 1e-13 * (1.0 + dot(rhs, rhs).sqrt());
        let mut z: Vec<f64> = (0..m).map(|i| r[i] / self.diag[i]).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for _ in 0..500 {
            if dot(&r, &r).sqrt() <= target {
                break;
            }
            let ap = aat(&p);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for i in 0..m {
                w[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..m {
                z[i] = r[i] / self.diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..m {
                p[i] = z[i] + beta * p[i];
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub gap_tolerance: f64,
    pub max_iterations: usize,
    pub relaxation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-7,
            gap_tolerance: 1e-6,
            max_iterations: 100_000,
            relaxation: 1.6,
        }
    }
}

pub fn solve_sdp(p: &SdpProblem, tolerance: f64, max_iterations: usize) -> Result<SdpSolution> {
    solve_sdp_with(
        p,
        &SolverOptions {
            tolerance,
            max_iterations,
            ..SolverOptions::default()
        },
    )
}

struct BlockEig {
    min: f64,
    neg_sq: f64,
}

/// Projects `v` onto the product of PSD cones in place; returns the
/// minimum eigenvalue and squared negative part of each block.
fn project_cone(p: &SdpProblem, v: &mut [f64]) -> Vec<BlockEig> {
    let mut out = Vec::with_capacity(p.blocks.len());
    for (b, &n) in p.blocks.iter().enumerate() {
        let range = p.offsets[b]..p.offsets[b + 1];
        let m = unvec_herm(&v[range.clone()], n);
        let (vals, vecs) = eigh(&m);
        let mut proj = CMat::zeros(n, n);
        for (j, &l) in vals.iter().enumerate() {
            if l > 0.0 {
                let col = vecs.column(j);
                proj += col * col.adjoint() * cr(l);
            }
        }
        v[range].copy_from_slice(&vec_herm(&proj));
        out.push(BlockEig {
            min: vals.first().copied().unwrap_or(0.0),
            neg_sq: vals.iter().filter(|&&l| l < 0.0).map(|l| l * l).sum(),
        });
    }
    out
}

fn block_eigs(p: &SdpProblem, v: &[f64]) -> Vec<BlockEig> {
    let mut copy = v.to_vec();
    project_cone(p, &mut copy)
}

pub fn solve_sdp_with(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    for (b, cost) in p.objective.iter().enumerate() {
        p.check_block(b, cost)?;
    }
    let n = p.dim();
    let m = p.constraints.len();
    let a = Affine::new(&p.constraints, n);
    let b: Vec<f64> = p.constraints.iter().map(|c| c.rhs).collect();
    let c = p.cost_vector();
    let bnorm = norm(&b);
    let cnorm = norm(&c);
    let alpha = opts.relaxation;

    let mut z = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut w = vec![0.0; m];
    let mut rho = 1.0;
    let mut history = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut status = Status::MaxIterations;
    let mut last = (f64::NAN, f64::NAN, f64::NAN, Vec::new());
    let mut it = 0;
    while it < opts.max_iterations {
        it += 1;
        let v: Vec<f64> = (0..n).map(|i| z[i] - u[i] - c[i] / rho).collect();
        let av = a.apply(&v);
        let rhs: Vec<f64> = (0..m).map(|i| av[i] - b[i]).collect();
        a.solve_normal(&rhs, &mut w);
        let atw = a.apply_t(&w);
        let x: Vec<f64> = (0..n).map(|i| v[i] - atw[i]).collect();
        let xh: Vec<f64> = (0..n).map(|i| alpha * x[i] + (1.0 - alpha) * z[i]).collect();
        let z_old = z.clone();
        z = (0..n).map(|i| xh[i] + u[i]).collect();
        project_cone(p, &mut z);
        for i in 0..n {
            u[i] += xh[i] - z[i];
        }

        if it % 10 == 0 || it == opts.max_iterations {
            let y: Vec<f64> = w.iter().map(|wi| -rho * wi).collect();
            let aty = a.apply_t(&y);
            let s: Vec<f64> = (0..n).map(|i| c[i] - aty[i]).collect();
            let eigs = block_eigs(p, &s);
            let mut certified = dot(&b, &y);
            for (e, &tau) in eigs.iter().zip(&p.trace_bounds) {
                if e.min < 0.0 {
                    certified += tau * e.min;
                }
            }
            let dres = eigs.iter().map(|e| e.neg_sq).sum::<f64>().sqrt() / (1.0 + cnorm);
            let az = a.apply(&z);
            let pres = norm(&(0..m).map(|i| az[i] - b[i]).collect::<Vec<_>>()) / (1.0 + bnorm);
            let primal = dot(&c, &z);
            history.push(certified);
            if certified.is_finite() && best.as_ref().is_none_or(|(d, _)| certified > *d) {
                best = Some((certified, y.clone()));
            }
            let gap_ref = if certified.is_finite() { certified } else { dot(&b, &y) };
            let gap = (primal - gap_ref).abs() / (1.0 + primal.abs() + gap_ref.abs());
            last = (primal, pres, dres, y);
            if pres < opts.tolerance && dres < opts.tolerance && gap < opts.gap_tolerance {
                status = Status::Optimal;
                break;
            }
            if primal.abs() > 1e12 || !primal.is_finite() {
                status = Status::InfeasibleSuspected;
                break;
            }
        }

        if it % 50 == 0 {
            let r = norm(&(0..n).map(|i| x[i] - z[i]).collect::<Vec<_>>());
            let s = rho * norm(&(0..n).map(|i| z[i] - z_old[i]).collect::<Vec<_>>());
            let scale = if r > 10.0 * s {
                2.0
            } else if s > 10.0 * r {
                0.5
            } else {
                1.0
            };
            if scale != 1.0 {
                rho *= scale;
                u.iter_mut().for_each(|v| *v /= scale);
                w.iter_mut().for_each(|v| *v /= scale);
            }
        }
    }
    let (primal, pres, dres, y) = last;
    let (certified, multipliers) = best.unwrap_or((f64::NEG_INFINITY, y));
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let blocks = p
        .blocks
        .iter()
        .enumerate()
        .map(|(k, &side)| unvec_herm(&z[p.offsets[k]..p.offsets[k + 1]], side))
        .collect();
    Ok(SdpSolution {
        primal_value: sign * primal,
        dual_value: sign * certified,
        blocks,
        multipliers,
        primal_residual: pres,
        dual_residual: dres,
        iterations: it,
        status,
        dual_history: history.into_iter().map(|d| sign * d).collect(),
    })
}
