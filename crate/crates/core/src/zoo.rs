//! Named states, subspaces and closed-form reference values.

use crate::error::{QError, Result};
use crate::linalg::*;
use crate::state::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Bell,
    Ghz { n: usize },
    W,
    WTilde,
    MaxEntangled { d: usize },
    Dicke { n: usize, m: usize },
    Isotropic { d: usize, f: f64 },
    Werner { d: usize, alpha: f64 },
    Horodecki { a: f64 },
    UpbTilesState,
    UpbShiftsState,
    HuberPpt { d: usize },
    DickeMixture { n: usize, k1: usize, k2: usize, r: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubspaceSpec {
    TwoByDTheta { d: usize, theta: f64, xi: f64 },
    Johnston4x4,
    Bhat { d1: usize, d2: usize, d3: usize },
    TilesComplement,
    ShiftsComplement,
}

impl StateSpec {
    pub fn is_pure(&self) -> bool {
        matches!(
            self,
            StateSpec::Bell
                | StateSpec::Ghz { .. }
                | StateSpec::W
                | StateSpec::WTilde
                | StateSpec::MaxEntangled { .. }
                | StateSpec::Dicke { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QError::ParameterOutOfRange(msg));
        match *self {
            StateSpec::Ghz { n } if n < 2 => bad(format!("ghz needs n >= 2, got {n}")),
            StateSpec::MaxEntangled { d } if d < 2 => bad(format!("max_entangled needs d >= 2, got {d}")),
            StateSpec::Dicke { n, m } if m > n || n == 0 => bad(format!("dicke needs 0 <= m <= n, got n={n}, m={m}")),
            StateSpec::Isotropic { d, f } if d < 2 || !(0.0..=1.0).contains(&f) => {
                bad(format!("isotropic needs d >= 2 and F in [0,1], got d={d}, F={f}"))
            }
            StateSpec::Werner { d, alpha } if d < 2 || !(-1.0..=1.0).contains(&alpha) => {
                bad(format!("werner needs d >= 2 and alpha in [-1,1], got d={d}, alpha={alpha}"))
            }
            StateSpec::Horodecki { a } if !(0.0..=1.0).contains(&a) => bad(format!("horodecki needs a in [0,1], got {a}")),
            StateSpec::HuberPpt { d } if d < 4 || d % 2 == 1 => bad(format!("huber_ppt needs even d >= 4, got {d}")),
            StateSpec::DickeMixture { n, k1, k2, r } if k1 > n || k2 > n || k1 == k2 || !(0.0..=1.0).contains(&r) => {
                bad(format!("dicke_mixture needs distinct k1,k2 <= n and r in [0,1], got n={n}, k1={k1}, k2={k2}, r={r}"))
            }
            _ => Ok(()),
        }
    }
}

impl SubspaceSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SubspaceSpec::TwoByDTheta { d, theta, xi } => {
                if d < 2 || !(theta > 0.0 && theta < PI) || !(0.0..2.0 * PI).contains(&xi) {
                    return Err(QError::ParameterOutOfRange(format!(
                        "two_by_d_theta needs d >= 2, theta in (0,pi), xi in [0,2pi); got d={d}, theta={theta}, xi={xi}"
                    )));
                }
                Ok(())
            }
            SubspaceSpec::Bhat { d1, d2, d3 } if d1 < 2 || d2 < 2 || d3 < 2 => Err(QError::ParameterOutOfRange(
                format!("bhat needs local dimensions >= 2, got ({d1},{d2},{d3})"),
            )),
            _ => Ok(()),
        }
    }
}

fn ket(dims: &[usize], entries: &[(&[usize], C64)]) -> Result<PureState> {
    let layout = DimsLayout::new(dims.to_vec())?;
    let mut v = CVec::zeros(layout.total());
    for (digits, amp) in entries {
        let idx = digits.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i);
        v[idx] += *amp;
    }
    PureState::new(v, layout)
}

/// Product of single-party vectors (unnormalized inputs allowed).
fn product(factors: &[CVec]) -> Result<PureState> {
    let dims: Vec<usize> = factors.iter().map(|f| f.len()).collect();
    let mut v = CVec::from_element(1, ONE);
    for f in factors {
        v = kron_vec(&v, f);
    }
    PureState::new(v, DimsLayout::new(dims)?)
}

fn qv(a: f64, b: f64) -> CVec {
    from_real(&[a, b])
}

fn qtv(a: f64, b: f64, c_: f64) -> CVec {
    from_real(&[a, b, c_])
}

pub fn max_entangled(d: usize) -> PureState {
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = ONE;
    }
    PureState::new(v, DimsLayout::new(vec![d, d]).expect("d >= 1")).expect("non-zero")
}

pub fn dicke(n: usize, m: usize) -> Result<PureState> {
    StateSpec::Dicke { n, m }.validate()?;
    let layout = DimsLayout::qubits(n);
    let mut v = CVec::zeros(layout.total());
    for idx in 0..layout.total() {
        if (idx as u64).count_ones() as usize == m {
            v[idx] = ONE;
        }
    }
    PureState::new(v, layout)
}

/// Swap operator `Σ|i,j⟩⟨j,i|` on `d ⊗ d`.
pub fn swap_operator(d: usize) -> CMat {
    let mut s = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(i * d + j, j * d + i)] = ONE;
        }
    }
    s
}

pub fn isotropic(d: usize, f: f64) -> Result<DensityMatrix> {
    StateSpec::Isotropic { d, f }.validate()?;
    let psi = max_entangled(d).projector();
    let n = d * d;
    let m = (identity(n) - psi.matrix()) * cr((1.0 - f) / (n as f64 - 1.0)) + psi.matrix() * cr(f);
    DensityMatrix::new(m, DimsLayout::new(vec![d, d])?)
}

pub fn werner(d: usize, alpha: f64) -> Result<DensityMatrix> {
    StateSpec::Werner { d, alpha }.validate()?;
    let n = (d * d) as f64;
    let norm = n - d as f64 * alpha;
    let m = (identity(d * d) - swap_operator(d) * cr(alpha)) * cr(1.0 / norm);
    DensityMatrix::new(m, DimsLayout::new(vec![d, d])?)
}

pub fn horodecki(a: f64) -> Result<DensityMatrix> {
    StateSpec::Horodecki { a }.validate()?;
    let mut m = CMat::zeros(9, 9);
    for i in 0..9 {
        m[(i, i)] = cr(a);
    }
    for &(i, j) in &[(0, 4), (0, 8), (4, 8)] {
        m[(i, j)] = cr(a);
        m[(j, i)] = cr(a);
    }
    let off = (1.0 - a * a).sqrt() / 2.0;
    m[(6, 6)] = cr((1.0 + a) / 2.0);
    m[(8, 8)] = cr((1.0 + a) / 2.0);
    m[(6, 8)] = cr(off);
    m[(8, 6)] = cr(off);
    DensityMatrix::new(m * cr(1.0 / (8.0 * a + 1.0)), DimsLayout::new(vec![3, 3])?)
}

/// Five-state tiles UPB in `3 ⊗ 3`.
pub fn tiles_upb() -> Vec<PureState> {
    [
        (qtv(1.0, 0.0, 0.0), qtv(1.0, -1.0, 0.0)),
        (qtv(0.0, 0.0, 1.0), qtv(0.0, 1.0, -1.0)),
        (qtv(1.0, -1.0, 0.0), qtv(0.0, 0.0, 1.0)),
        (qtv(0.0, 1.0, -1.0), qtv(1.0, 0.0, 0.0)),
        (qtv(1.0, 1.0, 1.0), qtv(1.0, 1.0, 1.0)),
    ]
    .into_iter()
    .map(|(a, b)| product(&[a, b]).expect("valid product"))
    .collect()
}

/// Three-qubit UPB spanning the subspace whose complement is the shifts
/// completely entangled subspace.
pub fn shifts_upb_span() -> Vec<PureState> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = qv(1.0, 0.0);
    let one = qv(0.0, 1.0);
    let plus = qv(s, s);
    let minus = qv(s, -s);
    vec![
        product(&[zero.clone(), zero.clone(), zero]).unwrap(),
        product(&[one.clone(), plus.clone(), minus.clone()]).unwrap(),
        product(&[minus.clone(), one.clone(), plus.clone()]).unwrap(),
        product(&[plus, minus, one]).unwrap(),
    ]
}

/// Three-qubit UPB used for the biseparable-but-entangled mixed state.
pub fn shifts_upb_mixed() -> Vec<PureState> {
    let zero = qv(1.0, 0.0);
    let one = qv(0.0, 1.0);
    let plus = qv(1.0, 1.0);
    let minus = qv(1.0, -1.0);
    vec![
        product(&[zero.clone(), one.clone(), plus.clone()]).unwrap(),
        product(&[one, plus.clone(), zero.clone()]).unwrap(),
        product(&[plus, zero, qv(0.0, 1.0)]).unwrap(),
        product(&[minus.clone(), minus.clone(), minus]).unwrap(),
    ]
}

fn upb_state(upb: &[PureState]) -> Result<DensityMatrix> {
    let p = complement_projector(upb)?;
    let layout = upb[0].layout().clone();
    DensityMatrix::new(p.matrix.unscale(p.rank as f64), layout)
}

pub fn huber_ppt(d: usize) -> Result<DensityMatrix> {
    StateSpec::HuberPpt { d }.validate()?;
    let m = d / 2;
    let phi2 = max_entangled(2).projector();
    let phim = max_entangled(m).projector();
    let r = kron(&(identity(4) - phi2.matrix()), &(identity(m * m) - phim.matrix()))
        + kron(phi2.matrix(), phim.matrix()) * cr(m as f64 + 1.0);
    // Built in A1 B1 A2 B2 order, regrouped to (A1 A2)(B1 B2).
    let raw = DensityMatrix::from_unnormalized(r, DimsLayout::new(vec![2, 2, m, m])?)?;
    let grouped = raw.regroup(&[vec![0, 2], vec![1, 3]])?;
    Ok(grouped)
}

pub fn dicke_mixture(n: usize, k1: usize, k2: usize, r: f64) -> Result<DensityMatrix> {
    StateSpec::DickeMixture { n, k1, k2, r }.validate()?;
    let a = dicke(n, k1)?.projector();
    let b = dicke(n, k2)?.projector();
    a.mix(&b, r)
}

/// `ρ_I(F) ⊗ ρ_I(F)` for two `2 ⊗ 2` isotropic copies, regrouped to the
/// `(A1 A2)(B1 B2)` cut of a `4 ⊗ 4` system.
pub fn two_copy_isotropic(f: f64) -> Result<DensityMatrix> {
    let one = isotropic(2, f)?;
    one.tensor(&one).regroup(&[vec![0, 2], vec![1, 3]])
}

pub fn canonical_pure(spec: &StateSpec) -> Result<PureState> {
    spec.validate()?;
    let one = ONE;
    match *spec {
        StateSpec::Bell => max_entangled_state(2),
        StateSpec::Ghz { n } => ket(&vec![2; n], &[(&vec![0; n], one), (&vec![1; n], one)]),
        StateSpec::W => dicke(3, 1),
        StateSpec::WTilde => dicke(3, 2),
        StateSpec::MaxEntangled { d } => max_entangled_state(d),
        StateSpec::Dicke { n, m } => dicke(n, m),
        _ => Err(QError::Unsupported(format!("{spec:?} is not a pure state"))),
    }
}

fn max_entangled_state(d: usize) -> Result<PureState> {
    Ok(max_entangled(d))
}

pub fn canonical_mixed(spec: &StateSpec) -> Result<DensityMatrix> {
    spec.validate()?;
    match *spec {
        StateSpec::Isotropic { d, f } => isotropic(d, f),
        StateSpec::Werner { d, alpha } => werner(d, alpha),
        StateSpec::Horodecki { a } => horodecki(a),
        StateSpec::UpbTilesState => upb_state(&tiles_upb()),
        StateSpec::UpbShiftsState => upb_state(&shifts_upb_mixed()),
        StateSpec::HuberPpt { d } => huber_ppt(d),
        StateSpec::DickeMixture { n, k1, k2, r } => dicke_mixture(n, k1, k2, r),
        _ => Ok(canonical_pure(spec)?.projector()),
    }
}

pub fn canonical_subspace(spec: &SubspaceSpec) -> Result<Subspace> {
    spec.validate()?;
    match *spec {
        SubspaceSpec::TwoByDTheta { d, theta, xi } => {
            let a = cr((theta / 2.0).cos());
            let b = C64::from_polar((theta / 2.0).sin(), xi);
            let states = (0..d - 1)
                .map(|i| ket(&[2, d], &[(&[0, i], a), (&[1, i + 1], b)]))
                .collect::<Result<Vec<_>>>()?;
            Subspace::new(states)
        }
        SubspaceSpec::Johnston4x4 => {
            let d = [4, 4];
            let p = ONE;
            let m = -ONE;
            let s1 = ket(&d, &[(&[0, 0], p), (&[1, 1], p), (&[2, 2], p), (&[3, 3], p)])?;
            let s2 = ket(&d, &[(&[0, 1], p), (&[1, 2], p), (&[2, 3], p), (&[3, 0], p)])?;
            let s3 = ket(&d, &[(&[0, 2], p), (&[1, 3], p), (&[2, 0], p), (&[3, 1], m)])?;
            Subspace::new(vec![s1, s2, s3])
        }
        SubspaceSpec::Bhat { d1, d2, d3 } => {
            let dims = [d1, d2, d3];
            let max_sum = d1 + d2 + d3 - 3;
            let mut classes: Vec<Vec<[usize; 3]>> = vec![Vec::new(); max_sum + 1];
            for i in 0..d1 {
                for j in 0..d2 {
                    for k in 0..d3 {
                        classes[i + j + k].push([i, j, k]);
                    }
                }
            }
            let mut states = Vec::new();
            for class in classes {
                for pair in class.windows(2) {
                    states.push(ket(&dims, &[(&pair[0], ONE), (&pair[1], -ONE)])?);
                }
            }
            Subspace::new(states)
        }
        SubspaceSpec::TilesComplement => Subspace::new(tiles_upb())?.orthogonal_complement(),
        SubspaceSpec::ShiftsComplement => Subspace::new(shifts_upb_span())?.orthogonal_complement(),
    }
}

/// Either kind of named object accepted by [`oracle_gme`].
#[derive(Debug, Clone, PartialEq)]
pub enum OracleTarget {
    State(StateSpec),
    Subspace(SubspaceSpec),
}

/// k-GME of the `d ⊗ d` isotropic state.
pub fn isotropic_kgme(d: usize, f: f64, k: usize) -> f64 {
    if k <= 1 {
        return 1.0;
    }
    if k > d {
        return 0.0;
    }
    let km1 = (k - 1) as f64;
    let df = d as f64;
    if f <= km1 / df {
        return 0.0;
    }
    let root = (f * km1).sqrt() + ((1.0 - f) * (df - km1)).sqrt();
    (1.0 - root * root / df).max(0.0)
}

/// Geometric measure of the `d ⊗ d` Werner state.
pub fn werner_gme(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    if alpha <= 1.0 / df {
        return 0.0;
    }
    let t = (df * alpha - 1.0) / (alpha - df);
    0.5 * (1.0 - (1.0 - t * t).max(0.0).sqrt())
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Geometric measure of the Dicke state `|D_n^m⟩`.
pub fn dicke_gme(n: usize, m: usize) -> f64 {
    if m == 0 || m == n {
        return 0.0;
    }
    let p = m as f64 / n as f64;
    1.0 - binomial(n, m) * p.powi(m as i32) * (1.0 - p).powi((n - m) as i32)
}

/// k = 2 measure of the `2 ⊗ d` subspace family.
pub fn two_by_d_gme(d: usize, theta: f64) -> f64 {
    let s = theta.sin() * (PI / d as f64).sin();
    0.5 * (1.0 - (1.0 - s * s).sqrt())
}

pub fn oracle_gme(target: &OracleTarget, k: usize) -> Result<f64> {
    let unsupported = || Err(QError::Unsupported(format!("no closed form for {target:?} at k = {k}")));
    match target {
        OracleTarget::State(spec) => {
            spec.validate()?;
            match *spec {
                StateSpec::Isotropic { d, f } => Ok(isotropic_kgme(d, f, k)),
                StateSpec::Werner { d, alpha } if k == 2 => Ok(werner_gme(d, alpha)),
                StateSpec::Dicke { n, m } if k == 2 => Ok(dicke_gme(n, m)),
                StateSpec::Ghz { .. } if k == 2 => Ok(0.5),
                StateSpec::W | StateSpec::WTilde if k == 2 => Ok(5.0 / 9.0),
                StateSpec::Bell if k >= 1 => Ok(isotropic_kgme(2, 1.0, k)),
                StateSpec::MaxEntangled { d } if k >= 1 => Ok(isotropic_kgme(d, 1.0, k)),
                _ => unsupported(),
            }
        }
        OracleTarget::Subspace(spec) => {
            spec.validate()?;
            match *spec {
                SubspaceSpec::TwoByDTheta { d, theta, .. } if k == 2 => Ok(two_by_d_gme(d, theta)),
                _ => unsupported(),
            }
        }
    }
}

/// Overlap `⟨(cos θ|0⟩ + sin θ|1⟩)^{⊗n} | ψ(r, 0)⟩` for the two-Dicke mixture.
fn dicke_pair_overlap(n: usize, k1: usize, k2: usize, r: f64, theta: f64) -> f64 {
    let (s, c_) = theta.sin_cos();
    let term = |k: usize| binomial(n, k).sqrt() * c_.powi((n - k) as i32) * s.powi(k as i32);
    r.sqrt() * term(k1) + (1.0 - r).sqrt() * term(k2)
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Geometric measure of `√r|D_n^{k1}⟩ + √(1−r)|D_n^{k2}⟩` by scalar
/// maximization over the symmetric product-state angle.
pub fn dicke_pair_pure_gme(n: usize, k1: usize, k2: usize, r: f64) -> f64 {
    const SCAN: usize = 256;
    let f = |t: f64| dicke_pair_overlap(n, k1, k2, r, t);
    let h = (PI / 2.0) / SCAN as f64;
    let vals: Vec<f64> = (0..=SCAN).map(|i| f(i as f64 * h)).collect();
    let mut best = vals.iter().copied().fold(f64::MIN, f64::max);
    for i in 0..=SCAN {
        let left = if i == 0 { f64::MIN } else { vals[i - 1] };
        let right = if i == SCAN { f64::MIN } else { vals[i + 1] };
        if vals[i] >= left && vals[i] >= right {
            let lo = (i.saturating_sub(1)) as f64 * h;
            let hi = ((i + 1).min(SCAN)) as f64 * h;
            let (_, v) = golden_max(f, lo, hi, 1e-12);
            best = best.max(v);
        }
    }
    1.0 - best * best
}

/// Lower convex envelope of `(x_i, y_i)` with increasing `x`, evaluated at `x`.
pub fn lower_convex_envelope(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        if x >= xs[a] && x <= xs[b] {
            let t = if xs[b] > xs[a] { (x - xs[a]) / (xs[b] - xs[a]) } else { 0.0 };
            return ys[a] + t * (ys[b] - ys[a]);
        }
    }
    ys[*hull.last().expect("non-empty")]
}

/// Geometric measure of the two-Dicke mixture: convex roof over the pure
/// curve sampled on 513 mixture weights.
pub fn dicke_mixture_gme(n: usize, k1: usize, k2: usize, r: f64) -> Result<f64> {
    StateSpec::DickeMixture { n, k1, k2, r }.validate()?;
    const GRID: usize = 513;
    let xs: Vec<f64> = (0..GRID).map(|i| i as f64 / (GRID - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| dicke_pair_pure_gme(n, k1, k2, x)).collect();
    Ok(lower_convex_envelope(&xs, &ys, r))
}
