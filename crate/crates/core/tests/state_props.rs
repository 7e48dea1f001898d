use gme_core::linalg::*;
use gme_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn layout_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=4, 2..=3).prop_filter("total <= 64", |d| d.iter().product::<usize>() <= 64)
}

fn random_density(layout: &DimsLayout, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let n = layout.total();
    let g = CMat::from_fn(n, n, |_, _| haar_vector(1, rng)[0]);
    DensityMatrix::from_unnormalized(&g * g.adjoint(), layout.clone()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn schmidt_reconstructs(dims in layout_strategy(), seed in any::<u64>()) {
        let layout = DimsLayout::new(dims).unwrap();
        let psi = sample_haar_pure(&layout, seed);
        let sd = schmidt_decompose(&psi, &[0]).unwrap();
        let total: f64 = sd.coefficients.iter().map(|m| m * m).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!(sd.coefficients.windows(2).all(|w| w[0] >= w[1]));
        let r = sd.coefficients.len();
        prop_assert!((sd.left_basis.adjoint() * &sd.left_basis - identity(r)).norm() < 1e-10);
        prop_assert!((sd.right_basis.adjoint() * &sd.right_basis - identity(r)).norm() < 1e-10);
        let recon = (0..r).fold(CVec::zeros(layout.total()), |acc, i| {
            acc + kron_vec(&sd.left_basis.column(i).into_owned(), &sd.right_basis.column(i).into_owned())
                * cr(sd.coefficients[i])
        });
        prop_assert!((recon - psi.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn partial_trace_recovers_factors(da in 1usize..=4, db in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_density(&DimsLayout::new(vec![da]).unwrap(), &mut rng);
        let b = random_density(&DimsLayout::new(vec![db]).unwrap(), &mut rng);
        let ab = a.tensor(&b);
        let ra = partial_trace(&ab, &[1]).unwrap();
        let rb = partial_trace(&ab, &[0]).unwrap();
        prop_assert!((ra.matrix() - a.matrix()).norm() < 1e-10);
        prop_assert!((rb.matrix() - b.matrix()).norm() < 1e-10);
    }

    #[test]
    fn partial_transpose_is_trace_preserving_involution(dims in layout_strategy(), seed in any::<u64>()) {
        let layout = DimsLayout::new(dims).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&layout, &mut rng);
        let pt = partial_transpose(&rho, &[0]).unwrap();
        prop_assert!(hermitian_defect(&pt) == 0.0);
        prop_assert!((trace(&pt) - trace(rho.matrix())).norm() < 1e-14);
        let back = partial_transpose_matrix(&pt, &layout, &[0]).unwrap();
        prop_assert!(back == *rho.matrix());
    }

    #[test]
    fn fidelity_symmetric_and_pure_overlap(n in 2usize..=6, seed in any::<u64>()) {
        let layout = DimsLayout::new(vec![n]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&layout, &mut rng);
        let sigma = random_density(&layout, &mut rng);
        let f1 = fidelity(&rho, &sigma).unwrap();
        let f2 = fidelity(&sigma, &rho).unwrap();
        prop_assert!((f1 - f2).abs() < 1e-10);
        let psi = sample_haar_pure_with(&layout, &mut rng);
        let phi = sample_haar_pure_with(&layout, &mut rng);
        let f = fidelity(&psi.projector(), &phi.projector()).unwrap();
        prop_assert!((f - psi.inner(&phi).norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn complement_projector_is_projector(n_states in 1usize..=5, seed in any::<u64>()) {
        let layout = DimsLayout::new(vec![3, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states: Vec<PureState> = (0..n_states).map(|_| sample_haar_pure_with(&layout, &mut rng)).collect();
        let p = complement_projector(&states).unwrap();
        prop_assert!((&p.matrix * &p.matrix - &p.matrix).norm() < 1e-10);
        prop_assert!(hermitian_defect(&p.matrix) < 1e-10);
        prop_assert_eq!(p.rank + n_states, 9);
        prop_assert!((trace(&p.matrix).re - p.rank as f64).abs() < 1e-8);
        for s in &states {
            prop_assert!((&p.matrix * s.amplitudes()).norm() < 1e-10);
        }
    }
}

#[test]
fn tensor_of_basis_kets() {
    let k0 = PureState::basis(&[2], &[0]).unwrap();
    let k1 = PureState::basis(&[2], &[1]).unwrap();
    let t = k0.tensor(&k1);
    assert_eq!(t.amplitudes(), &from_real(&[0.0, 1.0, 0.0, 0.0]));
    assert_eq!(t.layout().dims(), &[2, 2]);
}

#[test]
fn tensor_block_structure() {
    let a = CMat::from_fn(2, 2, |i, j| c((1 + i + 2 * j) as f64, 0.0));
    let b = CMat::from_fn(2, 2, |i, j| c(0.0, (1 + 2 * i + j) as f64));
    let l = DimsLayout::new(vec![2]).unwrap();
    let out = tensor_product(&Operand::Matrix(a.clone(), l.clone()), &Operand::Matrix(b.clone(), l.clone())).unwrap();
    let Operand::Matrix(m, layout) = out else { panic!("expected matrix") };
    assert_eq!(layout.dims(), &[2, 2]);
    for (i, j, k, l) in itertools_free_indices() {
        assert_eq!(m[(2 * i + k, 2 * j + l)], a[(i, j)] * b[(k, l)]);
    }
    assert_eq!(kron(&identity(2), &identity(2)), identity(4));
    let v = Operand::Vector(from_real(&[1.0, 0.0]), DimsLayout::new(vec![2]).unwrap());
    assert_eq!(tensor_product(&v, &Operand::Matrix(a, l)), Err(QError::MixedOperands));
}

fn itertools_free_indices() -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out.push((i, j, k, l));
                }
            }
        }
    }
    out
}

#[test]
fn partial_trace_examples() {
    let bell = PureState::from_real(&[1.0, 0.0, 0.0, 1.0], &[2, 2]).unwrap();
    let r = partial_trace(&bell.projector(), &[1]).unwrap();
    assert!((r.matrix() - identity(2) * cr(0.5)).norm() < 1e-15);
    let diag = DensityMatrix::new(
        CMat::from_diagonal(&from_real(&[0.5, 0.0, 0.0, 0.5])),
        DimsLayout::qubits(2),
    )
    .unwrap();
    let r = partial_trace(&diag, &[1]).unwrap();
    assert!((r.matrix() - identity(2) * cr(0.5)).norm() < 1e-15);
    assert!(partial_trace(&diag, &[2]).is_err());
    let all = partial_trace(&diag, &[0, 1]).unwrap();
    assert!((all.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
}

#[test]
fn bell_partial_transpose_eigenvalue() {
    let bell = PureState::from_real(&[1.0, 0.0, 0.0, 1.0], &[2, 2]).unwrap();
    let pt = partial_transpose(&bell.projector(), &[0]).unwrap();
    assert!((min_eigenvalue(&pt) + 0.5).abs() < 1e-14);
    let prod = PureState::basis(&[2, 2], &[0, 1]).unwrap().projector();
    assert!(min_eigenvalue(&partial_transpose(&prod, &[1]).unwrap()) >= -1e-15);
    assert!(partial_transpose(&prod, &[3]).is_err());
}

#[test]
fn schmidt_examples() {
    let bell = PureState::from_real(&[1.0, 0.0, 0.0, 1.0], &[2, 2]).unwrap();
    let sd = schmidt_decompose(&bell, &[0]).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(sd.rank(), 2);
    assert!(sd.coefficients.iter().all(|m| (m - h).abs() < 1e-15));
    let prod = PureState::basis(&[3, 2], &[2, 1]).unwrap();
    let sd = schmidt_decompose(&prod, &[0]).unwrap();
    assert_eq!(sd.coefficients, vec![1.0]);
    let mut amps = vec![0.0; 16];
    for (i, w) in [0.4, 0.4, 0.1, 0.1].iter().enumerate() {
        amps[i * 4 + i] = f64::sqrt(*w);
    }
    let psi = PureState::from_real(&amps, &[4, 4]).unwrap();
    let spec = schmidt_spectrum(&psi, &[0]).unwrap();
    for (got, want) in spec.iter().zip([0.4, 0.4, 0.1, 0.1]) {
        assert!((got - want).abs() < 1e-14);
    }
    assert_eq!(PureState::new(CVec::zeros(4), DimsLayout::qubits(2)), Err(QError::ZeroVector));
}

#[test]
fn complement_projector_examples() {
    let p = complement_projector(&[PureState::basis(&[2, 2], &[0, 0]).unwrap()]).unwrap();
    assert_eq!(p.rank, 3);
    assert!(p.matrix[(0, 0)].norm() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let layout = DimsLayout::new(vec![3, 3]).unwrap();
    let a = sample_haar_pure_with(&layout, &mut rng);
    let b = sample_haar_pure_with(&layout, &mut rng);
    let p1 = complement_projector(&[a.clone(), b.clone()]).unwrap();
    let p2 = complement_projector(&[a.clone(), b.clone(), a, b]).unwrap();
    assert_eq!(p1.rank, p2.rank);
    assert!((p1.matrix - p2.matrix).norm() < 1e-10);
    let other = PureState::basis(&[2, 2], &[0, 0]).unwrap();
    let third = PureState::basis(&[3, 3], &[0, 0]).unwrap();
    assert!(matches!(complement_projector(&[other, third]), Err(QError::DimensionMismatch(_))));
}

#[test]
fn fidelity_examples() {
    let l = DimsLayout::new(vec![2]).unwrap();
    let z = PureState::basis(&[2], &[0]).unwrap().projector();
    let o = PureState::basis(&[2], &[1]).unwrap().projector();
    assert!((fidelity(&z, &z).unwrap() - 1.0).abs() < 1e-12);
    assert!(fidelity(&z, &o).unwrap() < 1e-12);
    assert!((fidelity(&z, &DensityMatrix::maximally_mixed(l)).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn haar_overlap_mean() {
    let d = 6;
    let layout = DimsLayout::new(vec![d]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    let samples: Vec<f64> = (0..n)
        .map(|_| sample_haar_pure_with(&layout, &mut rng).amplitudes()[0].norm_sqr())
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let se = (var / n as f64).sqrt();
    assert!((mean - 1.0 / d as f64).abs() < 3.0 * se);
}

#[test]
fn depolarizing_examples() {
    let bell = PureState::from_real(&[1.0, 0.0, 0.0, 1.0], &[2, 2]).unwrap().projector();
    let full = apply_depolarizing(&bell, 1.0).unwrap();
    assert!((full.matrix() - identity(4) * cr(0.25)).norm() < 1e-15);
    let half = apply_depolarizing(&bell, 0.3).unwrap();
    assert!((trace(half.matrix()).re - 1.0).abs() < 1e-15);
    assert!(apply_depolarizing(&bell, 1.5).is_err());
}

