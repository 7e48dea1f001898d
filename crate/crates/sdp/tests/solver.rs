use gme_core::linalg::*;
use gme_core::zoo::*;
use gme_core::*;
use gme_sdp::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn density_problem(h: CMat, sense: Sense) -> SdpProblem {
    let n = h.nrows();
    let mut p = SdpProblem::new(sense, vec![n]);
    p.set_objective(0, h).unwrap();
    p.add_constraint(&[(0, identity(n))], 1.0).unwrap();
    p.set_trace_bound(0, 1.0);
    p
}

#[test]
fn largest_eigenvalue_program() {
    let h = CMat::from_diagonal(&CVec::from_vec(vec![cr(1.0), cr(2.0), cr(3.0)]));
    let s = solve_sdp(&density_problem(h, Sense::Maximize), 1e-7, 100_000).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert!((s.primal_value - 3.0).abs() < 1e-6);
    assert!(s.dual_value >= 3.0 - 1e-9);
    assert!(s.relative_gap() < 1e-6);
}

#[test]
fn feasibility_returns_a_density_matrix() {
    let s = solve_sdp(&density_problem(CMat::zeros(3, 3), Sense::Minimize), 1e-7, 100_000).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert!(s.primal_value.abs() < 1e-9);
    let x = &s.blocks[0];
    assert!((trace(x).re - 1.0).abs() < 1e-6);
    assert!(min_eigenvalue(x) >= -1e-9);
}

#[test]
fn rejects_non_hermitian_data() {
    let mut p = SdpProblem::new(Sense::Minimize, vec![2]);
    let bad = CMat::from_fn(2, 2, |i, j| cr((i + 2 * j) as f64));
    assert!(matches!(p.set_objective(0, bad.clone()), Err(QError::NotHermitian(_))));
    assert!(p.add_constraint(&[(0, bad)], 1.0).is_err());
    assert!(p.add_constraint(&[(0, identity(3))], 1.0).is_err());
}

fn random_problem(seed: u64) -> SdpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3;
    let h = hermitian_part(&sample_haar_unitary(n, &mut rng)) * cr(2.0);
    let a = hermitian_part(&sample_haar_unitary(n, &mut rng));
    let rho0 = sample_haar_pure_with(&DimsLayout::new(vec![n]).unwrap(), &mut rng).projector();
    let mixed = rho0.mix(&DensityMatrix::maximally_mixed(DimsLayout::new(vec![n]).unwrap()), 0.5).unwrap();
    let rhs = (&a * mixed.matrix()).trace().re;
    let mut p = density_problem(h, Sense::Minimize);
    p.add_constraint(&[(0, a)], rhs).unwrap();
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]
    #[test]
    fn weak_duality_at_every_check(seed in 0u64..10_000) {
        let s = solve_sdp(&random_problem(seed), 1e-8, 100_000).unwrap();
        prop_assert_eq!(s.status, Status::Optimal);
        for d in &s.dual_history {
            prop_assert!(*d <= s.primal_value + 1e-7, "{} > {}", d, s.primal_value);
        }
    }
}

#[test]
fn fidelity_sdp_examples() {
    let layout = DimsLayout::new(vec![3]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rho = sample_haar_pure_with(&layout, &mut rng)
        .projector()
        .mix(&DensityMatrix::maximally_mixed(layout.clone()), 0.3)
        .unwrap();
    assert!((fidelity_root_sdp(&rho, &rho).unwrap() - 1.0).abs() < 1e-6);
    let a = PureState::basis(&[3], &[0]).unwrap().projector();
    let b = PureState::basis(&[3], &[1]).unwrap().projector();
    assert!(fidelity_root_sdp(&a, &b).unwrap().abs() < 1e-6);
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mut random_state = || {
            let u = sample_haar_unitary(3, &mut rng);
            let p = sample_haar_pure_with(&layout, &mut rng).projector();
            let q = DensityMatrix::maximally_mixed(layout.clone());
            p.mix(&q, 0.4).unwrap().unitary_conjugate(&u).unwrap()
        };
        let (r, s) = (random_state(), random_state());
        let want = fidelity(&r, &s).unwrap().sqrt();
        let got = fidelity_root_sdp(&r, &s).unwrap();
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    let big = isotropic(2, 0.5).unwrap();
    assert!(fidelity_root_sdp(&a, &big).is_err());
}

#[test]
fn built_problems_close_the_gap() {
    let problems = vec![
        subspace_ppt_problem(&canonical_subspace(&SubspaceSpec::Johnston4x4).unwrap()).unwrap(),
        subspace_reduction_problem(&canonical_subspace(&SubspaceSpec::Johnston4x4).unwrap(), 3).unwrap(),
        subspace_ppt_problem(&canonical_subspace(&SubspaceSpec::ShiftsComplement).unwrap()).unwrap(),
        mixed_fidelity_problem(&isotropic(3, 0.7).unwrap(), 2, Relaxation::Ppt).unwrap(),
        mixed_fidelity_problem(&horodecki(0.5).unwrap(), 2, Relaxation::Reduction).unwrap(),
    ];
    for p in &problems {
        let s = solve_sdp(p, 1e-7, 100_000).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!(s.relative_gap() < 1e-6, "{}", s.relative_gap());
    }
}
