use gme_core::linalg::*;
use gme_core::measures::*;
use gme_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn diag_state(weights: &[f64], d: usize) -> PureState {
    let mut amps = vec![0.0; d * d];
    for (i, w) in weights.iter().enumerate() {
        amps[i * d + i] = w.sqrt();
    }
    PureState::from_real(&amps, &[d, d]).unwrap()
}

fn catalysis_pair() -> (PureState, PureState) {
    (diag_state(&[0.4, 0.4, 0.1, 0.1], 4), diag_state(&[0.5, 0.25, 0.25], 4))
}

fn random_local_unitary(da: usize, db: usize, rng: &mut ChaCha8Rng) -> CMat {
    kron(&sample_haar_unitary(da, rng), &sample_haar_unitary(db, rng))
}

#[test]
fn catalysis_example() {
    let (psi, phi) = catalysis_pair();
    assert!((k_gme_pure(&psi, &[0], 3).unwrap() - 0.2).abs() < 1e-12);
    assert!(!nielsen_transformable(&psi, &phi, &[0]).unwrap());
    let lp = schmidt_spectrum(&psi, &[0]).unwrap();
    let lf = schmidt_spectrum(&phi, &[0]).unwrap();
    assert!(!majorization(&lp, &lf).majorizes);
    let r = vidal_probability(&psi, &phi, &[0]).unwrap();
    assert!((r.optimal_probability - 0.8).abs() < 1e-12);
    assert_eq!(r.binding_index, 3);
    assert!(!r.deterministic_possible);

    let omega = diag_state(&[0.6, 0.4], 2);
    let pc = psi.tensor(&omega);
    let fc = phi.tensor(&omega);
    assert!(nielsen_transformable(&pc, &fc, &[0, 2]).unwrap());
    let r = vidal_probability(&pc, &fc, &[0, 2]).unwrap();
    assert!(r.deterministic_possible);
    assert!((r.optimal_probability - 1.0).abs() < 1e-12);
    assert!(nielsen_transformable(&psi, &psi, &[0]).unwrap());
}

#[test]
fn vidal_trivial_cases() {
    let bell = diag_state(&[0.5, 0.5], 2);
    assert_eq!(vidal_probability(&bell, &bell, &[0]).unwrap().optimal_probability, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let psi = sample_haar_pure_with(&DimsLayout::new(vec![3, 3]).unwrap(), &mut rng);
    let prod = PureState::basis(&[3, 3], &[1, 2]).unwrap();
    let r = vidal_probability(&psi, &prod, &[0]).unwrap();
    assert_eq!(r.optimal_probability, 1.0);
    assert_eq!(r.binding_index, 1);
    let r = vidal_probability(&prod, &psi, &[0]).unwrap();
    assert_eq!(r.optimal_probability, 0.0);
}

#[test]
fn two_qubit_gme_matches_concurrence() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let layout = DimsLayout::qubits(2);
    for _ in 0..50 {
        let psi = sample_haar_pure_with(&layout, &mut rng);
        let c_ = concurrence_pure(&psi, &[0]).unwrap();
        let e = k_gme_pure(&psi, &[0], 2).unwrap();
        assert!((e - 0.5 * (1.0 - (1.0 - c_ * c_).sqrt())).abs() < 1e-10);
        assert!((linear_entropy(&psi, &[0]).unwrap() - c_ * c_ / 2.0).abs() < 1e-12);
        let cm = concurrence_2q(&psi.projector()).unwrap();
        assert!((cm - c_).abs() < 1e-6);
    }
}

#[test]
fn max_entangled_entropy() {
    for d in 2..=5 {
        let psi = zoo::max_entangled(d);
        assert!((entanglement_entropy(&psi, &[0]).unwrap() - (d as f64).log2()).abs() < 1e-12);
    }
}

/// Two-qubit Werner state in swap form.
fn werner_2q(alpha: f64) -> DensityMatrix {
    zoo::werner(2, alpha).unwrap()
}

/// Random-decomposition search for the convex roof of the entanglement of
/// formation; an upper bound on the true value.
fn eof_brute_force(rho: &DensityMatrix, trials: usize, seed: u64) -> f64 {
    let (vals, vecs) = rho.eigen();
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-12).collect();
    let r = keep.len();
    let mut sqrt_ev = CMat::zeros(4, r);
    for (col, &i) in keep.iter().enumerate() {
        sqrt_ev.set_column(col, &(vecs.column(i) * cr(vals[i].sqrt())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for t in 0..trials {
        let n = (r.max(2) + t % 5).max(r);
        let u = sample_haar_unitary(n, &mut rng);
        let x = u.columns(0, r).into_owned();
        let mut total = 0.0;
        for i in 0..n {
            let v = &sqrt_ev * x.row(i).transpose();
            let p = v.norm_squared();
            if p < 1e-14 {
                continue;
            }
            let psi = PureState::new(v, DimsLayout::qubits(2)).unwrap();
            total += p * entanglement_entropy(&psi, &[0]).unwrap();
        }
        best = best.min(total);
    }
    best
}

#[test]
fn eof_matches_roof_search_on_werner() {
    for alpha in [-0.8, -0.3, 0.2, 0.6, 0.9, 1.0] {
        let rho = werner_2q(alpha);
        let exact = eof_2q(&rho).unwrap();
        let search = eof_brute_force(&rho, 2000, 7);
        assert!(search >= exact - 1e-4, "alpha={alpha}: search {search} below formula {exact}");
    }
    let bell = diag_state(&[0.5, 0.5], 2).projector();
    assert!((eof_brute_force(&bell, 50, 1) - eof_2q(&bell).unwrap()).abs() < 1e-6);
}

#[test]
fn distill_full_dimension_uses_smallest_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let layout = DimsLayout::new(vec![4, 4]).unwrap();
    for _ in 0..20 {
        let psi = sample_haar_pure_with(&layout, &mut rng);
        let spec = schmidt_spectrum(&psi, &[0]).unwrap();
        let r = distill_probability(&psi, 4, &[0]).unwrap();
        assert!((r.optimal_probability - (4.0 * spec[3]).min(1.0)).abs() < 1e-12);
    }
}

#[test]
fn b_sequence_has_single_turning_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let layout = DimsLayout::new(vec![4, 4]).unwrap();
    for _ in 0..1000 {
        let psi = sample_haar_pure_with(&layout, &mut rng);
        let spec = schmidt_spectrum(&psi, &[0]).unwrap();
        for m in 2..=4 {
            let b: Vec<f64> = (1..=m)
                .map(|n| m as f64 / n as f64 * k_gme_from_spectrum(&spec, m - n + 1))
                .collect();
            let mut rising = false;
            for w in b.windows(2) {
                if w[1] > w[0] + 1e-15 {
                    rising = true;
                } else if rising && w[1] < w[0] - 1e-12 {
                    panic!("B sequence descends after rising: {b:?}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn vidal_one_iff_nielsen(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = DimsLayout::new(vec![3, 3]).unwrap();
        let psi = sample_haar_pure_with(&layout, &mut rng);
        let phi = sample_haar_pure_with(&layout, &mut rng);
        let n = nielsen_transformable(&psi, &phi, &[0]).unwrap();
        let v = vidal_probability(&psi, &phi, &[0]).unwrap();
        prop_assert_eq!(n, v.deterministic_possible);
        let back = vidal_probability(&phi, &psi, &[0]).unwrap();
        prop_assert_eq!(nielsen_transformable(&phi, &psi, &[0]).unwrap(), back.deterministic_possible);
    }

    #[test]
    fn measures_are_local_unitary_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = DimsLayout::new(vec![3, 4]).unwrap();
        let psi = sample_haar_pure_with(&layout, &mut rng);
        let moved = psi.apply(&random_local_unitary(3, 4, &mut rng)).unwrap();
        for k in 1..=4 {
            prop_assert!((k_gme_pure(&psi, &[0], k).unwrap() - k_gme_pure(&moved, &[0], k).unwrap()).abs() < 1e-10);
        }
        prop_assert!((entanglement_entropy(&psi, &[0]).unwrap() - entanglement_entropy(&moved, &[0]).unwrap()).abs() < 1e-10);
        prop_assert!((concurrence_pure(&psi, &[0]).unwrap() - concurrence_pure(&moved, &[0]).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn k_gme_monotone_in_unit_interval(seed in any::<u64>()) {
        let psi = sample_haar_pure(&DimsLayout::new(vec![4, 5]).unwrap(), seed);
        let vals: Vec<f64> = (1..=6).map(|k| k_gme_pure(&psi, &[0], k).unwrap()).collect();
        prop_assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        prop_assert_eq!(vals[5], 0.0);
    }

    #[test]
    fn distill_non_increasing_in_target(seed in any::<u64>()) {
        let psi = sample_haar_pure(&DimsLayout::new(vec![4, 4]).unwrap(), seed);
        let p: Vec<f64> = (1..=4).map(|m| distill_probability(&psi, m, &[0]).unwrap().optimal_probability).collect();
        prop_assert!(p.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn majorization_implies_weak(x in prop::collection::vec(0.0f64..1.0, 1..6), y in prop::collection::vec(0.0f64..1.0, 1..6)) {
        let v = majorization(&x, &y);
        if v.majorizes {
            prop_assert!(v.weakly_majorizes);
        }
        prop_assert!(majorization(&x, &x).majorizes);
    }
}
