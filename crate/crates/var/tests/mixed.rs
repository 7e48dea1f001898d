use gme_core::measures::k_gme_pure;
use gme_core::zoo::*;
use gme_core::*;
use gme_var::*;

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

fn quick() -> OptimizerConfig {
    OptimizerConfig::default().with_restarts(2)
}

#[test]
fn isotropic_grid_matches_closed_form() {
    for f in [0.1, 0.3, 0.45, 0.6, 0.8, 0.95] {
        let rho = isotropic(4, f).unwrap();
        for k in 2..=4 {
            let got = kgme_mixed(&rho, k, Some(32), &quick()).unwrap().value;
            let want = isotropic_kgme(4, f, k);
            assert!((got - want).abs() < 1e-4, "F={f} k={k}: {got} vs {want}");
        }
    }
}

#[test]
fn werner_grid() {
    for alpha in [-1.0, -0.6, -0.2, 0.2, 0.6, 1.0] {
        let rho = werner(4, alpha).unwrap();
        let k2 = kgme_mixed(&rho, 2, Some(32), &quick()).unwrap().value;
        assert!((k2 - werner_gme(4, alpha)).abs() < 1e-4, "α={alpha}: {k2}");
        let k3 = kgme_mixed(&rho, 3, Some(24), &quick()).unwrap().value;
        assert!(k3 < 1e-8, "α={alpha}: {k3:e}");
    }
}

#[test]
fn horodecki_bound_entanglement_is_detected() {
    for a in [0.3, 0.5, 0.7] {
        let v = kgme_mixed(&horodecki(a).unwrap(), 2, None, &cfg()).unwrap().value;
        assert!(v > 1e-4, "a={a}: {v:e}");
    }
}

#[test]
fn huber_state_schmidt_number_three() {
    let rho = huber_ppt(6).unwrap();
    let c = quick().with_max_iterations(3000);
    let k2 = kgme_mixed(&rho, 2, Some(100), &c).unwrap().value;
    let k3 = kgme_mixed(&rho, 3, Some(100), &c).unwrap().value;
    assert!((k2 - 0.0476).abs() < 3e-3, "{k2}");
    assert!(k3 < 1e-6, "{k3:e}");
}

#[test]
fn pure_input_matches_schmidt_formula() {
    let psi = sample_haar_pure(&DimsLayout::new(vec![3, 3]).unwrap(), 12);
    let rho = psi.projector();
    for k in 2..=3 {
        let got = kgme_mixed(&rho, k, None, &cfg()).unwrap().value;
        let want = k_gme_pure(&psi, &[0], k).unwrap();
        assert!((got - want).abs() < 1e-6, "k={k}: {got} vs {want}");
    }
}

#[test]
fn shifts_state_partition_pattern() {
    let rho = canonical_mixed(&StateSpec::UpbShiftsState).unwrap();
    let full = gme_mixed_multipartite(&rho, None, &cfg()).unwrap().value;
    assert!((full - 0.08144).abs() < 1e-3, "{full}");
    for groups in [vec![vec![0], vec![1, 2]], vec![vec![1], vec![0, 2]], vec![vec![2], vec![0, 1]]] {
        let v = gme_mixed_partitioned(&rho, &groups, None, &cfg()).unwrap().value;
        assert!(v < 1e-8, "{groups:?}: {v:e}");
    }
}

#[test]
fn dicke_mixtures_follow_convex_hull() {
    for (k1, k2) in [(1, 3), (2, 4)] {
        for r in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let rho = dicke_mixture(7, k1, k2, r).unwrap();
            let got = gme_mixed_multipartite(&rho, None, &quick()).unwrap().value;
            let want = dicke_mixture_gme(7, k1, k2, r).unwrap();
            assert!((got - want).abs() < 1e-3, "({k1},{k2}) r={r}: {got} vs {want}");
        }
    }
}

#[test]
fn product_state_has_zero_gme() {
    let a = sample_haar_pure(&DimsLayout::new(vec![2]).unwrap(), 1).projector();
    let b = isotropic(2, 0.5).unwrap();
    let rho = a.tensor(&DensityMatrix::maximally_mixed(DimsLayout::new(vec![3]).unwrap())).tensor(&b);
    let v = gme_mixed_multipartite(&rho, Some(12), &quick()).unwrap().value;
    assert!(v < 1e-8, "{v:e}");
}

#[test]
fn too_few_entries_is_an_error() {
    let rho = isotropic(3, 0.5).unwrap();
    assert!(kgme_mixed(&rho, 2, Some(4), &cfg()).is_err());
}

#[test]
fn roof_is_convex_on_random_pairs() {
    let layout = DimsLayout::new(vec![2, 3]).unwrap();
    for seed in 0..3 {
        let a = sample_haar_pure(&layout, 100 + seed).projector();
        let b = sample_haar_pure(&layout, 200 + seed).projector();
        let p = 0.3 + 0.2 * seed as f64;
        let mix = a.mix(&b, p).unwrap();
        let ea = kgme_mixed(&a, 2, None, &cfg()).unwrap().value;
        let eb = kgme_mixed(&b, 2, None, &cfg()).unwrap().value;
        let em = kgme_mixed(&mix, 2, None, &cfg()).unwrap().value;
        assert!(em <= p * ea + (1.0 - p) * eb + 1e-5, "{em} vs {ea}, {eb}");
    }
}

#[test]
fn more_entries_never_hurt() {
    let rho = horodecki(0.5).unwrap();
    let small = kgme_mixed(&rho, 2, Some(9), &cfg()).unwrap().value;
    let large = kgme_mixed(&rho, 2, Some(20), &cfg()).unwrap().value;
    assert!(large <= small + 1e-6, "{large} vs {small}");
}

#[test]
fn range_bound_examples() {
    let tiles = canonical_mixed(&StateSpec::UpbTilesState).unwrap();
    let v = range_lower_bound(&tiles, 2, &cfg()).unwrap();
    assert!((v - 0.0284).abs() < 5e-4, "{v}");
    let psi = sample_haar_pure(&DimsLayout::new(vec![2, 3]).unwrap(), 4);
    let v = range_lower_bound(&psi.projector(), 2, &cfg()).unwrap();
    assert!((v - k_gme_pure(&psi, &[0], 2).unwrap()).abs() < 1e-8);
    let v = range_lower_bound(&isotropic(3, 0.5).unwrap(), 2, &cfg()).unwrap();
    assert_eq!(v, 0.0);
}

#[test]
fn truncation_oracle_bounds_joint_objective() {
    use gme_var::objective::RoofObjective;
    use gme_var::optim::initial_point;
    use gme_var::triv::SumOfProducts;
    let rho = horodecki(0.5).unwrap();
    let obj = RoofObjective::new(&rho, 9, SumOfProducts::bounded_rank(&[3, 3], 2)).unwrap();
    for seed in 0..20 {
        let x = initial_point(obj.dim(), seed);
        let t = roof_truncation_oracle(&rho, 2, 9, &x).unwrap();
        assert!(obj.value(&x) >= t - 1e-12);
    }
    // At a joint optimum the inner states are optimal truncations.
    let est = kgme_mixed(&rho, 2, Some(9), &cfg()).unwrap();
    let t = roof_truncation_oracle(&rho, 2, 9, &est.best_params).unwrap();
    assert!((est.value - t).abs() < 1e-8, "{} vs {t}", est.value);
}
