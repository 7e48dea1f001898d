use gme_core::linalg::*;
use gme_core::CMat;
use gme_var::optim::initial_point;
use gme_var::triv::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kinds() -> Vec<Trivialization> {
    vec![
        Trivialization::Positive,
        Trivialization::Simplex { n: 5 },
        Trivialization::Sphere { n: 4 },
        Trivialization::Hermitian { n: 3 },
        Trivialization::Unitary { n: 4 },
        Trivialization::Stiefel { n: 5, r: 3 },
        Trivialization::BoundedRank { k: 3, dims: vec![2, 3] },
        Trivialization::Product { dims: vec![2, 2, 2] },
        Trivialization::Roof {
            n_entries: 4,
            rank: 2,
            inner: Box::new(Trivialization::Product { dims: vec![2, 2] }),
        },
    ]
}

fn unit_columns(x: &CMat) -> f64 {
    (x.adjoint() * x - identity(x.ncols())).norm()
}

#[test]
fn outputs_satisfy_constraints() {
    for (t_idx, t) in kinds().into_iter().enumerate() {
        for p in 0..1000u64 {
            let theta = initial_point(t.input_len(), 1000 * t_idx as u64 + p);
            let out = t.apply(&theta).unwrap();
            match (&t, out) {
                (Trivialization::Positive, Trivialized::Scalar(v)) => assert!(v > 0.0),
                (Trivialization::Simplex { .. }, Trivialized::Real(v)) => {
                    assert!(v.iter().all(|&x| x > 0.0));
                    assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                }
                (Trivialization::Sphere { .. }, Trivialized::Real(v)) => {
                    assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-10);
                }
                (Trivialization::Hermitian { .. }, Trivialized::Matrix(m)) => {
                    assert!(hermitian_defect(&m) < 1e-10)
                }
                (Trivialization::Unitary { .. }, Trivialized::Matrix(m)) => assert!(unit_columns(&m) < 1e-10),
                (Trivialization::Stiefel { .. }, Trivialized::Matrix(m)) => assert!(unit_columns(&m) < 1e-10),
                (Trivialization::BoundedRank { .. } | Trivialization::Product { .. }, Trivialized::Vector(v)) => {
                    assert!((v.norm() - 1.0).abs() < 1e-10)
                }
                (Trivialization::Roof { .. }, Trivialized::Roof { x, states }) => {
                    assert!(unit_columns(&x) < 1e-10);
                    assert!(states.iter().all(|s| (s.norm() - 1.0).abs() < 1e-10));
                }
                (t, o) => panic!("{t:?} produced {o:?}"),
            }
        }
    }
}

#[test]
fn documented_examples() {
    let Trivialized::Scalar(v) = Trivialization::Positive.apply(&[0.0]).unwrap() else { panic!() };
    assert!((v - 2f64.ln()).abs() < 1e-15);
    let Trivialized::Real(v) = Trivialization::Sphere { n: 2 }.apply(&[3.0, 4.0]).unwrap() else { panic!() };
    assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.8).abs() < 1e-15);
    let Trivialized::Real(v) = Trivialization::Simplex { n: 2 }.apply(&[0.0, 0.0]).unwrap() else { panic!() };
    assert_eq!(v, vec![0.5, 0.5]);
    let two_i = [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0];
    let Trivialized::Matrix(m) = Trivialization::Stiefel { n: 2, r: 2 }.apply(&two_i).unwrap() else { panic!() };
    assert!((m - identity(2)).norm() < 1e-12);
    let Trivialized::Matrix(m) = Trivialization::Unitary { n: 3 }.apply(&[0.0; 18]).unwrap() else { panic!() };
    assert!((m - identity(3)).norm() < 1e-14);
}

#[test]
fn rejects_bad_parameters() {
    let t = Trivialization::Sphere { n: 2 };
    assert!(t.apply(&[f64::NAN, 1.0]).is_err());
    assert!(t.apply(&[1.0]).is_err());
    assert!(Trivialization::Positive.apply(&[f64::INFINITY]).is_err());
}

#[test]
fn polar_of_column_is_normalization() {
    for seed in 0..50 {
        let theta = initial_point(10, seed);
        let a = complex_mat(&theta, 5, 1);
        let x = Polar::new(a.clone()).x;
        assert!((x - &a / cr(a.norm())).norm() < 1e-10);
    }
}

#[test]
fn polar_is_closest_stiefel_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..5 {
        let a = complex_mat(&initial_point(12, trial), 3, 2);
        let best = (Polar::new(a.clone()).x - &a).norm();
        for _ in 0..10_000 {
            let theta: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y = Polar::new(complex_mat(&theta, 3, 2)).x;
            assert!((y - &a).norm() >= best - 1e-12);
        }
    }
}
