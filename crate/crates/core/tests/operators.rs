use std::sync::Arc;

use proptest::prelude::*;

use ndtv::gradient::gradient;
use ndtv::operators::{
    gaussian_ensemble, rip_constant_exhaustive, rip_constant_montecarlo, rip_constant_spectral_bound, Domain,
    LinearMeasurementOp, OperatorDescriptor, DEFAULT_SUBMATRIX_BUDGET,
};
use ndtv::tensor::{NdSignal, Shape, C64};

mod common;

use common::{complex_vec, inner, norm, real_vec, rel_diff, rng};

fn composite(d: usize, n: usize, p: usize, q: usize, seed: u64) -> (LinearMeasurementOp, Vec<Arc<LinearMeasurementOp>>) {
    let a = Arc::new(gaussian_ensemble(p, Shape::cube(d, n).unwrap(), seed).unwrap());
    let bs: Vec<Arc<LinearMeasurementOp>> = (0..d)
        .map(|l| Arc::new(gaussian_ensemble(q, Shape::derivative(d, n, l).unwrap(), seed + 1 + l as u64).unwrap()))
        .collect();
    (LinearMeasurementOp::build_composite(a, &bs).unwrap(), bs)
}

fn complex_matrix(rows: usize, cols: usize, seed: u64) -> LinearMeasurementOp {
    let data = complex_vec(&mut rng(seed), rows * cols);
    LinearMeasurementOp::from_matrix(Domain::Grid(Shape::new(vec![cols]).unwrap()), rows, data).unwrap()
}

/// A random operator built from direct sums, lifts and Haar synthesis.
fn random_operator(kind: u8, d: usize, n: usize, seed: u64) -> LinearMeasurementOp {
    let cube = Shape::cube(d, n).unwrap();
    match kind % 5 {
        0 => composite(d, n, 3, 2, seed).0,
        1 => {
            let parts = (0..d)
                .map(|l| Arc::new(gaussian_ensemble(4, Shape::derivative(d, n, l).unwrap(), seed + l as u64).unwrap()))
                .collect();
            LinearMeasurementOp::column_sum(parts).unwrap()
        }
        2 => {
            let pow2 = Shape::cube(d, 4).unwrap();
            LinearMeasurementOp::compose_with_inverse_haar(Arc::new(gaussian_ensemble(5, pow2, seed).unwrap())).unwrap()
        }
        3 => LinearMeasurementOp::row_sum(vec![
            Arc::new(LinearMeasurementOp::identity(cube.clone())),
            Arc::new(gaussian_ensemble(2, cube, seed).unwrap()),
        ])
        .unwrap(),
        _ => complex_matrix(6, 9, seed),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_matches_apply(kind in 0u8..5, d in 2usize..=3, n in 2usize..=4, seed in 0u64..1000) {
        let op = random_operator(kind, d, n, seed);
        let mut r = rng(seed ^ 0xabc);
        let x = complex_vec(&mut r, op.input().len());
        let y = complex_vec(&mut r, op.rows());
        let lhs = inner(&op.apply(&x).unwrap(), &y);
        let rhs = inner(&x, &op.adjoint(&y).unwrap());
        let scale = norm(&x) * norm(&y) * (1.0 + op.rows() as f64).sqrt();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
    }

    #[test]
    fn dense_view_matches_apply(kind in 0u8..5, d in 2usize..=3, n in 2usize..=4, seed in 0u64..1000) {
        let op = random_operator(kind, d, n, seed);
        let x = complex_vec(&mut rng(seed), op.input().len());
        let m = op.dense_view();
        let dense: Vec<C64> = m.data.chunks_exact(m.cols).map(|row| row.iter().zip(&x).map(|(a, v)| a * v).sum()).collect();
        prop_assert!(rel_diff(&op.apply(&x).unwrap(), &dense) <= 1e-12);
    }

    #[test]
    fn composite_length(d in 2usize..=3, n in 2usize..=5, p in 1usize..8, q in 1usize..8, seed in 0u64..100) {
        let (m, _) = composite(d, n, p, q, seed);
        prop_assert_eq!(m.rows(), 2 * d * q + p);
    }

    /// `B(∇v) = Σ_ℓ ([B_ℓ]^0 v − [B_ℓ]_0 v)`, hence `‖B(∇v)‖² ≤ 2d‖M v‖²`.
    #[test]
    fn tube_algebra(d in 2usize..=3, n in 2usize..=5, p in 1usize..5, q in 1usize..5, seed in 0u64..1000) {
        let (m, bs) = composite(d, n, p, q, seed);
        let col = LinearMeasurementOp::column_sum(bs).unwrap();
        let v = NdSignal::from_vec(d, n, complex_vec(&mut rng(seed), n.pow(d as u32))).unwrap();
        let bv = col.apply_gradient_field(&gradient(&v).unwrap()).unwrap();
        let mv = m.apply_signal(&v).unwrap();
        let mut sum = vec![C64::new(0.0, 0.0); q];
        for l in 0..d {
            let at = p + 2 * l * q;
            for k in 0..q {
                sum[k] += mv[at + k] - mv[at + q + k];
            }
        }
        prop_assert!(rel_diff(&bv, &sum) <= 1e-12);
        let bound = 2.0 * d as f64 * norm(&mv).powi(2);
        prop_assert!(norm(&bv).powi(2) <= bound * (1.0 + 1e-12));
    }
}

#[test]
fn gaussian_column_norms_and_isotropy() {
    let shape = Shape::new(vec![50]).unwrap();
    let a = gaussian_ensemble(400, shape.clone(), 9).unwrap();
    let m = a.dense_view();
    let mean_sq: f64 = (0..m.cols).map(|j| (0..m.rows).map(|i| m.data[i * m.cols + j].norm_sqr()).sum::<f64>()).sum::<f64>()
        / m.cols as f64;
    // each squared column norm has mean 1 and variance 2/400
    assert!((mean_sq - 1.0).abs() < 0.03, "mean squared column norm {mean_sq}");

    let a = gaussian_ensemble(200, shape, 10).unwrap();
    let mut r = rng(11);
    let mut total = 0.0;
    for _ in 0..1000 {
        let x: Vec<C64> = real_vec(&mut r, 50).into_iter().map(|v| C64::new(v, 0.0)).collect();
        let unit: Vec<C64> = x.iter().map(|v| v / norm(&x)).collect();
        total += norm(&a.apply(&unit).unwrap()).powi(2);
    }
    let mean = total / 1000.0;
    assert!((mean - 1.0).abs() < 0.05, "mean ‖Ax‖² over unit x: {mean}");
}

#[test]
fn haar_composition_order_one_rip_is_column_norm_spread() {
    let base = Arc::new(gaussian_ensemble(12, Shape::cube(2, 4).unwrap(), 5).unwrap());
    let op = LinearMeasurementOp::compose_with_inverse_haar(base).unwrap();
    let cols = op.input().len();
    let mut worst = 0.0f64;
    for j in 0..cols {
        let mut e = vec![C64::new(0.0, 0.0); cols];
        e[j] = C64::new(1.0, 0.0);
        worst = worst.max((norm(&op.apply(&e).unwrap()).powi(2) - 1.0).abs());
    }
    let cert = rip_constant_exhaustive(&op, 1, DEFAULT_SUBMATRIX_BUDGET).unwrap();
    assert!((cert.level - worst).abs() <= 1e-12, "{} vs {worst}", cert.level);
}

#[test]
fn rip_methods_bracket_the_exact_value() {
    for seed in 0..4 {
        let op = gaussian_ensemble(10, Shape::new(vec![16]).unwrap(), seed).unwrap();
        for s in 1..=3 {
            let exact = rip_constant_exhaustive(&op, s, DEFAULT_SUBMATRIX_BUDGET).unwrap().level;
            let upper = rip_constant_spectral_bound(&op, s).unwrap().level;
            let lower = rip_constant_montecarlo(&op, s, 200, seed).unwrap().level;
            assert!(lower <= exact + 1e-12 && exact <= upper + 1e-12, "{lower} {exact} {upper}");
        }
    }
}

#[test]
fn exhaustive_search_respects_budget() {
    let op = gaussian_ensemble(10, Shape::new(vec![40]).unwrap(), 0).unwrap();
    assert!(rip_constant_exhaustive(&op, 7, 100).is_err());
}

#[test]
fn descriptor_round_trip_preserves_the_operator() {
    let (m, _) = composite(2, 5, 4, 3, 17);
    let json = m.descriptor().to_json();
    let back = LinearMeasurementOp::from_descriptor(&OperatorDescriptor::from_json(&json).unwrap()).unwrap();
    let x = complex_vec(&mut rng(1), 25);
    assert_eq!(m.apply(&x).unwrap(), back.apply(&x).unwrap());
    assert_eq!(back.descriptor().to_json(), json);
}
