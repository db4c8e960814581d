use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tensor::Shape;

use super::{Domain, LinearMeasurementOp, Matrix, Origin};

/// Row `k` is drawn from its own ChaCha stream, so the first `r` rows of an
/// ensemble do not depend on how many rows were requested.
fn rows_from(seed: u64, r: usize, cols: usize, mut entry: impl FnMut(&mut ChaCha8Rng) -> f64) -> Vec<f64> {
    let mut data = Vec::with_capacity(r * cols);
    for k in 0..r {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        data.extend((0..cols).map(|_| entry(&mut rng)));
    }
    data
}

fn check(r: usize, shape: &Shape) -> Result<()> {
    if r == 0 || shape.is_empty() {
        return Err(Error::dim("ensemble needs r ≥ 1 and a non-empty shape"));
    }
    Ok(())
}

/// `r` i.i.d. real `N(0, 1/r)` components over `shape`.
pub fn gaussian_ensemble(r: usize, shape: Shape, seed: u64) -> Result<LinearMeasurementOp> {
    check(r, &shape)?;
    let scale = 1.0 / (r as f64).sqrt();
    let data = rows_from(seed, r, shape.len(), |rng| rng.sample::<f64, _>(StandardNormal) * scale);
    Ok(LinearMeasurementOp::dense(Domain::Grid(shape), r, Matrix::Real(data), Origin::Gaussian(seed)))
}

/// `r` i.i.d. components with entries `±1/√r`.
pub fn bernoulli_ensemble(r: usize, shape: Shape, seed: u64) -> Result<LinearMeasurementOp> {
    check(r, &shape)?;
    let scale = 1.0 / (r as f64).sqrt();
    let data = rows_from(seed, r, shape.len(), |rng| if rng.random::<bool>() { scale } else { -scale });
    Ok(LinearMeasurementOp::dense(Domain::Grid(shape), r, Matrix::Real(data), Origin::Bernoulli(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{C64, ZERO};
    use crate::operators::LinearMap;

    #[test]
    fn reproducible_and_nested() {
        let shape = Shape::cube(2, 4).unwrap();
        let a = gaussian_ensemble(5, shape.clone(), 42).unwrap().dense_view();
        let b = gaussian_ensemble(5, shape.clone(), 42).unwrap().dense_view();
        assert_eq!(a, b);
        let c = gaussian_ensemble(8, shape.clone(), 42).unwrap().dense_view();
        let ratio = (8.0f64 / 5.0).sqrt();
        for i in 0..5 * 16 {
            assert!((a.data[i] - c.data[i] * ratio).norm() < 1e-14);
        }
        let other = gaussian_ensemble(5, shape, 43).unwrap().dense_view();
        assert_ne!(a, other);
    }

    #[test]
    fn bernoulli_entries() {
        let op = bernoulli_ensemble(4, Shape::cube(1, 50).unwrap(), 1).unwrap();
        let m = op.dense_view();
        assert!(m.data.iter().all(|v| (v.re.abs() - 0.5).abs() < 1e-15 && v.im == 0.0));
        let pos = m.data.iter().filter(|v| v.re > 0.0).count();
        assert!(pos > 60 && pos < 140);
    }

    #[test]
    fn gaussian_is_isometric_on_average() {
        let shape = Shape::cube(2, 8).unwrap();
        let mut x = vec![ZERO; 64];
        x[10] = C64::new(1.0, 0.0);
        x[33] = C64::new(0.0, -1.0);
        let mut total = 0.0;
        let trials = 200;
        for seed in 0..trials {
            let op = gaussian_ensemble(20, shape.clone(), seed).unwrap();
            total += crate::tensor::norm2(&op.apply_vec(&x)).powi(2);
        }
        let mean = total / trials as f64;
        assert!((mean - 2.0).abs() < 0.2, "mean {mean}");
    }
}
