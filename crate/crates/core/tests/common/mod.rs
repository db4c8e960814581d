//! Helpers shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ndtv::tensor::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<C64> {
    (0..len).map(|_| C64::new(normal(rng), normal(rng))).collect()
}

pub fn real_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| normal(rng)).collect()
}

/// `Σ a·conj(b)`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn rel_diff(a: &[C64], b: &[C64]) -> f64 {
    let diff: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(b).max(f64::MIN_POSITIVE)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn odometer(idx: &mut [usize], dims: &[usize]) -> bool {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < dims[a] {
            return true;
        }
        idx[a] = 0;
    }
    false
}

/// Every multi-index of `dims`, last axis fastest.
pub fn indices(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx = vec![0; dims.len()];
    loop {
        out.push(idx.clone());
        if !odometer(&mut idx, dims) {
            return out;
        }
    }
}

pub fn flat(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &n)| acc * n + i)
}

/// Dense orthonormal Haar basis, one row per coefficient in storage order,
/// built directly from the wavelet definitions.
pub fn haar_basis(d: usize, n: usize) -> Vec<Vec<f64>> {
    let len = n.pow(d as u32);
    let cube = vec![n; d];
    let mut rows = vec![vec![(len as f64).powf(-0.5); len]];
    let levels = n.trailing_zeros() as usize;
    for j in 0..levels {
        let side = n >> j;
        let height = ((1usize << j) as f64 / n as f64).powf(d as f64 / 2.0);
        for k in indices(&vec![1usize << j; d]) {
            for e in 1..(1usize << d) {
                let mut row = vec![0.0; len];
                for alpha in indices(&cube) {
                    if (0..d).all(|i| alpha[i] / side == k[i]) {
                        let flips = (0..d)
                            .filter(|&i| (e >> (d - 1 - i)) & 1 == 1 && alpha[i] % side >= side / 2)
                            .count();
                        row[flat(&alpha, &cube)] = if flips % 2 == 0 { height } else { -height };
                    }
                }
                rows.push(row);
            }
        }
    }
    rows
}

