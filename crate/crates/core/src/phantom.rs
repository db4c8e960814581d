//! Deterministic test signals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradient::gradient;
use crate::tensor::{NdSignal, Shape, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhantomKind {
    /// Exactly `s` nonzero gradient blocks.
    GradientSparseRandom { s: usize },
    /// `count` axis-aligned boxes placed in the unit cube, sampled at pixel
    /// centers, so the geometry is the same at every resolution.
    PiecewiseConstantCubes { count: usize },
    /// Unit jump along the last axis at `N/2`.
    StepEdge,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    #[serde(flatten)]
    pub kind: PhantomKind,
    pub d: usize,
    pub n: usize,
    /// Feature amplitudes are drawn from `±[lo, hi]`.
    pub amplitude: (f64, f64),
    pub seed: u64,
}

impl PhantomSpec {
    pub fn new(kind: PhantomKind, d: usize, n: usize, seed: u64) -> Self {
        PhantomSpec { kind, d, n, amplitude: (0.5, 1.5), seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config(format!("phantoms need d >= 2 (got {})", self.d)));
        }
        if self.n < 2 {
            return Err(Error::Config(format!("phantoms need N >= 2 (got {})", self.n)));
        }
        let (lo, hi) = self.amplitude;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Config(format!("invalid amplitude range ({lo}, {hi})")));
        }
        match self.kind {
            PhantomKind::GradientSparseRandom { s } if s == 0 || s > self.n.pow(self.d as u32) / 2 => {
                Err(Error::Config(format!("sparsity {s} is out of range for N^d = {}", self.n.pow(self.d as u32))))
            }
            PhantomKind::PiecewiseConstantCubes { count: 0 } => Err(Error::Config("need at least one cube".into())),
            _ => Ok(()),
        }
    }

    pub fn generate(&self) -> Result<NdSignal> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match self.kind {
            PhantomKind::StepEdge => {
                let half = self.n / 2;
                NdSignal::from_fn(self.d, self.n, |i| C64::new(if i[self.d - 1] >= half { 1.0 } else { 0.0 }, 0.0))
            }
            PhantomKind::PiecewiseConstantCubes { count } => self.cubes(&mut rng, count),
            PhantomKind::GradientSparseRandom { s } => self.gradient_sparse(&mut rng, s),
        }
    }

    fn amplitude(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (lo, hi) = self.amplitude;
        let a = if hi > lo { rng.random_range(lo..hi) } else { lo };
        if rng.random::<bool>() { a } else { -a }
    }

    fn cubes(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<NdSignal> {
        let boxes: Vec<(Vec<(f64, f64)>, f64)> = (0..count)
            .map(|_| {
                let extent = (0..self.d)
                    .map(|_| {
                        let lo = rng.random_range(0.05..0.7);
                        (lo, lo + rng.random_range(0.1..0.3))
                    })
                    .collect();
                (extent, self.amplitude(rng))
            })
            .collect();
        let n = self.n as f64;
        NdSignal::from_fn(self.d, self.n, |i| {
            let mut v = 0.0;
            for (extent, amp) in &boxes {
                if i.iter().zip(extent).all(|(&a, &(lo, hi))| {
                    let t = (a as f64 + 0.5) / n;
                    t >= lo && t < hi
                }) {
                    v += amp;
                }
            }
            C64::new(v, 0.0)
        })
    }

    /// Adds random boxes (mostly single pixels), keeping only additions that
    /// do not push the gradient support past `s`, until it is exactly `s`.
    fn gradient_sparse(&self, rng: &mut ChaCha8Rng, s: usize) -> Result<NdSignal> {
        let (d, n) = (self.d, self.n);
        let shape = Shape::cube(d, n)?;
        for _restart in 0..50 {
            let mut x = NdSignal::zeros(d, n)?;
            let mut count = 0;
            for _attempt in 0..10_000 {
                if count == s {
                    return Ok(x);
                }
                let mut trial = x.clone();
                let lo: Vec<usize> = (0..d).map(|_| rng.random_range(0..n)).collect();
                let side: Vec<usize> = lo
                    .iter()
                    .map(|&a| if rng.random_bool(0.7) { 1 } else { rng.random_range(1..=(n / 4).max(1)).min(n - a) })
                    .collect();
                let amp = C64::new(self.amplitude(rng), 0.0);
                for p in 0..shape.len() {
                    let idx = shape.unravel(p);
                    if idx.iter().zip(&lo).zip(&side).all(|((&a, &l), &w)| a >= l && a < l + w) {
                        trial.data_mut()[p] += amp;
                    }
                }
                let c = support_size(&trial)?;
                if c <= s && c > 0 {
                    x = trial;
                    count = c;
                }
            }
        }
        Err(Error::Config(format!("could not build a signal with exactly {s} gradient blocks")))
    }
}

/// Number of nonzero gradient blocks.
pub fn support_size(x: &NdSignal) -> Result<usize> {
    let g = gradient(x)?;
    Ok(g.blocks().filter(|b| b.iter().any(|v| *v != ZERO)).count())
}
