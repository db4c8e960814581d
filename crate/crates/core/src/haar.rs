//! Orthonormal d-dimensional Haar transform.
//!
//! Coefficients are kept in one flat vector of length `N^d`:
//!
//! ```text
//! [ c0 | scale 0 blocks | scale 1 blocks | … | scale n-1 blocks ]
//! ```
//!
//! Scale `j` has `2^(jd)` dyadic cubes (lexicographic, last axis fastest), and
//! each cube contributes one contiguous block of `2^d - 1` coefficients, one
//! per orientation `e ∈ {0,1}^d \ {0}` in increasing binary order with `e_1`
//! as the most significant bit. The wavelet `h_{j,k,e}` takes the value
//! `±(2^j/N)^{d/2}` on the cube `k` of side `N/2^j` pixels, with sign `-1`
//! raised to the number of axes `i` where `e_i = 1` and the pixel lies in
//! the upper half of the cube along axis `i`.
//!
//! The discrete scale range is `j = 0, …, n-1` for `N = 2^n`; this is the
//! range that makes the coefficient count equal `N^d`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gradient::{tv_seminorm, TvVariant};
use crate::tensor::{norm2, NdSignal, Shape, C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct HaarCoefficients {
    d: usize,
    n: usize,
    data: Vec<C64>,
}

/// One dyadic cube's coefficient block.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarBlock {
    pub scale: usize,
    pub cube: Vec<usize>,
    pub values: Vec<C64>,
}

/// `log2(N)` if `N = 2^n` with `n >= 1`.
pub fn dyadic_levels(n: usize) -> Result<usize> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Format(format!(
            "Haar transform needs side length N = 2^n with n >= 1 (got N = {n}); \
             extend the signal by reflection to the next power of two (see gradient::reflect_pad_pow2)"
        )));
    }
    Ok(n.trailing_zeros() as usize)
}

impl HaarCoefficients {
    pub fn from_vec(d: usize, n: usize, data: Vec<C64>) -> Result<Self> {
        dyadic_levels(n)?;
        let len = Shape::cube(d, n)?.len();
        if data.len() != len {
            return Err(Error::dim(format!("expected {len} Haar coefficients, got {}", data.len())));
        }
        Ok(HaarCoefficients { d, n, data })
    }

    pub fn zeros(d: usize, n: usize) -> Result<Self> {
        let len = Shape::cube(d, n)?.len();
        Self::from_vec(d, n, vec![ZERO; len])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        self.n.trailing_zeros() as usize
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    /// `⟨h₀, x⟩`.
    pub fn constant(&self) -> C64 {
        self.data[0]
    }

    pub fn block_size(&self) -> usize {
        (1 << self.d) - 1
    }

    pub fn block_count(&self) -> usize {
        (self.data.len() - 1) / self.block_size()
    }

    /// Flat offset of the block of cube `cube_flat` at scale `j`.
    pub fn block_offset(&self, j: usize, cube_flat: usize) -> usize {
        block_offset(self.d, j, cube_flat)
    }

    /// Coefficient `c_{j,k,e}`, with `e` given as a bitmask (`e_1` most significant).
    pub fn detail(&self, j: usize, cube: &[usize], e: usize) -> C64 {
        assert!(e >= 1 && e < (1 << self.d), "orientation must be nonzero");
        let cube_flat = Shape::cube(self.d, 1 << j).unwrap().ravel(cube);
        self.data[self.block_offset(j, cube_flat) + e - 1]
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.data)
    }
}

fn block_offset(d: usize, j: usize, cube_flat: usize) -> usize {
    let bs = (1usize << d) - 1;
    // Σ_{j'<j} 2^{j'd} = (2^{jd} - 1)/(2^d - 1)
    let before = ((1usize << (j * d)) - 1) / bs;
    1 + (before + cube_flat) * bs
}

/// In-place Walsh–Hadamard butterfly, scaled to be orthonormal.
fn hadamard(buf: &mut [C64], d: usize) {
    let mut h = 1;
    while h < buf.len() {
        for start in (0..buf.len()).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (buf[i], buf[i + h]);
                buf[i] = a + b;
                buf[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = 0.5f64.powf(d as f64 / 2.0);
    buf.iter_mut().for_each(|v| *v *= scale);
}

/// Offsets of the `2^d` children of a cube inside an array of side `side`,
/// indexed by the bitmask `ε` (`ε_1` most significant).
fn child_offsets(d: usize, side: usize) -> Vec<usize> {
    let strides = Shape::cube(d, side).unwrap().strides();
    (0..1usize << d)
        .map(|eps| (0..d).filter(|&i| eps >> (d - 1 - i) & 1 == 1).map(|i| strides[i]).sum())
        .collect()
}

pub(crate) fn forward_into(x: &[C64], d: usize, n: usize, out: &mut [C64]) {
    let levels = n.trailing_zeros() as usize;
    let mut avg = x.to_vec();
    let mut buf = vec![ZERO; 1 << d];
    let bs = (1 << d) - 1;
    for j in (0..levels).rev() {
        let side = 2usize << j;
        let half = side / 2;
        let offsets = child_offsets(d, side);
        let coarse_shape = Shape::cube(d, half).unwrap();
        let fine_strides = Shape::cube(d, side).unwrap().strides();
        let mut next = vec![ZERO; coarse_shape.len()];
        for (k, slot) in next.iter_mut().enumerate() {
            let cube = coarse_shape.unravel(k);
            let base: usize = cube.iter().zip(&fine_strides).map(|(c, s)| 2 * c * s).sum();
            for (b, off) in buf.iter_mut().zip(&offsets) {
                *b = avg[base + off];
            }
            hadamard(&mut buf, d);
            *slot = buf[0];
            let at = block_offset(d, j, k);
            out[at..at + bs].copy_from_slice(&buf[1..]);
        }
        avg = next;
    }
    out[0] = avg[0];
}

pub(crate) fn inverse_into(c: &[C64], d: usize, n: usize, out: &mut [C64]) {
    let levels = n.trailing_zeros() as usize;
    let mut avg = vec![c[0]];
    let mut buf = vec![ZERO; 1 << d];
    let bs = (1 << d) - 1;
    for j in 0..levels {
        let half = 1usize << j;
        let side = 2 * half;
        let offsets = child_offsets(d, side);
        let coarse_shape = Shape::cube(d, half).unwrap();
        let fine_strides = Shape::cube(d, side).unwrap().strides();
        let mut fine = vec![ZERO; Shape::cube(d, side).unwrap().len()];
        for (k, a) in avg.iter().enumerate() {
            let cube = coarse_shape.unravel(k);
            let base: usize = cube.iter().zip(&fine_strides).map(|(c, s)| 2 * c * s).sum();
            buf[0] = *a;
            let at = block_offset(d, j, k);
            buf[1..].copy_from_slice(&c[at..at + bs]);
            hadamard(&mut buf, d);
            for (b, off) in buf.iter().zip(&offsets) {
                fine[base + off] = *b;
            }
        }
        avg = fine;
    }
    out.copy_from_slice(&avg);
}

pub fn haar_forward(x: &NdSignal) -> Result<HaarCoefficients> {
    let (d, n) = (x.d(), x.side());
    dyadic_levels(n)?;
    let mut out = vec![ZERO; x.len()];
    forward_into(x.data(), d, n, &mut out);
    HaarCoefficients::from_vec(d, n, out)
}

/// Inverse (equivalently adjoint) transform.
pub fn haar_inverse(c: &HaarCoefficients) -> Result<NdSignal> {
    let mut out = vec![ZERO; c.data.len()];
    inverse_into(&c.data, c.d, c.n, &mut out);
    NdSignal::from_vec(c.d, c.n, out)
}

/// Detail blocks in storage order; `c0` is excluded.
pub fn partition_blocks(c: &HaarCoefficients) -> Vec<HaarBlock> {
    let bs = c.block_size();
    let mut blocks = Vec::with_capacity(c.block_count());
    for j in 0..c.levels() {
        let cubes = Shape::cube(c.d, 1 << j).unwrap();
        for k in 0..cubes.len() {
            let at = c.block_offset(j, k);
            blocks.push(HaarBlock { scale: j, cube: cubes.unravel(k), values: c.data[at..at + bs].to_vec() });
        }
    }
    blocks
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayEntry {
    /// Rank, starting at 1.
    pub k: usize,
    pub norm: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Sorted Haar block norms against the `TV/(k·2^{d/2-1})` envelope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayProfile {
    pub variant: TvVariant,
    pub entries: Vec<DecayEntry>,
    /// Mean that was subtracted before transforming.
    pub mean_removed: [f64; 2],
    /// Set when the signal is constant: every ratio would be 0/0.
    pub degenerate: bool,
    /// `max_k ratio_k`, the empirical decay constant.
    pub constant: f64,
}

impl DecayProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,norm,bound,ratio\n");
        for e in &self.entries {
            out.push_str(&format!("{},{:e},{:e},{:e}\n", e.k, e.norm, e.bound, e.ratio));
        }
        out
    }
}

pub fn block_decay_profile(x: &NdSignal, variant: TvVariant) -> Result<DecayProfile> {
    x.require_tv_dim()?;
    let mean = x.mean();
    let centered = x.add_scalar(-mean);
    let tv = tv_seminorm(&centered, variant)?;
    let d = x.d() as f64;
    let mut profile = DecayProfile {
        variant,
        entries: Vec::new(),
        mean_removed: [mean.re, mean.im],
        degenerate: tv == 0.0,
        constant: 0.0,
    };
    let coeffs = haar_forward(&centered)?;
    if profile.degenerate {
        return Ok(profile);
    }
    let scale = match variant {
        TvVariant::Anisotropic => tv,
        TvVariant::Isotropic => d.sqrt() * tv,
    };
    let mut norms: Vec<f64> = partition_blocks(&coeffs).iter().map(|b| norm2(&b.values)).collect();
    norms.sort_by(|a, b| b.total_cmp(a));
    let level = 2f64.powf(d / 2.0 - 1.0);
    profile.entries = norms
        .into_iter()
        .enumerate()
        .map(|(i, norm)| {
            let k = i + 1;
            let bound = scale / (k as f64 * level);
            DecayEntry { k, norm, bound, ratio: norm / bound }
        })
        .collect();
    profile.constant = profile.entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    Ok(profile)
}
