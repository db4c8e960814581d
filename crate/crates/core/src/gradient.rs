//! Discrete gradient with zero-padded boundary, its adjoint, TV seminorms,
//! best block supports and the shrinkage maps used as TV proximal operators.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{mixed_l12_norm, norm2, MixedField, NdArray, NdSignal, Shape, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TvVariant {
    /// `‖∇x‖₁`, entrywise.
    #[serde(rename = "aniso")]
    Anisotropic,
    /// `‖∇x‖₁,₂`, sum of per-pixel Euclidean block norms.
    #[serde(rename = "iso")]
    Isotropic,
}

impl std::str::FromStr for TvVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aniso" | "anisotropic" => Ok(TvVariant::Anisotropic),
            "iso" | "isotropic" => Ok(TvVariant::Isotropic),
            other => Err(Error::Config(format!("unknown TV variant {other:?}"))),
        }
    }
}

/// `∇x ∈ C^(N^d × d)`. Channel `ℓ` is zero on the face `α_ℓ = N - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField(MixedField);

impl GradientField {
    /// Validates that `field` has `d` channels and vanishes on every face
    /// the gradient leaves empty.
    pub fn from_field(field: MixedField) -> Result<Self> {
        let (d, n) = (field.d(), field.side());
        if field.channels() != d {
            return Err(Error::dim(format!("gradient field needs {d} channels, got {}", field.channels())));
        }
        let strides = field.pixel_shape().strides();
        for p in 0..field.pixel_count() {
            for (l, &stride) in strides.iter().enumerate() {
                if (p / stride) % n == n - 1 && field.block(p)[l] != ZERO {
                    return Err(Error::domain(format!(
                        "channel {l} is nonzero on its boundary face at pixel {p}"
                    )));
                }
            }
        }
        Ok(GradientField(field))
    }

    pub fn into_field(self) -> MixedField {
        self.0
    }

    pub fn zeros(d: usize, n: usize) -> Result<Self> {
        Ok(GradientField(MixedField::zeros(d, n, d)?))
    }

    /// Zeroes every block outside `keep` (face zeros are preserved).
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> GradientField {
        GradientField(self.0.restrict(keep))
    }

    pub fn sub(&self, other: &GradientField) -> Result<GradientField> {
        Ok(GradientField(self.0.sub(&other.0)?))
    }

    /// `‖g‖₁` (aniso) or `‖g‖₁,₂` (iso).
    pub fn norm(&self, variant: TvVariant) -> f64 {
        match variant {
            TvVariant::Anisotropic => self.0.norm1(),
            TvVariant::Isotropic => mixed_l12_norm(&self.0),
        }
    }
}

impl Deref for GradientField {
    type Target = MixedField;

    fn deref(&self) -> &MixedField {
        &self.0
    }
}

/// Pixels of the `s` largest gradient blocks, ordered by rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSupport {
    pixels: Vec<usize>,
    d: usize,
}

impl BlockSupport {
    pub fn new(pixels: Vec<usize>, d: usize) -> Result<Self> {
        let mut sorted = pixels.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("support pixels must be distinct"));
        }
        Ok(BlockSupport { pixels, d })
    }

    pub fn pixels(&self) -> &[usize] {
        &self.pixels
    }

    pub fn s(&self) -> usize {
        self.pixels.len()
    }

    pub fn contains(&self, pixel: usize) -> bool {
        self.pixels.contains(&pixel)
    }

    /// `S = pixels × [d]` as `(pixel, channel)` pairs.
    pub fn expansion(&self) -> Vec<(usize, usize)> {
        self.pixels.iter().flat_map(|&p| (0..self.d).map(move |l| (p, l))).collect()
    }

    pub(crate) fn mask(&self, pixel_count: usize) -> Vec<bool> {
        let mut mask = vec![false; pixel_count];
        for &p in &self.pixels {
            mask[p] = true;
        }
        mask
    }
}

/// Forward difference along `axis` (zero-based): an array of shape
/// `N^axis × (N-1) × N^(d-axis-1)` with entries `x_{α+e_axis} - x_α`.
pub fn directional_derivative(x: &NdSignal, axis: usize) -> Result<NdArray> {
    let (d, n) = (x.d(), x.side());
    let shape = Shape::derivative(d, n, axis)?;
    let stride = x.shape().strides()[axis];
    let src = x.data();
    let mut out = Vec::with_capacity(shape.len());
    for (flat, v) in src.iter().enumerate() {
        if (flat / stride) % n < n - 1 {
            out.push(src[flat + stride] - v);
        }
    }
    NdArray::from_vec(shape, out)
}

pub(crate) fn gradient_into(x: &[C64], d: usize, n: usize, out: &mut [C64]) {
    debug_assert_eq!(out.len(), x.len() * d);
    let mut stride = 1;
    for l in (0..d).rev() {
        for (p, v) in x.iter().enumerate() {
            out[p * d + l] = if (p / stride) % n < n - 1 { x[p + stride] - v } else { ZERO };
        }
        stride *= n;
    }
}

/// `(∇* g)_α = Σ_ℓ g_{α-e_ℓ,ℓ} - g_{α,ℓ}`, skipping entries the gradient never
/// writes. Entries of `g` on the empty faces are ignored.
pub(crate) fn divergence_into(g: &[C64], d: usize, n: usize, out: &mut [C64]) {
    debug_assert_eq!(g.len(), out.len() * d);
    out.fill(ZERO);
    let mut stride = 1;
    for l in (0..d).rev() {
        for p in 0..out.len() {
            let a = (p / stride) % n;
            if a < n - 1 {
                let v = g[p * d + l];
                out[p + stride] += v;
                out[p] -= v;
            }
        }
        stride *= n;
    }
}

/// Zero-padded discrete gradient.
pub fn gradient(x: &NdSignal) -> Result<GradientField> {
    x.require_tv_dim()?;
    let (d, n) = (x.d(), x.side());
    let mut data = vec![ZERO; x.len() * d];
    gradient_into(x.data(), d, n, &mut data);
    Ok(GradientField(MixedField::from_vec(d, n, d, data)?))
}

/// Exact adjoint of [`gradient`] under the entrywise inner product.
pub fn divergence_adjoint(g: &MixedField) -> Result<NdSignal> {
    let (d, n) = (g.d(), g.side());
    if g.channels() != d {
        return Err(Error::dim(format!("adjoint needs {d} channels, got {}", g.channels())));
    }
    let mut out = vec![ZERO; g.pixel_count()];
    divergence_into(g.data(), d, n, &mut out);
    NdSignal::from_vec(d, n, out)
}

pub fn tv_seminorm(x: &NdSignal, variant: TvVariant) -> Result<f64> {
    Ok(gradient(x)?.norm(variant))
}

/// Support of the `s` largest block norms and the truncation `g_S`.
/// Ties go to the lexicographically smaller pixel.
pub fn best_s_blocks(g: &GradientField, s: usize) -> Result<(BlockSupport, GradientField)> {
    let pixels = g.pixel_count();
    if s > pixels {
        return Err(Error::domain(format!("s = {s} exceeds the pixel count {pixels}")));
    }
    let norms = g.block_norms();
    let mut order: Vec<usize> = (0..pixels).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    order.truncate(s);
    let support = BlockSupport { pixels: order, d: g.d() };
    let mask = support.mask(pixels);
    let truncated = g.restrict(|p| mask[p]);
    Ok((support, truncated))
}

/// `‖g - g_S‖` for the best `s` blocks, measured in the variant's norm.
pub fn best_s_tail(g: &GradientField, s: usize, variant: TvVariant) -> Result<f64> {
    let (_, gs) = best_s_blocks(g, s)?;
    Ok(g.sub(&gs)?.norm(variant))
}

pub(crate) fn shrink_blocks(data: &mut [C64], channels: usize, tau: f64) {
    for block in data.chunks_exact_mut(channels) {
        let norm = norm2(block);
        let scale = if norm > tau { 1.0 - tau / norm } else { 0.0 };
        block.iter_mut().for_each(|v| *v *= scale);
    }
}

pub(crate) fn shrink_entries(data: &mut [C64], tau: f64) {
    for v in data.iter_mut() {
        let norm = v.norm();
        *v *= if norm > tau { 1.0 - tau / norm } else { 0.0 };
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::domain(format!("threshold must be >= 0 (got {tau})")));
    }
    Ok(())
}

/// Proximal map of `τ‖·‖₁,₂`: every block is scaled by `max(0, 1 - τ/‖g_α‖₂)`.
pub fn group_soft_threshold(g: &GradientField, tau: f64) -> Result<GradientField> {
    check_tau(tau)?;
    let mut out = g.0.clone();
    if tau > 0.0 {
        shrink_blocks(out.data_mut(), g.channels(), tau);
    }
    Ok(GradientField(out))
}

/// Proximal map of `τ‖·‖₁`: complex soft thresholding of each entry.
pub fn soft_threshold(g: &GradientField, tau: f64) -> Result<GradientField> {
    check_tau(tau)?;
    let mut out = g.0.clone();
    if tau > 0.0 {
        shrink_entries(out.data_mut(), tau);
    }
    Ok(GradientField(out))
}

/// Extends `x` by mirror reflection along every axis to the next power of
/// two side length. The result equals `x` on the original cube.
pub fn reflect_pad_pow2(x: &NdSignal) -> Result<NdSignal> {
    let n = x.side();
    let target = n.next_power_of_two();
    if target == n {
        return Ok(x.clone());
    }
    let reflect = |i: usize| if i < n { i } else { 2 * n - 1 - i };
    NdSignal::from_fn(x.d(), target, |idx| {
        let src: Vec<usize> = idx.iter().map(|&i| reflect(i)).collect();
        x.get(&src)
    })
}
