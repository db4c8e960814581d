//! Dense d-dimensional complex arrays.
//!
//! Every array is stored in lexicographic order with the last coordinate
//! varying fastest, so the flat storage of an array is exactly the unraveled
//! row used when an operator is viewed as a dense matrix. Indices are
//! zero-based: the one-based index `α ∈ [N]^d` corresponds to
//! `α - 1 ∈ {0, …, N-1}^d` here.

use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

/// Extents of a dense array. Not necessarily cubic: derivative arrays have
/// one axis of length `N - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    dims: Vec<usize>,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::dim("shape must have at least one axis"));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(Error::dim(format!("shape {dims:?} has an empty axis")));
        }
        Ok(Shape { dims })
    }

    /// `[N]^d`.
    pub fn cube(d: usize, n: usize) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::dim(format!("cube shape needs d >= 1 and N >= 1 (got d={d}, N={n})")));
        }
        Ok(Shape { dims: vec![n; d] })
    }

    /// Shape `N^axis × (N-1) × N^(d-axis-1)` of the directional derivative
    /// along `axis` (zero-based).
    pub fn derivative(d: usize, n: usize, axis: usize) -> Result<Self> {
        if axis >= d {
            return Err(Error::domain(format!("axis {axis} out of range for d = {d}")));
        }
        if n < 2 {
            return Err(Error::domain(format!("directional derivatives need N >= 2 (got {n})")));
        }
        let mut dims = vec![n; d];
        dims[axis] = n - 1;
        Ok(Shape { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major strides (last axis has stride 1).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    /// Flat storage slot of a multi-index. Panics if the index is out of range.
    pub fn ravel(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.dims.len(), "index rank does not match shape");
        let mut flat = 0;
        for (&i, &n) in index.iter().zip(&self.dims) {
            assert!(i < n, "index {index:?} out of range for shape {:?}", self.dims);
            flat = flat * n + i;
        }
        flat
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        assert!(flat < self.len(), "flat index {flat} out of range");
        let mut index = vec![0; self.dims.len()];
        for (slot, &n) in index.iter_mut().zip(&self.dims).rev() {
            *slot = flat % n;
            flat /= n;
        }
        index
    }

    /// `Some(N)` when every axis has length `N`.
    pub fn cube_side(&self) -> Option<usize> {
        let n = self.dims[0];
        self.dims.iter().all(|&m| m == n).then_some(n)
    }
}

/// A dense complex array over an arbitrary [`Shape`].
#[derive(Clone, Debug, PartialEq)]
pub struct NdArray {
    shape: Shape,
    data: Vec<C64>,
}

impl NdArray {
    pub fn zeros(shape: Shape) -> Self {
        let len = shape.len();
        NdArray { shape, data: vec![ZERO; len] }
    }

    pub fn from_vec(shape: Shape, data: Vec<C64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::dim(format!(
                "shape {:?} holds {} values but {} were given",
                shape.dims(),
                shape.len(),
                data.len()
            )));
        }
        Ok(NdArray { shape, data })
    }

    pub fn from_real(shape: Shape, data: &[f64]) -> Result<Self> {
        Self::from_vec(shape, data.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let data = (0..shape.len()).map(|i| f(&shape.unravel(i))).collect();
        NdArray { shape, data }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, index: &[usize]) -> C64 {
        self.data[self.shape.ravel(index)]
    }

    pub fn set(&mut self, index: &[usize], value: C64) {
        let i = self.shape.ravel(index);
        self.data[i] = value;
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|v| v.im == 0.0)
    }

    /// `⟨self, other⟩ = Σ self_α · conj(other_α)`.
    pub fn inner(&self, other: &NdArray) -> Result<C64> {
        inner_product(self, other)
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.data)
    }
}

/// A signal `x ∈ C^(N^d)`: an [`NdArray`] whose shape is the cube `[N]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct NdSignal {
    array: NdArray,
    d: usize,
    n: usize,
}

impl NdSignal {
    pub fn zeros(d: usize, n: usize) -> Result<Self> {
        Ok(Self::wrap(NdArray::zeros(Shape::cube(d, n)?), d, n))
    }

    pub fn from_vec(d: usize, n: usize, data: Vec<C64>) -> Result<Self> {
        Ok(Self::wrap(NdArray::from_vec(Shape::cube(d, n)?, data)?, d, n))
    }

    pub fn from_real(d: usize, n: usize, data: &[f64]) -> Result<Self> {
        Ok(Self::wrap(NdArray::from_real(Shape::cube(d, n)?, data)?, d, n))
    }

    pub fn constant(d: usize, n: usize, value: C64) -> Result<Self> {
        let shape = Shape::cube(d, n)?;
        let len = shape.len();
        Ok(Self::wrap(NdArray { shape, data: vec![value; len] }, d, n))
    }

    pub fn from_fn(d: usize, n: usize, f: impl FnMut(&[usize]) -> C64) -> Result<Self> {
        Ok(Self::wrap(NdArray::from_fn(Shape::cube(d, n)?, f), d, n))
    }

    /// Accepts any array whose shape is a cube.
    pub fn from_array(array: NdArray) -> Result<Self> {
        let n = array
            .shape()
            .cube_side()
            .ok_or_else(|| Error::dim(format!("shape {:?} is not a cube", array.shape().dims())))?;
        let d = array.shape().ndim();
        Ok(Self::wrap(array, d, n))
    }

    fn wrap(array: NdArray, d: usize, n: usize) -> Self {
        NdSignal { array, d, n }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Side length `N`.
    pub fn side(&self) -> usize {
        self.n
    }

    pub fn into_array(self) -> NdArray {
        self.array
    }

    /// Rejects `d = 1`; the total-variation results only hold for `d >= 2`.
    pub fn require_tv_dim(&self) -> Result<()> {
        if self.d < 2 {
            Err(Error::UnsupportedDimension(self.d))
        } else {
            Ok(())
        }
    }

    pub fn mean(&self) -> C64 {
        self.data().iter().sum::<C64>() / self.len() as f64
    }

    pub fn sub(&self, other: &NdSignal) -> Result<NdSignal> {
        same_shape(self, other)?;
        let data = self.data().iter().zip(other.data()).map(|(a, b)| a - b).collect();
        NdSignal::from_vec(self.d, self.n, data)
    }

    pub fn add_scalar(&self, c: C64) -> NdSignal {
        let mut out = self.clone();
        out.data_mut().iter_mut().for_each(|v| *v += c);
        out
    }
}

impl Deref for NdSignal {
    type Target = NdArray;

    fn deref(&self) -> &NdArray {
        &self.array
    }
}

impl DerefMut for NdSignal {
    fn deref_mut(&mut self) -> &mut NdArray {
        &mut self.array
    }
}

/// Array in `C^(N^d × channels)`, stored pixel-major: the `channels` values
/// of one pixel are contiguous, so a pixel block is a slice.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedField {
    d: usize,
    n: usize,
    channels: usize,
    data: Vec<C64>,
}

impl MixedField {
    pub fn zeros(d: usize, n: usize, channels: usize) -> Result<Self> {
        let pixels = Shape::cube(d, n)?.len();
        if channels == 0 {
            return Err(Error::dim("a field needs at least one channel"));
        }
        Ok(MixedField { d, n, channels, data: vec![ZERO; pixels * channels] })
    }

    pub fn from_vec(d: usize, n: usize, channels: usize, data: Vec<C64>) -> Result<Self> {
        let mut field = Self::zeros(d, n, channels)?;
        if data.len() != field.data.len() {
            return Err(Error::dim(format!(
                "field of {} pixels × {channels} channels needs {} values, got {}",
                field.pixel_count(),
                field.data.len(),
                data.len()
            )));
        }
        field.data = data;
        Ok(field)
    }

    /// Stacks equally shaped signals as channels.
    pub fn from_channels(channels: &[NdSignal]) -> Result<Self> {
        let first = channels.first().ok_or_else(|| Error::dim("no channels given"))?;
        let (d, n, c) = (first.d(), first.side(), channels.len());
        let mut field = Self::zeros(d, n, c)?;
        for (l, ch) in channels.iter().enumerate() {
            same_shape(first, ch)?;
            for (p, v) in ch.data().iter().enumerate() {
                field.data[p * c + l] = *v;
            }
        }
        Ok(field)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.data.len() / self.channels
    }

    pub fn pixel_shape(&self) -> Shape {
        Shape::cube(self.d, self.n).expect("validated at construction")
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

    pub fn block(&self, pixel: usize) -> &[C64] {
        &self.data[pixel * self.channels..(pixel + 1) * self.channels]
    }

    pub fn block_mut(&mut self, pixel: usize) -> &mut [C64] {
        &mut self.data[pixel * self.channels..(pixel + 1) * self.channels]
    }

    pub fn blocks(&self) -> std::slice::ChunksExact<'_, C64> {
        self.data.chunks_exact(self.channels)
    }

    pub fn block_norms(&self) -> Vec<f64> {
        self.blocks().map(norm2).collect()
    }

    pub fn channel(&self, l: usize) -> Result<NdSignal> {
        if l >= self.channels {
            return Err(Error::domain(format!("channel {l} out of range ({} channels)", self.channels)));
        }
        let data = self.blocks().map(|b| b[l]).collect();
        NdSignal::from_vec(self.d, self.n, data)
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn norm1(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).sum()
    }

    pub fn inner(&self, other: &MixedField) -> Result<C64> {
        if self.d != other.d || self.n != other.n || self.channels != other.channels {
            return Err(Error::dim("fields differ in shape or channel count"));
        }
        Ok(dot(&self.data, &other.data))
    }

    pub fn sub(&self, other: &MixedField) -> Result<MixedField> {
        if self.d != other.d || self.n != other.n || self.channels != other.channels {
            return Err(Error::dim("fields differ in shape or channel count"));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(MixedField { data, ..*self })
    }

    /// Copy with every block outside `keep` set to zero.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> MixedField {
        let mut out = self.clone();
        for p in 0..self.pixel_count() {
            if !keep(p) {
                out.block_mut(p).fill(ZERO);
            }
        }
        out
    }
}

fn same_shape(a: &NdArray, b: &NdArray) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::dim(format!(
            "shapes {:?} and {:?} differ",
            a.shape().dims(),
            b.shape().dims()
        )));
    }
    Ok(())
}

/// `Σ_α x_α · conj(y_α)`.
pub fn inner_product(x: &NdArray, y: &NdArray) -> Result<C64> {
    same_shape(x, y)?;
    Ok(dot(x.data(), y.data()))
}

/// Entrywise ℓ_p norm for `p >= 1`; `p = ∞` gives the max modulus.
pub fn lp_norm(x: &NdArray, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain(format!("ℓ_p norm needs p >= 1 (got {p})")));
    }
    let data = x.data();
    Ok(if p == 1.0 {
        data.iter().map(|v| v.norm()).sum()
    } else if p == 2.0 {
        norm2(data)
    } else if p.is_infinite() {
        data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    } else {
        data.iter().map(|v| v.norm().powf(p)).sum::<f64>().powf(1.0 / p)
    })
}

/// `Σ_α (Σ_ℓ |g_{α,ℓ}|²)^{1/2}`.
pub fn mixed_l12_norm(g: &MixedField) -> f64 {
    g.blocks().map(norm2).sum()
}

pub(crate) fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub(crate) fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}
