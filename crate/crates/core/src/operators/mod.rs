//! Measurement operators.
//!
//! A [`LinearMeasurementOp`] maps an input array to `C^r`. Its `k`-th output is
//! `Σ_α (a_k)_α x_α`, where `a_k` is the `k`-th component array, so the dense
//! view of an operator is the matrix whose `k`-th row is `a_k` unraveled in
//! storage order. Operators are immutable and share children through `Arc`,
//! so direct sums and zero-pad lifts never copy component data.

mod descriptor;
mod ensemble;
mod map;
mod pad;
mod rip;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use descriptor::{OperatorDescriptor, OperatorKind};
pub use ensemble::{bernoulli_ensemble, gaussian_ensemble};
pub use map::{GradientOperator, HaarAnalysis, LinearMap, Scaled, Stacked};
pub use pad::{check_pad_derivative_identity, crop_head, crop_tail, zero_pad_head, zero_pad_tail};
pub use rip::{
    rip_constant_exhaustive, rip_constant_montecarlo, rip_constant_spectral_bound, RipCertificate, RipMethod,
    DEFAULT_SUBMATRIX_BUDGET,
};

use crate::error::{Error, Result};
use crate::gradient::GradientField;
use crate::haar::{dyadic_levels, forward_into, inverse_into};
use crate::ndcs::DenseMatrix;
use crate::tensor::{MixedField, NdArray, NdSignal, Shape, C64, ZERO};

/// Input space of an operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// A single dense array.
    Grid(Shape),
    /// Several arrays concatenated channel by channel (column direct sums).
    Channels(Vec<Shape>),
    /// Haar coefficient vectors of signals in `C^(N^d)`.
    Haar { d: usize, n: usize },
}

impl Domain {
    pub fn len(&self) -> usize {
        match self {
            Domain::Grid(s) => s.len(),
            Domain::Channels(parts) => parts.iter().map(Shape::len).sum(),
            Domain::Haar { d, n } => n.pow(*d as u32),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn grid(&self) -> Option<&Shape> {
        match self {
            Domain::Grid(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Matrix {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Origin {
    Explicit,
    Gaussian(u64),
    Bernoulli(u64),
}

#[derive(Clone, Debug)]
enum Kind {
    Dense { matrix: Matrix, origin: Origin },
    Identity,
    RowSum(Vec<Arc<LinearMeasurementOp>>),
    ColumnSum(Vec<Arc<LinearMeasurementOp>>),
    PadHead { child: Arc<LinearMeasurementOp>, axis: usize },
    PadTail { child: Arc<LinearMeasurementOp>, axis: usize },
    HaarSynthesis { child: Arc<LinearMeasurementOp> },
}

#[derive(Clone, Debug)]
pub struct LinearMeasurementOp {
    input: Domain,
    rows: usize,
    kind: Kind,
}

/// Infers `(d, N)` from a derivative shape along `axis`.
fn derivative_cube(shape: &Shape, axis: usize) -> Result<(usize, usize)> {
    let d = shape.ndim();
    if axis >= d {
        return Err(Error::domain(format!("axis {axis} out of range for d = {d}")));
    }
    let n = shape.dims()[axis] + 1;
    if Shape::derivative(d, n, axis)? != *shape {
        return Err(Error::dim(format!(
            "shape {:?} is not a derivative shape along axis {axis}",
            shape.dims()
        )));
    }
    Ok((d, n))
}

fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

fn split(v: &[C64]) -> (Vec<f64>, Vec<f64>, bool) {
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let im: Vec<f64> = v.iter().map(|z| z.im).collect();
    let real = im.iter().all(|&x| x == 0.0);
    (re, im, real)
}

impl LinearMeasurementOp {
    pub(crate) fn dense(input: Domain, rows: usize, matrix: Matrix, origin: Origin) -> Self {
        LinearMeasurementOp { input, rows, kind: Kind::Dense { matrix, origin } }
    }

    pub fn identity(shape: Shape) -> Self {
        let rows = shape.len();
        LinearMeasurementOp { input: Domain::Grid(shape), rows, kind: Kind::Identity }
    }

    /// Operator from explicit component arrays `a_1, …, a_r` over `shape`.
    pub fn from_components(shape: Shape, components: &[NdArray]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::dim("an operator needs at least one component"));
        }
        let mut data = Vec::with_capacity(components.len() * shape.len());
        for a in components {
            if a.shape() != &shape {
                return Err(Error::dim(format!(
                    "component shape {:?} differs from input shape {:?}",
                    a.shape().dims(),
                    shape.dims()
                )));
            }
            data.extend_from_slice(a.data());
        }
        Self::from_matrix(Domain::Grid(shape), components.len(), data)
    }

    /// Operator from a row-major `rows × input.len()` matrix.
    pub fn from_matrix(input: Domain, rows: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || data.len() != rows * input.len() {
            return Err(Error::dim(format!(
                "matrix with {rows} rows over an input of length {} needs {} entries, got {}",
                input.len(),
                rows * input.len(),
                data.len()
            )));
        }
        Ok(Self::dense(input, rows, Matrix::Complex(data), Origin::Explicit))
    }

    /// `A ⊕_r B ⊕_r …`: outputs concatenated, inputs shared.
    pub fn row_sum(parts: Vec<Arc<LinearMeasurementOp>>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::dim("row direct sum of nothing"))?;
        let input = first.input.clone();
        if let Some(bad) = parts.iter().find(|p| p.input != input) {
            return Err(Error::dim(format!(
                "row direct sum needs identical inputs ({:?} vs {:?})",
                input, bad.input
            )));
        }
        let rows = parts.iter().map(|p| p.rows).sum();
        Ok(LinearMeasurementOp { input, rows, kind: Kind::RowSum(parts) })
    }

    pub fn row_direct_sum(a: Arc<LinearMeasurementOp>, b: Arc<LinearMeasurementOp>) -> Result<Self> {
        Self::row_sum(vec![a, b])
    }

    /// `B₁ ⊕_c B₂ ⊕_c …`: the input gains a channel axis, channel `ℓ` is
    /// measured by `B_ℓ`, and the results are summed.
    pub fn column_sum(parts: Vec<Arc<LinearMeasurementOp>>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::dim("column direct sum of nothing"))?;
        let rows = first.rows;
        let mut shapes = Vec::with_capacity(parts.len());
        for p in &parts {
            if p.rows != rows {
                return Err(Error::dim(format!(
                    "column direct sum needs equal output lengths ({rows} vs {})",
                    p.rows
                )));
            }
            let shape = p
                .input
                .grid()
                .ok_or_else(|| Error::dim("column direct sum children must act on a single array"))?;
            shapes.push(shape.clone());
        }
        Ok(LinearMeasurementOp { input: Domain::Channels(shapes), rows, kind: Kind::ColumnSum(parts) })
    }

    pub fn column_direct_sum(a: Arc<LinearMeasurementOp>, b: Arc<LinearMeasurementOp>) -> Result<Self> {
        Self::column_sum(vec![a, b])
    }

    fn lift(child: Arc<LinearMeasurementOp>, axis: usize, head: bool) -> Result<Self> {
        let shape = child
            .input
            .grid()
            .ok_or_else(|| Error::dim("zero-pad lift needs an operator on a derivative-shaped array"))?;
        let (d, n) = derivative_cube(shape, axis)?;
        let rows = child.rows;
        let kind = if head { Kind::PadHead { child, axis } } else { Kind::PadTail { child, axis } };
        Ok(LinearMeasurementOp { input: Domain::Grid(Shape::cube(d, n)?), rows, kind })
    }

    /// `[B]^{0_ℓ}`: every component padded with a zero face at `α_ℓ = 0`.
    pub fn pad_head(child: Arc<LinearMeasurementOp>, axis: usize) -> Result<Self> {
        Self::lift(child, axis, true)
    }

    /// `[B]_{0_ℓ}`: every component padded with a zero face at `α_ℓ = N - 1`.
    pub fn pad_tail(child: Arc<LinearMeasurementOp>, axis: usize) -> Result<Self> {
        Self::lift(child, axis, false)
    }

    /// `c ↦ A(H* c)`, the operator seen from the Haar coefficient domain.
    pub fn compose_with_inverse_haar(child: Arc<LinearMeasurementOp>) -> Result<Self> {
        let shape = child.input.grid().ok_or_else(|| Error::dim("expected an operator on C^(N^d)"))?;
        let n = shape.cube_side().ok_or_else(|| Error::dim("expected a cubic input shape"))?;
        dyadic_levels(n)?;
        let d = shape.ndim();
        let rows = child.rows;
        Ok(LinearMeasurementOp { input: Domain::Haar { d, n }, rows, kind: Kind::HaarSynthesis { child } })
    }

    /// The composite `M = A ⊕_r [B₁]^{0₁} ⊕_r [B₁]_{0₁} ⊕_r … ⊕_r [B_d]^{0_d} ⊕_r [B_d]_{0_d}`.
    ///
    /// `a` acts on `C^(N^d)` with `p` rows; `bs[ℓ]` acts on the derivative
    /// shape along axis `ℓ` with `q` rows. The output length is `2dq + p`,
    /// laid out as `A` first, then the head/tail pair of each axis in order.
    pub fn build_composite(a: Arc<LinearMeasurementOp>, bs: &[Arc<LinearMeasurementOp>]) -> Result<Self> {
        let shape = a.input.grid().ok_or_else(|| Error::dim("A must act on C^(N^d)"))?;
        let n = shape.cube_side().ok_or_else(|| Error::dim("A must act on a cube"))?;
        let d = shape.ndim();
        if bs.len() != d {
            return Err(Error::dim(format!("need one B per axis: d = {d}, got {}", bs.len())));
        }
        let q = bs[0].rows;
        let mut parts = vec![a.clone()];
        for (axis, b) in bs.iter().enumerate() {
            let expected = Shape::derivative(d, n, axis)?;
            if b.input.grid() != Some(&expected) {
                return Err(Error::dim(format!(
                    "B_{} must act on shape {:?}, got {:?}",
                    axis + 1,
                    expected.dims(),
                    b.input
                )));
            }
            if b.rows != q {
                return Err(Error::dim("all B_ℓ must have the same number of rows q"));
            }
            parts.push(Arc::new(Self::pad_head(b.clone(), axis)?));
            parts.push(Arc::new(Self::pad_tail(b.clone(), axis)?));
        }
        Self::row_sum(parts)
    }

    pub fn input(&self) -> &Domain {
        &self.input
    }

    pub fn input_shape(&self) -> Option<&Shape> {
        self.input.grid()
    }

    /// Number of measurements `r`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Children of a direct sum, lift or composition.
    pub fn children(&self) -> Vec<Arc<LinearMeasurementOp>> {
        match &self.kind {
            Kind::Dense { .. } | Kind::Identity => vec![],
            Kind::RowSum(p) | Kind::ColumnSum(p) => p.clone(),
            Kind::PadHead { child, .. } | Kind::PadTail { child, .. } | Kind::HaarSynthesis { child } => {
                vec![child.clone()]
            }
        }
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.input.len() {
            return Err(Error::dim(format!("operator input has length {}, got {}", self.input.len(), x.len())));
        }
        Ok(self.apply_vec(x))
    }

    pub fn adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        if y.len() != self.rows {
            return Err(Error::dim(format!("operator output has length {}, got {}", self.rows, y.len())));
        }
        Ok(self.adjoint_vec(y))
    }

    pub fn apply_array(&self, x: &NdArray) -> Result<Vec<C64>> {
        match &self.input {
            Domain::Grid(s) if s == x.shape() => Ok(self.apply_vec(x.data())),
            other => Err(Error::dim(format!("operator acts on {other:?}, got shape {:?}", x.shape().dims()))),
        }
    }

    pub fn apply_signal(&self, x: &NdSignal) -> Result<Vec<C64>> {
        self.apply_array(x)
    }

    /// Adjoint, reshaped to the input grid.
    pub fn adjoint_array(&self, y: &[C64]) -> Result<NdArray> {
        let shape = self.input.grid().ok_or_else(|| Error::dim("operator input is not a single array"))?.clone();
        NdArray::from_vec(shape, self.adjoint(y)?)
    }

    /// Column direct sum applied to a pixel-major field whose channel `ℓ` is
    /// the input of child `ℓ`.
    pub fn apply_field(&self, g: &MixedField) -> Result<Vec<C64>> {
        let Domain::Channels(shapes) = &self.input else {
            return Err(Error::dim("apply_field needs a column direct sum"));
        };
        if shapes.len() != g.channels() || shapes.iter().any(|s| s != &g.pixel_shape()) {
            return Err(Error::dim("field channels do not match the column direct sum"));
        }
        let mut x = Vec::with_capacity(self.input.len());
        for l in 0..g.channels() {
            x.extend(g.blocks().map(|b| b[l]));
        }
        Ok(self.apply_vec(&x))
    }

    /// `B(h) = Σ_ℓ B_ℓ(h_ℓ)` for a column direct sum whose child `ℓ` acts on
    /// the derivative shape along `ℓ`; each channel is read on `α_ℓ ≤ N-2`.
    pub fn apply_gradient_field(&self, h: &GradientField) -> Result<Vec<C64>> {
        let (d, n) = (h.d(), h.side());
        let expected: Vec<Shape> = (0..d).map(|l| Shape::derivative(d, n, l)).collect::<Result<_>>()?;
        if self.input != Domain::Channels(expected) {
            return Err(Error::dim("operator is not a column sum over the derivative shapes"));
        }
        let mut x = Vec::with_capacity(self.input.len());
        for l in 0..d {
            let channel = h.channel(l)?;
            x.extend_from_slice(crop_tail(&channel, l)?.data());
        }
        Ok(self.apply_vec(&x))
    }

    /// Row `k` of the dense view, i.e. the unraveled component `a_k`.
    pub fn component(&self, k: usize) -> Result<Vec<C64>> {
        if k >= self.rows {
            return Err(Error::domain(format!("component {k} out of range ({} rows)", self.rows)));
        }
        let mut e = vec![ZERO; self.rows];
        e[k] = C64::new(1.0, 0.0);
        Ok(self.adjoint_vec(&e).into_iter().map(|v| v.conj()).collect())
    }

    /// Dense `r × input_len` matrix.
    pub fn dense_view(&self) -> DenseMatrix {
        let cols = self.input.len();
        let data = match &self.kind {
            Kind::Dense { matrix: Matrix::Real(m), .. } => m.iter().map(|&v| C64::new(v, 0.0)).collect(),
            Kind::Dense { matrix: Matrix::Complex(m), .. } => m.clone(),
            _ => (0..self.rows).flat_map(|k| self.component(k).expect("row in range")).collect(),
        };
        DenseMatrix { rows: self.rows, cols, data }
    }

    fn pad_axis(&self) -> Option<(bool, usize, &Arc<LinearMeasurementOp>)> {
        match &self.kind {
            Kind::PadHead { child, axis } => Some((true, *axis, child)),
            Kind::PadTail { child, axis } => Some((false, *axis, child)),
            _ => None,
        }
    }
}

impl LinearMap for LinearMeasurementOp {
    fn input_len(&self) -> usize {
        self.input.len()
    }

    fn output_len(&self) -> usize {
        self.rows
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.input.len());
        debug_assert_eq!(out.len(), self.rows);
        match &self.kind {
            Kind::Identity => out.copy_from_slice(x),
            Kind::Dense { matrix: Matrix::Real(m), .. } => {
                let cols = x.len();
                let (re, im, real) = split(x);
                for (o, row) in out.iter_mut().zip(m.chunks_exact(cols)) {
                    let i = if real { 0.0 } else { dot_f64(row, &im) };
                    *o = C64::new(dot_f64(row, &re), i);
                }
            }
            Kind::Dense { matrix: Matrix::Complex(m), .. } => {
                let cols = x.len();
                for (o, row) in out.iter_mut().zip(m.chunks_exact(cols)) {
                    *o = row.iter().zip(x).map(|(a, v)| a * v).sum();
                }
            }
            Kind::RowSum(parts) => {
                let mut at = 0;
                for p in parts {
                    p.apply_into(x, &mut out[at..at + p.rows]);
                    at += p.rows;
                }
            }
            Kind::ColumnSum(parts) => {
                out.fill(ZERO);
                let mut buf = vec![ZERO; self.rows];
                let mut at = 0;
                for p in parts {
                    let len = p.input.len();
                    p.apply_into(&x[at..at + len], &mut buf);
                    out.iter_mut().zip(&buf).for_each(|(o, b)| *o += b);
                    at += len;
                }
            }
            Kind::PadHead { .. } | Kind::PadTail { .. } => {
                let (head, axis, child) = self.pad_axis().unwrap();
                let shape = self.input.grid().unwrap();
                let cropped = pad::crop_slice(x, shape, axis, head);
                child.apply_into(&cropped, out);
            }
            Kind::HaarSynthesis { child } => {
                let Domain::Haar { d, n } = self.input else { unreachable!() };
                let mut signal = vec![ZERO; x.len()];
                inverse_into(x, d, n, &mut signal);
                child.apply_into(&signal, out);
            }
        }
    }

    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.input.len());
        match &self.kind {
            Kind::Identity => out.copy_from_slice(y),
            Kind::Dense { matrix: Matrix::Real(m), .. } => {
                let cols = out.len();
                let (yr, yi, real) = split(y);
                let mut re = vec![0.0; cols];
                let mut im = vec![0.0; cols];
                for (k, row) in m.chunks_exact(cols).enumerate() {
                    let (a, b) = (yr[k], yi[k]);
                    if a != 0.0 {
                        re.iter_mut().zip(row).for_each(|(o, v)| *o += v * a);
                    }
                    if !real && b != 0.0 {
                        im.iter_mut().zip(row).for_each(|(o, v)| *o += v * b);
                    }
                }
                for ((o, r), i) in out.iter_mut().zip(re).zip(im) {
                    *o = C64::new(r, i);
                }
            }
            Kind::Dense { matrix: Matrix::Complex(m), .. } => {
                let cols = out.len();
                out.fill(ZERO);
                for (row, yk) in m.chunks_exact(cols).zip(y) {
                    out.iter_mut().zip(row).for_each(|(o, a)| *o += a.conj() * yk);
                }
            }
            Kind::RowSum(parts) => {
                out.fill(ZERO);
                let mut buf = vec![ZERO; out.len()];
                let mut at = 0;
                for p in parts {
                    p.adjoint_into(&y[at..at + p.rows], &mut buf);
                    out.iter_mut().zip(&buf).for_each(|(o, b)| *o += b);
                    at += p.rows;
                }
            }
            Kind::ColumnSum(parts) => {
                let mut at = 0;
                for p in parts {
                    let len = p.input.len();
                    p.adjoint_into(y, &mut out[at..at + len]);
                    at += len;
                }
            }
            Kind::PadHead { .. } | Kind::PadTail { .. } => {
                let (head, axis, child) = self.pad_axis().unwrap();
                let shape = self.input.grid().unwrap();
                let inner = child.adjoint_vec(y);
                pad::pad_slice_into(&inner, shape, axis, head, out);
            }
            Kind::HaarSynthesis { child } => {
                let Domain::Haar { d, n } = self.input else { unreachable!() };
                let signal = child.adjoint_vec(y);
                forward_into(&signal, d, n, out);
            }
        }
    }
}
