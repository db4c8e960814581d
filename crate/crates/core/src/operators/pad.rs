use crate::error::{Error, Result};
use crate::gradient::directional_derivative;
use crate::tensor::{dot, NdArray, NdSignal, Shape, C64, ZERO};

use super::LinearMeasurementOp;

/// Copies `src` (derivative shape along `axis`) into the cube-shaped `out`,
/// leaving a zero face at `α_axis = 0` (head) or `α_axis = N - 1` (tail).
pub(crate) fn pad_slice_into(src: &[C64], cube: &Shape, axis: usize, head: bool, out: &mut [C64]) {
    let dims = cube.dims();
    let n = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let off = usize::from(head);
    for o in 0..outer {
        for a in 0..n {
            let dst = &mut out[(o * n + a) * inner..(o * n + a + 1) * inner];
            if (head && a == 0) || (!head && a == n - 1) {
                dst.fill(ZERO);
            } else {
                let s = o * (n - 1) + a - off;
                dst.copy_from_slice(&src[s * inner..(s + 1) * inner]);
            }
        }
    }
}

/// Inverse of [`pad_slice_into`]: drops the zero face.
pub(crate) fn crop_slice(x: &[C64], cube: &Shape, axis: usize, head: bool) -> Vec<C64> {
    let dims = cube.dims();
    let n = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut out = Vec::with_capacity(outer * (n - 1) * inner);
    let range = if head { 1..n } else { 0..n - 1 };
    for o in 0..outer {
        for a in range.clone() {
            out.extend_from_slice(&x[(o * n + a) * inner..(o * n + a + 1) * inner]);
        }
    }
    out
}

fn lift(a: &NdArray, axis: usize, head: bool) -> Result<NdArray> {
    let (d, n) = super::derivative_cube(a.shape(), axis)?;
    let cube = Shape::cube(d, n)?;
    let mut out = vec![ZERO; cube.len()];
    pad_slice_into(a.data(), &cube, axis, head, &mut out);
    NdArray::from_vec(cube, out)
}

fn crop(x: &NdArray, axis: usize, head: bool) -> Result<NdArray> {
    let shape = x.shape();
    let n = shape.cube_side().ok_or_else(|| Error::dim("expected a cube-shaped array"))?;
    if axis >= shape.ndim() || n < 2 {
        return Err(Error::domain(format!("cannot crop axis {axis} of shape {:?}", shape.dims())));
    }
    let target = Shape::derivative(shape.ndim(), n, axis)?;
    NdArray::from_vec(target, crop_slice(x.data(), shape, axis, head))
}

/// `a^{0_ℓ}`: inserts a zero face at `α_ℓ = 0`.
pub fn zero_pad_head(a: &NdArray, axis: usize) -> Result<NdArray> {
    lift(a, axis, true)
}

/// `a_{0_ℓ}`: inserts a zero face at `α_ℓ = N - 1`.
pub fn zero_pad_tail(a: &NdArray, axis: usize) -> Result<NdArray> {
    lift(a, axis, false)
}

/// Drops the face `α_ℓ = 0` of a cube-shaped array.
pub fn crop_head(x: &NdArray, axis: usize) -> Result<NdArray> {
    crop(x, axis, true)
}

/// Drops the face `α_ℓ = N - 1` of a cube-shaped array.
pub fn crop_tail(x: &NdArray, axis: usize) -> Result<NdArray> {
    crop(x, axis, false)
}

/// Largest relative violation of `⟨a, x_{r_ℓ}⟩ = ⟨a^{0_ℓ}, x⟩ − ⟨a_{0_ℓ}, x⟩`
/// over the components of `b` (which acts on the derivative shape along
/// `axis`), using the sesquilinear inner product. Scaled by `‖a‖‖x‖`.
pub fn check_pad_derivative_identity(b: &LinearMeasurementOp, x: &NdSignal, axis: usize) -> Result<f64> {
    let shape = b.input_shape().ok_or_else(|| Error::dim("operator must act on a single array"))?;
    let expected = Shape::derivative(x.d(), x.side(), axis)?;
    if *shape != expected {
        return Err(Error::dim(format!(
            "operator acts on {:?}, derivative shape is {:?}",
            shape.dims(),
            expected.dims()
        )));
    }
    let xr = directional_derivative(x, axis)?;
    let mut worst = 0.0f64;
    for k in 0..b.rows() {
        let a = NdArray::from_vec(shape.clone(), b.component(k)?)?;
        let lhs = dot(a.data(), xr.data());
        let rhs = dot(zero_pad_head(&a, axis)?.data(), x.data()) - dot(zero_pad_tail(&a, axis)?.data(), x.data());
        let scale = (a.norm2() * x.norm2()).max(f64::MIN_POSITIVE);
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    Ok(worst)
}
