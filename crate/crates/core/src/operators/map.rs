use crate::gradient::{divergence_into, gradient_into};
use crate::haar::{forward_into, inverse_into};
use crate::tensor::{C64, ZERO};

/// A matrix-free linear map `C^input_len → C^output_len` with its adjoint.
pub trait LinearMap: Sync {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn apply_into(&self, x: &[C64], out: &mut [C64]);
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]);

    fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.output_len()];
        self.apply_into(x, &mut out);
        out
    }

    fn adjoint_vec(&self, y: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.input_len()];
        self.adjoint_into(y, &mut out);
        out
    }
}

/// The zero-padded gradient `C^(N^d) → C^(N^d × d)` as a linear map.
#[derive(Clone, Copy, Debug)]
pub struct GradientOperator {
    pub d: usize,
    pub n: usize,
}

impl LinearMap for GradientOperator {
    fn input_len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    fn output_len(&self) -> usize {
        self.input_len() * self.d
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        gradient_into(x, self.d, self.n, out);
    }

    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        divergence_into(y, self.d, self.n, out);
    }
}

/// Orthonormal Haar analysis `x ↦ H x`; `N` must be a power of two.
#[derive(Clone, Copy, Debug)]
pub struct HaarAnalysis {
    pub d: usize,
    pub n: usize,
}

impl LinearMap for HaarAnalysis {
    fn input_len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    fn output_len(&self) -> usize {
        self.input_len()
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        forward_into(x, self.d, self.n, out);
    }

    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        inverse_into(y, self.d, self.n, out);
    }
}

/// A map scaled by a real factor.
pub struct Scaled<'a> {
    pub map: &'a dyn LinearMap,
    pub factor: f64,
}

impl LinearMap for Scaled<'_> {
    fn input_len(&self) -> usize {
        self.map.input_len()
    }

    fn output_len(&self) -> usize {
        self.map.output_len()
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        self.map.apply_into(x, out);
        out.iter_mut().for_each(|v| *v *= self.factor);
    }

    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        self.map.adjoint_into(y, out);
        out.iter_mut().for_each(|v| *v *= self.factor);
    }
}

/// Vertical concatenation `[K₁; K₂; …]` of maps sharing an input space.
pub struct Stacked<'a> {
    parts: Vec<&'a dyn LinearMap>,
}

impl<'a> Stacked<'a> {
    pub fn new(parts: Vec<&'a dyn LinearMap>) -> Self {
        assert!(!parts.is_empty(), "stack needs at least one map");
        let n = parts[0].input_len();
        assert!(parts.iter().all(|p| p.input_len() == n), "stacked maps must share their input space");
        Stacked { parts }
    }
}

impl LinearMap for Stacked<'_> {
    fn input_len(&self) -> usize {
        self.parts[0].input_len()
    }

    fn output_len(&self) -> usize {
        self.parts.iter().map(|p| p.output_len()).sum()
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let mut at = 0;
        for p in &self.parts {
            let len = p.output_len();
            p.apply_into(x, &mut out[at..at + len]);
            at += len;
        }
    }

    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        out.fill(ZERO);
        let mut buf = vec![ZERO; out.len()];
        let mut at = 0;
        for p in &self.parts {
            let len = p.output_len();
            p.adjoint_into(&y[at..at + len], &mut buf);
            out.iter_mut().zip(&buf).for_each(|(o, b)| *o += b);
            at += len;
        }
    }
}
