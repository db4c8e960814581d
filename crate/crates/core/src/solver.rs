//! Noise-constrained recovery by a first-order primal–dual iteration.
//!
//! Both programs have the form `min_z F(K₁ z)` subject to `‖M z - y‖₂ ≤ ε`,
//! with `K₁` the gradient (TV) or the Haar analysis (ℓ₁). They are written
//! as the saddle point of `F(K₁ z) + ι_ball(λ M z)` over the stacked
//! operator `[K₁; λM]`, where `λ` balances the two blocks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradient::{gradient_into, shrink_blocks, shrink_entries, TvVariant};
use crate::haar::dyadic_levels;
use crate::operators::{GradientOperator, HaarAnalysis, LinearMap, LinearMeasurementOp};
use crate::tensor::{norm2, NdSignal, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveVariant {
    #[serde(rename = "iso")]
    Isotropic,
    #[serde(rename = "aniso")]
    Anisotropic,
    #[serde(rename = "l1-haar")]
    L1Haar,
}

impl SolveVariant {
    pub fn tv(self) -> Option<TvVariant> {
        match self {
            SolveVariant::Isotropic => Some(TvVariant::Isotropic),
            SolveVariant::Anisotropic => Some(TvVariant::Anisotropic),
            SolveVariant::L1Haar => None,
        }
    }
}

impl From<TvVariant> for SolveVariant {
    fn from(v: TvVariant) -> Self {
        match v {
            TvVariant::Isotropic => SolveVariant::Isotropic,
            TvVariant::Anisotropic => SolveVariant::Anisotropic,
        }
    }
}

impl std::str::FromStr for SolveVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iso" | "isotropic" => Ok(SolveVariant::Isotropic),
            "aniso" | "anisotropic" => Ok(SolveVariant::Anisotropic),
            "l1haar" | "l1-haar" => Ok(SolveVariant::L1Haar),
            other => Err(Error::Config(format!("unknown solver variant {other:?}"))),
        }
    }
}

/// Explicit primal/dual step sizes. Must satisfy `τσL² ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    pub tau: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub variant: SolveVariant,
    pub max_iters: usize,
    /// Bound on both the relative primal change and the relative feasibility slack.
    pub tol: f64,
    /// Initial ratio `τ/σ` used when no explicit steps are given.
    pub step_ratio: f64,
    pub steps: Option<StepSizes>,
    /// Known upper bound on `‖M‖`; estimated by power iteration otherwise.
    pub measurement_norm: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            variant: SolveVariant::Isotropic,
            max_iters: 5000,
            tol: 1e-6,
            step_ratio: 1e-4,
            steps: None,
            measurement_norm: None,
        }
    }
}

impl SolveOptions {
    pub fn new(variant: SolveVariant) -> Self {
        SolveOptions { variant, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config(format!("tol must be > 0 (got {})", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if self.step_ratio.is_nan() || self.step_ratio <= 0.0 {
            return Err(Error::Config("step_ratio must be > 0".into()));
        }
        if let Some(s) = self.steps {
            if !(s.tau > 0.0 && s.sigma > 0.0) {
                return Err(Error::Config("step sizes must be positive".into()));
            }
        }
        if let Some(n) = self.measurement_norm {
            if n.is_nan() || n <= 0.0 {
                return Err(Error::Config("measurement_norm must be > 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub x_hat: Option<NdSignal>,
    pub variant: SolveVariant,
    pub iterations: usize,
    /// `‖M x̂ - y‖₂ - ε`; negative when strictly feasible.
    pub feasibility_gap: f64,
    pub relative_change: f64,
    /// `TV(x̂)` or `‖H x̂‖₁`.
    pub objective: f64,
    pub converged: bool,
}

impl SolveResult {
    pub fn signal(&self) -> &NdSignal {
        self.x_hat.as_ref().expect("solver results carry the estimate")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Euclidean projection onto the closed ball `{z : ‖z - center‖₂ ≤ radius}`.
pub fn project_l2_ball(v: &[C64], center: &[C64], radius: f64) -> Result<Vec<C64>> {
    if v.len() != center.len() {
        return Err(Error::dim("vector and center lengths differ"));
    }
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::domain(format!("radius must be >= 0 (got {radius})")));
    }
    let mut out = v.to_vec();
    project_in_place(&mut out, center, radius);
    Ok(out)
}

fn project_in_place(v: &mut [C64], center: &[C64], radius: f64) {
    let dist = v.iter().zip(center).map(|(a, c)| (a - c).norm_sqr()).sum::<f64>().sqrt();
    if dist > radius {
        let t = radius / dist;
        v.iter_mut().zip(center).for_each(|(a, c)| *a = c + (*a - c) * t);
    }
}

const POWER_ITERATIONS: usize = 100;

/// Upper estimate of `‖K‖₂`: the power-iteration value on `K*K` from a
/// fixed start vector, inflated by 1%.
pub fn operator_norm_bound(op: &dyn LinearMap) -> f64 {
    let n = op.input_len();
    if n == 0 || op.output_len() == 0 {
        return 0.0;
    }
    // deterministic, non-symmetric start so no eigenvector is missed by symmetry
    let mut x: Vec<C64> = (0..n).map(|i| C64::new(1.0 + ((i * 7919) % 97) as f64 / 97.0, 0.0)).collect();
    let mut y = vec![ZERO; op.output_len()];
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let nx = norm2(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        op.apply_into(&x, &mut y);
        lambda = norm2(&y);
        op.adjoint_into(&y, &mut x);
    }
    lambda * 1.01
}

/// The objective part `K₁` of the saddle problem.
enum Analysis {
    Gradient(GradientOperator, TvVariant),
    Haar(HaarAnalysis),
}

impl Analysis {
    fn map(&self) -> &dyn LinearMap {
        match self {
            Analysis::Gradient(g, _) => g,
            Analysis::Haar(h) => h,
        }
    }

    /// Squared norm bound: `4d` for the gradient, 1 for an orthonormal transform.
    fn norm_sq(&self) -> f64 {
        match self {
            Analysis::Gradient(g, _) => 4.0 * g.d as f64,
            Analysis::Haar(_) => 1.0,
        }
    }

    /// Projection onto the dual unit ball of `F`, written as `v - shrink(v, 1)`.
    fn project_dual(&self, v: &mut [C64]) {
        let mut shrunk = v.to_vec();
        match self {
            Analysis::Gradient(g, TvVariant::Isotropic) => shrink_blocks(&mut shrunk, g.d, 1.0),
            _ => shrink_entries(&mut shrunk, 1.0),
        }
        v.iter_mut().zip(&shrunk).for_each(|(a, b)| *a -= b);
    }

    fn objective(&self, x: &[C64]) -> f64 {
        match self {
            Analysis::Gradient(g, variant) => {
                let mut out = vec![ZERO; g.output_len()];
                gradient_into(x, g.d, g.n, &mut out);
                match variant {
                    TvVariant::Anisotropic => out.iter().map(|v| v.norm()).sum(),
                    TvVariant::Isotropic => out.chunks_exact(g.d).map(norm2).sum(),
                }
            }
            Analysis::Haar(h) => h.apply_vec(x).iter().map(|v| v.norm()).sum(),
        }
    }
}

fn check_problem(m: &LinearMeasurementOp, y: &[C64], epsilon: f64, opts: &SolveOptions) -> Result<(usize, usize)> {
    opts.validate()?;
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::domain(format!("epsilon must be >= 0 (got {epsilon})")));
    }
    let shape = m.input_shape().ok_or_else(|| Error::dim("solver needs an operator on C^(N^d)"))?;
    let n = shape.cube_side().ok_or_else(|| Error::dim("solver needs a cubic input shape"))?;
    if y.len() != m.rows() {
        return Err(Error::dim(format!("y has length {}, operator has {} rows", y.len(), m.rows())));
    }
    Ok((shape.ndim(), n))
}

/// Solves `min ‖z‖_TV` subject to `‖M z - y‖₂ ≤ ε`.
pub fn solve_tv(m: &LinearMeasurementOp, y: &[C64], epsilon: f64, opts: &SolveOptions) -> Result<SolveResult> {
    let (d, n) = check_problem(m, y, epsilon, opts)?;
    let variant = opts
        .variant
        .tv()
        .ok_or_else(|| Error::Config("solve_tv needs the iso or aniso variant".into()))?;
    if d < 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    primal_dual(m, y, epsilon, opts, Analysis::Gradient(GradientOperator { d, n }, variant), d, n)
}

/// Solves `min ‖H z‖₁` subject to `‖A z - y‖₂ ≤ ε`.
pub fn solve_l1_haar(a: &LinearMeasurementOp, y: &[C64], epsilon: f64, opts: &SolveOptions) -> Result<SolveResult> {
    let (d, n) = check_problem(a, y, epsilon, opts)?;
    if opts.variant != SolveVariant::L1Haar {
        return Err(Error::Config("solve_l1_haar needs the l1-haar variant".into()));
    }
    dyadic_levels(n)?;
    primal_dual(a, y, epsilon, opts, Analysis::Haar(HaarAnalysis { d, n }), d, n)
}

fn primal_dual(
    m: &LinearMeasurementOp,
    y: &[C64],
    epsilon: f64,
    opts: &SolveOptions,
    analysis: Analysis,
    d: usize,
    n: usize,
) -> Result<SolveResult> {
    let k1 = analysis.map();
    let m_norm = opts.measurement_norm.unwrap_or_else(|| operator_norm_bound(m));
    let y_norm = norm2(y);
    let len = m.input_len();

    // λ equalizes the two blocks so that L² = 2‖K₁‖².
    let lambda = if m_norm > 0.0 { analysis.norm_sq().sqrt() / m_norm } else { 1.0 };
    let l_sq = analysis.norm_sq() + (lambda * m_norm).powi(2);
    let StepSizes { tau, sigma } = match opts.steps {
        Some(s) => {
            if s.tau * s.sigma * l_sq > 1.0 + 1e-12 {
                return Err(Error::Config(format!(
                    "steps violate τσL² ≤ 1 (τσL² = {})",
                    s.tau * s.sigma * l_sq
                )));
            }
            s
        }
        None => {
            let l = l_sq.sqrt();
            StepSizes { tau: opts.step_ratio.sqrt() / l, sigma: 1.0 / (opts.step_ratio.sqrt() * l) }
        }
    };

    let center: Vec<C64> = y.iter().map(|v| v * lambda).collect();
    let radius = lambda * epsilon;
    let slack_limit = opts.tol * epsilon.max(y_norm).max(f64::MIN_POSITIVE);

    let mut x = vec![ZERO; len];
    let mut x_new = vec![ZERO; len];
    let mut p = vec![ZERO; k1.output_len()];
    let mut q = vec![ZERO; m.rows()];
    // K₁x and Mx for the current and the previous iterate.
    let mut kp = vec![ZERO; k1.output_len()];
    let mut kp_new = vec![ZERO; k1.output_len()];
    let mut mq = vec![ZERO; m.rows()];
    let mut mq_new = vec![ZERO; m.rows()];
    // Kᵀ(p, q) with the λ weight folded in.
    let mut back = vec![ZERO; len];
    let mut back_k = vec![ZERO; len];
    let mut back_m = vec![ZERO; len];
    let mut ball = vec![ZERO; m.rows()];

    let mut iterations = 0;
    let mut rel_change = f64::INFINITY;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;

        let mut diff_sq = 0.0;
        let mut x_sq = 0.0;
        for i in 0..len {
            let step = back[i] * tau;
            x_new[i] = x[i] - step;
            diff_sq += step.norm_sqr();
            x_sq += x_new[i].norm_sqr();
        }
        rel_change = diff_sq.sqrt() / x_sq.sqrt().max(f64::MIN_POSITIVE);
        k1.apply_into(&x_new, &mut kp_new);
        m.apply_into(&x_new, &mut mq_new);

        // Dual steps at the extrapolated point 2x_new - x.
        for ((pk, a), b) in p.iter_mut().zip(&kp_new).zip(&kp) {
            *pk += (a * 2.0 - b) * sigma;
        }
        analysis.project_dual(&mut p);
        // q ← v - σ·proj(v/σ), v = q + σλM x̄
        for ((qk, (a, b)), c) in q.iter_mut().zip(mq_new.iter().zip(&mq)).zip(ball.iter_mut()) {
            *qk += (a * 2.0 - b) * (sigma * lambda);
            *c = *qk / sigma;
        }
        project_in_place(&mut ball, &center, radius);
        q.iter_mut().zip(&ball).for_each(|(a, b)| *a -= b * sigma);

        k1.adjoint_into(&p, &mut back_k);
        m.adjoint_into(&q, &mut back_m);
        for i in 0..len {
            back[i] = back_k[i] + back_m[i] * lambda;
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut kp, &mut kp_new);
        std::mem::swap(&mut mq, &mut mq_new);

        if rel_change <= opts.tol || iterations == opts.max_iters {
            let resid = mq.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            gap = resid - epsilon;
            if rel_change <= opts.tol && gap <= slack_limit {
                converged = true;
                break;
            }
        }
    }
    if !gap.is_finite() {
        gap = mq.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() - epsilon;
    }
    let objective = analysis.objective(&x);
    Ok(SolveResult {
        x_hat: Some(NdSignal::from_vec(d, n, x)?),
        variant: opts.variant,
        iterations,
        feasibility_gap: gap,
        relative_change: rel_change,
        objective,
        converged,
    })
}
