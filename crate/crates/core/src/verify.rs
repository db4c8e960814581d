//! Numerical checks of the recovery inequalities.
//!
//! Every check returns [`BoundReport`]s. Bounds with an explicit constant are
//! pass/fail; bounds that only hold up to an unspecified universal constant
//! report the empirical constant `lhs / rhs` and are informational.
//! Hypotheses are checked first and a failed hypothesis is reported as such,
//! without evaluating the bound.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradient::{best_s_blocks, gradient, BlockSupport, GradientField, TvVariant};
use crate::haar::block_decay_profile;
use crate::operators::{rip_constant_spectral_bound, Domain, LinearMap, LinearMeasurementOp, RipCertificate, RipMethod};
use crate::tensor::{dot, norm2, MixedField, NdSignal, Shape, C64, ZERO};

/// Relative slack allowed when testing hypotheses that generators meet with equality.
const HYPOTHESIS_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundStatus {
    Pass,
    Fail,
    /// No explicit constant; see the empirical constant.
    Info,
    HypothesisFailed,
    /// `rhs = 0`, so no constant can be formed.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: Option<f64>,
    /// Right-hand side with the constant factored out.
    pub rhs: Option<f64>,
    /// `lhs / rhs`.
    pub constant: Option<f64>,
    /// The constant the bound asserts, when there is one.
    pub explicit_constant: Option<f64>,
    pub status: BoundStatus,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl BoundReport {
    fn hypothesis_failed(name: &str, note: String) -> Self {
        BoundReport {
            name: name.into(),
            lhs: None,
            rhs: None,
            constant: None,
            explicit_constant: None,
            status: BoundStatus::HypothesisFailed,
            note,
        }
    }

    /// Informational report: the constant is `lhs/rhs`, or degenerate if `rhs = 0`.
    fn empirical(name: &str, lhs: f64, rhs: f64) -> Self {
        let (constant, status) = if rhs > 0.0 && rhs.is_finite() {
            (Some(lhs / rhs), BoundStatus::Info)
        } else {
            (None, BoundStatus::Degenerate)
        };
        BoundReport {
            name: name.into(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            constant,
            explicit_constant: None,
            status,
            note: String::new(),
        }
    }

    /// Hard check `lhs ≤ c·rhs` up to `rel` relative roundoff.
    fn explicit(name: &str, lhs: f64, rhs: f64, c: f64, rel: f64) -> Self {
        let pass = lhs <= c * rhs + rel * (c * rhs).max(lhs);
        BoundReport {
            name: name.into(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            constant: (rhs > 0.0).then(|| lhs / rhs),
            explicit_constant: Some(c),
            status: if pass { BoundStatus::Pass } else { BoundStatus::Fail },
            note: String::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != BoundStatus::Fail && self.status != BoundStatus::HypothesisFailed
    }
}

pub fn reports_to_json(reports: &[BoundReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

pub fn reports_to_csv(reports: &[BoundReport]) -> String {
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let status = |s: BoundStatus| serde_json::to_value(s).unwrap().as_str().unwrap().to_string();
    let mut out = String::from("name,lhs,rhs,constant,status\n");
    for r in reports {
        out.push_str(&format!("{},{},{},{},{}\n", r.name, fmt(r.lhs), fmt(r.rhs), fmt(r.constant), status(r.status)));
    }
    out
}

fn pixel_norms(h: &MixedField, pixels: impl Iterator<Item = usize>) -> (f64, f64) {
    let mut l12 = 0.0;
    let mut l2_sq = 0.0;
    for p in pixels {
        let n = norm2(h.block(p));
        l12 += n;
        l2_sq += n * n;
    }
    (l12, l2_sq.sqrt())
}

/// Cone/tube recovery check for a gradient-domain residual `h`.
///
/// `b` must be the column sum `B₁ ⊕ … ⊕ B_d` over the derivative shapes and
/// `cert` an upper-bound certificate for it (exhaustive or spectral). Returns
/// three reports: the `ℓ₂` bound, the `ℓ₁,₂` bound and the explicit
/// `‖h_R + h_{R₁}‖₂ ≤ 10√d·ε + 3σ/√s`, where `R₁` holds the `4s` largest
/// blocks of `h` off `R`.
pub fn check_cone_tube(
    h: &GradientField,
    b: &LinearMeasurementOp,
    r: &BlockSupport,
    s: usize,
    sigma: f64,
    epsilon: f64,
    cert: &RipCertificate,
) -> Result<Vec<BoundReport>> {
    let names = ["cone-tube-l2", "cone-tube-l12", "cone-tube-explicit"];
    let (d, pixels) = (h.d(), h.pixel_count());
    if s == 0 || sigma < 0.0 || epsilon < 0.0 {
        return Err(Error::domain("need s >= 1, sigma >= 0 and epsilon >= 0"));
    }
    if r.pixels().iter().any(|&p| p >= pixels) {
        return Err(Error::dim("support pixel out of range"));
    }
    let fail = |why: String| Ok(names.iter().map(|n| BoundReport::hypothesis_failed(n, why.clone())).collect());

    if r.s() > s {
        return fail(format!("|R'| = {} exceeds s = {s}", r.s()));
    }
    if cert.method == RipMethod::MonteCarlo {
        return fail("a Monte-Carlo estimate is a lower bound and cannot certify the RIP".into());
    }
    if cert.order < 5 * d * s || cert.level >= 1.0 / 3.0 {
        return fail(format!(
            "certificate has order {} and level {}; need order >= {} and level < 1/3",
            cert.order,
            cert.level,
            5 * d * s
        ));
    }
    let tube = norm2(&b.apply_gradient_field(h)?);
    let tube_limit = (2.0 * d as f64).sqrt() * epsilon;
    if tube > tube_limit * (1.0 + HYPOTHESIS_SLACK) + f64::MIN_POSITIVE {
        return fail(format!("tube constraint violated: ‖B(h)‖₂ = {tube:e} > √(2d)·ε = {tube_limit:e}"));
    }
    let mask = r.mask(pixels);
    let (on_r, on_r_l2) = pixel_norms(h, (0..pixels).filter(|&p| mask[p]));
    let (off_r, _) = pixel_norms(h, (0..pixels).filter(|&p| !mask[p]));
    if off_r > (on_r + sigma) * (1.0 + HYPOTHESIS_SLACK) + f64::MIN_POSITIVE {
        return fail(format!("cone constraint violated: ‖h_Rᶜ‖ = {off_r:e} > ‖h_R‖ + σ = {:e}", on_r + sigma));
    }

    let norms = h.block_norms();
    let mut rest: Vec<usize> = (0..pixels).filter(|&p| !mask[p]).collect();
    rest.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    rest.truncate(4 * s);
    let r1_sq: f64 = rest.iter().map(|&p| norms[p] * norms[p]).sum();
    let head = (on_r_l2 * on_r_l2 + r1_sq).sqrt();

    let sf = s as f64;
    let sd = (d as f64).sqrt();
    let mut l2 = BoundReport::empirical(names[0], h.norm2(), sigma / sf.sqrt() + sd * epsilon);
    let mut l12 = BoundReport::empirical(names[1], h.norm(TvVariant::Isotropic), sigma + (sf * d as f64).sqrt() * epsilon);
    let explicit_rhs = 10.0 * sd * epsilon + 3.0 * sigma / sf.sqrt();
    let explicit = BoundReport::explicit(names[2], head, explicit_rhs, 1.0, 1e-12);
    for rep in [&mut l2, &mut l12] {
        rep.note = format!("certificate order {} level {:.4}", cert.order, cert.level);
    }
    Ok(vec![l2, l12, explicit])
}

/// Signal-level and gradient-level error bounds for a recovery `x̂` of `x`
/// from measurements with noise at most `ε`, keeping the best `s` gradient
/// blocks. The isotropic variant measures in `ℓ₁,₂`/`TV₂`, the anisotropic
/// one in `ℓ₁`/`TV₁`. Returns reports for the gradient `ℓ₂` error, the TV
/// error and the signal `ℓ₂` error, in that order.
pub fn check_main_bounds(x: &NdSignal, x_hat: &NdSignal, s: usize, epsilon: f64, variant: TvVariant) -> Result<Vec<BoundReport>> {
    x.require_tv_dim()?;
    if x.shape() != x_hat.shape() {
        return Err(Error::dim("x and x̂ have different shapes"));
    }
    if s == 0 || epsilon < 0.0 {
        return Err(Error::domain("need s >= 1 and epsilon >= 0"));
    }
    let (d, n) = (x.d(), x.side());
    let g = gradient(x)?;
    let (_, gs) = best_s_blocks(&g, s)?;
    let tail = g.sub(&gs)?.norm(variant);
    let residual = x.sub(x_hat)?;
    let h = gradient(&residual)?;
    let sf = s as f64;
    let sd = (d as f64).sqrt();
    let log = ((n as f64).powi(d as i32)).ln();
    let gradient_rhs = tail / sf.sqrt() + sd * epsilon;
    Ok(vec![
        BoundReport::empirical("main-gradient-l2", h.norm2(), gradient_rhs),
        BoundReport::empirical("main-tv", h.norm(variant), tail + (sf * d as f64).sqrt() * epsilon),
        BoundReport::empirical("main-signal-l2", residual.norm2(), log * gradient_rhs),
    ])
}

/// `‖v‖₂ ≤ C·(TV₁(v)/√s)·log(N^d) + ε` and `‖v‖₂ ≤ C·(TV₂(v)/√(s/d))·log(N^d) + ε`
/// for `v` with `‖A v‖₂ ≤ ε`. The constant is `(‖v‖₂ - ε)₊` over the bracket.
/// A supplied certificate for `A∘H*` must have order `≥ 2s` and level `< 1`;
/// without one the reports are marked uncertified.
pub fn check_sobolev(
    a: &LinearMeasurementOp,
    v: &NdSignal,
    s: usize,
    epsilon: f64,
    cert: Option<&RipCertificate>,
) -> Result<Vec<BoundReport>> {
    v.require_tv_dim()?;
    let names = ["sobolev-tv1", "sobolev-tv2"];
    if s == 0 || epsilon < 0.0 {
        return Err(Error::domain("need s >= 1 and epsilon >= 0"));
    }
    let fail = |why: String| Ok(names.iter().map(|n| BoundReport::hypothesis_failed(n, why.clone())).collect());
    let av = norm2(&a.apply_signal(v)?);
    let limit = epsilon.max(HYPOTHESIS_SLACK * norm2(v.data()) * operator_scale(a));
    if av > limit {
        return fail(format!("tube constraint violated: ‖A(v)‖₂ = {av:e} > ε = {epsilon:e}"));
    }
    let note = match cert {
        Some(c) if c.method == RipMethod::MonteCarlo || c.order < 2 * s || c.level >= 1.0 => {
            return fail(format!("certificate (order {}, level {}, {:?}) does not cover order {}", c.order, c.level, c.method, 2 * s));
        }
        Some(c) => format!("certified: order {} level {:.4}", c.order, c.level),
        None => "uncertified: relies on the ensemble's probabilistic guarantee".to_string(),
    };
    let (d, n) = (v.d(), v.side());
    let log = ((n as f64).powi(d as i32)).ln();
    let g = gradient(v)?;
    let excess = (v.norm2() - epsilon).max(0.0);
    let sf = s as f64;
    let mut tv1 = BoundReport::empirical(names[0], excess, g.norm(TvVariant::Anisotropic) / sf.sqrt() * log);
    let mut tv2 = BoundReport::empirical(names[1], excess, g.norm(TvVariant::Isotropic) / (sf / d as f64).sqrt() * log);
    tv1.note = note.clone();
    tv2.note = note;
    Ok(vec![tv1, tv2])
}

fn operator_scale(a: &LinearMeasurementOp) -> f64 {
    (a.rows() as f64).sqrt().max(1.0)
}

/// `|f|_BV ≤ N^{1-d/2}·TV₁(x)` for the piecewise-constant embedding
/// `f = N^{d/2} Σ x_α 1_{cell α}` of `x`. `|f|_BV` is evaluated as the limit
/// of `h⁻¹ Σ_k ‖f(· + h e_k) - f‖_{L₁}`: each pair of neighbouring cells
/// contributes a slab of width `h` and cross-section `N^{1-d}`.
pub fn check_bv_embedding(x: &NdSignal) -> Result<BoundReport> {
    x.require_tv_dim()?;
    let (d, n) = (x.d(), x.side());
    let nf = n as f64;
    let height = nf.powf(d as f64 / 2.0);
    let cross_section = nf.powi(1 - d as i32);
    let shape = x.shape();
    let mut bv = 0.0;
    for p in 0..x.len() {
        let idx = shape.unravel(p);
        for k in 0..d {
            if idx[k] + 1 < n {
                let mut next = idx.clone();
                next[k] += 1;
                let jump = (x.get(&next) - x.get(&idx)).norm();
                bv += height * jump * cross_section;
            }
        }
    }
    let rhs = nf.powf(1.0 - d as f64 / 2.0) * gradient(x)?.norm(TvVariant::Anisotropic);
    let mut rep = BoundReport::explicit("bv-embedding", bv, rhs, 1.0, 1e-12);
    if rhs == 0.0 && bv == 0.0 {
        rep.status = BoundStatus::Pass;
        rep.note = "constant signal".into();
    }
    Ok(rep)
}

/// Largest ratio of the `k`-th largest Haar block norm to `TV/(k·2^{d/2-1})`.
pub fn check_cddd_decay(x: &NdSignal, variant: TvVariant) -> Result<BoundReport> {
    let profile = block_decay_profile(x, variant)?;
    if profile.degenerate {
        return Ok(BoundReport {
            name: "haar-decay".into(),
            lhs: Some(0.0),
            rhs: Some(0.0),
            constant: None,
            explicit_constant: None,
            status: BoundStatus::Degenerate,
            note: "constant signal".into(),
        });
    }
    let worst = profile
        .entries
        .iter()
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .expect("a non-constant signal has Haar blocks");
    let mut rep = BoundReport::empirical("haar-decay", worst.norm, worst.bound);
    rep.note = format!("attained at k = {}", worst.k);
    Ok(rep)
}

/// Projects `v` onto `ker A`: `v - A*(AA*)⁻¹ A v`, solving the normal
/// equations by conjugate gradients. `AA*` must be nonsingular.
pub fn project_onto_null_space(a: &LinearMeasurementOp, v: &NdSignal) -> Result<NdSignal> {
    let rhs = a.apply_signal(v)?;
    let w = conjugate_gradient(|u, out| {
        let t = a.adjoint_vec(u);
        a.apply_into(&t, out);
    }, &rhs, 1e-14, 10 * a.rows() + 100);
    let correction = a.adjoint_vec(&w);
    let data = v.data().iter().zip(&correction).map(|(x, c)| x - c).collect();
    NdSignal::from_vec(v.d(), v.side(), data)
}

fn conjugate_gradient(op: impl Fn(&[C64], &mut [C64]), b: &[C64], tol: f64, max_iters: usize) -> Vec<C64> {
    let mut x = vec![ZERO; b.len()];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![ZERO; b.len()];
    let mut rr = dot(&r, &r).re;
    let stop = tol * tol * rr;
    for _ in 0..max_iters {
        if rr <= stop || rr == 0.0 {
            break;
        }
        op(&p, &mut ap);
        let alpha = rr / dot(&p, &ap).re;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += pi * alpha);
        r.iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= api * alpha);
        let next = dot(&r, &r).re;
        let beta = next / rr;
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + *pi * beta);
        rr = next;
    }
    x
}

/// A column sum `B₁ ⊕ … ⊕ B_d` over the derivative shapes whose dense view
/// is `Q·diag(w)` with `Q` having orthonormal columns and weights `w` drawn
/// from `[1 - spread, 1 + spread]`, so `δ ≤ (1 + spread)² - 1` at every order.
/// Returns the operator with its spectral certificate at `order`.
pub fn certified_tube_operator(
    d: usize,
    n: usize,
    spread: f64,
    order: usize,
    seed: u64,
) -> Result<(LinearMeasurementOp, RipCertificate)> {
    if !(0.0..1.0).contains(&spread) {
        return Err(Error::domain("spread must lie in [0, 1)"));
    }
    let shapes: Vec<Shape> = (0..d).map(|l| Shape::derivative(d, n, l)).collect::<Result<_>>()?;
    let cols: usize = shapes.iter().map(Shape::len).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::<f64>::from_fn(cols, cols, |_, _| rng.sample(StandardNormal));
    let q = g.qr().q();
    let weights: Vec<f64> = (0..cols).map(|_| rng.random_range(1.0 - spread..=1.0 + spread)).collect();
    let mut parts = Vec::with_capacity(d);
    let mut at = 0;
    for shape in shapes {
        let len = shape.len();
        let mut data = Vec::with_capacity(cols * len);
        for row in 0..cols {
            for c in at..at + len {
                data.push(C64::new(q[(row, c)] * weights[c], 0.0));
            }
        }
        parts.push(Arc::new(LinearMeasurementOp::from_matrix(Domain::Grid(shape), cols, data)?));
        at += len;
    }
    let op = LinearMeasurementOp::column_sum(parts)?;
    let cert = rip_constant_spectral_bound(&op, order.min(cols))?;
    let cert = RipCertificate { order, ..cert };
    Ok((op, cert))
}

/// A random instance meeting the cone and tube hypotheses.
#[derive(Clone, Debug)]
pub struct ConeTubeInstance {
    pub h: GradientField,
    pub support: BlockSupport,
    pub sigma: f64,
    pub epsilon: f64,
}

/// Draws `h` as a random field concentrated on a random `s`-pixel support
/// `R` plus a random tail, then sets `σ` and `ε` at or slightly above the
/// smallest values for which the cone and tube constraints hold, so that
/// instances sit on or near the boundary of the feasible set.
pub fn cone_tube_instance(b: &LinearMeasurementOp, d: usize, n: usize, s: usize, seed: u64) -> Result<ConeTubeInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template = GradientField::zeros(d, n)?.into_field();
    let pixels = template.pixel_count();
    let shape = template.pixel_shape();
    let mut chosen = rand::seq::index::sample(&mut rng, pixels, s).into_vec();
    chosen.sort_unstable();
    let support = BlockSupport::new(chosen, d)?;
    let mask = support.mask(pixels);
    let tail_scale = 10f64.powf(rng.random_range(-3.0..0.5));
    let tail_density = rng.random_range(0.05..1.0);
    let mut data = vec![ZERO; pixels * d];
    for p in 0..pixels {
        let idx = shape.unravel(p);
        let on = mask[p];
        if !on && !rng.random_bool(tail_density) {
            continue;
        }
        let scale = if on { 1.0 } else { tail_scale };
        for l in 0..d {
            if idx[l] + 1 < n {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = if rng.random_bool(0.5) { rng.sample(StandardNormal) } else { 0.0 };
                data[p * d + l] = C64::new(re, im) * scale;
            }
        }
    }
    let h = GradientField::from_field(MixedField::from_vec(d, n, d, data)?)?;
    let (on, _) = pixel_norms(&h, (0..pixels).filter(|&p| mask[p]));
    let (off, _) = pixel_norms(&h, (0..pixels).filter(|&p| !mask[p]));
    let slack = |rng: &mut ChaCha8Rng| if rng.random_bool(0.5) { 1.0 } else { 1.0 + rng.random_range(0.0..0.5) };
    let sigma = (off - on).max(0.0) * slack(&mut rng);
    let epsilon = norm2(&b.apply_gradient_field(&h)?) / (2.0 * d as f64).sqrt() * slack(&mut rng);
    Ok(ConeTubeInstance { h, support, sigma, epsilon })
}
