//! Recovery experiments over parameter grids.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{bernoulli_ensemble, gaussian_ensemble, LinearMeasurementOp};
use crate::phantom::{PhantomKind, PhantomSpec};
use crate::solver::{solve_l1_haar, solve_tv, SolveOptions, SolveResult, SolveVariant};
use crate::tensor::{NdSignal, Shape, C64};
use crate::verify::check_main_bounds;

/// A trial counts as a success when `‖x - x̂‖₂ ≤ SUCCESS_THRESHOLD·‖x‖₂`.
pub const SUCCESS_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    Gaussian,
    Bernoulli,
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Ensemble::Gaussian),
            "bernoulli" => Ok(Ensemble::Bernoulli),
            other => Err(Error::Config(format!("unknown ensemble {other:?}"))),
        }
    }
}

impl Ensemble {
    pub fn build(self, r: usize, shape: Shape, seed: u64) -> Result<LinearMeasurementOp> {
        match self {
            Ensemble::Gaussian => gaussian_ensemble(r, shape, seed),
            Ensemble::Bernoulli => bernoulli_ensemble(r, shape, seed),
        }
    }
}

/// Number of measurements: a plain ensemble with `m` rows, or the composite
/// `A ⊕ [B₁]^0 ⊕ [B₁]_0 ⊕ …` with `p` rows in `A` and `q` in each `B_ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measurements {
    Plain { m: usize },
    Composite { p: usize, q: usize },
}

impl Measurements {
    pub fn count(self, d: usize) -> usize {
        match self {
            Measurements::Plain { m } => m,
            Measurements::Composite { p, q } => 2 * d * q + p,
        }
    }
}

/// Builds the measurement operator; `B_ℓ` uses seed `seed + 1 + ℓ`.
pub fn build_operator(d: usize, n: usize, meas: Measurements, ensemble: Ensemble, seed: u64) -> Result<LinearMeasurementOp> {
    let cube = Shape::cube(d, n)?;
    match meas {
        Measurements::Plain { m } => ensemble.build(m, cube, seed),
        Measurements::Composite { p, q } => {
            let a = Arc::new(ensemble.build(p, cube, seed)?);
            let bs = (0..d)
                .map(|l| ensemble.build(q, Shape::derivative(d, n, l)?, seed.wrapping_add(1 + l as u64)).map(Arc::new))
                .collect::<Result<Vec<_>>>()?;
            LinearMeasurementOp::build_composite(a, &bs)
        }
    }
}

/// `M x + ξ` with Gaussian `ξ` rescaled to `‖ξ‖₂ = ε` exactly (no noise when `ε = 0`).
pub fn measure(op: &LinearMeasurementOp, x: &NdSignal, epsilon: f64, seed: u64) -> Result<Vec<C64>> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::domain(format!("epsilon must be >= 0 (got {epsilon})")));
    }
    let mut y = op.apply_signal(x)?;
    if epsilon > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi: Vec<f64> = (0..y.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().zip(&xi).for_each(|(yk, v)| *yk += C64::new(v * epsilon / norm, 0.0));
    }
    Ok(y)
}

/// splitmix64, used to derive independent per-trial seeds.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut z: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        z = z.wrapping_add(p).wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d: usize,
    pub n: usize,
    pub s: usize,
    pub measurements: Measurements,
    pub epsilon: f64,
    pub ensemble: Ensemble,
    pub variant: SolveVariant,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config(format!("d must be >= 2 (got {})", self.d)));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        let counts_ok = match self.measurements {
            Measurements::Plain { m } => m > 0,
            Measurements::Composite { p, q } => p > 0 && q > 0,
        };
        if !counts_ok || self.s == 0 {
            return Err(Error::Config("measurement counts and sparsity must be positive".into()));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::Config("epsilon must be >= 0".into()));
        }
        if self.variant == SolveVariant::L1Haar && !self.n.is_power_of_two() {
            return Err(Error::Config(format!("the l1-haar variant needs N a power of two (got {})", self.n)));
        }
        Ok(())
    }

    pub fn solve_options(&self) -> SolveOptions {
        let mut o = SolveOptions::new(self.variant);
        if let Some(m) = self.max_iters {
            o.max_iters = m;
        }
        if let Some(t) = self.tol {
            o.tol = t;
        }
        o
    }
}

/// A single generated problem: phantom, operator and noisy data.
pub struct Problem {
    pub x: NdSignal,
    pub op: LinearMeasurementOp,
    pub y: Vec<C64>,
}

/// Trial `t` of cell `cell` draws the phantom, operator and noise from
/// seeds derived from `(seed, cell, t)`.
pub fn generate_problem(cfg: &ExperimentConfig, cell: u64, trial: u64) -> Result<Problem> {
    let spec = PhantomSpec::new(PhantomKind::GradientSparseRandom { s: cfg.s }, cfg.d, cfg.n, mix_seed(&[cfg.seed, cell, trial, 0]));
    let x = spec.generate()?;
    let op = build_operator(cfg.d, cfg.n, cfg.measurements, cfg.ensemble, mix_seed(&[cfg.seed, cell, trial, 1]))?;
    let y = measure(&op, &x, cfg.epsilon, mix_seed(&[cfg.seed, cell, trial, 2]))?;
    Ok(Problem { x, op, y })
}

pub fn solve_problem(p: &Problem, epsilon: f64, opts: &SolveOptions) -> Result<SolveResult> {
    match opts.variant {
        SolveVariant::L1Haar => solve_l1_haar(&p.op, &p.y, epsilon, opts),
        _ => solve_tv(&p.op, &p.y, epsilon, opts),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub relative_error: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Empirical constant of the signal-level error bound, when defined.
    pub signal_constant: Option<f64>,
}

pub fn run_trial(cfg: &ExperimentConfig, cell: u64, trial: usize) -> Result<TrialOutcome> {
    let problem = generate_problem(cfg, cell, trial as u64)?;
    let result = solve_problem(&problem, cfg.epsilon, &cfg.solve_options())?;
    let x_hat = result.signal();
    let relative_error = x_hat.sub(&problem.x)?.norm2() / problem.x.norm2();
    let tv = cfg.variant.tv().unwrap_or(crate::gradient::TvVariant::Isotropic);
    let reports = check_main_bounds(&problem.x, x_hat, cfg.s, cfg.epsilon, tv)?;
    Ok(TrialOutcome {
        trial,
        relative_error,
        converged: result.converged,
        iterations: result.iterations,
        signal_constant: reports[2].constant,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub d: usize,
    pub n: usize,
    pub s: usize,
    pub m: usize,
    pub epsilon: f64,
    pub variant: SolveVariant,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_error: f64,
    pub mean_signal_constant: Option<f64>,
    /// Trials that did not converge within the iteration budget.
    pub unconverged: usize,
    /// Trials that raised an error; their messages are kept.
    pub errors: Vec<String>,
}

fn threads() -> Option<usize> {
    std::env::var("NDTV_THREADS").ok().and_then(|v| v.parse().ok()).filter(|&n: &usize| n > 0)
}

/// Runs every trial of one cell. Trials run on a rayon pool capped by
/// `NDTV_THREADS`; results are collected in trial order.
pub fn run_cell(cfg: &ExperimentConfig, cell: u64) -> Result<CellSummary> {
    use rayon::prelude::*;
    cfg.validate()?;
    let work = || (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, cell, t)).collect::<Vec<_>>();
    let outcomes = match threads() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(summarize(cfg, outcomes))
}

fn summarize(cfg: &ExperimentConfig, outcomes: Vec<Result<TrialOutcome>>) -> CellSummary {
    let mut errors = Vec::new();
    let mut ok = Vec::new();
    for o in outcomes {
        match o {
            Ok(t) => ok.push(t),
            Err(e) => errors.push(e.to_string()),
        }
    }
    let successes = ok.iter().filter(|t| t.relative_error <= SUCCESS_THRESHOLD).count();
    let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    let errs: Vec<f64> = ok.iter().map(|t| t.relative_error).collect();
    let consts: Vec<f64> = ok.iter().filter_map(|t| t.signal_constant).collect();
    CellSummary {
        d: cfg.d,
        n: cfg.n,
        s: cfg.s,
        m: cfg.measurements.count(cfg.d),
        epsilon: cfg.epsilon,
        variant: cfg.variant,
        trials: cfg.trials,
        successes,
        success_rate: successes as f64 / cfg.trials as f64,
        mean_error: mean(&errs),
        mean_signal_constant: (!consts.is_empty()).then(|| mean(&consts)),
        unconverged: ok.iter().filter(|t| !t.converged).count(),
        errors,
    }
}

/// A grid of cells sharing `d`, ensemble and trial count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub d: usize,
    pub sides: Vec<usize>,
    pub sparsities: Vec<usize>,
    pub measurements: Vec<Measurements>,
    pub epsilons: Vec<f64>,
    pub variants: Vec<SolveVariant>,
    pub ensemble: Ensemble,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Use the same per-trial seeds in every cell. Cells then share phantoms,
    /// and their measurement rows are nested up to normalization.
    #[serde(default)]
    pub shared_trials: bool,
}

impl ExperimentGrid {
    /// Cells in row-major order over (N, s, measurements, ε, variant).
    pub fn cells(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &n in &self.sides {
            for &s in &self.sparsities {
                for &measurements in &self.measurements {
                    for &epsilon in &self.epsilons {
                        for &variant in &self.variants {
                            out.push(ExperimentConfig {
                                d: self.d,
                                n,
                                s,
                                measurements,
                                epsilon,
                                ensemble: self.ensemble,
                                variant,
                                trials: self.trials,
                                seed: self.seed,
                                max_iters: self.max_iters,
                                tol: self.tol,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Runs every cell. A cell whose configuration is invalid is reported
    /// with every trial as an error; the grid always completes.
    pub fn run(&self) -> Vec<CellSummary> {
        self.cells()
            .iter()
            .enumerate()
            .map(|(i, cfg)| {
                let key = if self.shared_trials { 0 } else { i as u64 };
                run_cell(cfg, key).unwrap_or_else(|e| {
                    let mut s = summarize(cfg, Vec::new());
                    s.errors = vec![e.to_string(); cfg.trials];
                    s
                })
            })
            .collect()
    }
}

const COLUMNS: [&str; 11] =
    ["d", "N", "s", "m", "epsilon", "variant", "trials", "successes", "success_rate", "mean_error", "mean_signal_constant"];

fn row(c: &CellSummary) -> [String; 11] {
    let variant = serde_json::to_value(c.variant).unwrap().as_str().unwrap().to_string();
    [
        c.d.to_string(),
        c.n.to_string(),
        c.s.to_string(),
        c.m.to_string(),
        format!("{:e}", c.epsilon),
        variant,
        c.trials.to_string(),
        c.successes.to_string(),
        format!("{}", c.success_rate),
        format!("{:e}", c.mean_error),
        c.mean_signal_constant.map(|v| format!("{v:e}")).unwrap_or_else(|| "nan".into()),
    ]
}

pub fn summaries_to_csv(cells: &[CellSummary]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for c in cells {
        out.push_str(&row(c).join(","));
        out.push('\n');
    }
    out
}

/// Whitespace-separated table with a `#` header line, readable by gnuplot.
pub fn summaries_to_table(cells: &[CellSummary]) -> String {
    let mut out = format!("# {}\n", COLUMNS.join(" "));
    for c in cells {
        out.push_str(&row(c).join(" "));
        out.push('\n');
    }
    out
}
