//! The `ndtv` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{build_operator, measure, summaries_to_csv, summaries_to_table, Ensemble, ExperimentGrid, Measurements};
use crate::gradient::TvVariant;
use crate::ndcs::{decode_matrix, read_signal, write_signal};
use crate::operators::{
    rip_constant_exhaustive, rip_constant_montecarlo, rip_constant_spectral_bound, Domain, LinearMeasurementOp,
    OperatorDescriptor,
};
use crate::phantom::{PhantomKind, PhantomSpec};
use crate::solver::{solve_l1_haar, solve_tv, SolveOptions, SolveVariant};
use crate::tensor::{NdSignal, Shape};
use crate::verify::{check_bv_embedding, check_cddd_decay, check_main_bounds, reports_to_csv, reports_to_json, BoundStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "ndtv", version, about = "Total-variation compressed sensing for N^d signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a phantom signal.
    Gen(GenArgs),
    /// Measure a signal with a random operator, optionally adding noise.
    Measure(MeasureArgs),
    /// Recover a signal from a measurement bundle.
    Solve(SolveArgs),
    /// Evaluate the recovery bounds for a signal and its estimate.
    Verify(VerifyArgs),
    /// Estimate or certify a restricted isometry constant.
    Rip(RipArgs),
    /// Run a recovery experiment grid.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    GradientSparse,
    Cubes,
    StepEdge,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Iso,
    Aniso,
    L1haar,
}

impl From<VariantArg> for SolveVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Iso => SolveVariant::Isotropic,
            VariantArg::Aniso => SolveVariant::Anisotropic,
            VariantArg::L1haar => SolveVariant::L1Haar,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EnsembleArg {
    Gaussian,
    Bernoulli,
}

impl From<EnsembleArg> for Ensemble {
    fn from(e: EnsembleArg) -> Self {
        match e {
            EnsembleArg::Gaussian => Ensemble::Gaussian,
            EnsembleArg::Bernoulli => Ensemble::Bernoulli,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Exhaustive,
    MonteCarlo,
    SpectralBound,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "gradient-sparse")]
    kind: KindArg,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    side: usize,
    /// Gradient blocks (gradient-sparse) or number of boxes (cubes).
    #[arg(long, default_value_t = 5)]
    sparsity: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, conflicts_with_all = ["p", "q"])]
    measurements: Option<usize>,
    #[arg(long, requires = "q")]
    p: Option<usize>,
    #[arg(long, requires = "p")]
    q: Option<usize>,
    #[arg(long, value_enum, default_value = "gaussian")]
    ensemble: EnsembleArg,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// `bundle.json` written by `measure`.
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long, value_enum, default_value = "iso")]
    variant: VariantArg,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    estimate: PathBuf,
    #[arg(long)]
    sparsity: usize,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "iso")]
    variant: VariantArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RipArgs {
    /// Operator descriptor JSON.
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    operator: Option<PathBuf>,
    /// Dense matrix in the NDCS container.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    order: usize,
    #[arg(long, value_enum, default_value = "exhaustive")]
    method: MethodArg,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = crate::operators::DEFAULT_SUBMATRIX_BUDGET)]
    budget: u128,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Grid description as JSON; overrides the other grid flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, value_delimiter = ',', default_value = "32")]
    side: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "8")]
    sparsity: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    measurements: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    p: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    q: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    epsilon: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "iso")]
    variant: Vec<VariantArg>,
    #[arg(long, value_enum, default_value = "gaussian")]
    ensemble: EnsembleArg,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Reuse the same phantoms and nested measurement rows in every cell.
    #[arg(long)]
    shared_trials: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Problem bundle written by `measure` and read by `solve`. Paths are
/// relative to the bundle's directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Bundle {
    pub operator: String,
    pub y: String,
    pub epsilon: f64,
    #[serde(default)]
    pub options: Option<SolveOptions>,
}

enum Outcome {
    Ok,
    NotConverged,
    HypothesisFailed,
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_signal(path: &Path) -> Result<NdSignal> {
    read_signal(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn cmd_gen(a: &GenArgs) -> Result<Outcome> {
    let kind = match a.kind {
        KindArg::GradientSparse => PhantomKind::GradientSparseRandom { s: a.sparsity },
        KindArg::Cubes => PhantomKind::PiecewiseConstantCubes { count: a.sparsity },
        KindArg::StepEdge => PhantomKind::StepEdge,
    };
    let spec = PhantomSpec::new(kind, a.dim, a.side, a.seed);
    let x = spec.generate()?;
    out_dir(&a.out)?;
    write_signal(a.out.join("x.ndcs"), &x)?;
    write(&a.out.join("phantom.json"), serde_json::to_string_pretty(&spec)?)?;
    println!("wrote {}", a.out.join("x.ndcs").display());
    Ok(Outcome::Ok)
}

fn cmd_measure(a: &MeasureArgs) -> Result<Outcome> {
    let x = load_signal(&a.signal)?;
    let meas = match (a.measurements, a.p, a.q) {
        (Some(m), None, None) => Measurements::Plain { m },
        (None, Some(p), Some(q)) => Measurements::Composite { p, q },
        _ => return Err(Error::Config("give either --measurements or both --p and --q".into())),
    };
    if meas.count(x.d()) == 0 || matches!(meas, Measurements::Composite { p: 0, .. } | Measurements::Composite { q: 0, .. }) {
        return Err(Error::Config("measurement counts must be positive".into()));
    }
    if a.epsilon.is_nan() || a.epsilon < 0.0 {
        return Err(Error::Config("--epsilon must be >= 0".into()));
    }
    let op = build_operator(x.d(), x.side(), meas, a.ensemble.into(), a.seed)?;
    let y = measure(&op, &x, a.epsilon, a.seed.wrapping_add(0x5eed))?;
    out_dir(&a.out)?;
    write(&a.out.join("operator.json"), op.descriptor().to_json())?;
    let len = y.len();
    write_signal(a.out.join("y.ndcs"), &NdSignal::from_vec(1, len, y)?)?;
    let bundle = Bundle { operator: "operator.json".into(), y: "y.ndcs".into(), epsilon: a.epsilon, options: None };
    write(&a.out.join("bundle.json"), serde_json::to_string_pretty(&bundle)?)?;
    println!("wrote {} measurements to {}", len, a.out.display());
    Ok(Outcome::Ok)
}

fn load_operator(path: &Path) -> Result<LinearMeasurementOp> {
    let desc = OperatorDescriptor::from_json(&read_to_string(path)?)?;
    LinearMeasurementOp::from_descriptor(&desc)
}

fn cmd_solve(a: &SolveArgs) -> Result<Outcome> {
    let bundle: Bundle = serde_json::from_str(&read_to_string(&a.bundle)?)?;
    let base = a.bundle.parent().unwrap_or(Path::new("."));
    let op = load_operator(&base.join(&bundle.operator))?;
    let y = load_signal(&base.join(&bundle.y))?;
    let mut opts = bundle.options.clone().unwrap_or_default();
    opts.variant = a.variant.into();
    if let Some(t) = a.tol {
        opts.tol = t;
    }
    if let Some(m) = a.max_iters {
        opts.max_iters = m;
    }
    opts.validate()?;
    let result = match opts.variant {
        SolveVariant::L1Haar => solve_l1_haar(&op, y.data(), bundle.epsilon, &opts)?,
        _ => solve_tv(&op, y.data(), bundle.epsilon, &opts)?,
    };
    out_dir(&a.out)?;
    write_signal(a.out.join("x_hat.ndcs"), result.signal())?;
    write(&a.out.join("result.json"), result.to_json())?;
    println!(
        "iterations {} converged {} objective {:e} feasibility gap {:e}",
        result.iterations, result.converged, result.objective, result.feasibility_gap
    );
    Ok(if result.converged { Outcome::Ok } else { Outcome::NotConverged })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let x = load_signal(&a.signal)?;
    let x_hat = load_signal(&a.estimate)?;
    let tv = SolveVariant::from(a.variant).tv().unwrap_or(TvVariant::Isotropic);
    let mut reports = check_main_bounds(&x, &x_hat, a.sparsity, a.epsilon, tv)?;
    reports.push(check_bv_embedding(&x)?);
    if x.side().is_power_of_two() {
        reports.push(check_cddd_decay(&x, tv)?);
    }
    out_dir(&a.out)?;
    write(&a.out.join("reports.json"), reports_to_json(&reports))?;
    let csv = reports_to_csv(&reports);
    write(&a.out.join("reports.csv"), &csv)?;
    print!("{csv}");
    let failed = reports.iter().any(|r| matches!(r.status, BoundStatus::Fail | BoundStatus::HypothesisFailed));
    Ok(if failed { Outcome::HypothesisFailed } else { Outcome::Ok })
}

fn cmd_rip(a: &RipArgs) -> Result<Outcome> {
    let op = match (&a.operator, &a.matrix) {
        (Some(p), _) => load_operator(p)?,
        (None, Some(p)) => {
            let bytes = fs::read(p).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?;
            let m = decode_matrix(&bytes)?;
            LinearMeasurementOp::from_matrix(Domain::Grid(Shape::new(vec![m.cols])?), m.rows, m.data)?
        }
        (None, None) => return Err(Error::Config("give --operator or --matrix".into())),
    };
    let cert = match a.method {
        MethodArg::Exhaustive => rip_constant_exhaustive(&op, a.order, a.budget)?,
        MethodArg::MonteCarlo => rip_constant_montecarlo(&op, a.order, a.trials, a.seed)?,
        MethodArg::SpectralBound => rip_constant_spectral_bound(&op, a.order)?,
    };
    let json = cert.to_json();
    if let Some(out) = &a.out {
        out_dir(out)?;
        write(&out.join("certificate.json"), &json)?;
    }
    println!("{json}");
    Ok(Outcome::Ok)
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<Outcome> {
    let grid = match &a.config {
        Some(path) => serde_json::from_str::<ExperimentGrid>(&read_to_string(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        None => {
            let measurements: Vec<Measurements> = if !a.measurements.is_empty() {
                if !a.p.is_empty() || !a.q.is_empty() {
                    return Err(Error::Config("give either --measurements or --p/--q".into()));
                }
                a.measurements.iter().map(|&m| Measurements::Plain { m }).collect()
            } else if !a.p.is_empty() && a.p.len() == a.q.len() {
                a.p.iter().zip(&a.q).map(|(&p, &q)| Measurements::Composite { p, q }).collect()
            } else {
                return Err(Error::Config("give --measurements, or --p and --q lists of equal length".into()));
            };
            ExperimentGrid {
                d: a.dim,
                sides: a.side.clone(),
                sparsities: a.sparsity.clone(),
                measurements,
                epsilons: a.epsilon.clone(),
                variants: a.variant.iter().map(|&v| v.into()).collect(),
                ensemble: a.ensemble.into(),
                trials: a.trials,
                seed: a.seed,
                max_iters: a.max_iters,
                tol: a.tol,
                shared_trials: a.shared_trials,
            }
        }
    };
    let first = grid.cells().into_iter().next().ok_or_else(|| Error::Config("empty experiment grid".into()))?;
    first.validate()?;
    let cells = grid.run();
    out_dir(&a.out)?;
    write(&a.out.join("grid.json"), serde_json::to_string_pretty(&grid)?)?;
    write(&a.out.join("cells.json"), serde_json::to_string_pretty(&cells)?)?;
    let csv = summaries_to_csv(&cells);
    write(&a.out.join("cells.csv"), &csv)?;
    write(&a.out.join("cells.dat"), summaries_to_table(&cells))?;
    print!("{csv}");
    Ok(Outcome::Ok)
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Measure(a) => cmd_measure(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Rip(a) => cmd_rip(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match outcome {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::NotConverged) => {
            eprintln!("solver did not converge within the iteration budget");
            EXIT_CONVERGENCE
        }
        Ok(Outcome::HypothesisFailed) => {
            eprintln!("a bound or its hypothesis failed");
            EXIT_HYPOTHESIS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::UnsupportedDimension(_) | Error::Domain(_) => EXIT_CONFIG,
                _ => EXIT_ERROR,
            }
        }
    }
}
