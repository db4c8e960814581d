use nalgebra::{ComplexField, DMatrix};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::C64;

use super::LinearMeasurementOp;

/// Default cap on the number of supports the exhaustive search may visit.
pub const DEFAULT_SUBMATRIX_BUDGET: u128 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RipMethod {
    /// Exact: every support of size `s`.
    Exhaustive,
    /// Lower bound: maximum over sampled supports.
    MonteCarlo,
    /// Upper bound valid for the given order, from the whole Gram matrix.
    SpectralBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipCertificate {
    pub order: usize,
    pub level: f64,
    pub method: RipMethod,
    pub supports_examined: u64,
}

impl RipCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

struct Gram {
    n: usize,
    real: Option<Vec<f64>>,
    complex: Vec<C64>,
}

impl Gram {
    fn of(op: &LinearMeasurementOp) -> Gram {
        let m = op.dense_view();
        let n = m.cols;
        let mut g = vec![C64::new(0.0, 0.0); n * n];
        for row in m.data.chunks_exact(n) {
            for i in 0..n {
                let ai = row[i].conj();
                if ai == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in i..n {
                    g[i * n + j] += ai * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[i * n + j] = g[j * n + i].conj();
            }
        }
        let real = g.iter().all(|v| v.im == 0.0).then(|| g.iter().map(|v| v.re).collect());
        Gram { n, real, complex: g }
    }

    fn diag(&self, i: usize) -> f64 {
        self.complex[i * self.n + i].re
    }

    fn at(&self, i: usize, j: usize) -> C64 {
        self.complex[i * self.n + j]
    }

    /// `max |λ - 1|` over the eigenvalues of the principal submatrix on `t`.
    fn deviation(&self, t: &[usize]) -> f64 {
        match t.len() {
            1 => (self.diag(t[0]) - 1.0).abs(),
            2 => {
                let (a, b) = (self.diag(t[0]), self.diag(t[1]));
                let c = self.at(t[0], t[1]).norm();
                let mid = 0.5 * (a + b);
                let rad = (0.25 * (a - b) * (a - b) + c * c).sqrt();
                (mid + rad - 1.0).abs().max((mid - rad - 1.0).abs())
            }
            s => match &self.real {
                Some(g) => deviation_of(DMatrix::from_fn(s, s, |i, j| g[t[i] * self.n + t[j]])),
                None => deviation_of(DMatrix::from_fn(s, s, |i, j| self.at(t[i], t[j]))),
            },
        }
    }
}

fn deviation_of<T: ComplexField<RealField = f64>>(m: DMatrix<T>) -> f64 {
    m.symmetric_eigenvalues().iter().fold(0.0f64, |acc, &l| acc.max((l - 1.0).abs()))
}

fn check_order(op: &LinearMeasurementOp, s: usize) -> Result<usize> {
    let n = op.input().len();
    if s == 0 || s > n {
        return Err(Error::domain(format!("RIP order must lie in 1..={n}, got {s}")));
    }
    Ok(n)
}

/// Exact `δ_s` over every support, refusing when there are more than
/// `budget` supports.
pub fn rip_constant_exhaustive(op: &LinearMeasurementOp, s: usize, budget: u128) -> Result<RipCertificate> {
    let n = check_order(op, s)?;
    let required = binomial(n, s).unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let gram = Gram::of(op);
    let mut t: Vec<usize> = (0..s).collect();
    let mut level = 0.0f64;
    let mut examined = 0u64;
    loop {
        level = level.max(gram.deviation(&t));
        examined += 1;
        // next combination in lexicographic order
        let mut i = s;
        while i > 0 && t[i - 1] == n - s + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        t[i - 1] += 1;
        for j in i..s {
            t[j] = t[j - 1] + 1;
        }
    }
    Ok(RipCertificate { order: s, level, method: RipMethod::Exhaustive, supports_examined: examined })
}

/// Maximum deviation over `trials` uniformly sampled supports. Trial `t`
/// draws its support from stream `t` of the seeded generator.
pub fn rip_constant_montecarlo(op: &LinearMeasurementOp, s: usize, trials: usize, seed: u64) -> Result<RipCertificate> {
    let n = check_order(op, s)?;
    if trials == 0 {
        return Err(Error::domain("Monte-Carlo RIP needs at least one trial"));
    }
    let gram = Gram::of(op);
    let mut level = 0.0f64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let mut t = sample(&mut rng, n, s).into_vec();
        t.sort_unstable();
        level = level.max(gram.deviation(&t));
    }
    Ok(RipCertificate { order: s, level, method: RipMethod::MonteCarlo, supports_examined: trials as u64 })
}

/// Upper bound on `δ_s`: the smaller of the whole-Gram spectral spread
/// (by interlacing) and the Gershgorin bound `max|G_ii - 1| + (s-1) max|G_ij|`.
pub fn rip_constant_spectral_bound(op: &LinearMeasurementOp, s: usize) -> Result<RipCertificate> {
    let n = check_order(op, s)?;
    let gram = Gram::of(op);
    let eig = match &gram.real {
        Some(g) => DMatrix::from_row_slice(n, n, g).symmetric_eigenvalues(),
        None => DMatrix::from_row_slice(n, n, &gram.complex).symmetric_eigenvalues(),
    };
    let (lo, hi) = eig.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| (a.min(l), b.max(l)));
    let spectral = (hi - 1.0).max(1.0 - lo).max(0.0);
    let mut diag = 0.0f64;
    let mut off = 0.0f64;
    for i in 0..n {
        diag = diag.max((gram.diag(i) - 1.0).abs());
        for j in i + 1..n {
            off = off.max(gram.at(i, j).norm());
        }
    }
    let gershgorin = diag + (s - 1) as f64 * off;
    Ok(RipCertificate {
        order: s,
        level: spectral.min(gershgorin),
        method: RipMethod::SpectralBound,
        supports_examined: 0,
    })
}
