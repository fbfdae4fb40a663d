//! Central limit theorem for normalized sums of independent quantized
//! Rademacher matrices.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matcore::{
    gaussian_matrix, haar_orthogonal, schatten_norm, CompensatedSum, ComplexMatrix, Exponent,
    RngStream,
};
use crate::par::map_range;
use crate::systems::MIN_MONTE_CARLO_SAMPLES;

/// Polynomially bounded test functionals, summed over the indices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CltFunctional {
    /// `‖X‖^power_{S^q}`.
    SchattenPower { q: Exponent, power: u32 },
    /// `(X_ij)^power` (entries are real).
    EntryPower { i: usize, j: usize, power: u32 },
}

impl CltFunctional {
    fn eval(&self, x: &ComplexMatrix) -> Result<f64> {
        Ok(match *self {
            CltFunctional::SchattenPower { q, power } => {
                libm::pow(schatten_norm(x, q)?, power as f64)
            }
            CltFunctional::EntryPower { i, j, power } => {
                if i >= x.rows() || j >= x.cols() {
                    return Err(invalid!(
                        "entry ({},{}) outside a {}x{} block",
                        i + 1,
                        j + 1,
                        x.rows(),
                        x.cols()
                    ));
                }
                libm::pow(x.get(i, j).re, power as f64)
            }
        })
    }
}

impl fmt::Display for CltFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CltFunctional::SchattenPower { q, power: 2 } if q == Exponent::TWO => write!(f, "s2sq"),
            CltFunctional::SchattenPower { q, power } => write!(f, "s{q}p{power}"),
            CltFunctional::EntryPower { i, j, power: 2 } => write!(f, "e{}{}sq", i + 1, j + 1),
            CltFunctional::EntryPower { i, j, power } => write!(f, "e{}{}p{power}", i + 1, j + 1),
        }
    }
}

/// `s2sq`, `s<q>p<power>` (e.g. `s4p4`, `sinfp2`), `e<i><j>sq` and
/// `e<i><j>p<power>` with one-based single-digit `i`, `j`.
impl FromStr for CltFunctional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid!("unknown functional {s:?}");
        let (body, power) = if let Some(b) = s.strip_suffix("sq") {
            (b, 2)
        } else {
            let (b, p) = s.rsplit_once('p').ok_or_else(bad)?;
            (b, p.parse::<u32>().map_err(|_| bad())?)
        };
        if power == 0 {
            return Err(bad());
        }
        if let Some(q) = body.strip_prefix('s') {
            return Ok(CltFunctional::SchattenPower {
                q: q.parse().map_err(|_| bad())?,
                power,
            });
        }
        if let Some(ij) = body.strip_prefix('e') {
            let digits: Vec<usize> = ij
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as usize))
                .collect::<Option<_>>()
                .ok_or_else(bad)?;
            if let [i, j] = digits[..] {
                if i >= 1 && j >= 1 {
                    return Ok(CltFunctional::EntryPower {
                        i: i - 1,
                        j: j - 1,
                        power,
                    });
                }
            }
        }
        Err(bad())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub m: usize,
    /// `T_m(h)`.
    pub estimate: f64,
    pub stderr: f64,
    /// `T(h)` for the Gaussian limit.
    pub reference: f64,
    pub reference_stderr: f64,
}

impl CltRow {
    pub fn difference(&self) -> f64 {
        (self.estimate - self.reference).abs()
    }

    pub fn combined_stderr(&self) -> f64 {
        libm::sqrt(self.stderr * self.stderr + self.reference_stderr * self.reference_stderr)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub dims: Vec<usize>,
    pub functional: String,
    pub schedule: Vec<usize>,
    pub samples: usize,
    pub rows: Vec<CltRow>,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = CompensatedSum::of(xs.iter().copied()) / n;
    let var = CompensatedSum::of(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    (mean, libm::sqrt(var / n))
}

/// Estimates `T_m(h) = E h(ρ(m))` with `ρ^σ(m) = m^{−1/2} Σ_{k≤m} ρ^{σ,k}`
/// for independent Haar orthogonal `ρ^{σ,k}`, and the Gaussian reference
/// `T(h) = E h(γ)` with `γ^σ` of i.i.d. `N(0, 1/d_σ)` entries.
///
/// The reference uses `rng.fork(0)` and schedule entry `t` uses
/// `rng.fork(t + 1)`, so every row is independent of the others.
pub fn clt_functional(
    dims: &[usize],
    h: CltFunctional,
    schedule: &[usize],
    samples: usize,
    rng: &RngStream,
) -> Result<CltReport> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(invalid!("dims must be nonempty and positive"));
    }
    if schedule.is_empty() || schedule[0] == 0 || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid!(
            "schedule must be strictly increasing positive integers"
        ));
    }
    if samples < MIN_MONTE_CARLO_SAMPLES {
        return Err(invalid!(
            "sample_count {samples} below the minimum {MIN_MONTE_CARLO_SAMPLES}"
        ));
    }
    let sample = |stream: RngStream,
                  draw: &(dyn Fn(usize, &mut RngStream) -> Result<ComplexMatrix> + Sync)|
     -> Result<(f64, f64)> {
        let values: Vec<Result<f64>> = map_range(samples, |i| {
            let mut r = stream.fork(i as u64);
            let mut total = 0.0;
            for &d in dims {
                total += h.eval(&draw(d, &mut r)?)?;
            }
            Ok(total)
        });
        let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
        Ok(mean_and_stderr(&values))
    };
    let (reference, reference_stderr) = sample(rng.fork(0), &|d, r| gaussian_matrix(d, r))?;
    let mut rows = Vec::with_capacity(schedule.len());
    for (t, &m) in schedule.iter().enumerate() {
        let scale = num_complex::Complex64::new(1.0 / libm::sqrt(m as f64), 0.0);
        let (estimate, stderr) = sample(rng.fork(t as u64 + 1), &|d, r| {
            let mut acc = haar_orthogonal(d, r)?;
            for _ in 1..m {
                acc = acc.add(&haar_orthogonal(d, r)?)?;
            }
            Ok(acc.scale(scale))
        })?;
        rows.push(CltRow {
            m,
            estimate,
            stderr,
            reference,
            reference_stderr,
        });
    }
    Ok(CltReport {
        dims: dims.to_vec(),
        functional: format!("{h}"),
        schedule: schedule.to_vec(),
        samples,
        rows,
    })
}
