//! Lower bounds for the Banach type and cotype constants of a system with
//! respect to a coefficient space `E`, the degenerate-case bound, and the
//! Pisier amplification ratio.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Ratio;
use crate::error::{invalid, resource, unsupported, Error, Result};
use crate::matcore::{kron, lq_norm, svd, ComplexMatrix, Exponent, RngStream};
use crate::systems::QSystemInstance;
use crate::transforms::{
    forward, inverse, lp_omega_norm, lp_sigma_norm, CoeffFamily, VectorSpaceDesc,
};

/// Largest explicit transform matrix (entries) the exact path factors.
const MAX_EXACT_ENTRIES: usize = 1 << 22;
/// Random restarts added after the structured starting points.
const RANDOM_RESTARTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Extreme singular values of the explicit transform matrix.
    ExactSvd,
    /// Derivative-free random search with restarts.
    StochasticAscent,
    /// Every family with `A^σ ∈ {0, e_1, …, e_m}` on scalar blocks.
    ExhaustiveSigns,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ExactSvd => "exact-svd",
            Method::StochasticAscent => "stochastic-ascent",
            Method::ExhaustiveSigns => "exhaustive-signs",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-svd" => Ok(Method::ExactSvd),
            "stochastic-ascent" => Ok(Method::StochasticAscent),
            "exhaustive-signs" => Ok(Method::ExhaustiveSigns),
            _ => Err(invalid!("unknown method {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateOptions {
    pub method: Method,
    /// Number of ratio evaluations (search methods) or enumerated families.
    pub budget: usize,
    /// Extra starting points for the ascent, e.g. witnesses found on a
    /// smaller index subset.
    pub warm_start: Vec<CoeffFamily>,
}

impl EstimateOptions {
    pub fn new(method: Method, budget: usize) -> Self {
        Self {
            method,
            budget,
            warm_start: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactConstants {
    pub k1: f64,
    pub k2: f64,
    /// Smallest singular value of the transform matrix.
    pub sigma_min: f64,
    /// `population` when the value follows from orthonormality of a random
    /// ensemble, `sampled` when it is read off the stored samples.
    pub basis: String,
    /// Largest singular value on the stored samples of a Monte Carlo space.
    pub sampled_sigma_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub system: String,
    pub space_desc: VectorSpaceDesc,
    pub sigma_subset: Vec<String>,
    pub p: Exponent,
    pub method: Method,
    pub budget: usize,
    pub evaluations: usize,
    /// `max ‖F⁻¹(A)‖_{L²_E} / ‖A‖_{ℒ²_E}` over the searched families.
    pub k1_lower: f64,
    /// `max ‖F(f)‖_{ℒ²_E} / ‖f‖_{L²_E}` over the searched polynomials.
    pub k2_lower: f64,
    pub exact: Option<ExactConstants>,
    pub k1_witness: Option<CoeffFamily>,
    pub k2_witness: Option<CoeffFamily>,
    /// Some evaluated ratio was `0/0`.
    pub zero_over_zero: bool,
}

struct Problem<'a> {
    sys: &'a QSystemInstance,
    desc: VectorSpaceDesc,
    subset: Vec<usize>,
}

impl Problem<'_> {
    fn free_len(&self) -> usize {
        let k = self.desc.coords();
        self.subset
            .iter()
            .map(|&s| self.sys.params().dim(s).pow(2) * k)
            .sum()
    }

    fn family(&self, x: &[Complex64]) -> CoeffFamily {
        let mut a = CoeffFamily::zeros(self.sys.params().clone(), self.desc);
        let mut offset = 0;
        for &s in &self.subset {
            let block = a.block_mut(s);
            block.copy_from_slice(&x[offset..offset + block.len()]);
            offset += block.len();
        }
        a
    }

    fn free(&self, a: &CoeffFamily) -> Vec<Complex64> {
        self.subset
            .iter()
            .flat_map(|&s| a.block(s).iter().copied())
            .collect()
    }

    fn type_ratio(&self, x: &[Complex64]) -> Result<Ratio> {
        let a = self.family(x);
        Ok(Ratio::of(
            lp_omega_norm(&inverse(&a, self.sys)?, Exponent::TWO),
            lp_sigma_norm(&a, Exponent::TWO)?,
        ))
    }

    fn cotype_ratio(&self, x: &[Complex64]) -> Result<Ratio> {
        let f = inverse(&self.family(x), self.sys)?;
        Ok(Ratio::of(
            lp_sigma_norm(&forward(&f, self.sys)?, Exponent::TWO)?,
            lp_omega_norm(&f, Exponent::TWO),
        ))
    }
}

struct Search {
    best: f64,
    witness: Vec<Complex64>,
    evaluations: usize,
    zero_over_zero: bool,
}

// Random perturbation, keep if better; step grows on success and shrinks
// on failure. Each start gets an equal share of the budget.
fn ascend(
    objective: &dyn Fn(&[Complex64]) -> Result<Ratio>,
    starts: Vec<Vec<Complex64>>,
    len: usize,
    budget: usize,
    rng: &mut RngStream,
) -> Result<Search> {
    let mut starts = starts;
    for _ in 0..RANDOM_RESTARTS {
        starts.push(
            (0..len)
                .map(|_| Complex64::new(rng.gaussian(), rng.gaussian()))
                .collect(),
        );
    }
    let share = (budget / starts.len()).max(1);
    let mut out = Search {
        best: f64::NEG_INFINITY,
        witness: Vec::new(),
        evaluations: 0,
        zero_over_zero: false,
    };
    let normalize = |x: &mut Vec<Complex64>| {
        let n = lq_norm(x, Exponent::TWO);
        if n > 0.0 {
            x.iter_mut().for_each(|z| *z /= n);
        }
    };
    for mut x in starts {
        if out.evaluations >= budget {
            break;
        }
        normalize(&mut x);
        let first = objective(&x)?;
        out.evaluations += 1;
        out.zero_over_zero |= first.zero_over_zero;
        let mut current = first.value;
        let mut step = 0.5;
        let scale = 1.0 / libm::sqrt(len as f64);
        for _ in 1..share {
            if out.evaluations >= budget {
                break;
            }
            let mut y: Vec<Complex64> = x
                .iter()
                .map(|z| z + Complex64::new(rng.gaussian(), rng.gaussian()) * (step * scale))
                .collect();
            normalize(&mut y);
            let r = objective(&y)?;
            out.evaluations += 1;
            out.zero_over_zero |= r.zero_over_zero;
            if r.value > current {
                current = r.value;
                x = y;
                step = (step * 1.5).min(2.0);
            } else {
                step = (step * 0.9).max(1e-4);
            }
        }
        if current > out.best {
            out.best = current;
            out.witness = x;
        }
    }
    Ok(out)
}

fn validate(
    sys: &QSystemInstance,
    desc: VectorSpaceDesc,
    subset: &[usize],
    p: Exponent,
    budget: usize,
) -> Result<()> {
    if p != Exponent::TWO {
        return Err(invalid!(
            "constants are estimated in the quadratic case p = 2, got {p}"
        ));
    }
    if budget == 0 {
        return Err(invalid!("budget must be positive"));
    }
    if subset.is_empty() {
        return Err(invalid!("the index subset is empty"));
    }
    for (i, &s) in subset.iter().enumerate() {
        if s >= sys.params().len() {
            return Err(invalid!("index position {s} out of range"));
        }
        if subset[..i].contains(&s) {
            return Err(invalid!("index position {s} repeated"));
        }
    }
    if !desc.is_hilbertian() && subset.iter().any(|&s| sys.params().dim(s) > 1) {
        return Err(unsupported!(
            "ℒ²-norms of {desc}-valued blocks with d_σ > 1 are not defined at the Banach level; restrict to scalar blocks"
        ));
    }
    Ok(())
}

/// Lower bounds for the type constant `K̃₁₂` and cotype constant `K̃₂₂` of
/// `sys` restricted to `subset`, with coefficients in `E`.
pub fn estimate_constants(
    sys: &QSystemInstance,
    desc: VectorSpaceDesc,
    subset: &[usize],
    p: Exponent,
    opts: &EstimateOptions,
    rng: &RngStream,
) -> Result<ConstantsReport> {
    validate(sys, desc, subset, p, opts.budget)?;
    let problem = Problem {
        sys,
        desc,
        subset: subset.to_vec(),
    };
    let mut report = ConstantsReport {
        system: sys.recipe().label(),
        space_desc: desc,
        sigma_subset: subset
            .iter()
            .map(|&s| sys.params().sigma_ids()[s].clone())
            .collect(),
        p,
        method: opts.method,
        budget: opts.budget,
        evaluations: 0,
        k1_lower: 0.0,
        k2_lower: 0.0,
        exact: None,
        k1_witness: None,
        k2_witness: None,
        zero_over_zero: false,
    };
    match opts.method {
        Method::ExactSvd => exact_svd(&problem, &mut report)?,
        Method::ExhaustiveSigns => exhaustive(&problem, opts.budget, &mut report)?,
        Method::StochasticAscent => stochastic(&problem, opts, rng, &mut report)?,
    }
    Ok(report)
}

// Rows are points scaled by √w, columns are the entries (σ, a, b) of the
// subset scaled by √d_σ, so ‖F⁻¹(A)‖_{L²} = ‖M x‖ with ‖x‖ = ‖A‖_{ℒ²}.
fn transform_matrix(problem: &Problem<'_>) -> Result<ComplexMatrix> {
    let sys = problem.sys;
    let cols: Vec<(usize, usize, usize)> = problem
        .subset
        .iter()
        .flat_map(|&s| {
            let d = sys.params().dim(s);
            (0..d * d).map(move |e| (s, e / d, e % d))
        })
        .collect();
    let n = sys.point_count();
    if n.saturating_mul(cols.len()) > MAX_EXACT_ENTRIES {
        return Err(resource!(
            "transform matrix {n}x{} is too large for the exact path",
            cols.len()
        ));
    }
    let weights = sys.space().weights();
    Ok(ComplexMatrix::from_fn(n, cols.len(), |w, c| {
        let (s, a, b) = cols[c];
        sys.entry(s, w, b, a) * libm::sqrt(weights[w] * sys.params().dim(s) as f64)
    }))
}

fn exact_svd(problem: &Problem<'_>, report: &mut ConstantsReport) -> Result<()> {
    if !problem.desc.is_hilbertian() {
        return Err(unsupported!(
            "exact-svd needs a Hilbertian coefficient space, got {}",
            problem.desc
        ));
    }
    // For Hilbertian E the matrix is M ⊗ I_E, whose singular values are those of M.
    let sys = problem.sys;
    let (k, sigma_min, basis, sampled, witness) = if sys.space().is_exact() {
        let m = transform_matrix(problem)?;
        let dec = svd(&m);
        let top = dec.s[0];
        let bottom = if m.rows() >= m.cols() {
            *dec.s.last().unwrap()
        } else {
            0.0
        };
        let v: Vec<Complex64> = (0..m.cols()).map(|i| dec.v.get(i, 0)).collect();
        (top, bottom, "sampled", None, Some(v))
    } else {
        // random ensembles are orthonormal in the population sense: Gram = I
        let sampled = transform_matrix(problem).ok().map(|m| svd(&m).s[0]);
        (1.0, 1.0, "population", sampled, None)
    };
    report.k1_lower = k;
    report.k2_lower = k;
    report.exact = Some(ExactConstants {
        k1: k,
        k2: k,
        sigma_min,
        basis: basis.into(),
        sampled_sigma_max: sampled,
    });
    if let Some(v) = witness {
        // undo the √d_σ column scaling and place the vector in coordinate 0 of E
        let coords = problem.desc.coords();
        let mut x = vec![Complex64::new(0.0, 0.0); problem.free_len()];
        let mut c = 0;
        for &s in &problem.subset {
            let d = sys.params().dim(s);
            for _ in 0..d * d {
                x[c * coords] = v[c] / libm::sqrt(d as f64);
                c += 1;
            }
        }
        let a = problem.family(&x);
        report.k1_witness = Some(a.clone());
        report.k2_witness = Some(a);
    }
    Ok(())
}

fn exhaustive(problem: &Problem<'_>, budget: usize, report: &mut ConstantsReport) -> Result<()> {
    let sys = problem.sys;
    if problem.subset.iter().any(|&s| sys.params().dim(s) != 1) {
        return Err(invalid!(
            "exhaustive-signs needs scalar blocks (all d_σ = 1)"
        ));
    }
    let coords = problem.desc.coords();
    let choices = coords + 1;
    let total = (0..problem.subset.len()).try_fold(1usize, |acc, _| acc.checked_mul(choices));
    let total = match total {
        Some(t) if t <= budget => t,
        _ => {
            return Err(resource!(
                "{choices}^{} candidate families exceed the budget {budget}",
                problem.subset.len()
            ))
        }
    };
    let mut best1 = (f64::NEG_INFINITY, Vec::new());
    let mut best2 = (f64::NEG_INFINITY, Vec::new());
    for code in 1..total {
        let mut x = vec![Complex64::new(0.0, 0.0); problem.free_len()];
        let mut rest = code;
        for slot in 0..problem.subset.len() {
            let choice = rest % choices;
            rest /= choices;
            if choice > 0 {
                x[slot * coords + choice - 1] = Complex64::new(1.0, 0.0);
            }
        }
        let (r1, r2) = (problem.type_ratio(&x)?, problem.cotype_ratio(&x)?);
        report.evaluations += 1;
        report.zero_over_zero |= r1.zero_over_zero || r2.zero_over_zero;
        if r1.value > best1.0 {
            best1 = (r1.value, x.clone());
        }
        if r2.value > best2.0 {
            best2 = (r2.value, x);
        }
    }
    if total == 1 {
        return Err(invalid!("nothing to enumerate"));
    }
    report.k1_lower = best1.0;
    report.k2_lower = best2.0;
    report.k1_witness = Some(problem.family(&best1.1));
    report.k2_witness = Some(problem.family(&best2.1));
    Ok(())
}

fn stochastic(
    problem: &Problem<'_>,
    opts: &EstimateOptions,
    rng: &RngStream,
    report: &mut ConstantsReport,
) -> Result<()> {
    let sys = problem.sys;
    let len = problem.free_len();
    let coords = problem.desc.coords();
    let mut starts = Vec::new();
    for w in &opts.warm_start {
        if w.params() != sys.params() || w.space_desc() != problem.desc {
            return Err(invalid!("warm start has a different shape"));
        }
        if (0..sys.params().len())
            .any(|s| !problem.subset.contains(&s) && w.block(s).iter().any(|z| z.norm() > 0.0))
        {
            return Err(invalid!("warm start is supported outside the index subset"));
        }
        starts.push(problem.free(w));
    }
    // coordinate-aligned start: entry (0,0) of the r-th block carries e_{r mod m}
    let mut aligned = vec![Complex64::new(0.0, 0.0); len];
    let mut offset = 0;
    for (r, &s) in problem.subset.iter().enumerate() {
        aligned[offset + r % coords] = Complex64::new(1.0, 0.0);
        offset += sys.params().dim(s).pow(2) * coords;
    }
    starts.push(aligned);
    // a single coordinate of a single entry: ratio 1 for any orthonormal system
    let mut single = vec![Complex64::new(0.0, 0.0); len];
    single[0] = Complex64::new(1.0, 0.0);
    starts.push(single);

    let half = (opts.budget / 2).max(1);
    let s1 = ascend(
        &|x| problem.type_ratio(x),
        starts.clone(),
        len,
        half,
        &mut rng.fork(1),
    )?;
    let s2 = ascend(
        &|x| problem.cotype_ratio(x),
        starts,
        len,
        opts.budget.saturating_sub(half).max(1),
        &mut rng.fork(2),
    )?;
    report.evaluations = s1.evaluations + s2.evaluations;
    report.zero_over_zero = s1.zero_over_zero || s2.zero_over_zero;
    report.k1_lower = s1.best;
    report.k2_lower = s2.best;
    report.k1_witness = Some(problem.family(&s1.witness));
    report.k2_witness = Some(problem.family(&s2.witness));
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateReport {
    pub space_desc: VectorSpaceDesc,
    pub p: Exponent,
    pub m_phi: f64,
    /// `Σ_σ d_σ²` over the whole system.
    pub entry_count: usize,
    /// `M_Φ (Σ d_σ²)^{1/p′}`.
    pub bound: f64,
    pub constants: ConstantsReport,
    pub pass: bool,
}

/// The finite-system bound `K ≤ M_Φ (Σ_σ d_σ²)^{1/p′}` against the
/// estimated constants. For non-Hilbertian `E` only the scalar blocks are
/// searched, while the bound keeps the whole system.
pub fn degenerate_bound_check(
    sys: &QSystemInstance,
    desc: VectorSpaceDesc,
    p: Exponent,
    budget: usize,
    rng: &RngStream,
) -> Result<DegenerateReport> {
    let m_phi = sys
        .declared_bound()
        .ok_or_else(|| invalid!("the degenerate bound needs a uniformly bounded system"))?;
    let subset: Vec<usize> = if desc.is_hilbertian() {
        (0..sys.params().len()).collect()
    } else {
        (0..sys.params().len())
            .filter(|&s| sys.params().dim(s) == 1)
            .collect()
    };
    if subset.is_empty() {
        return Err(unsupported!("no scalar blocks to search for {desc}"));
    }
    let method = if desc.is_hilbertian() {
        Method::ExactSvd
    } else {
        let fits = (0..subset.len())
            .try_fold(1usize, |acc, _| acc.checked_mul(desc.coords() + 1))
            .is_some_and(|t| t <= budget);
        if fits {
            Method::ExhaustiveSigns
        } else {
            Method::StochasticAscent
        }
    };
    let constants = estimate_constants(
        sys,
        desc,
        &subset,
        p,
        &EstimateOptions::new(method, budget),
        rng,
    )?;
    let entry_count = sys.params().entry_count();
    let bound = m_phi * libm::pow(entry_count as f64, p.conjugate().reciprocal());
    let pass = constants.k1_lower.max(constants.k2_lower) <= bound * (1.0 + 1e-6);
    Ok(DegenerateReport {
        space_desc: desc,
        p,
        m_phi,
        entry_count,
        bound,
        constants,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PisierReport {
    pub space_desc: VectorSpaceDesc,
    pub d: usize,
    /// `‖T‖` on `S²_d`.
    pub denominator: f64,
    /// `‖T ⊗ I_E‖` on `ℓ²_{d²}(E)` (exact) or a lower bound for it.
    pub numerator: f64,
    pub ratio: Ratio,
    pub exact: bool,
    pub evaluations: usize,
    /// `d² × coords` coordinates of the best `E`-valued matrix found.
    pub witness: Option<Vec<Complex64>>,
}

/// `‖T ⊗ I_E‖ / ‖T‖` for a linear map `T` on `S²_d` given as a `d²×d²`
/// matrix on row-major vectorized matrices. `E`-valued matrices are
/// normed in `ℓ²_{d²}(E)`.
pub fn pisier_criterion(
    desc: VectorSpaceDesc,
    d: usize,
    t: &ComplexMatrix,
    budget: usize,
    rng: &RngStream,
) -> Result<PisierReport> {
    let n = d * d;
    if d == 0 || t.rows() != n || t.cols() != n {
        return Err(invalid!("T must be a {n}x{n} matrix"));
    }
    let dec = svd(t);
    let denominator = dec.s[0];
    let coords = desc.coords();
    if desc.is_hilbertian() {
        let numerator = svd(&kron(t, &ComplexMatrix::identity(coords))?).s[0];
        return Ok(PisierReport {
            space_desc: desc,
            d,
            denominator,
            numerator,
            ratio: Ratio::of(numerator, denominator),
            exact: true,
            evaluations: 0,
            witness: None,
        });
    }
    if budget == 0 {
        return Err(invalid!("budget must be positive"));
    }
    // x is point-major: coordinate c of matrix entry κ at κ·coords + c
    let apply_norm = |x: &[Complex64]| -> Ratio {
        let mut num = Vec::with_capacity(n);
        let mut den = Vec::with_capacity(n);
        for k in 0..n {
            let y: Vec<Complex64> = (0..coords)
                .map(|c| (0..n).map(|l| t.get(k, l) * x[l * coords + c]).sum())
                .collect();
            num.push(desc.norm(&y));
            den.push(desc.norm(&x[k * coords..(k + 1) * coords]));
        }
        Ratio::of(lq_norm_real(&num), lq_norm_real(&den))
    };
    // v ⊗ e_c with v the top right singular vector reaches ‖T‖ exactly
    let starts: Vec<Vec<Complex64>> = (0..coords)
        .map(|c| {
            let mut x = vec![Complex64::new(0.0, 0.0); n * coords];
            for k in 0..n {
                x[k * coords + c] = dec.v.get(k, 0);
            }
            x
        })
        .collect();
    let search = ascend(
        &|x| Ok(apply_norm(x)),
        starts,
        n * coords,
        budget,
        &mut rng.clone(),
    )?;
    Ok(PisierReport {
        space_desc: desc,
        d,
        denominator,
        numerator: search.best * denominator,
        ratio: Ratio::of(search.best * denominator, denominator),
        exact: false,
        evaluations: search.evaluations,
        witness: Some(search.witness),
    })
}

fn lq_norm_real(xs: &[f64]) -> f64 {
    libm::sqrt(xs.iter().map(|x| x * x).sum())
}

/// `d²×d²` matrix of the transpose map `X ↦ Xᵀ` on row-major vectors.
pub fn transpose_map(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, j) = (r / d, r % d);
        Complex64::new(if c == j * d + i { 1.0 } else { 0.0 }, 0.0)
    })
}
