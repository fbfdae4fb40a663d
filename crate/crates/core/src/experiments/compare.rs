//! Comparisons between random quantized systems: the contraction
//! principle, Rademacher against Steinhaus, and Rademacher against
//! Gaussian.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{tolerance_for, Ratio};
use crate::error::{invalid, Result};
use crate::matcore::{schatten_norm, ComplexMatrix, Exponent, RngStream};
use crate::systems::{build_gaussian, build_rademacher, build_steinhaus, QSystemInstance};
use crate::transforms::{inverse, lp_omega_norm, lp_sigma_norm, CoeffFamily};

/// Default constant in the Rademacher/Gaussian comparison.
pub const DEFAULT_C_MAX: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub q: Exponent,
    /// `‖Σ d_σ tr(A^σ ρ^σ D^σ)‖_{L^q_E}`.
    pub lhs: f64,
    /// `‖Σ d_σ tr(A^σ ρ^σ)‖_{L^q_E}`.
    pub rhs: f64,
    /// `sup_σ ‖D^σ‖_{S^∞}`.
    pub sup_d: f64,
    pub tolerance: f64,
    /// Population values of both sides at `q = 2` for Hilbertian `E`.
    pub exact: Option<(f64, f64)>,
    pub pass: bool,
}

fn check_q(q: Exponent) -> Result<()> {
    if q.is_infinite() {
        return Err(invalid!("q must be finite"));
    }
    Ok(())
}

fn check_system(sys: &QSystemInstance, a: &CoeffFamily) -> Result<()> {
    if sys.params() != a.params() {
        return Err(invalid!("coefficients and system have different indices"));
    }
    Ok(())
}

// (DA)^σ_ab = Σ_e D^σ_ae A^σ_eb, coordinatewise in E
fn left_multiply(a: &CoeffFamily, d: &[ComplexMatrix]) -> Result<CoeffFamily> {
    if d.len() != a.params().len() {
        return Err(invalid!(
            "{} multipliers for {} indices",
            d.len(),
            a.params().len()
        ));
    }
    let mut out = CoeffFamily::zeros(a.params().clone(), a.space_desc());
    let k = a.space_desc().coords();
    for (s, ds) in d.iter().enumerate() {
        let n = a.params().dim(s);
        if ds.rows() != n || ds.cols() != n {
            return Err(invalid!("multiplier {s} is not {n}x{n}"));
        }
        for x in 0..n {
            for y in 0..n {
                let mut acc: Vec<Complex64> = alloc::vec![Complex64::new(0.0, 0.0); k];
                for e in 0..n {
                    let w = ds.get(x, e);
                    for (slot, z) in acc.iter_mut().zip(a.entry(s, e, y)) {
                        *slot += w * z;
                    }
                }
                out.entry_mut(s, x, y).copy_from_slice(&acc);
            }
        }
    }
    Ok(out)
}

/// Contraction principle on a given Rademacher ensemble.
pub fn verify_contraction_on(
    rademacher: &QSystemInstance,
    a: &CoeffFamily,
    d: &[ComplexMatrix],
    q: Exponent,
) -> Result<ContractionReport> {
    check_q(q)?;
    check_system(rademacher, a)?;
    let da = left_multiply(a, d)?;
    let lhs = lp_omega_norm(&inverse(&da, rademacher)?, q);
    let rhs = lp_omega_norm(&inverse(a, rademacher)?, q);
    let sup_d = d
        .iter()
        .map(|m| schatten_norm(m, Exponent::Infinity))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let exact = if q == Exponent::TWO && a.space_desc().is_hilbertian() {
        Some((
            lp_sigma_norm(&da, Exponent::TWO)?,
            lp_sigma_norm(a, Exponent::TWO)?,
        ))
    } else {
        None
    };
    let tolerance = tolerance_for(rademacher.space());
    let pass = lhs <= sup_d * rhs * (1.0 + tolerance);
    Ok(ContractionReport {
        q,
        lhs,
        rhs,
        sup_d,
        tolerance,
        exact,
        pass,
    })
}

/// Contraction principle on a fresh Rademacher ensemble of `samples` points.
pub fn verify_contraction(
    a: &CoeffFamily,
    d: &[ComplexMatrix],
    q: Exponent,
    samples: usize,
    rng: &RngStream,
) -> Result<ContractionReport> {
    let sys = build_rademacher(a.params(), samples, rng)?;
    verify_contraction_on(&sys, a, d, q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinhausComparison {
    pub q: Exponent,
    pub rademacher_norm: f64,
    pub steinhaus_norm: f64,
    /// Steinhaus over Rademacher.
    pub ratio: Ratio,
    pub tolerance: f64,
    pub pass: bool,
}

/// `½‖F_R⁻¹(A)‖ ≤ ‖F_S⁻¹(A)‖ ≤ 2‖F_R⁻¹(A)‖` in `L^q_E` on given ensembles.
pub fn compare_rademacher_steinhaus_on(
    rademacher: &QSystemInstance,
    steinhaus: &QSystemInstance,
    a: &CoeffFamily,
    q: Exponent,
) -> Result<SteinhausComparison> {
    check_q(q)?;
    check_system(rademacher, a)?;
    check_system(steinhaus, a)?;
    if !a.space_desc().is_hilbertian() {
        return Err(invalid!(
            "the Steinhaus comparison takes scalar or Hilbertian coefficients"
        ));
    }
    let rademacher_norm = lp_omega_norm(&inverse(a, rademacher)?, q);
    let steinhaus_norm = lp_omega_norm(&inverse(a, steinhaus)?, q);
    let ratio = Ratio::of(steinhaus_norm, rademacher_norm);
    let tolerance = tolerance_for(rademacher.space()).max(tolerance_for(steinhaus.space()));
    let pass = (0.5 * (1.0 - tolerance)..=2.0 * (1.0 + tolerance)).contains(&ratio.value);
    Ok(SteinhausComparison {
        q,
        rademacher_norm,
        steinhaus_norm,
        ratio,
        tolerance,
        pass,
    })
}

/// As [`compare_rademacher_steinhaus_on`] with fresh ensembles drawn from
/// `rng.fork(0)` and `rng.fork(1)`.
pub fn compare_rademacher_steinhaus(
    a: &CoeffFamily,
    q: Exponent,
    samples: usize,
    rng: &RngStream,
) -> Result<SteinhausComparison> {
    let r = build_rademacher(a.params(), samples, &rng.fork(0))?;
    let s = build_steinhaus(a.params(), samples, &rng.fork(1))?;
    compare_rademacher_steinhaus_on(&r, &s, a, q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianComparison {
    /// `∫ ‖Σ d_σ tr(A^σ ρ^σ)‖²_B dμ`.
    pub rademacher_sq: f64,
    /// `∫ ‖Σ d_σ tr(A^σ γ^σ)‖²_B dμ`.
    pub gaussian_sq: f64,
    pub ratio: Ratio,
    pub c_max: f64,
    pub tolerance: f64,
    /// For Hilbertian `B` both sides equal `‖A‖²_{ℒ²_B}` by orthonormality.
    pub exact_ratio: Option<f64>,
    pub pass: bool,
}

/// Rademacher side over Gaussian side of squared `L²_B` norms, judged
/// against `c_max`.
pub fn compare_rademacher_gaussian_on(
    rademacher: &QSystemInstance,
    gaussian: &QSystemInstance,
    a: &CoeffFamily,
    c_max: f64,
) -> Result<GaussianComparison> {
    check_system(rademacher, a)?;
    check_system(gaussian, a)?;
    if !(c_max > 0.0) {
        return Err(invalid!("c_max must be positive"));
    }
    let rademacher_sq = libm::pow(lp_omega_norm(&inverse(a, rademacher)?, Exponent::TWO), 2.0);
    let gaussian_sq = libm::pow(lp_omega_norm(&inverse(a, gaussian)?, Exponent::TWO), 2.0);
    let ratio = Ratio::of(rademacher_sq, gaussian_sq);
    let exact_ratio = if a.space_desc().is_hilbertian() {
        // both ensembles are orthonormal: each side is Σ d_σ ‖A^σ‖²_{S²(B)}
        let r = libm::pow(lp_sigma_norm(a, Exponent::TWO)?, 2.0);
        let g = libm::pow(lp_sigma_norm(a, Exponent::TWO)?, 2.0);
        Some(Ratio::of(r, g).value)
    } else {
        None
    };
    let tolerance = tolerance_for(rademacher.space()).max(tolerance_for(gaussian.space()));
    let pass = ratio.value <= c_max * (1.0 + tolerance);
    Ok(GaussianComparison {
        rademacher_sq,
        gaussian_sq,
        ratio,
        c_max,
        tolerance,
        exact_ratio,
        pass,
    })
}

/// As [`compare_rademacher_gaussian_on`] with fresh ensembles drawn from
/// `rng.fork(0)` and `rng.fork(1)`.
pub fn compare_rademacher_gaussian(
    a: &CoeffFamily,
    c_max: f64,
    samples: usize,
    rng: &RngStream,
) -> Result<GaussianComparison> {
    let r = build_rademacher(a.params(), samples, &rng.fork(0))?;
    let g = build_gaussian(a.params(), samples, &rng.fork(1))?;
    compare_rademacher_gaussian_on(&r, &g, a, c_max)
}
