//! Numerical checks of the inequalities and constructions around quantized
//! orthonormal systems, and estimators for type and cotype constants.
//!
//! Every check returns a serializable report carrying the measured values,
//! the tolerance it was judged at and a `pass` verdict. Exact-finite spaces
//! are judged at `1e-9`; Monte Carlo spaces at `5/√N`.

mod approx;
mod clt;
mod compare;
mod constants;
mod riesz;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matcore::RngStream;
use crate::spaces::SampleSpace;
use crate::systems::SystemParams;
use crate::transforms::{CoeffFamily, VectorSpaceDesc};

pub use approx::{approximate_deltas, bessel_audit, ApproxReport, ApproxStep, BesselReport};
pub use clt::{clt_functional, CltFunctional, CltReport, CltRow};
pub use compare::{
    compare_rademacher_gaussian, compare_rademacher_gaussian_on, compare_rademacher_steinhaus,
    compare_rademacher_steinhaus_on, verify_contraction, verify_contraction_on, ContractionReport,
    GaussianComparison, SteinhausComparison, DEFAULT_C_MAX,
};
pub use constants::{
    degenerate_bound_check, estimate_constants, pisier_criterion, transpose_map, ConstantsReport,
    DegenerateReport, EstimateOptions, ExactConstants, Method, PisierReport,
};
pub use riesz::{verify_riesz, RieszReport};

/// Tolerance for identities that hold exactly on finite spaces.
pub const EXACT_TOLERANCE: f64 = 1e-9;

/// `num/den`, with `0/0` reported as 1 and flagged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: f64,
    pub zero_over_zero: bool,
}

impl Ratio {
    pub fn of(num: f64, den: f64) -> Self {
        if num == 0.0 && den == 0.0 {
            Self {
                value: 1.0,
                zero_over_zero: true,
            }
        } else {
            Self {
                value: num / den,
                zero_over_zero: false,
            }
        }
    }
}

/// Check tolerance for a space: `1e-9` exact, `5/√N` Monte Carlo.
pub fn tolerance_for(space: &SampleSpace) -> f64 {
    if space.is_exact() {
        EXACT_TOLERANCE
    } else {
        space.check_tolerance()
    }
}

/// Coefficient family with i.i.d. standard complex Gaussian coordinates on
/// the blocks at `support` and zeros elsewhere.
pub fn random_coeffs(
    params: &SystemParams,
    desc: VectorSpaceDesc,
    support: &[usize],
    rng: &mut RngStream,
) -> CoeffFamily {
    let mut a = CoeffFamily::zeros(params.clone(), desc);
    for &s in support {
        for z in a.block_mut(s) {
            *z = Complex64::new(rng.gaussian(), rng.gaussian());
        }
    }
    a
}

/// Coefficient family with i.i.d. standard real Gaussian coordinates.
pub fn random_real_coeffs(
    params: &SystemParams,
    desc: VectorSpaceDesc,
    rng: &mut RngStream,
) -> CoeffFamily {
    let mut a = CoeffFamily::zeros(params.clone(), desc);
    for s in 0..params.len() {
        for z in a.block_mut(s) {
            *z = Complex64::new(rng.gaussian(), 0.0);
        }
    }
    a
}
