//! Hausdorff–Young bounds `‖F‖, ‖F⁻¹‖ ≤ M^{2/p−1}` for `1 ≤ p ≤ 2`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{random_coeffs, tolerance_for, Ratio};
use crate::error::{invalid, Result};
use crate::matcore::{Exponent, RngStream};
use crate::par::map_range;
use crate::systems::QSystemInstance;
use crate::transforms::{forward, inverse, lp_omega_norm, lp_sigma_norm, VectorSpaceDesc};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszReport {
    pub p: Exponent,
    pub p_conjugate: Exponent,
    /// Matrix level `k`: values in `S^p_k`, or scalars for `k = 1`.
    pub level: usize,
    pub trials: usize,
    /// `M^{2/p − 1}`.
    pub bound: f64,
    pub tolerance: f64,
    /// `max ‖F(f)‖_{ℒ^{p′}} / ‖f‖_{L^p}`.
    pub max_forward_ratio: f64,
    pub min_forward_ratio: f64,
    /// `max ‖F⁻¹(A)‖_{L^{p′}} / ‖A‖_{ℒ^p}`.
    pub max_inverse_ratio: f64,
    pub pass: bool,
}

/// Random polynomials `f = F⁻¹(A)`: even trials use every index, odd ones
/// a random subset. At level `k > 1` the coefficients are `S^p_k`-valued
/// and the image is measured in `S^{p′}_k`, which bounds the
/// completely bounded norm from below.
pub fn verify_riesz(
    sys: &QSystemInstance,
    p: Exponent,
    trials: usize,
    level: usize,
    rng: &RngStream,
) -> Result<RieszReport> {
    let m = sys
        .declared_bound()
        .ok_or_else(|| invalid!("the Riesz bound needs a uniformly bounded system"))?;
    let pf = p
        .finite()
        .filter(|&x| (1.0..=2.0).contains(&x))
        .ok_or_else(|| invalid!("p = {p} outside [1, 2]"))?;
    if trials == 0 || level == 0 {
        return Err(invalid!("trials and level must be positive"));
    }
    let pc = p.conjugate();
    let desc = if level == 1 {
        VectorSpaceDesc::Scalar
    } else {
        VectorSpaceDesc::Schatten { q: p, m: level }
    };
    let n_sigma = sys.params().len();
    let ratios: Vec<Result<(f64, f64)>> = map_range(trials, |t| {
        let mut r = rng.fork(t as u64);
        let support: Vec<usize> = if t % 2 == 0 {
            (0..n_sigma).collect()
        } else {
            let picked: Vec<usize> = (0..n_sigma).filter(|_| r.uniform() < 0.5).collect();
            if picked.is_empty() {
                alloc::vec![r.below(n_sigma)]
            } else {
                picked
            }
        };
        let a = random_coeffs(sys.params(), desc, &support, &mut r);
        let f = inverse(&a, sys)?;
        let fa = forward(&f, sys)?.with_space_desc(desc.with_exponent(pc))?;
        let fwd = Ratio::of(lp_sigma_norm(&fa, pc)?, lp_omega_norm(&f, p)).value;
        let inv = Ratio::of(
            lp_omega_norm(&f.clone().with_space_desc(desc.with_exponent(pc))?, pc),
            lp_sigma_norm(&a, p)?,
        );
        Ok((fwd, inv.value))
    });
    let ratios: Vec<(f64, f64)> = ratios.into_iter().collect::<Result<_>>()?;
    let bound = libm::pow(m, 2.0 / pf - 1.0);
    let tolerance = tolerance_for(sys.space());
    let max_forward_ratio = ratios.iter().map(|r| r.0).fold(0.0, f64::max);
    let min_forward_ratio = ratios.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let max_inverse_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let pass = max_forward_ratio.max(max_inverse_ratio) <= bound * (1.0 + tolerance);
    Ok(RieszReport {
        p,
        p_conjugate: pc,
        level,
        trials,
        bound,
        tolerance,
        max_forward_ratio,
        min_forward_ratio,
        max_inverse_ratio,
        pass,
    })
}
