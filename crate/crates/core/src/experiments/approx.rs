//! Construction of polynomials with pairwise disjoint spectra that
//! approximate a subsequence of the dyadic system `δ_k`, and the Bessel
//! audit that drives it.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, resource, Result};
use crate::matcore::{CompensatedSum, Exponent};
use crate::spaces::{dyadic_delta_on, SampleSpace};
use crate::systems::QSystemInstance;
use crate::transforms::{forward, inverse, lp_omega_norm, CoeffFamily, SampledVectorFunction};

/// Coefficients at or below this modulus are treated as zero.
const ZERO_CUTOFF: f64 = 1e-13;
/// Slack on the Bessel audit.
const BESSEL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxStep {
    pub n: usize,
    pub eps: f64,
    pub k: u32,
    /// Tail of `δ_k` on the indices used by earlier steps, in `L²` norm.
    pub tail: f64,
    pub coeffs: CoeffFamily,
    /// Index positions where `coeffs` is nonzero.
    pub support: Vec<usize>,
    /// `‖f_n − δ_{k_n}‖_{L²}`, recomputed from the synthesized function.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub system: String,
    pub levels: u32,
    pub steps: Vec<ApproxStep>,
    pub supports_disjoint: bool,
    pub errors_within: bool,
    pub pass: bool,
}

fn delta_coeffs(sys: &QSystemInstance, space: &Arc<SampleSpace>, k: u32) -> Result<CoeffFamily> {
    forward(
        &SampledVectorFunction::from_scalar(&dyadic_delta_on(space, k)?),
        sys,
    )
}

// d_σ ‖A^σ‖²_F, the share of ‖f‖²_{L²} carried by block σ.
fn block_energy(a: &CoeffFamily, sigma: usize) -> f64 {
    a.params().dim(sigma) as f64 * CompensatedSum::of(a.block(sigma).iter().map(|z| z.norm_sqr()))
}

fn support_of(a: &CoeffFamily) -> Vec<usize> {
    (0..a.params().len())
        .filter(|&s| a.block(s).iter().any(|z| *z != Complex64::new(0.0, 0.0)))
        .collect()
}

/// Builds `f_1, f_2, …` with `‖f_n − δ_{k_n}‖_{L²} < ε_n`, strictly
/// increasing `k_n` and pairwise disjoint coefficient supports. Each step
/// spends `ε_n/3` on the tail over earlier supports and `ε_n/3` on the
/// truncation of `δ_{k_n}`.
pub fn approximate_deltas(sys: &QSystemInstance, eps: &[f64]) -> Result<ApproxReport> {
    if !sys.is_complete() {
        return Err(invalid!("system not complete"));
    }
    if eps.is_empty() || eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(invalid!("tolerances must be positive and finite"));
    }
    let space = sys.space().clone();
    let levels = space
        .dyadic_levels()
        .ok_or_else(|| invalid!("the sample space is not a dyadic grid"))?;
    let params = sys.params();
    let mut used = alloc::vec![false; params.len()];
    let mut steps: Vec<ApproxStep> = Vec::new();
    let mut last_k = 0u32;
    for (idx, &e) in eps.iter().enumerate() {
        let budget = e / 3.0;
        // smallest k past the previous one whose tail on the used blocks is small
        let mut k = last_k + 1;
        let (k, delta, tail) = loop {
            if k > levels {
                return Err(resource!(
                    "grid of depth {levels} cannot resolve δ_{k} required at step {}",
                    idx + 1
                ));
            }
            let delta = delta_coeffs(sys, &space, k)?;
            let tail = CompensatedSum::of(
                (0..params.len())
                    .filter(|&s| used[s])
                    .map(|s| block_energy(&delta, s)),
            );
            if tail < budget * budget {
                break (k, delta, libm::sqrt(tail));
            }
            k += 1;
        };
        // g_n: largest blocks of δ_k until the remaining energy is below budget²
        let mut order: Vec<(usize, f64)> = (0..params.len())
            .map(|s| (s, block_energy(&delta, s)))
            .collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let total = CompensatedSum::of(order.iter().map(|x| x.1));
        let mut captured = CompensatedSum::default();
        let mut keep = alloc::vec![false; params.len()];
        for &(s, energy) in &order {
            if total - captured.value() < budget * budget {
                break;
            }
            keep[s] = true;
            captured.add(energy);
        }
        // f_n: drop the blocks already spent and the numerically zero entries
        let mut f = delta.masked(|s| keep[s] && !used[s]);
        for s in 0..params.len() {
            for z in f.block_mut(s) {
                if z.norm() <= ZERO_CUTOFF {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
        }
        let support = support_of(&f);
        let residual = inverse(&f, sys)?;
        let target = SampledVectorFunction::from_scalar(&dyadic_delta_on(&space, k)?);
        let diff: Vec<Complex64> = residual
            .values()
            .iter()
            .zip(target.values())
            .map(|(a, b)| a - b)
            .collect();
        let error = lp_omega_norm(
            &SampledVectorFunction::new(space.clone(), residual.space_desc(), diff)?,
            Exponent::TWO,
        );
        for &s in &support {
            used[s] = true;
        }
        last_k = k;
        steps.push(ApproxStep {
            n: idx + 1,
            eps: e,
            k,
            tail,
            coeffs: f,
            support,
            error,
        });
    }
    let supports_disjoint = steps.iter().enumerate().all(|(i, a)| {
        steps[i + 1..]
            .iter()
            .all(|b| a.support.iter().all(|s| !b.support.contains(s)))
    });
    let errors_within = steps.iter().all(|s| s.error < s.eps);
    Ok(ApproxReport {
        system: sys.recipe().label(),
        levels,
        pass: supports_disjoint && errors_within,
        steps,
        supports_disjoint,
        errors_within,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselReport {
    pub levels: u32,
    pub entries_checked: usize,
    /// `max_{σ,i,j} (Σ_k |F(δ_k)^σ_ij|² − 1/d_σ)`.
    pub max_excess: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Bessel inequality `Σ_k |F(δ_k)^σ_ij|² ≤ 1/d_σ` over every `k` the grid
/// resolves.
pub fn bessel_audit(sys: &QSystemInstance) -> Result<BesselReport> {
    let space = sys.space().clone();
    let levels = space
        .dyadic_levels()
        .ok_or_else(|| invalid!("the sample space is not a dyadic grid"))?;
    let params = sys.params();
    let deltas: Vec<CoeffFamily> = (1..=levels)
        .map(|k| delta_coeffs(sys, &space, k))
        .collect::<Result<_>>()?;
    let mut max_excess = f64::NEG_INFINITY;
    let mut entries = 0;
    for s in 0..params.len() {
        let d = params.dim(s);
        for e in 0..d * d {
            let sum = CompensatedSum::of(deltas.iter().map(|a| a.block(s)[e].norm_sqr()));
            max_excess = max_excess.max(sum - 1.0 / d as f64);
            entries += 1;
        }
    }
    Ok(BesselReport {
        levels,
        entries_checked: entries,
        max_excess,
        tolerance: BESSEL_TOLERANCE,
        pass: max_excess <= BESSEL_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{
        build_blocked_scalar, build_rademacher, complete_dims, BlockBase, SystemParams,
    };

    fn blocked(base: BlockBase, dims: &[usize], levels: u32) -> QSystemInstance {
        let (dims, levels) = complete_dims(dims, Some(levels)).unwrap();
        build_blocked_scalar(base, &SystemParams::from_dims(&dims).unwrap(), levels).unwrap()
    }

    #[test]
    fn walsh_reproduces_deltas_exactly() {
        let sys = blocked(BlockBase::Walsh, &[1, 1, 2], 6);
        let r = approximate_deltas(&sys, &[0.5, 0.5, 0.5]).unwrap();
        assert!(r.pass);
        // δ_2 and δ_3 share the 2×2 block, so the third step moves on to δ_4
        let ks: Vec<u32> = r.steps.iter().map(|s| s.k).collect();
        assert_eq!(ks, [1, 2, 4]);
        assert!(r.steps.iter().all(|s| s.error < 1e-12));
    }

    #[test]
    fn trig_schedule_meets_tolerances() {
        let mut dims = alloc::vec![1];
        dims.extend(core::iter::repeat(2).take(63));
        dims.extend([1, 1, 1]);
        let sys = blocked(BlockBase::Trig, &dims, 8);
        let r = approximate_deltas(&sys, &[0.5, 0.25, 0.125]).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.steps.windows(2).all(|w| w[0].k < w[1].k));
        assert!(bessel_audit(&sys).unwrap().pass);
    }

    #[test]
    fn incomplete_or_shallow_rejected() {
        let sys = build_rademacher(
            &SystemParams::from_dims(&[1, 1]).unwrap(),
            1000,
            &crate::RngStream::new(0, 0),
        )
        .unwrap();
        assert!(
            matches!(approximate_deltas(&sys, &[0.5]), Err(crate::Error::InvalidInput(m)) if m.contains("not complete"))
        );
        let tiny = blocked(BlockBase::Walsh, &[1], 2);
        assert!(
            matches!(approximate_deltas(&tiny, &[0.5, 0.5, 0.5]), Err(crate::Error::Resource(m)) if m.contains("δ_3"))
        );
        assert!(approximate_deltas(&tiny, &[]).is_err());
        assert!(approximate_deltas(&tiny, &[-1.0]).is_err());
    }
}
