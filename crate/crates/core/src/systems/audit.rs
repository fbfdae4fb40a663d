//! Audits of the orthonormality relations and of the uniform bound.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::QSystemInstance;
use crate::error::{invalid, Result};
use crate::matcore::{schatten_norm, Exponent};
use crate::par::map_range;

/// Entry `(i, j)` of block `σ` (positions, zero-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryIndex {
    pub sigma: usize,
    pub i: usize,
    pub j: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    /// `max |∫ φ^σ_ij conj(φ^σ'_i'j') dμ − δ_σσ' δ_ii' δ_jj' / d_σ|`.
    pub max_defect: f64,
    pub worst: Option<(EntryIndex, EntryIndex)>,
    pub pairs_checked: usize,
}

/// Gram matrix of all entries of the blocks at `sigmas` against the
/// orthonormality targets. `None` audits every index.
pub fn verify_orthonormality(
    sys: &QSystemInstance,
    sigmas: Option<&[usize]>,
) -> Result<DefectReport> {
    let all: Vec<usize> = (0..sys.params().len()).collect();
    let sigmas = sigmas.unwrap_or(&all);
    if let Some(&s) = sigmas.iter().find(|&&s| s >= sys.params().len()) {
        return Err(invalid!("index position {s} out of range"));
    }
    let entries: Vec<EntryIndex> = sigmas
        .iter()
        .flat_map(|&sigma| {
            let d = sys.params().dim(sigma);
            (0..d * d).map(move |e| EntryIndex {
                sigma,
                i: e / d,
                j: e % d,
            })
        })
        .collect();
    let weights = sys.space().weights();
    let columns: Vec<Vec<Complex64>> = entries
        .iter()
        .map(|e| {
            (0..sys.point_count())
                .map(|w| sys.entry(e.sigma, w, e.i, e.j))
                .collect()
        })
        .collect();
    let rows: Vec<(f64, usize)> = map_range(entries.len(), |a| {
        let mut worst = (0.0f64, a);
        for b in a..entries.len() {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((x, y), w) in columns[a].iter().zip(&columns[b]).zip(weights) {
                acc += x * y.conj() * *w;
            }
            let target = if a == b {
                1.0 / sys.params().dim(entries[a].sigma) as f64
            } else {
                0.0
            };
            let defect = (acc - target).norm();
            if defect > worst.0 {
                worst = (defect, b);
            }
        }
        worst
    });
    let mut report = DefectReport {
        max_defect: 0.0,
        worst: None,
        pairs_checked: entries.len() * (entries.len() + 1) / 2,
    };
    for (a, &(defect, b)) in rows.iter().enumerate() {
        if defect > report.max_defect || report.worst.is_none() {
            report.max_defect = report.max_defect.max(defect);
            report.worst = Some((entries[a], entries[b]));
        }
    }
    Ok(report)
}

/// `max_{σ, ω} ‖φ^σ(ω)‖_{S^∞}` over the stored points: exact on finite
/// spaces, a lower estimate of the essential supremum on Monte Carlo ones.
pub fn uniform_bound(sys: &QSystemInstance) -> f64 {
    let per_point: Vec<f64> = map_range(sys.point_count(), |w| {
        (0..sys.params().len())
            .map(|s| {
                if sys.params().dim(s) == 1 {
                    sys.entry(s, w, 0, 0).norm()
                } else {
                    schatten_norm(&sys.matrix(s, w), Exponent::Infinity)
                        .expect("stored blocks are finite")
                }
            })
            .fold(0.0, f64::max)
    });
    per_point.into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::RngStream;
    use crate::systems::{build_rademacher, FiniteGroup, SystemParams};

    #[test]
    fn trivial_system_has_zero_defect() {
        let sys = crate::systems::build_finite_group_dual(FiniteGroup::Cyclic(1)).unwrap();
        let r = verify_orthonormality(&sys, None).unwrap();
        assert_eq!(r.max_defect, 0.0);
        assert_eq!(r.pairs_checked, 1);
        assert_eq!(uniform_bound(&sys), 1.0);
    }

    #[test]
    fn subset_and_range_checks() {
        let sys = crate::systems::build_finite_group_dual(FiniteGroup::S3).unwrap();
        let r = verify_orthonormality(&sys, Some(&[2])).unwrap();
        assert_eq!(r.pairs_checked, 10);
        assert!(verify_orthonormality(&sys, Some(&[3])).is_err());
    }

    #[test]
    fn large_rademacher_within_budget() {
        let n = 100_000;
        let sys = build_rademacher(
            &SystemParams::from_dims(&[1, 2]).unwrap(),
            n,
            &RngStream::new(11, 0),
        )
        .unwrap();
        assert!(verify_orthonormality(&sys, None).unwrap().max_defect <= 4.0 / (n as f64).sqrt());
    }
}
