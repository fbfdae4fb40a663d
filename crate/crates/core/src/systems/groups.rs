//! Finite groups and hardcoded tables of their unitary irreducible
//! representations.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{QSystemInstance, SystemParams, SystemRecipe};
use crate::error::{invalid, Result};
use crate::spaces::SampleSpace;

pub const MAX_CYCLIC_ORDER: usize = 4096;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiniteGroup {
    Cyclic(usize),
    S3,
    D4,
    Q8,
}

type Irrep = (String, usize, Vec<Vec<Complex64>>);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl FiniteGroup {
    pub fn name(&self) -> String {
        match self {
            FiniteGroup::Cyclic(n) => alloc::format!("z{n}"),
            FiniteGroup::S3 => "s3".into(),
            FiniteGroup::D4 => "d4".into(),
            FiniteGroup::Q8 => "q8".into(),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            FiniteGroup::Cyclic(n) => *n,
            FiniteGroup::S3 => 6,
            FiniteGroup::D4 | FiniteGroup::Q8 => 8,
        }
    }

    fn validate(&self) -> Result<()> {
        if let FiniteGroup::Cyclic(n) = self {
            if *n == 0 || *n > MAX_CYCLIC_ORDER {
                return Err(invalid!(
                    "cyclic group order {n} outside 1..={MAX_CYCLIC_ORDER}"
                ));
            }
        }
        Ok(())
    }

    /// Group law on element indices.
    ///
    /// Dihedral elements are `r^a s^b` at index `a + n·b` with `s r = r⁻¹ s`;
    /// quaternion elements are `±{1, i, j, k}` at index `unit + 4·[negative]`.
    pub fn mul(&self, x: usize, y: usize) -> usize {
        match self {
            FiniteGroup::Cyclic(n) => (x + y) % n,
            FiniteGroup::S3 => dihedral_mul(3, x, y),
            FiniteGroup::D4 => dihedral_mul(4, x, y),
            FiniteGroup::Q8 => {
                // UNIT_MUL[a][b] = (unit, negate) for the product of units a·b
                const UNIT_MUL: [[(usize, bool); 4]; 4] = [
                    [(0, false), (1, false), (2, false), (3, false)],
                    [(1, false), (0, true), (3, false), (2, true)],
                    [(2, false), (3, true), (0, true), (1, false)],
                    [(3, false), (2, false), (1, true), (0, true)],
                ];
                let (u, neg) = UNIT_MUL[x % 4][y % 4];
                let neg = neg ^ (x >= 4) ^ (y >= 4);
                u + if neg { 4 } else { 0 }
            }
        }
    }

    /// Irreducible unitary representations: `(id, degree, matrices)` with one
    /// row-major matrix per group element.
    fn irreps(&self) -> Vec<Irrep> {
        match self {
            FiniteGroup::Cyclic(n) => {
                let n = *n;
                (0..n)
                    .map(|k| {
                        let mats = (0..n)
                            .map(|m| {
                                let angle =
                                    2.0 * core::f64::consts::PI * ((k * m) % n) as f64 / n as f64;
                                vec![c(libm::cos(angle), libm::sin(angle))]
                            })
                            .collect();
                        (alloc::format!("chi{k}"), 1, mats)
                    })
                    .collect()
            }
            FiniteGroup::S3 => {
                // cos, sin of 2πa/3
                let rot = [(1.0, 0.0), (-0.5, SQRT3_2), (-0.5, -SQRT3_2)];
                let one_dim = |name: &str, s_sign: f64| {
                    let mats = (0..6)
                        .map(|e| vec![c(if e >= 3 { s_sign } else { 1.0 }, 0.0)])
                        .collect();
                    (name.to_string(), 1, mats)
                };
                vec![
                    one_dim("trivial", 1.0),
                    one_dim("sign", -1.0),
                    ("standard".into(), 2, dihedral_standard(3, &rot)),
                ]
            }
            FiniteGroup::D4 => {
                let rot = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
                let one_dim = |name: &str, r_sign: f64, s_sign: f64| {
                    let mats = (0..8)
                        .map(|e| {
                            let (a, b) = (e % 4, e / 4);
                            let v = if a % 2 == 1 { r_sign } else { 1.0 }
                                * if b == 1 { s_sign } else { 1.0 };
                            vec![c(v, 0.0)]
                        })
                        .collect();
                    (name.to_string(), 1, mats)
                };
                vec![
                    one_dim("trivial", 1.0, 1.0),
                    one_dim("r+s-", 1.0, -1.0),
                    one_dim("r-s+", -1.0, 1.0),
                    one_dim("r-s-", -1.0, -1.0),
                    ("standard".into(), 2, dihedral_standard(4, &rot)),
                ]
            }
            FiniteGroup::Q8 => {
                let one_dim = |name: &str, ei: f64, ej: f64| {
                    let unit_val = [1.0, ei, ej, ei * ej];
                    let mats = (0..8).map(|e| vec![c(unit_val[e % 4], 0.0)]).collect();
                    (name.to_string(), 1, mats)
                };
                let units = [
                    [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
                    [c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)],
                    [c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)],
                    [c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)],
                ];
                let spin = (0..8)
                    .map(|e| {
                        let sign = if e >= 4 { -1.0 } else { 1.0 };
                        units[e % 4].iter().map(|z| z * sign).collect()
                    })
                    .collect();
                vec![
                    one_dim("trivial", 1.0, 1.0),
                    one_dim("i+j-", 1.0, -1.0),
                    one_dim("i-j+", -1.0, 1.0),
                    one_dim("i-j-", -1.0, -1.0),
                    ("spin".into(), 2, spin),
                ]
            }
        }
    }
}

fn dihedral_mul(n: usize, x: usize, y: usize) -> usize {
    let (a, b) = (x % n, x / n);
    let (c, d) = (y % n, y / n);
    let rot = if b == 0 { (a + c) % n } else { (a + n - c) % n };
    rot + n * ((b + d) % 2)
}

// r^a s^b ↦ R(2πa/n)·S^b with S = diag(1, −1)
fn dihedral_standard(n: usize, rot: &[(f64, f64)]) -> Vec<Vec<Complex64>> {
    (0..2 * n)
        .map(|e| {
            let (a, b) = (e % n, e / n);
            let (cs, sn) = rot[a];
            let flip = if b == 1 { -1.0 } else { 1.0 };
            vec![
                c(cs, 0.0),
                c(-sn * flip, 0.0),
                c(sn, 0.0),
                c(cs * flip, 0.0),
            ]
        })
        .collect()
}

fn mat_mul(d: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); d * d];
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                out[i * d + j] += a[i * d + k] * b[k * d + j];
            }
        }
    }
    out
}

// Representation property φ(gh) = φ(g)φ(h) over the whole table.
fn audit_table(group: &FiniteGroup, irreps: &[Irrep]) -> Result<()> {
    let order = group.order();
    for (name, d, mats) in irreps {
        for g in 0..order {
            for h in 0..order {
                let lhs = &mats[group.mul(g, h)];
                let rhs = mat_mul(*d, &mats[g], &mats[h]);
                if lhs.iter().zip(&rhs).any(|(x, y)| (x - y).norm() > 1e-10) {
                    return Err(invalid!(
                        "irrep {name} of {} fails the homomorphism audit",
                        group.name()
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Dual object of a finite group: its irreducible unitary representations
/// on the exact uniform space of group elements.
pub fn build_finite_group_dual(group: FiniteGroup) -> Result<QSystemInstance> {
    group.validate()?;
    let irreps = group.irreps();
    if !matches!(group, FiniteGroup::Cyclic(_)) {
        audit_table(&group, &irreps)?;
    }
    let space = Arc::new(SampleSpace::exact_uniform(group.order())?);
    let ids = irreps.iter().map(|(n, _, _)| n.clone()).collect();
    let dims = irreps.iter().map(|(_, d, _)| *d).collect();
    let params = SystemParams::new(ids, dims)?;
    let eval = irreps
        .into_iter()
        .map(|(_, _, mats)| mats.into_iter().flatten().collect())
        .collect();
    QSystemInstance::from_parts(
        SystemRecipe::GroupDual { group },
        params,
        space,
        eval,
        Some(1.0),
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{uniform_bound, verify_orthonormality};

    const ALL: [FiniteGroup; 4] = [
        FiniteGroup::S3,
        FiniteGroup::D4,
        FiniteGroup::Q8,
        FiniteGroup::Cyclic(16),
    ];

    #[test]
    fn dimension_counts() {
        let s3 = build_finite_group_dual(FiniteGroup::S3).unwrap();
        assert_eq!(s3.params().dims(), &[1, 1, 2]);
        let q8 = build_finite_group_dual(FiniteGroup::Q8).unwrap();
        assert_eq!(q8.params().dims(), &[1, 1, 1, 1, 2]);
        for g in ALL {
            let sys = build_finite_group_dual(g).unwrap();
            assert_eq!(sys.params().entry_count(), g.order(), "{}", g.name());
        }
    }

    #[test]
    fn cyclic_characters() {
        let z4 = build_finite_group_dual(FiniteGroup::Cyclic(4)).unwrap();
        assert_eq!(z4.params().dims(), &[1, 1, 1, 1]);
        for k in 0..4 {
            for m in 0..4 {
                let angle = 2.0 * core::f64::consts::PI * (k * m) as f64 / 4.0;
                assert!((z4.entry(k, m, 0, 0) - c(angle.cos(), angle.sin())).norm() < 1e-15);
            }
        }
        assert!(build_finite_group_dual(FiniteGroup::Cyclic(0)).is_err());
        assert!(build_finite_group_dual(FiniteGroup::Cyclic(4097)).is_err());
    }

    #[test]
    fn group_laws_are_associative_with_identity() {
        for g in ALL {
            let n = g.order();
            for x in 0..n {
                assert_eq!(g.mul(0, x), x);
                assert_eq!(g.mul(x, 0), x);
                for y in 0..n {
                    for z in 0..n {
                        assert_eq!(g.mul(g.mul(x, y), z), g.mul(x, g.mul(y, z)));
                    }
                }
            }
        }
    }

    #[test]
    fn representation_property() {
        for g in ALL {
            let sys = build_finite_group_dual(g).unwrap();
            for s in 0..sys.params().len() {
                for x in 0..g.order() {
                    for y in 0..g.order() {
                        let prod = sys.matrix(s, x).matmul(&sys.matrix(s, y)).unwrap();
                        assert!(prod.max_abs_diff(&sys.matrix(s, g.mul(x, y))).unwrap() <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn schur_orthogonality_exact() {
        for g in ALL {
            let sys = build_finite_group_dual(g).unwrap();
            let report = verify_orthonormality(&sys, None).unwrap();
            assert!(
                report.max_defect <= 1e-12,
                "{}: {}",
                g.name(),
                report.max_defect
            );
            assert!((uniform_bound(&sys) - 1.0).abs() < 1e-12);
        }
    }
}
