//! Truncated dual of SU(2): Wigner D-matrices for `j = 0, 1/2, …, j_max`
//! on a Monte Carlo Haar sample.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{QSystemInstance, SystemParams, SystemRecipe, MIN_MONTE_CARLO_SAMPLES};
use crate::error::{invalid, resource, Result};
use crate::matcore::{unit_quaternion, ComplexMatrix, RngStream};
use crate::par::map_range;
use crate::spaces::SampleSpace;

/// Largest supported `2j`.
pub const MAX_TWICE_J: u32 = 12;

const FACTORIAL: [f64; 13] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
];

fn binom(n: usize, k: usize) -> f64 {
    FACTORIAL[n] / (FACTORIAL[k] * FACTORIAL[n - k])
}

fn spin_label(twice_j: u32) -> String {
    if twice_j % 2 == 0 {
        format!("j={}", twice_j / 2)
    } else {
        format!("j={twice_j}/2")
    }
}

/// The SU(2) matrix `[[α, −β̄], [β, ᾱ]]` of the unit quaternion `(a, b, c, d)`
/// with `α = a + ib`, `β = c + id`.
pub fn su2_matrix(q: [f64; 4]) -> ComplexMatrix {
    let alpha = Complex64::new(q[0], q[1]);
    let beta = Complex64::new(q[2], q[3]);
    ComplexMatrix::new(2, 2, alloc::vec![alpha, -beta.conj(), beta, alpha.conj()])
        .expect("finite quaternion")
}

/// Spin-`j` representation (`n = 2j`) of the SU(2) element `u`.
///
/// Acts on homogeneous degree-`n` polynomials in the orthonormal monomial
/// basis `x^a y^(n−a) / √(a!(n−a)!)`, ordered by `a` descending, so the
/// `j = 1/2` block is `u` itself.
pub fn wigner_d(twice_j: u32, u: &ComplexMatrix) -> Result<ComplexMatrix> {
    if twice_j > MAX_TWICE_J {
        return Err(resource!("2j = {twice_j} exceeds {MAX_TWICE_J}"));
    }
    if u.rows() != 2 || u.cols() != 2 {
        return Err(invalid!("wigner_d needs a 2x2 matrix"));
    }
    let n = twice_j as usize;
    let (u11, u12, u21, u22) = (u.get(0, 0), u.get(0, 1), u.get(1, 0), u.get(1, 1));
    let pow = |z: Complex64, e: usize| -> Complex64 {
        (0..e).fold(Complex64::new(1.0, 0.0), |acc, _| acc * z)
    };
    Ok(ComplexMatrix::from_fn(n + 1, n + 1, |row, col| {
        let (ap, a) = (n - row, n - col);
        let mut sum = Complex64::new(0.0, 0.0);
        for k in ap.saturating_sub(n - a)..=ap.min(a) {
            let l = ap - k;
            sum += pow(u11, k)
                * pow(u21, a - k)
                * pow(u12, l)
                * pow(u22, n - a - l)
                * (binom(a, k) * binom(n - a, l));
        }
        let norm =
            libm::sqrt(FACTORIAL[ap] * FACTORIAL[n - ap] / (FACTORIAL[a] * FACTORIAL[n - a]));
        sum * norm
    }))
}

/// Wigner D-matrices for every `2j ≤ twice_j_max` at `samples` Haar points.
/// Point `i` is the unit quaternion drawn from `rng.fork(i)`.
pub fn build_su2_dual(
    twice_j_max: u32,
    samples: usize,
    rng: &RngStream,
) -> Result<QSystemInstance> {
    if twice_j_max > MAX_TWICE_J {
        return Err(resource!(
            "j_max = {}/2 exceeds {}/2",
            twice_j_max,
            MAX_TWICE_J
        ));
    }
    if samples < MIN_MONTE_CARLO_SAMPLES {
        return Err(invalid!(
            "sample_count {samples} below the minimum {MIN_MONTE_CARLO_SAMPLES}"
        ));
    }
    let spins: Vec<u32> = (0..=twice_j_max).collect();
    let points: Vec<Vec<ComplexMatrix>> = map_range(samples, |i| {
        let u = su2_matrix(unit_quaternion(&mut rng.fork(i as u64)));
        spins
            .iter()
            .map(|&t| wigner_d(t, &u).expect("checked spin range"))
            .collect()
    });
    let mut eval: Vec<Vec<Complex64>> = spins
        .iter()
        .map(|&t| Vec::with_capacity(samples * (t as usize + 1).pow(2)))
        .collect();
    for point in points {
        for (table, m) in eval.iter_mut().zip(point) {
            table.extend_from_slice(m.as_slice());
        }
    }
    let params = SystemParams::new(
        spins.iter().map(|&t| spin_label(t)).collect(),
        spins.iter().map(|&t| t as usize + 1).collect(),
    )?;
    let space = Arc::new(SampleSpace::monte_carlo(samples, rng.descriptor())?);
    let recipe = SystemRecipe::Su2Dual {
        twice_j_max,
        samples,
        seed: rng.descriptor(),
    };
    QSystemInstance::from_parts(recipe, params, space, eval, Some(1.0), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{uniform_bound, verify_orthonormality};

    fn random_su2(seed: u64) -> ComplexMatrix {
        su2_matrix(unit_quaternion(&mut RngStream::new(seed, 0)))
    }

    #[test]
    fn low_spins() {
        let u = random_su2(1);
        let d0 = wigner_d(0, &u).unwrap();
        assert!((d0.get(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(wigner_d(1, &u).unwrap().max_abs_diff(&u).unwrap() < 1e-15);
        assert!(wigner_d(13, &u).is_err());
    }

    #[test]
    fn representations_are_unitary_homomorphisms() {
        for seed in 0..10 {
            let (g, h) = (random_su2(seed), random_su2(seed + 100));
            let gh = g.matmul(&h).unwrap();
            for t in 0..=MAX_TWICE_J {
                let dg = wigner_d(t, &g).unwrap();
                assert!(
                    dg.unitarity_defect() <= 1e-12,
                    "2j={t}: {}",
                    dg.unitarity_defect()
                );
                let prod = dg.matmul(&wigner_d(t, &h).unwrap()).unwrap();
                assert!(
                    prod.max_abs_diff(&wigner_d(t, &gh).unwrap()).unwrap() <= 1e-10,
                    "2j={t}"
                );
            }
        }
    }

    // Character of spin j at the rotation by angle θ is sin((n+1)θ/2)/sin(θ/2).
    #[test]
    fn characters_match_weyl_formula() {
        let theta = 0.7f64;
        let u = su2_matrix([(theta / 2.0).cos(), (theta / 2.0).sin(), 0.0, 0.0]);
        for t in 0..=MAX_TWICE_J {
            let chi = wigner_d(t, &u).unwrap().trace();
            let expect = ((t as f64 + 1.0) * theta / 2.0).sin() / (theta / 2.0).sin();
            assert!((chi.re - expect).abs() < 1e-12 && chi.im.abs() < 1e-12);
        }
    }

    #[test]
    fn dual_is_orthonormal_in_mean() {
        let n = 4000;
        let sys = build_su2_dual(3, n, &RngStream::new(7, 0)).unwrap();
        assert_eq!(sys.params().dims(), &[1, 2, 3, 4]);
        assert_eq!(sys.params().sigma_ids()[1], "j=1/2");
        let m = sys
            .space()
            .expectation(|w| sys.entry(1, w, 0, 0).norm_sqr());
        assert!((m - 0.5).abs() <= 3.0 / (n as f64).sqrt());
        assert!(verify_orthonormality(&sys, None).unwrap().max_defect <= 4.0 / (n as f64).sqrt());
        assert!((uniform_bound(&sys) - 1.0).abs() <= 1e-12);
        assert!(build_su2_dual(13, n, &RngStream::new(7, 0)).is_err());
    }
}
