use num_complex::Complex64;

use super::{qr, ComplexMatrix, RngStream};
use crate::error::{invalid, Result};

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(invalid!("matrix dimension must be at least 1"));
    }
    Ok(())
}

// Q·diag(r_ii/|r_ii|): makes the triangular factor's diagonal positive,
// which turns the QR of a Gaussian matrix into an exact Haar draw.
fn haar_from_gaussian(g: &ComplexMatrix) -> ComplexMatrix {
    let (mut q, r) = qr(g);
    let d = g.rows();
    for j in 0..d {
        let rjj = r.get(j, j);
        let norm = rjj.norm();
        let phase = if norm > 0.0 {
            rjj / norm
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..d {
            let val = q.get(i, j) * phase;
            q.set(i, j, val);
        }
    }
    q
}

/// Haar-distributed element of `O(d)` (real entries).
pub fn haar_orthogonal(d: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    check_dim(d)?;
    if d == 1 {
        let sign = if rng.uniform() < 0.5 { 1.0 } else { -1.0 };
        return Ok(ComplexMatrix::scalar(Complex64::new(sign, 0.0)));
    }
    let g = ComplexMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gaussian(), 0.0));
    Ok(haar_from_gaussian(&g))
}

/// Haar-distributed element of `U(d)`.
pub fn haar_unitary(d: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let g = ComplexMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gaussian(), rng.gaussian()));
    Ok(haar_from_gaussian(&g))
}

/// `d×d` matrix of i.i.d. `N(0, 1)` entries scaled by `1/√d`.
pub fn gaussian_matrix(d: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let scale = 1.0 / libm::sqrt(d as f64);
    Ok(ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.gaussian() * scale, 0.0)
    }))
}

/// Uniform point on the unit sphere of `R⁴`, i.e. a Haar element of SU(2)
/// written as a quaternion `(a, b, c, d)`.
pub fn unit_quaternion(rng: &mut RngStream) -> [f64; 4] {
    loop {
        let q = [
            rng.gaussian(),
            rng.gaussian(),
            rng.gaussian(),
            rng.gaussian(),
        ];
        let norm = libm::sqrt(q.iter().map(|x| x * x).sum::<f64>());
        if norm > 1e-300 {
            return q.map(|x| x / norm);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::CompensatedSum;
    use alloc::vec::Vec;

    fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = CompensatedSum::of(xs.iter().copied()) / n;
        let var = CompensatedSum::of(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
        (mean, libm::sqrt(var / n))
    }

    #[test]
    fn zero_dimension_rejected() {
        let mut rng = RngStream::new(0, 0);
        assert!(haar_orthogonal(0, &mut rng).is_err());
        assert!(haar_unitary(0, &mut rng).is_err());
        assert!(gaussian_matrix(0, &mut rng).is_err());
    }

    #[test]
    fn orthogonal_sign_frequency_d1() {
        let mut rng = RngStream::new(21, 0);
        let plus = (0..10_000)
            .filter(|_| haar_orthogonal(1, &mut rng).unwrap().get(0, 0).re > 0.0)
            .count();
        assert!((plus as f64 / 1e4 - 0.5).abs() <= 0.02);
    }

    #[test]
    fn residuals_always_small() {
        let mut rng = RngStream::new(22, 0);
        for d in 1..=6 {
            for _ in 0..200 {
                let q = haar_orthogonal(d, &mut rng).unwrap();
                assert!(q.is_real());
                assert!(
                    q.transpose()
                        .mul_unchecked(&q)
                        .max_abs_diff(&ComplexMatrix::identity(d))
                        .unwrap()
                        <= 1e-12
                );
                let u = haar_unitary(d, &mut rng).unwrap();
                assert!(u.unitarity_defect() <= 1e-12);
            }
        }
    }

    #[test]
    fn orthogonal_second_moment_d3() {
        let mut rng = RngStream::new(23, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| haar_orthogonal(3, &mut rng).unwrap().get(0, 0).re.powi(2))
            .collect();
        let (mean, se) = mean_and_stderr(&xs);
        assert!((mean - 1.0 / 3.0).abs() <= 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn unitary_moments() {
        let mut rng = RngStream::new(24, 0);
        let draws: Vec<Complex64> = (0..100_000)
            .map(|_| haar_unitary(1, &mut rng).unwrap().get(0, 0))
            .collect();
        assert!(draws.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        for part in [
            draws.iter().map(|z| z.re).collect::<Vec<_>>(),
            draws.iter().map(|z| z.im).collect(),
        ] {
            let (mean, se) = mean_and_stderr(&part);
            assert!(mean.abs() <= 3.0 * se);
        }
        let xs: Vec<f64> = (0..100_000)
            .map(|_| haar_unitary(2, &mut rng).unwrap().get(0, 0).norm_sqr())
            .collect();
        let (mean, se) = mean_and_stderr(&xs);
        assert!((mean - 0.5).abs() <= 3.0 * se);
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = RngStream::new(25, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| gaussian_matrix(1, &mut rng).unwrap().get(0, 0).re)
            .collect();
        let (mean, _) = mean_and_stderr(&xs);
        let var =
            CompensatedSum::of(xs.iter().map(|x| (x - mean).powi(2))) / (xs.len() as f64 - 1.0);
        assert!((var - 1.0).abs() <= 0.02);

        for d in [2usize, 3] {
            let fro: Vec<f64> = (0..20_000)
                .map(|_| {
                    gaussian_matrix(d, &mut rng)
                        .unwrap()
                        .frobenius_norm()
                        .powi(2)
                })
                .collect();
            let (mean, se) = mean_and_stderr(&fro);
            assert!((mean - d as f64).abs() <= 3.0 * se);
        }
    }

    #[test]
    fn gaussian_reproducible() {
        let a = gaussian_matrix(2, &mut RngStream::new(5, 9)).unwrap();
        let b = gaussian_matrix(2, &mut RngStream::new(5, 9)).unwrap();
        let bits = |m: &ComplexMatrix| {
            m.as_slice()
                .iter()
                .map(|z| (z.re.to_bits(), z.im.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn quaternions_are_unit() {
        let mut rng = RngStream::new(26, 0);
        for _ in 0..1000 {
            let q = unit_quaternion(&mut rng);
            assert!((q.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }
}
