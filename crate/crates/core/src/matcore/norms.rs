use alloc::vec::Vec;

use num_complex::Complex64;

use super::{singular_values, ComplexMatrix, Exponent};
use crate::error::{invalid, resource, Result};

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }

    pub fn of(xs: impl IntoIterator<Item = f64>) -> f64 {
        let mut acc = Self::default();
        for x in xs {
            acc.add(x);
        }
        acc.value()
    }
}

/// `(Σ s_i^p)^{1/p}` over the singular values, or the largest one for `p = ∞`.
pub fn schatten_norm(m: &ComplexMatrix, p: Exponent) -> Result<f64> {
    if !m.is_finite() {
        return Err(invalid!(
            "schatten norm of a matrix with non-finite entries"
        ));
    }
    Ok(powered_sum(&singular_values(m), p))
}

/// `ℓ^q` norm of a complex vector.
pub fn lq_norm(v: &[Complex64], q: Exponent) -> f64 {
    let moduli: Vec<f64> = v.iter().map(|z| z.norm()).collect();
    powered_sum(&moduli, q)
}

// Scaled by the largest term so large exponents do not overflow.
pub(crate) fn powered_sum(xs: &[f64], p: Exponent) -> f64 {
    let top = xs.iter().copied().fold(0.0, f64::max);
    match p {
        Exponent::Infinity => top,
        _ if top == 0.0 => 0.0,
        Exponent::Finite(p) if p == 1.0 => CompensatedSum::of(xs.iter().copied()),
        Exponent::Finite(p) if p == 2.0 => {
            top * libm::sqrt(CompensatedSum::of(xs.iter().map(|x| (x / top) * (x / top))))
        }
        Exponent::Finite(p) => {
            top * libm::pow(
                CompensatedSum::of(xs.iter().map(|x| libm::pow(x / top, p))),
                1.0 / p,
            )
        }
    }
}

/// `tr(AB)`.
pub fn trace_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.cols() != b.rows() || b.cols() != a.rows() {
        return Err(invalid!(
            "tr(AB) needs transposed shapes, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        ));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            acc += a.get(i, k) * b.get(k, i);
        }
    }
    Ok(acc)
}

const MAX_KRON_ENTRIES: usize = 1 << 26;

/// Kronecker product, block `(i, j)` of the result is `a_ij · b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) if r.checked_mul(c).is_some_and(|n| n <= MAX_KRON_ENTRIES) => (r, c),
        _ => {
            return Err(resource!(
                "kronecker product {}x{} ⊗ {}x{} is too large",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            ))
        }
    };
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        a.get(i / b.rows(), j / b.cols()) * b.get(i % b.rows(), j % b.cols())
    }))
}
