use alloc::vec::Vec;

use num_complex::Complex64;

use super::ComplexMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `A = U diag(s) V*`.
///
/// For an `m×n` input with `k = min(m, n)`, `u` is `m×k`, `v` is `n×k` and
/// `s` holds the `k` singular values in decreasing order. Columns of `u`
/// attached to zero singular values are zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

/// One-sided (Hestenes) Jacobi SVD. Rotations are applied to the columns of
/// a working copy until every pair is numerically orthogonal; this gives
/// small singular values to high relative accuracy, which the Schatten sums
/// need.
pub fn svd(a: &ComplexMatrix) -> Svd {
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    let m = a.rows();
    let n = a.cols();
    // column-major working copies
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..m).map(|i| a.get(i, j)).collect())
        .collect();
    let mut vcols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    if i == j {
                        Complex64::new(1.0, 0.0)
                    } else {
                        ZERO
                    }
                })
                .collect()
        })
        .collect();

    let eps = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = ZERO;
                    for (x, y) in cp.iter().zip(cq) {
                        alpha += x.norm_sqr();
                        beta += y.norm_sqr();
                        gamma += x.conj() * y;
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0 || g <= eps * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                let ph = phase.conj();
                rotate(&mut cols, p, q, c, s, ph);
                rotate(&mut vcols, p, q, c, s, ph);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| libm::sqrt(c.iter().map(|z| z.norm_sqr()).sum::<f64>()))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u = ComplexMatrix::from_fn(m, n, |i, k| {
        let j = order[k];
        if norms[j] > 0.0 {
            cols[j][i] / norms[j]
        } else {
            ZERO
        }
    });
    let v = ComplexMatrix::from_fn(n, n, |i, k| vcols[order[k]][i]);
    Svd { u, s, v }
}

// (x_p, x_q) <- (c x_p - s ph x_q, s x_p + c ph x_q)
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, ph: Complex64) {
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * ph;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Singular values in decreasing order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    svd(a).s
}

/// Householder QR of a square matrix: returns `(Q, R)` with `A = QR`, `Q`
/// unitary and `R` upper triangular. Real input gives real factors.
pub fn qr(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    assert!(a.is_square(), "qr expects a square matrix");
    let n = a.rows();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(n);
    let mut v: Vec<Complex64> = Vec::with_capacity(n);
    for k in 0..n.saturating_sub(1) {
        let norm_x = libm::sqrt((k..n).map(|i| r.get(i, k).norm_sqr()).sum::<f64>());
        if norm_x == 0.0 {
            continue;
        }
        let x0 = r.get(k, k);
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm_x;
        v.clear();
        v.extend((k..n).map(|i| r.get(i, k)));
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // R <- (I - tau v v*) R
        for j in k..n {
            let mut dot = ZERO;
            for (t, i) in (k..n).enumerate() {
                dot += v[t].conj() * r.get(i, j);
            }
            let f = dot * tau;
            for (t, i) in (k..n).enumerate() {
                let val = r.get(i, j) - v[t] * f;
                r.set(i, j, val);
            }
        }
        // Q <- Q (I - tau v v*)
        for i in 0..n {
            let mut dot = ZERO;
            for (t, j) in (k..n).enumerate() {
                dot += q.get(i, j) * v[t];
            }
            let f = dot * tau;
            for (t, j) in (k..n).enumerate() {
                let val = q.get(i, j) - f * v[t].conj();
                q.set(i, j, val);
            }
        }
        for i in (k + 1)..n {
            r.set(i, k, ZERO);
        }
    }
    (q, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::RngStream;

    fn random(rows: usize, cols: usize, rng: &mut RngStream) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gaussian(), rng.gaussian())
        })
    }

    fn reconstruct(s: &Svd) -> ComplexMatrix {
        let k = s.s.len();
        let sigma = ComplexMatrix::diagonal(
            &s.s.iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect::<Vec<_>>(),
        );
        assert_eq!(sigma.rows(), k);
        s.u.mul_unchecked(&sigma).mul_unchecked(&s.v.adjoint())
    }

    #[test]
    fn svd_reconstructs_tall_and_wide() {
        let mut rng = RngStream::new(3, 0);
        for &(m, n) in &[(1, 1), (3, 3), (5, 2), (2, 6), (8, 8)] {
            let a = random(m, n, &mut rng);
            let s = svd(&a);
            assert!(s.s.windows(2).all(|w| w[0] >= w[1]));
            assert!(reconstruct(&s).max_abs_diff(&a).unwrap() < 1e-12, "{m}x{n}");
            assert!(s.v.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn svd_of_diagonal() {
        let a = ComplexMatrix::from_real(2, 2, &[3.0, 0.0, 0.0, -4.0]).unwrap();
        let s = singular_values(&a);
        assert!((s[0] - 4.0).abs() < 1e-15 && (s[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn svd_rank_deficient() {
        let a =
            ComplexMatrix::from_real(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 1.0, 1.0, 1.0]).unwrap();
        let s = svd(&a);
        assert!(s.s[2] < 1e-14);
        assert!(reconstruct(&s).max_abs_diff(&a).unwrap() < 1e-12);
    }

    #[test]
    fn qr_factors() {
        let mut rng = RngStream::new(5, 0);
        for n in 1..7 {
            let a = random(n, n, &mut rng);
            let (q, r) = qr(&a);
            assert!(q.unitarity_defect() < 1e-13);
            assert!(q.mul_unchecked(&r).max_abs_diff(&a).unwrap() < 1e-12);
            for i in 0..n {
                for j in 0..i {
                    assert_eq!(r.get(i, j), ZERO);
                }
            }
        }
        let real = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let (q, r) = qr(&real);
        assert!(q.is_real() && r.is_real());
    }
}
