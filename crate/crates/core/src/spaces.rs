//! Discretized probability spaces standing in for an atomless `(Ω, μ)`.
//!
//! Exact-finite spaces (finite groups, dyadic grids of `[0,1)`) enumerate
//! every point with its exact weight, so orthogonality identities hold to
//! rounding. Monte Carlo spaces carry `N` equally weighted draws and the
//! stream they were drawn from.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, resource, Result};
use crate::matcore::rng::StreamDescriptor;
use crate::matcore::CompensatedSum;

/// Deepest dyadic grid [`make_unit_interval_space`] will build.
pub const MAX_GRID_LEVELS: u32 = 24;
/// Deepest dyadic index [`dyadic_delta`] accepts.
pub const MAX_DYADIC_INDEX: u32 = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    ExactFinite,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpace {
    kind: SpaceKind,
    weights: Vec<f64>,
    dyadic_levels: Option<u32>,
    seed: Option<StreamDescriptor>,
}

impl SampleSpace {
    /// `n` points of weight `1/n`, enumerated exactly.
    pub fn exact_uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid!("a sample space needs at least one point"));
        }
        Ok(Self {
            kind: SpaceKind::ExactFinite,
            weights: vec![1.0 / n as f64; n],
            dyadic_levels: None,
            seed: None,
        })
    }

    /// `n` equally weighted Monte Carlo draws produced from `seed`.
    pub fn monte_carlo(n: usize, seed: StreamDescriptor) -> Result<Self> {
        if n == 0 {
            return Err(invalid!("a sample space needs at least one point"));
        }
        Ok(Self {
            kind: SpaceKind::MonteCarlo,
            weights: vec![1.0 / n as f64; n],
            dyadic_levels: None,
            seed: Some(seed),
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn is_exact(&self) -> bool {
        self.kind == SpaceKind::ExactFinite
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn seed(&self) -> Option<StreamDescriptor> {
        self.seed
    }

    /// Depth `L` when the points are the `2^L` cells of a dyadic grid.
    pub fn dyadic_levels(&self) -> Option<u32> {
        self.dyadic_levels
    }

    /// Left endpoint of cell `i` on a dyadic grid.
    pub fn grid_point(&self, i: usize) -> Option<f64> {
        self.dyadic_levels.map(|l| i as f64 / (1u64 << l) as f64)
    }

    /// Tolerance for identities that are exact in the limit: `1e-12` on
    /// exact spaces, `4/√N` on Monte Carlo ones.
    pub fn identity_tolerance(&self) -> f64 {
        match self.kind {
            SpaceKind::ExactFinite => 1e-12,
            SpaceKind::MonteCarlo => 4.0 / libm::sqrt(self.len() as f64),
        }
    }

    /// Tolerance used for inequality checks: `1e-9` exact, `5/√N` Monte Carlo.
    pub fn check_tolerance(&self) -> f64 {
        match self.kind {
            SpaceKind::ExactFinite => 1e-9,
            SpaceKind::MonteCarlo => 5.0 / libm::sqrt(self.len() as f64),
        }
    }

    /// `Σ_points weight · g(point)` with compensated summation.
    pub fn expectation(&self, g: impl Fn(usize) -> f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for (i, w) in self.weights.iter().enumerate() {
            acc.add(w * g(i));
        }
        acc.value()
    }

    /// Same as [`SampleSpace::expectation`] for complex integrands.
    pub fn expectation_complex(&self, g: impl Fn(usize) -> Complex64) -> Complex64 {
        let mut re = CompensatedSum::default();
        let mut im = CompensatedSum::default();
        for (i, w) in self.weights.iter().enumerate() {
            let z = g(i);
            re.add(w * z.re);
            im.add(w * z.im);
        }
        Complex64::new(re.value(), im.value())
    }

    /// `true` when both handles describe the same space.
    pub fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

/// Exact dyadic grid of `2^levels` equal cells of `[0,1)`; every `δ_k` with
/// `k ≤ levels` is constant on each cell.
pub fn make_unit_interval_space(levels: u32) -> Result<SampleSpace> {
    if levels == 0 {
        return Err(invalid!("grid depth must be positive"));
    }
    if levels > MAX_GRID_LEVELS {
        return Err(resource!("grid depth {levels} exceeds {MAX_GRID_LEVELS}"));
    }
    let n = 1usize << levels;
    Ok(SampleSpace {
        kind: SpaceKind::ExactFinite,
        weights: vec![1.0 / n as f64; n],
        dyadic_levels: Some(levels),
        seed: None,
    })
}

/// `δ_k(t) = (−1)^{j+1}` for `t ∈ D_j^k = [(j−1)2^{−k}, j2^{−k})`.
pub fn dyadic_delta(k: u32, t: f64) -> Result<i8> {
    if k == 0 || k > MAX_DYADIC_INDEX {
        return Err(invalid!("dyadic index {k} outside 1..={MAX_DYADIC_INDEX}"));
    }
    if !(0.0..1.0).contains(&t) {
        return Err(invalid!("point {t} is outside [0, 1)"));
    }
    // t·2^k is exact in binary floating point
    let j = libm::floor(t * (1u64 << k) as f64) as u64 + 1;
    Ok(if j % 2 == 1 { 1 } else { -1 })
}

/// Complex-valued function sampled at the points of a space.
#[derive(Clone, Debug)]
pub struct SampledScalarFunction {
    space: Arc<SampleSpace>,
    values: Vec<Complex64>,
}

impl SampledScalarFunction {
    pub fn new(space: Arc<SampleSpace>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(invalid!(
                "{} values for a space of {} points",
                values.len(),
                space.len()
            ));
        }
        Ok(Self { space, values })
    }

    pub fn from_fn(space: Arc<SampleSpace>, f: impl Fn(usize) -> Complex64) -> Self {
        let values = (0..space.len()).map(f).collect();
        Self { space, values }
    }

    pub fn constant(space: Arc<SampleSpace>, z: Complex64) -> Self {
        Self::from_fn(space, |_| z)
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// `∫ f dμ` as the weighted sum over points.
pub fn integrate(f: &SampledScalarFunction) -> Result<Complex64> {
    if f.values.len() != f.space.len() {
        return Err(invalid!("function length does not match its space"));
    }
    Ok(f.space.expectation_complex(|i| f.values[i]))
}

/// `δ_k` sampled on a dyadic grid; the grid must resolve level `k`.
pub fn dyadic_delta_on(space: &Arc<SampleSpace>, k: u32) -> Result<SampledScalarFunction> {
    let levels = space
        .dyadic_levels()
        .ok_or_else(|| resource!("space is not a dyadic grid; cannot resolve δ_{k}"))?;
    if k == 0 {
        return Err(invalid!("dyadic index must be positive"));
    }
    if k > levels {
        return Err(resource!("grid of depth {levels} cannot resolve δ_{k}"));
    }
    let shift = levels - k;
    Ok(SampledScalarFunction::from_fn(space.clone(), |i| {
        let cell = i >> shift;
        Complex64::new(if cell % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    }))
}

/// Walsh character `Π_{k ∈ A} δ_k` where bit `k−1` of `mask` marks `k ∈ A`.
pub fn walsh_character(space: &Arc<SampleSpace>, mask: u64) -> Result<SampledScalarFunction> {
    let levels = space
        .dyadic_levels()
        .ok_or_else(|| resource!("space is not a dyadic grid"))?;
    if levels < 64 && mask >> levels != 0 {
        return Err(resource!(
            "grid of depth {levels} cannot resolve Walsh mask {mask:#b}"
        ));
    }
    Ok(SampledScalarFunction::from_fn(space.clone(), |i| {
        Complex64::new(walsh_sign(levels, mask, i), 0.0)
    }))
}

// δ_k at cell i of a depth-L grid is (−1)^{bit (L−k) of i}.
pub(crate) fn walsh_sign(levels: u32, mask: u64, i: usize) -> f64 {
    let mut parity = 0u32;
    for k in 1..=levels {
        if mask >> (k - 1) & 1 == 1 {
            parity ^= (i >> (levels - k)) as u32 & 1;
        }
    }
    if parity == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::RngStream;

    fn re(z: Complex64) -> f64 {
        assert_eq!(z.im, 0.0);
        z.re
    }

    #[test]
    fn delta_values() {
        assert_eq!(dyadic_delta(1, 0.25).unwrap(), 1);
        assert_eq!(dyadic_delta(2, 0.3).unwrap(), -1);
        assert_eq!(dyadic_delta(1, 0.5).unwrap(), -1);
        assert!(dyadic_delta(1, 1.0).is_err());
        assert!(dyadic_delta(1, -0.1).is_err());
        assert!(dyadic_delta(0, 0.1).is_err());
        assert!(dyadic_delta(63, 0.1).is_err());
    }

    #[test]
    fn delta_orthonormal_on_exact_grid() {
        // brute-force sum over the 2^{max(k,l)+1} grid points t = i/2^{max+1}
        for k in 1..=6u32 {
            for l in 1..=6u32 {
                let depth = k.max(l) + 1;
                let n = 1u64 << depth;
                let sum: i64 = (0..n)
                    .map(|i| {
                        let t = i as f64 / n as f64;
                        (dyadic_delta(k, t).unwrap() as i64) * (dyadic_delta(l, t).unwrap() as i64)
                    })
                    .sum();
                let expected = if k == l { n as i64 } else { 0 };
                assert_eq!(sum, expected, "k={k} l={l}");
            }
        }
    }

    #[test]
    fn refinement_consistent() {
        // D_j^k = D_{2j-1}^{k+1} ∪ D_{2j}^{k+1}: cell index at level k+1 halves to the level-k cell
        let mut rng = RngStream::new(31, 0);
        for _ in 0..10_000 {
            let t = rng.uniform();
            for k in 1..30u32 {
                let j = libm::floor(t * (1u64 << k) as f64) as u64 + 1;
                let child = libm::floor(t * (1u64 << (k + 1)) as f64) as u64 + 1;
                assert!(child == 2 * j - 1 || child == 2 * j);
                let sign = if j % 2 == 1 { 1 } else { -1 };
                assert_eq!(dyadic_delta(k, t).unwrap(), sign);
            }
        }
    }

    #[test]
    fn grid_spaces() {
        let s = make_unit_interval_space(1).unwrap();
        assert_eq!(s.weights(), &[0.5, 0.5]);
        assert!(make_unit_interval_space(0).is_err());
        assert!(matches!(
            make_unit_interval_space(25),
            Err(crate::Error::Resource(_))
        ));

        let s = Arc::new(make_unit_interval_space(3).unwrap());
        let d2 = dyadic_delta_on(&s, 2).unwrap();
        assert_eq!(integrate(&d2).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(
            dyadic_delta_on(&s, 4),
            Err(crate::Error::Resource(_))
        ));
        // grid evaluation agrees with the pointwise definition
        for k in 1..=3 {
            let f = dyadic_delta_on(&s, k).unwrap();
            for i in 0..8 {
                let t = s.grid_point(i).unwrap();
                assert_eq!(re(f.values()[i]), dyadic_delta(k, t).unwrap() as f64);
            }
        }
    }

    #[test]
    fn deltas_mean_zero_unit_norm() {
        let levels = 10;
        let s = Arc::new(make_unit_interval_space(levels).unwrap());
        for k in 1..=levels {
            let f = dyadic_delta_on(&s, k).unwrap();
            assert_eq!(integrate(&f).unwrap(), Complex64::new(0.0, 0.0));
            let sq = SampledScalarFunction::from_fn(s.clone(), |i| f.values()[i] * f.values()[i]);
            assert_eq!(integrate(&sq).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn walsh_characters_orthonormal() {
        let levels = 10;
        let s = Arc::new(make_unit_interval_space(levels).unwrap());
        let masks: Vec<u64> = (0..1u64 << levels)
            .step_by(37)
            .chain([0, 1, 1023])
            .collect();
        let chars: Vec<_> = masks
            .iter()
            .map(|&m| walsh_character(&s, m).unwrap())
            .collect();
        for (a, fa) in masks.iter().zip(&chars) {
            for (b, fb) in masks.iter().zip(&chars) {
                let prod = SampledScalarFunction::from_fn(s.clone(), |i| {
                    fa.values()[i] * fb.values()[i].conj()
                });
                let expected = if a == b { 1.0 } else { 0.0 };
                assert_eq!(integrate(&prod).unwrap(), Complex64::new(expected, 0.0));
            }
        }
        // a single-bit mask is δ_k itself
        let d3 = dyadic_delta_on(&s, 3).unwrap();
        assert_eq!(walsh_character(&s, 0b100).unwrap().values(), d3.values());
    }

    #[test]
    fn integrate_cases() {
        let s = Arc::new(
            SampleSpace::monte_carlo(
                1000,
                StreamDescriptor {
                    master_seed: 1,
                    stream_id: 0,
                },
            )
            .unwrap(),
        );
        let one = SampledScalarFunction::constant(s.clone(), Complex64::new(1.0, 0.0));
        assert_eq!(integrate(&one).unwrap(), Complex64::new(1.0, 0.0));

        let mut rng = RngStream::new(32, 0);
        let f = SampledScalarFunction::from_fn(s.clone(), |_| Complex64::new(0.0, 0.0));
        assert_eq!(integrate(&f).unwrap(), Complex64::new(0.0, 0.0));
        let values: Vec<Complex64> = (0..1000)
            .map(|_| Complex64::new(rng.gaussian(), rng.gaussian()))
            .collect();
        let f = SampledScalarFunction::new(s.clone(), values.clone()).unwrap();
        // independent route: plain summation in reverse order
        let mut oracle = Complex64::new(0.0, 0.0);
        for v in values.iter().rev() {
            oracle += v / 1000.0;
        }
        assert!((integrate(&f).unwrap() - oracle).norm() < 1e-12);
        assert!(SampledScalarFunction::new(s, values[..10].to_vec()).is_err());
    }

    #[test]
    fn tolerances() {
        let exact = SampleSpace::exact_uniform(6).unwrap();
        assert_eq!(exact.identity_tolerance(), 1e-12);
        let mc = SampleSpace::monte_carlo(
            100_000,
            StreamDescriptor {
                master_seed: 0,
                stream_id: 0,
            },
        )
        .unwrap();
        assert!((mc.identity_tolerance() - 0.012649110640673518).abs() < 1e-15);
        assert!((exact.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
