//! The transform `F(f)^σ = ∫ f φ^σ* dμ`, its inverse
//! `F⁻¹(A)(ω) = Σ_σ d_σ tr(A^σ φ^σ(ω))`, and the norms on both sides.
//!
//! Coefficient entries and function values live in a finite-dimensional
//! Banach space `E` described by [`VectorSpaceDesc`]; vectors of `E` are
//! stored as flat coordinate slices (`m×m` Schatten coordinates row-major).

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, unsupported, Error, Result};
use crate::matcore::{kron, lq_norm, schatten_norm, CompensatedSum, ComplexMatrix, Exponent};
use crate::par::{for_each_chunk, map_range};
use crate::spaces::{SampleSpace, SampledScalarFunction};
use crate::systems::{QSystemInstance, SystemParams};

/// The coefficient space `E`, at the level of its Banach norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VectorSpaceDesc {
    Scalar,
    /// `ℓ^q_m`.
    Lq {
        q: Exponent,
        m: usize,
    },
    /// `S^q_m`, the Schatten class on `m×m` matrices.
    Schatten {
        q: Exponent,
        m: usize,
    },
}

impl VectorSpaceDesc {
    pub fn lq(q: Exponent, m: usize) -> Result<Self> {
        Self::Lq { q, m }.validated()
    }

    pub fn schatten(q: Exponent, m: usize) -> Result<Self> {
        Self::Schatten { q, m }.validated()
    }

    fn validated(self) -> Result<Self> {
        match self {
            VectorSpaceDesc::Lq { m: 0, .. } | VectorSpaceDesc::Schatten { m: 0, .. } => {
                Err(invalid!("coefficient space dimension must be positive"))
            }
            _ => Ok(self),
        }
    }

    /// Number of complex coordinates of a vector.
    pub fn coords(&self) -> usize {
        match self {
            VectorSpaceDesc::Scalar => 1,
            VectorSpaceDesc::Lq { m, .. } => *m,
            VectorSpaceDesc::Schatten { m, .. } => m * m,
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, VectorSpaceDesc::Scalar)
    }

    /// Inner-product norm: scalars, `ℓ²_m` and `S²_m`.
    pub fn is_hilbertian(&self) -> bool {
        match self {
            VectorSpaceDesc::Scalar => true,
            VectorSpaceDesc::Lq { q, m } | VectorSpaceDesc::Schatten { q, m } => {
                *m == 1 || *q == Exponent::TWO
            }
        }
    }

    /// The same space with exponent `q` replaced (scalars stay scalar).
    pub fn with_exponent(&self, q: Exponent) -> Self {
        match *self {
            VectorSpaceDesc::Scalar => VectorSpaceDesc::Scalar,
            VectorSpaceDesc::Lq { m, .. } => VectorSpaceDesc::Lq { q, m },
            VectorSpaceDesc::Schatten { m, .. } => VectorSpaceDesc::Schatten { q, m },
        }
    }

    /// `‖v‖_E` of a coordinate slice.
    pub fn norm(&self, v: &[Complex64]) -> f64 {
        debug_assert_eq!(v.len(), self.coords());
        match self {
            VectorSpaceDesc::Scalar => v[0].norm(),
            VectorSpaceDesc::Lq { q, .. } => lq_norm(v, *q),
            VectorSpaceDesc::Schatten { q, m } => {
                let mat = ComplexMatrix::new(*m, *m, v.to_vec()).expect("finite coordinates");
                schatten_norm(&mat, *q).expect("finite coordinates")
            }
        }
    }
}

impl fmt::Display for VectorSpaceDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorSpaceDesc::Scalar => write!(f, "scalar"),
            VectorSpaceDesc::Lq { q, m } => write!(f, "lq({q},{m})"),
            VectorSpaceDesc::Schatten { q, m } => write!(f, "schatten({q},{m})"),
        }
    }
}

/// Parses `scalar`, `lq(q,m)` and `schatten(q,m)`, e.g. `lq(1,4)` or
/// `schatten(inf,2)`, and the short forms `l1:4` and `S2:3`.
impl FromStr for VectorSpaceDesc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("scalar") {
            return Ok(VectorSpaceDesc::Scalar);
        }
        // short forms `l<q>:<m>` and `S<q>:<m>`
        if let Some((head, m)) = s.split_once(':') {
            let m: usize = m
                .trim()
                .parse()
                .map_err(|_| invalid!("bad dimension in {s:?}"))?;
            return match head.split_at_checked(1) {
                Some(("l", q)) => Self::lq(q.parse()?, m),
                Some(("S", q)) => Self::schatten(q.parse()?, m),
                _ => Err(invalid!("unknown coefficient space {s:?}")),
            };
        }
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| invalid!("unknown coefficient space {s:?}"))?;
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| invalid!("missing ')' in {s:?}"))?;
        let (q, m) = args
            .split_once(',')
            .ok_or_else(|| invalid!("expected (q,m) in {s:?}"))?;
        let q: Exponent = q.trim().parse()?;
        let m: usize = m
            .trim()
            .parse()
            .map_err(|_| invalid!("bad dimension in {s:?}"))?;
        match name.trim() {
            "lq" | "l" => Self::lq(q, m),
            "schatten" | "S" => Self::schatten(q, m),
            other => Err(invalid!("unknown coefficient space {other:?}")),
        }
    }
}

/// `A ∈ Π_σ M_{d_σ} ⊗ E`: block `σ` is stored flat with entry `(a, b)`,
/// coordinate `c` at `(a·d_σ + b)·coords + c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffFamily {
    params: SystemParams,
    space_desc: VectorSpaceDesc,
    blocks: Vec<Vec<Complex64>>,
}

impl CoeffFamily {
    pub fn new(
        params: SystemParams,
        space_desc: VectorSpaceDesc,
        blocks: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if blocks.len() != params.len() {
            return Err(invalid!(
                "{} blocks for {} indices",
                blocks.len(),
                params.len()
            ));
        }
        let k = space_desc.coords();
        for (s, block) in blocks.iter().enumerate() {
            let d = params.dim(s);
            if block.len() != d * d * k {
                return Err(invalid!(
                    "block {} has {} entries, expected {}",
                    params.sigma_ids()[s],
                    block.len(),
                    d * d * k
                ));
            }
            if block.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(invalid!(
                    "block {} has non-finite entries",
                    params.sigma_ids()[s]
                ));
            }
        }
        Ok(Self {
            params,
            space_desc,
            blocks,
        })
    }

    pub fn zeros(params: SystemParams, space_desc: VectorSpaceDesc) -> Self {
        let k = space_desc.coords();
        let blocks = params
            .dims()
            .iter()
            .map(|&d| vec![Complex64::new(0.0, 0.0); d * d * k])
            .collect();
        Self {
            params,
            space_desc,
            blocks,
        }
    }

    /// Scalar family with the given matrix blocks.
    pub fn from_matrices(params: SystemParams, mats: &[ComplexMatrix]) -> Result<Self> {
        let blocks = mats.iter().map(|m| m.as_slice().to_vec()).collect();
        for (s, m) in mats.iter().enumerate() {
            if s < params.len() && (m.rows() != params.dim(s) || m.cols() != params.dim(s)) {
                return Err(invalid!(
                    "block {} has the wrong shape",
                    params.sigma_ids()[s]
                ));
            }
        }
        Self::new(params, VectorSpaceDesc::Scalar, blocks)
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn space_desc(&self) -> VectorSpaceDesc {
        self.space_desc
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.blocks
    }

    pub fn block(&self, sigma: usize) -> &[Complex64] {
        &self.blocks[sigma]
    }

    pub fn block_mut(&mut self, sigma: usize) -> &mut [Complex64] {
        &mut self.blocks[sigma]
    }

    /// The `E`-vector at entry `(a, b)` of block `σ`.
    pub fn entry(&self, sigma: usize, a: usize, b: usize) -> &[Complex64] {
        let (d, k) = (self.params.dim(sigma), self.space_desc.coords());
        &self.blocks[sigma][(a * d + b) * k..(a * d + b + 1) * k]
    }

    pub fn entry_mut(&mut self, sigma: usize, a: usize, b: usize) -> &mut [Complex64] {
        let (d, k) = (self.params.dim(sigma), self.space_desc.coords());
        &mut self.blocks[sigma][(a * d + b) * k..(a * d + b + 1) * k]
    }

    /// The `d_σ×d_σ` scalar matrix of coordinate `c` of block `σ`.
    pub fn coordinate_matrix(&self, sigma: usize, c: usize) -> ComplexMatrix {
        let (d, k) = (self.params.dim(sigma), self.space_desc.coords());
        ComplexMatrix::from_fn(d, d, |a, b| self.blocks[sigma][(a * d + b) * k + c])
    }

    /// The same coordinates read as vectors of another space of equal
    /// dimension, e.g. `S^p_k` relabelled as `S^{p′}_k`.
    pub fn with_space_desc(mut self, desc: VectorSpaceDesc) -> Result<Self> {
        if desc.coords() != self.space_desc.coords() {
            return Err(invalid!("cannot relabel {} as {}", self.space_desc, desc));
        }
        self.space_desc = desc;
        Ok(self)
    }

    /// Keeps the blocks where `keep(σ)` holds and zeroes the others.
    pub fn masked(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut out = self.clone();
        for (s, block) in out.blocks.iter_mut().enumerate() {
            if !keep(s) {
                block.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            }
        }
        out
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.params != other.params || self.space_desc != other.space_desc {
            return Err(invalid!("coefficient families have different shapes"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (x, y) in out
            .blocks
            .iter_mut()
            .flatten()
            .zip(other.blocks.iter().flatten())
        {
            *x += y;
        }
        Ok(out)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = self.clone();
        out.blocks.iter_mut().flatten().for_each(|x| *x *= z);
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .blocks
            .iter()
            .flatten()
            .zip(other.blocks.iter().flatten())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks
            .iter()
            .flatten()
            .all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

/// An `E`-valued function on a sample space, point-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledVectorFunction {
    space: Arc<SampleSpace>,
    space_desc: VectorSpaceDesc,
    values: Vec<Complex64>,
}

impl SampledVectorFunction {
    pub fn new(
        space: Arc<SampleSpace>,
        space_desc: VectorSpaceDesc,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if values.len() != space.len() * space_desc.coords() {
            return Err(invalid!(
                "{} values for {} points of dimension {}",
                values.len(),
                space.len(),
                space_desc.coords()
            ));
        }
        Ok(Self {
            space,
            space_desc,
            values,
        })
    }

    pub fn from_scalar(f: &SampledScalarFunction) -> Self {
        Self {
            space: f.space().clone(),
            space_desc: VectorSpaceDesc::Scalar,
            values: f.values().to_vec(),
        }
    }

    pub fn constant(
        space: Arc<SampleSpace>,
        space_desc: VectorSpaceDesc,
        v: &[Complex64],
    ) -> Result<Self> {
        if v.len() != space_desc.coords() {
            return Err(invalid!(
                "vector has {} coordinates, expected {}",
                v.len(),
                space_desc.coords()
            ));
        }
        let values = (0..space.len()).flat_map(|_| v.iter().copied()).collect();
        Ok(Self {
            space,
            space_desc,
            values,
        })
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn space_desc(&self) -> VectorSpaceDesc {
        self.space_desc
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, point: usize) -> &[Complex64] {
        let k = self.space_desc.coords();
        &self.values[point * k..(point + 1) * k]
    }

    pub fn with_space_desc(mut self, desc: VectorSpaceDesc) -> Result<Self> {
        if desc.coords() != self.space_desc.coords() {
            return Err(invalid!("cannot relabel {} as {}", self.space_desc, desc));
        }
        self.space_desc = desc;
        Ok(self)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(invalid!("functions have different shapes"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }
}

/// Sample points handled per parallel task by [`inverse`].
const POINTS_PER_TASK: usize = 512;

#[derive(Clone, Copy, Default)]
struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    #[inline]
    fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `F(f)^σ_ab = ∫ f conj(φ^σ_ba) dμ`, coordinatewise in `E`.
pub fn forward(f: &SampledVectorFunction, sys: &QSystemInstance) -> Result<CoeffFamily> {
    if !f.space.same_as(sys.space()) {
        return Err(invalid!(
            "function and system live on different sample spaces"
        ));
    }
    let params = sys.params().clone();
    let k = f.space_desc.coords();
    let weights = f.space.weights();
    let entries: Vec<(usize, usize, usize)> = params
        .dims()
        .iter()
        .enumerate()
        .flat_map(|(s, &d)| (0..d * d).map(move |e| (s, e / d, e % d)))
        .collect();
    let sums: Vec<Vec<Complex64>> = map_range(entries.len(), |e| {
        let (s, a, b) = entries[e];
        let mut acc: Vec<ComplexSum> = (0..k).map(|_| ComplexSum::default()).collect();
        for (w, &weight) in weights.iter().enumerate() {
            let phi = sys.entry(s, w, b, a).conj() * weight;
            for (c, slot) in acc.iter_mut().enumerate() {
                slot.add(f.values[w * k + c] * phi);
            }
        }
        acc.iter().map(ComplexSum::value).collect()
    });
    let mut out = CoeffFamily::zeros(params, f.space_desc);
    for ((s, a, b), v) in entries.into_iter().zip(sums) {
        out.entry_mut(s, a, b).copy_from_slice(&v);
    }
    Ok(out)
}

/// `F⁻¹(A)(ω) = Σ_σ d_σ Σ_ab A^σ_ab φ^σ_ba(ω)`.
pub fn inverse(coeffs: &CoeffFamily, sys: &QSystemInstance) -> Result<SampledVectorFunction> {
    if coeffs.params != *sys.params() {
        return Err(invalid!(
            "coefficient family does not match the system's indices"
        ));
    }
    let k = coeffs.space_desc.coords();
    let mut values = vec![Complex64::new(0.0, 0.0); sys.point_count() * k];
    for_each_chunk(&mut values, POINTS_PER_TASK * k, |start, out| {
        let mut acc: Vec<ComplexSum> = vec![ComplexSum::default(); k];
        for (offset, point) in out.chunks_mut(k).enumerate() {
            let w = start / k + offset;
            acc.iter_mut()
                .for_each(|slot| *slot = ComplexSum::default());
            for (s, &d) in coeffs.params.dims().iter().enumerate() {
                let weight = d as f64;
                let phi = sys.block(s, w);
                for a in 0..d {
                    for b in 0..d {
                        let phi = phi[b * d + a] * weight;
                        for (slot, z) in acc.iter_mut().zip(coeffs.entry(s, a, b)) {
                            slot.add(z * phi);
                        }
                    }
                }
            }
            for (v, slot) in point.iter_mut().zip(&acc) {
                *v = slot.value();
            }
        }
    });
    SampledVectorFunction::new(sys.space().clone(), coeffs.space_desc, values)
}

/// `‖A^σ‖_{S^p_{d_σ}(E)}` where it has a closed form; see [`lp_sigma_norm`].
fn block_norm(coeffs: &CoeffFamily, sigma: usize, p: Exponent) -> Result<f64> {
    let d = coeffs.params.dim(sigma);
    let desc = coeffs.space_desc;
    let block = &coeffs.blocks[sigma];
    if let VectorSpaceDesc::Scalar = desc {
        return schatten_norm(&coeffs.coordinate_matrix(sigma, 0), p);
    }
    if d == 1 {
        return Ok(desc.norm(block));
    }
    // every norm vanishes on the zero block
    if block.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Ok(0.0);
    }
    match desc {
        _ if p == Exponent::TWO && desc.is_hilbertian() => Ok(lq_norm(block, Exponent::TWO)),
        VectorSpaceDesc::Lq { q, m } if q.approx_eq(p) => {
            let norms: Vec<f64> = (0..m)
                .map(|c| schatten_norm(&coeffs.coordinate_matrix(sigma, c), p))
                .collect::<Result<_>>()?;
            Ok(crate::matcore::powered_sum(&norms, q))
        }
        VectorSpaceDesc::Schatten { q, m } if q.approx_eq(p) => {
            // S^q_d(S^q_m) = S^q_{dm}: entry ((a,i),(b,j)) is coordinate (i,j) of A_ab
            let big = ComplexMatrix::from_fn(d * m, d * m, |r, c| {
                let (a, i, b, j) = (r / m, r % m, c / m, c % m);
                block[(a * d + b) * m * m + i * m + j]
            });
            schatten_norm(&big, p)
        }
        _ => Err(unsupported!(
            "the norm of S^{p}_{d}({desc}) is not implemented"
        )),
    }
}

/// `(Σ_σ d_σ ‖A^σ‖^p_{S^p_{d_σ}(E)})^{1/p}`, or `sup_σ ‖A^σ‖` for `p = ∞`.
///
/// Computed exactly for scalar `E`, for Hilbertian `E` at `p = 2`, for
/// `E = ℓ^q_m` or `S^q_m` at `p = q`, and for any `E` on blocks with
/// `d_σ = 1` or zero coefficients.
/// Every other combination is [`Error::Unsupported`].
pub fn lp_sigma_norm(coeffs: &CoeffFamily, p: Exponent) -> Result<f64> {
    let norms: Vec<f64> = (0..coeffs.params.len())
        .map(|s| block_norm(coeffs, s, p))
        .collect::<Result<_>>()?;
    Ok(match p {
        Exponent::Infinity => norms.into_iter().fold(0.0, f64::max),
        Exponent::Finite(p) => {
            let top = norms.iter().copied().fold(0.0, f64::max);
            if top == 0.0 {
                return Ok(0.0);
            }
            let sum = CompensatedSum::of(
                norms
                    .iter()
                    .zip(coeffs.params.dims())
                    .map(|(n, &d)| d as f64 * libm::pow(n / top, p)),
            );
            top * libm::pow(sum, 1.0 / p)
        }
    })
}

/// Bochner norm `(∫ ‖f‖_E^p dμ)^{1/p}`, or the maximum over points for `p = ∞`.
pub fn lp_omega_norm(f: &SampledVectorFunction, p: Exponent) -> f64 {
    let norms: Vec<f64> = (0..f.space.len())
        .map(|w| f.space_desc.norm(f.value(w)))
        .collect();
    match p {
        Exponent::Infinity => norms.into_iter().fold(0.0, f64::max),
        Exponent::Finite(p) => {
            let top = norms.iter().copied().fold(0.0, f64::max);
            if top == 0.0 {
                return 0.0;
            }
            top * libm::pow(
                f.space.expectation(|w| libm::pow(norms[w] / top, p)),
                1.0 / p,
            )
        }
    }
}

/// `A^σ ⊗ T` for scalar `A` and `T ∈ M_k`: entry `(a, b)` becomes the
/// vector `A^σ_ab T ∈ S²_k`.
pub fn amplify(coeffs: &CoeffFamily, t: &ComplexMatrix) -> Result<CoeffFamily> {
    if !coeffs.space_desc.is_scalar() {
        return Err(unsupported!(
            "amplification of {}-valued coefficients",
            coeffs.space_desc
        ));
    }
    if !t.is_square() {
        return Err(invalid!("amplifying matrix must be square"));
    }
    let k = t.rows();
    let blocks = (0..coeffs.params.len())
        .map(|s| {
            // kron(A^σ, T) regrouped so that each (a, b) carries a k×k block
            let big = kron(&coeffs.coordinate_matrix(s, 0), t)?;
            let d = coeffs.params.dim(s);
            let mut out = Vec::with_capacity(d * d * k * k);
            for a in 0..d {
                for b in 0..d {
                    for i in 0..k {
                        for j in 0..k {
                            out.push(big.get(a * k + i, b * k + j));
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    CoeffFamily::new(
        coeffs.params.clone(),
        VectorSpaceDesc::Schatten {
            q: Exponent::TWO,
            m: k,
        },
        blocks,
    )
}

/// Pointwise `f(ω) T` for scalar `f`.
pub fn amplify_function(
    f: &SampledVectorFunction,
    t: &ComplexMatrix,
) -> Result<SampledVectorFunction> {
    if !f.space_desc.is_scalar() {
        return Err(unsupported!(
            "amplification of {}-valued functions",
            f.space_desc
        ));
    }
    let k = t.rows();
    let values = f
        .values
        .iter()
        .flat_map(|z| t.as_slice().iter().map(move |x| z * x))
        .collect();
    SampledVectorFunction::new(
        f.space.clone(),
        VectorSpaceDesc::Schatten {
            q: Exponent::TWO,
            m: k,
        },
        values,
    )
}

/// Name of a coefficient family entry for reports: `σ(a,b)`.
pub fn entry_label(params: &SystemParams, sigma: usize, a: usize, b: usize) -> String {
    alloc::format!("{}({},{})", params.sigma_ids()[sigma], a + 1, b + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::RngStream;
    use crate::systems::{build_blocked_scalar, build_finite_group_dual, BlockBase, FiniteGroup};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn entry_function(
        sys: &QSystemInstance,
        s: usize,
        i: usize,
        j: usize,
    ) -> SampledVectorFunction {
        let values = (0..sys.point_count())
            .map(|w| sys.entry(s, w, i, j))
            .collect();
        SampledVectorFunction::new(sys.space().clone(), VectorSpaceDesc::Scalar, values).unwrap()
    }

    fn random_function(
        space: &Arc<SampleSpace>,
        desc: VectorSpaceDesc,
        rng: &mut RngStream,
    ) -> SampledVectorFunction {
        let values = (0..space.len() * desc.coords())
            .map(|_| c(rng.gaussian(), rng.gaussian()))
            .collect();
        SampledVectorFunction::new(space.clone(), desc, values).unwrap()
    }

    #[test]
    fn forward_of_entry_is_unit_at_transposed_position() {
        let sys = build_finite_group_dual(FiniteGroup::S3).unwrap();
        let a = forward(&entry_function(&sys, 2, 0, 1), &sys).unwrap();
        for s in 0..3 {
            let d = sys.params().dim(s);
            for x in 0..d {
                for y in 0..d {
                    let expect = if (s, x, y) == (2, 1, 0) { 0.5 } else { 0.0 };
                    assert!((a.entry(s, x, y)[0] - c(expect, 0.0)).norm() < 1e-12);
                }
            }
        }
        let sigma_norm = lp_sigma_norm(&a, Exponent::TWO).unwrap();
        assert!((sigma_norm - 0.5f64.sqrt()).abs() < 1e-12);
        let back = inverse(&a, &sys).unwrap();
        assert!(back.max_abs_diff(&entry_function(&sys, 2, 0, 1)).unwrap() < 1e-12);
        assert!((lp_omega_norm(&back, Exponent::TWO) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constants_and_zero() {
        let sys = build_finite_group_dual(FiniteGroup::Q8).unwrap();
        let one = SampledVectorFunction::constant(
            sys.space().clone(),
            VectorSpaceDesc::Scalar,
            &[c(1.0, 0.0)],
        )
        .unwrap();
        let a = forward(&one, &sys).unwrap();
        assert!((a.entry(0, 0, 0)[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(a
            .masked(|s| s != 0)
            .blocks()
            .iter()
            .flatten()
            .all(|z| z.norm() < 1e-15));
        let zero = CoeffFamily::zeros(sys.params().clone(), VectorSpaceDesc::Scalar);
        assert!(forward(
            &one.clone()
                .with_space_desc(VectorSpaceDesc::Scalar)
                .unwrap(),
            &sys
        )
        .is_ok());
        assert!(inverse(&zero, &sys)
            .unwrap()
            .values()
            .iter()
            .all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn normalized_character() {
        let sys = build_finite_group_dual(FiniteGroup::D4).unwrap();
        let mut a = CoeffFamily::zeros(sys.params().clone(), VectorSpaceDesc::Scalar);
        a.entry_mut(4, 0, 0)[0] = c(0.5, 0.0);
        a.entry_mut(4, 1, 1)[0] = c(0.5, 0.0);
        let f = inverse(&a, &sys).unwrap();
        for w in 0..8 {
            assert!((f.value(w)[0] - sys.matrix(4, w).trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn sigma_norm_examples() {
        let params = SystemParams::from_dims(&[2]).unwrap();
        let a =
            CoeffFamily::from_matrices(params, &[ComplexMatrix::identity(2).scale(c(0.5, 0.0))])
                .unwrap();
        assert!((lp_sigma_norm(&a, Exponent::TWO).unwrap() - 1.0).abs() < 1e-15);
        let params = SystemParams::from_dims(&[2, 1]).unwrap();
        let a = CoeffFamily::from_matrices(
            params,
            &[
                ComplexMatrix::identity(2),
                ComplexMatrix::scalar(c(3.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(lp_sigma_norm(&a, Exponent::Infinity).unwrap(), 3.0);
    }

    #[test]
    fn unsupported_combinations_are_explicit() {
        let params = SystemParams::from_dims(&[2]).unwrap();
        let mut a = CoeffFamily::zeros(params, VectorSpaceDesc::lq(Exponent::ONE, 3).unwrap());
        assert_eq!(lp_sigma_norm(&a, Exponent::TWO), Ok(0.0));
        a.entry_mut(0, 0, 1)[2] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            lp_sigma_norm(&a, Exponent::TWO),
            Err(Error::Unsupported(_))
        ));
        assert!(lp_sigma_norm(&a, Exponent::ONE).is_ok());
        let params = SystemParams::from_dims(&[1, 1]).unwrap();
        let a = CoeffFamily::zeros(params, VectorSpaceDesc::lq(Exponent::ONE, 3).unwrap());
        assert!(lp_sigma_norm(&a, Exponent::TWO).is_ok());
    }

    #[test]
    fn schatten_fubini_matches_lq_for_diagonal_data() {
        // diagonal S^q_m coordinates behave like ℓ^q_m
        let params = SystemParams::from_dims(&[2, 1]).unwrap();
        let mut rng = RngStream::new(3, 0);
        let q = Exponent::new(3.0).unwrap();
        let mut lq = CoeffFamily::zeros(params.clone(), VectorSpaceDesc::lq(q, 2).unwrap());
        let mut sq = CoeffFamily::zeros(params, VectorSpaceDesc::schatten(q, 2).unwrap());
        for (s, d) in [(0, 2), (1, 1)] {
            for a in 0..d {
                for b in 0..d {
                    let (x, y) = (c(rng.gaussian(), 0.0), c(rng.gaussian(), 0.0));
                    lq.entry_mut(s, a, b).copy_from_slice(&[x, y]);
                    sq.entry_mut(s, a, b)
                        .copy_from_slice(&[x, c(0.0, 0.0), c(0.0, 0.0), y]);
                }
            }
        }
        let (x, y) = (
            lp_sigma_norm(&lq, q).unwrap(),
            lp_sigma_norm(&sq, q).unwrap(),
        );
        assert!((x - y).abs() < 1e-10 * x, "{x} vs {y}");
    }

    #[test]
    fn amplification_scales_hilbert_norm() {
        let sys = build_finite_group_dual(FiniteGroup::S3).unwrap();
        let mut rng = RngStream::new(8, 0);
        let f = random_function(sys.space(), VectorSpaceDesc::Scalar, &mut rng);
        let a = forward(&f, &sys).unwrap();
        let base = lp_sigma_norm(&a, Exponent::TWO).unwrap();
        let same = amplify(&a, &ComplexMatrix::identity(1)).unwrap();
        assert!((lp_sigma_norm(&same, Exponent::TWO).unwrap() - base).abs() < 1e-14);
        let k3 = amplify(&a, &ComplexMatrix::identity(3)).unwrap();
        assert!((lp_sigma_norm(&k3, Exponent::TWO).unwrap() - base * 3f64.sqrt()).abs() < 1e-12);
        let t = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)],
        )
        .unwrap();
        let rank1 = amplify(&a, &t).unwrap();
        assert!((lp_sigma_norm(&rank1, Exponent::TWO).unwrap() - base * 5.0).abs() < 1e-12);
        let af = amplify_function(&f, &t).unwrap();
        assert!(forward(&af, &sys).unwrap().max_abs_diff(&rank1).unwrap() < 1e-12);
    }

    #[test]
    fn round_trip_and_parseval_on_complete_systems() {
        let mut rng = RngStream::new(12, 0);
        let systems = [
            build_finite_group_dual(FiniteGroup::D4).unwrap(),
            build_finite_group_dual(FiniteGroup::Cyclic(16)).unwrap(),
            build_blocked_scalar(
                BlockBase::Trig,
                &SystemParams::from_dims(&[2, 2, 1, 1, 1, 1, 1, 1, 1, 1]).unwrap(),
                4,
            )
            .unwrap(),
        ];
        for sys in &systems {
            assert!(sys.is_complete());
            for desc in [
                VectorSpaceDesc::Scalar,
                VectorSpaceDesc::lq(Exponent::TWO, 3).unwrap(),
                VectorSpaceDesc::schatten(Exponent::TWO, 2).unwrap(),
            ] {
                let f = random_function(sys.space(), desc, &mut rng);
                let a = forward(&f, sys).unwrap();
                assert!(inverse(&a, sys).unwrap().max_abs_diff(&f).unwrap() < 1e-10);
                let (x, y) = (
                    lp_sigma_norm(&a, Exponent::TWO).unwrap(),
                    lp_omega_norm(&f, Exponent::TWO),
                );
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn space_mismatch_rejected() {
        let s3 = build_finite_group_dual(FiniteGroup::S3).unwrap();
        let q8 = build_finite_group_dual(FiniteGroup::Q8).unwrap();
        let f = entry_function(&q8, 0, 0, 0);
        assert!(forward(&f, &s3).is_err());
        let a = CoeffFamily::zeros(q8.params().clone(), VectorSpaceDesc::Scalar);
        assert!(inverse(&a, &s3).is_err());
    }

    #[test]
    fn desc_parsing() {
        assert_eq!(
            "scalar".parse::<VectorSpaceDesc>().unwrap(),
            VectorSpaceDesc::Scalar
        );
        assert_eq!(
            "lq(1,4)".parse::<VectorSpaceDesc>().unwrap(),
            VectorSpaceDesc::Lq {
                q: Exponent::ONE,
                m: 4
            }
        );
        let s: VectorSpaceDesc = "schatten(inf, 2)".parse().unwrap();
        assert_eq!(alloc::format!("{s}"), "schatten(inf,2)");
        assert!("lq(2,0)".parse::<VectorSpaceDesc>().is_err());
        assert_eq!(
            "l2:4".parse::<VectorSpaceDesc>().unwrap(),
            VectorSpaceDesc::Lq {
                q: Exponent::TWO,
                m: 4
            }
        );
        assert_eq!(
            "Sinf:3".parse::<VectorSpaceDesc>().unwrap(),
            VectorSpaceDesc::Schatten {
                q: Exponent::Infinity,
                m: 3
            }
        );
        assert!("x2:3".parse::<VectorSpaceDesc>().is_err());
        assert!("foo(2,2)".parse::<VectorSpaceDesc>().is_err());
        assert!(VectorSpaceDesc::lq(Exponent::TWO, 5)
            .unwrap()
            .is_hilbertian());
        assert!(!VectorSpaceDesc::lq(Exponent::ONE, 2)
            .unwrap()
            .is_hilbertian());
    }

    #[test]
    fn omega_norm_examples() {
        let space = Arc::new(crate::spaces::make_unit_interval_space(4).unwrap());
        let delta = crate::spaces::dyadic_delta_on(&space, 3).unwrap();
        let f = SampledVectorFunction::from_scalar(&delta);
        for p in [
            Exponent::ONE,
            Exponent::new(3.0).unwrap(),
            Exponent::Infinity,
        ] {
            assert!((lp_omega_norm(&f, p) - 1.0).abs() < 1e-15);
        }
        let v = [c(3.0, 0.0), c(0.0, 4.0)];
        let g = SampledVectorFunction::constant(
            space,
            VectorSpaceDesc::lq(Exponent::TWO, 2).unwrap(),
            &v,
        )
        .unwrap();
        assert!((lp_omega_norm(&g, Exponent::new(1.5).unwrap()) - 5.0).abs() < 1e-14);
    }
}
