//! Quantized Rademacher, Steinhaus and Gaussian systems on Monte Carlo
//! spaces, and the exhaustive classical sign system.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{QSystemInstance, SystemParams, SystemRecipe};
use crate::error::{invalid, resource, Result};
use crate::matcore::{gaussian_matrix, haar_orthogonal, haar_unitary, ComplexMatrix, RngStream};
use crate::par::map_range;
use crate::spaces::SampleSpace;

pub const MIN_MONTE_CARLO_SAMPLES: usize = 1000;
/// Largest number of signs [`build_sign_enumeration`] enumerates.
pub const MAX_SIGN_COUNT: usize = 24;

type Draw = fn(usize, &mut RngStream) -> Result<ComplexMatrix>;

// Point `i` draws from `rng.fork(i)`, one matrix per σ in order, so the
// table does not depend on how points are spread over threads.
fn sample_table(
    params: &SystemParams,
    samples: usize,
    rng: &RngStream,
    draw: Draw,
) -> Result<Vec<Vec<Complex64>>> {
    if samples < MIN_MONTE_CARLO_SAMPLES {
        return Err(invalid!(
            "sample_count {samples} below the minimum {MIN_MONTE_CARLO_SAMPLES}"
        ));
    }
    let per_point = params.entry_count();
    let total = per_point
        .checked_mul(samples)
        .ok_or_else(|| resource!("sample table size overflows"))?;
    if total > 1 << 28 {
        return Err(resource!("sample table of {total} entries is too large"));
    }
    let points: Vec<Result<Vec<ComplexMatrix>>> = map_range(samples, |i| {
        let mut r = rng.fork(i as u64);
        params.dims().iter().map(|&d| draw(d, &mut r)).collect()
    });
    let mut eval: Vec<Vec<Complex64>> = params
        .dims()
        .iter()
        .map(|&d| Vec::with_capacity(samples * d * d))
        .collect();
    for point in points {
        for (table, m) in eval.iter_mut().zip(point?) {
            table.extend_from_slice(m.as_slice());
        }
    }
    Ok(eval)
}

fn build(
    params: &SystemParams,
    samples: usize,
    rng: &RngStream,
    draw: Draw,
    bound: Option<f64>,
    recipe: SystemRecipe,
) -> Result<QSystemInstance> {
    let eval = sample_table(params, samples, rng, draw)?;
    let space = Arc::new(SampleSpace::monte_carlo(samples, rng.descriptor())?);
    QSystemInstance::from_parts(recipe, params.clone(), space, eval, bound, false)
}

/// Independent Haar orthogonal matrices per `(σ, point)`.
pub fn build_rademacher(
    params: &SystemParams,
    samples: usize,
    rng: &RngStream,
) -> Result<QSystemInstance> {
    let recipe = SystemRecipe::Rademacher {
        dims: params.dims().to_vec(),
        samples,
        seed: rng.descriptor(),
    };
    build(params, samples, rng, haar_orthogonal, Some(1.0), recipe)
}

/// Independent Haar unitary matrices per `(σ, point)`.
pub fn build_steinhaus(
    params: &SystemParams,
    samples: usize,
    rng: &RngStream,
) -> Result<QSystemInstance> {
    let recipe = SystemRecipe::Steinhaus {
        dims: params.dims().to_vec(),
        samples,
        seed: rng.descriptor(),
    };
    build(params, samples, rng, haar_unitary, Some(1.0), recipe)
}

/// Independent `N(0,1)/√d_σ` matrices per `(σ, point)`. Not uniformly
/// bounded, so no bound is declared.
pub fn build_gaussian(
    params: &SystemParams,
    samples: usize,
    rng: &RngStream,
) -> Result<QSystemInstance> {
    let recipe = SystemRecipe::Gaussian {
        dims: params.dims().to_vec(),
        samples,
        seed: rng.descriptor(),
    };
    build(params, samples, rng, gaussian_matrix, None, recipe)
}

/// `count` classical Rademacher signs on the exact space of all `2^count`
/// sign patterns: `ε_k(i) = +1` iff bit `k` of `i` is clear.
pub fn build_sign_enumeration(count: usize) -> Result<QSystemInstance> {
    if count == 0 {
        return Err(invalid!("sign enumeration needs at least one sign"));
    }
    if count > MAX_SIGN_COUNT {
        return Err(resource!(
            "{count} signs exceed the enumeration limit {MAX_SIGN_COUNT}"
        ));
    }
    let n = 1usize << count;
    let params = SystemParams::from_dims(&alloc::vec![1; count])?;
    let eval = (0..count)
        .map(|k| {
            (0..n)
                .map(|i| Complex64::new(if (i >> k) & 1 == 0 { 1.0 } else { -1.0 }, 0.0))
                .collect()
        })
        .collect();
    let space = Arc::new(SampleSpace::exact_uniform(n)?);
    QSystemInstance::from_parts(
        SystemRecipe::SignEnumeration { count },
        params,
        space,
        eval,
        Some(1.0),
        false,
    )
}
