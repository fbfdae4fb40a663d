//! Complete quantized systems obtained by packing a complete scalar
//! orthonormal basis of a dyadic grid into matrix blocks.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{QSystemInstance, SystemParams, SystemRecipe};
use crate::error::{invalid, Result};
use crate::spaces::{make_unit_interval_space, walsh_sign};

/// Grid depth used when the caller does not choose one.
pub const DEFAULT_LEVELS: u32 = 8;

/// Scalar basis `e_1, e_2, …` of a grid with `N = 2^L` cells.
///
/// `Walsh` is in Paley order, `e_{n+1} = Π_k δ_k^{bit k−1 of n}`, so
/// `δ_k = e_{2^{k−1}+1}`. `Trig` is `e_{p+1}(t_i) = exp(2πi ν_p i / N)` with
/// frequencies `ν = 0, 1, −1, 2, −2, …, N/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockBase {
    Walsh,
    Trig,
}

impl BlockBase {
    pub fn name(&self) -> &'static str {
        match self {
            BlockBase::Walsh => "walsh",
            BlockBase::Trig => "trig",
        }
    }

    /// Value of the basis function with zero-based position `p` at cell `i`.
    pub fn value(&self, levels: u32, p: usize, i: usize) -> Complex64 {
        match self {
            BlockBase::Walsh => Complex64::new(walsh_sign(levels, p as u64, i), 0.0),
            BlockBase::Trig => {
                let n = 1usize << levels;
                let nu = trig_frequency(p);
                let r = (nu.rem_euclid(n as i64) as usize * i) % n;
                let angle = 2.0 * core::f64::consts::PI * r as f64 / n as f64;
                Complex64::new(libm::cos(angle), libm::sin(angle))
            }
        }
    }
}

fn trig_frequency(p: usize) -> i64 {
    if p % 2 == 1 {
        ((p + 1) / 2) as i64
    } else {
        -((p / 2) as i64)
    }
}

/// Pads `dims` with scalar blocks so that `Σ d² = 2^levels`; the depth
/// defaults to the smallest `L ≥ 8` whose grid holds `dims`.
pub fn complete_dims(dims: &[usize], levels: Option<u32>) -> Result<(Vec<usize>, u32)> {
    let used: usize = dims.iter().map(|d| d * d).sum();
    let levels = match levels {
        Some(l) => l,
        None => {
            let mut l = DEFAULT_LEVELS;
            while (1usize << l) < used {
                l += 1;
            }
            l
        }
    };
    if levels == 0 || levels >= usize::BITS {
        return Err(invalid!("grid depth {levels} is out of range"));
    }
    let size = 1usize << levels;
    if used > size {
        return Err(invalid!(
            "Σd² = {used} exceeds the {size} basis functions of a depth-{levels} grid"
        ));
    }
    let mut out = dims.to_vec();
    out.resize(dims.len() + (size - used), 1);
    Ok((out, levels))
}

/// `φ^σ_ij = e_κ / √d_σ`, with `κ` running through `σ` in order and then
/// `(i, j)` row-major, on the exact grid of `2^levels` cells.
///
/// Complete exactly when `Σ d_σ² = 2^levels`.
pub fn build_blocked_scalar(
    base: BlockBase,
    params: &SystemParams,
    levels: u32,
) -> Result<QSystemInstance> {
    let space = Arc::new(make_unit_interval_space(levels)?);
    let size = space.len();
    let used = params.entry_count();
    if used > size {
        return Err(invalid!(
            "basis exhausted: Σd² = {used} but the grid has {size} basis functions"
        ));
    }
    let mut kappa = 0;
    let mut eval = Vec::with_capacity(params.len());
    for &d in params.dims() {
        let scale = 1.0 / libm::sqrt(d as f64);
        let mut table = Vec::with_capacity(size * d * d);
        for i in 0..size {
            for e in 0..d * d {
                table.push(base.value(levels, kappa + e, i) * scale);
            }
        }
        kappa += d * d;
        eval.push(table);
    }
    let bound = libm::sqrt(params.max_dim() as f64);
    let recipe = SystemRecipe::BlockedScalar {
        base,
        dims: params.dims().to_vec(),
        levels,
    };
    QSystemInstance::from_parts(
        recipe,
        params.clone(),
        space,
        eval,
        Some(bound),
        used == size,
    )
}
