//! Quantized orthonormal systems: construction and audits.
//!
//! A system is stored as its evaluations `φ^σ(ω)` at every point of a
//! [`SampleSpace`]: one flat, point-major array of `d_σ × d_σ` row-major
//! blocks per index `σ`.

mod audit;
mod blocked;
mod groups;
mod random;
mod su2;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::matcore::{ComplexMatrix, StreamDescriptor};
use crate::spaces::SampleSpace;

pub use audit::{uniform_bound, verify_orthonormality, DefectReport, EntryIndex};
pub use blocked::{build_blocked_scalar, complete_dims, BlockBase, DEFAULT_LEVELS};
pub use groups::{build_finite_group_dual, FiniteGroup, MAX_CYCLIC_ORDER};
pub use random::{
    build_gaussian, build_rademacher, build_sign_enumeration, build_steinhaus, MAX_SIGN_COUNT,
    MIN_MONTE_CARLO_SAMPLES,
};
pub use su2::{build_su2_dual, su2_matrix, wigner_d, MAX_TWICE_J};

/// The index set `Σ` with its dimensions `d_σ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemParams {
    sigma_ids: Vec<String>,
    dims: Vec<usize>,
}

impl SystemParams {
    pub fn new(sigma_ids: Vec<String>, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(invalid!("a system needs at least one index"));
        }
        if sigma_ids.len() != dims.len() {
            return Err(invalid!(
                "{} ids for {} dimensions",
                sigma_ids.len(),
                dims.len()
            ));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(invalid!("index {} has dimension 0", sigma_ids[pos]));
        }
        for (i, id) in sigma_ids.iter().enumerate() {
            if sigma_ids[..i].contains(id) {
                return Err(invalid!("duplicate index id {id}"));
            }
        }
        Ok(Self { sigma_ids, dims })
    }

    /// Ids `1, 2, …` for the given dimensions.
    pub fn from_dims(dims: &[usize]) -> Result<Self> {
        Self::new(
            (1..=dims.len()).map(|i| i.to_string()).collect(),
            dims.to_vec(),
        )
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, sigma: usize) -> usize {
        self.dims[sigma]
    }

    pub fn sigma_ids(&self) -> &[String] {
        &self.sigma_ids
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.sigma_ids.iter().position(|s| s == id)
    }

    /// `Σ_σ d_σ²`, the number of scalar entries.
    pub fn entry_count(&self) -> usize {
        self.dims.iter().map(|d| d * d).sum()
    }

    pub fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut ids = Vec::with_capacity(indices.len());
        let mut dims = Vec::with_capacity(indices.len());
        for &s in indices {
            if s >= self.len() {
                return Err(invalid!("index position {s} out of range"));
            }
            ids.push(self.sigma_ids[s].clone());
            dims.push(self.dims[s]);
        }
        Self::new(ids, dims)
    }
}

/// How an instance was built; enough to rebuild it bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SystemRecipe {
    GroupDual {
        group: FiniteGroup,
    },
    Su2Dual {
        twice_j_max: u32,
        samples: usize,
        seed: StreamDescriptor,
    },
    Rademacher {
        dims: Vec<usize>,
        samples: usize,
        seed: StreamDescriptor,
    },
    Steinhaus {
        dims: Vec<usize>,
        samples: usize,
        seed: StreamDescriptor,
    },
    Gaussian {
        dims: Vec<usize>,
        samples: usize,
        seed: StreamDescriptor,
    },
    SignEnumeration {
        count: usize,
    },
    BlockedScalar {
        base: BlockBase,
        dims: Vec<usize>,
        levels: u32,
    },
    /// Restriction of another system to a subset of its indices.
    Restricted {
        parent: alloc::boxed::Box<SystemRecipe>,
        indices: Vec<usize>,
    },
}

impl SystemRecipe {
    pub fn build(&self) -> Result<QSystemInstance> {
        use crate::matcore::RngStream;
        match self {
            SystemRecipe::GroupDual { group } => build_finite_group_dual(*group),
            SystemRecipe::Su2Dual {
                twice_j_max,
                samples,
                seed,
            } => build_su2_dual(*twice_j_max, *samples, &RngStream::from_descriptor(*seed)),
            SystemRecipe::Rademacher {
                dims,
                samples,
                seed,
            } => build_rademacher(
                &SystemParams::from_dims(dims)?,
                *samples,
                &RngStream::from_descriptor(*seed),
            ),
            SystemRecipe::Steinhaus {
                dims,
                samples,
                seed,
            } => build_steinhaus(
                &SystemParams::from_dims(dims)?,
                *samples,
                &RngStream::from_descriptor(*seed),
            ),
            SystemRecipe::Gaussian {
                dims,
                samples,
                seed,
            } => build_gaussian(
                &SystemParams::from_dims(dims)?,
                *samples,
                &RngStream::from_descriptor(*seed),
            ),
            SystemRecipe::SignEnumeration { count } => build_sign_enumeration(*count),
            SystemRecipe::BlockedScalar { base, dims, levels } => {
                build_blocked_scalar(*base, &SystemParams::from_dims(dims)?, *levels)
            }
            SystemRecipe::Restricted { parent, indices } => parent.build()?.restrict(indices),
        }
    }

    /// Short human-readable name.
    pub fn label(&self) -> String {
        match self {
            SystemRecipe::GroupDual { group } => format!("{}-dual", group.name()),
            SystemRecipe::Su2Dual { twice_j_max, .. } => format!("su2-dual(2j<={twice_j_max})"),
            SystemRecipe::Rademacher { .. } => "rademacher".into(),
            SystemRecipe::Steinhaus { .. } => "steinhaus".into(),
            SystemRecipe::Gaussian { .. } => "gaussian".into(),
            SystemRecipe::SignEnumeration { count } => format!("sign-enumeration({count})"),
            SystemRecipe::BlockedScalar { base, .. } => format!("{}-blocked", base.name()),
            SystemRecipe::Restricted { parent, .. } => format!("{}|restricted", parent.label()),
        }
    }
}

/// A quantized orthonormal system sampled on a finite space.
#[derive(Clone, Debug)]
pub struct QSystemInstance {
    recipe: SystemRecipe,
    params: SystemParams,
    space: Arc<SampleSpace>,
    eval: Vec<Vec<Complex64>>,
    declared_bound: Option<f64>,
    is_complete: bool,
    /// Entries of the system are orthonormal by construction in the
    /// population sense (random ensembles), even though the sampled Gram
    /// matrix is only approximately the identity.
    orthonormal_by_construction: bool,
}

impl QSystemInstance {
    pub(crate) fn from_parts(
        recipe: SystemRecipe,
        params: SystemParams,
        space: Arc<SampleSpace>,
        eval: Vec<Vec<Complex64>>,
        declared_bound: Option<f64>,
        is_complete: bool,
    ) -> Result<Self> {
        if eval.len() != params.len() {
            return Err(invalid!(
                "evaluation table has {} indices, params {}",
                eval.len(),
                params.len()
            ));
        }
        for (s, table) in eval.iter().enumerate() {
            let d = params.dim(s);
            if table.len() != space.len() * d * d {
                return Err(invalid!(
                    "evaluation table for index {s} has the wrong size"
                ));
            }
        }
        let orthonormal_by_construction = !space.is_exact();
        Ok(Self {
            recipe,
            params,
            space,
            eval,
            declared_bound,
            is_complete,
            orthonormal_by_construction,
        })
    }

    pub fn recipe(&self) -> &SystemRecipe {
        &self.recipe
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn declared_bound(&self) -> Option<f64> {
        self.declared_bound
    }

    pub fn is_uniformly_bounded(&self) -> bool {
        self.declared_bound.is_some()
    }

    pub fn is_complete(&self) -> bool {
        self.is_complete
    }

    pub fn orthonormal_by_construction(&self) -> bool {
        self.orthonormal_by_construction
    }

    /// Number of basis functions the system spans, `Σ d_σ²`.
    pub fn span_dim(&self) -> usize {
        self.params.entry_count()
    }

    pub fn point_count(&self) -> usize {
        self.space.len()
    }

    /// `φ^σ(ω)` as a row-major `d_σ²` slice.
    #[inline]
    pub fn block(&self, sigma: usize, point: usize) -> &[Complex64] {
        let d = self.params.dim(sigma);
        &self.eval[sigma][point * d * d..(point + 1) * d * d]
    }

    #[inline]
    pub fn entry(&self, sigma: usize, point: usize, i: usize, j: usize) -> Complex64 {
        let d = self.params.dim(sigma);
        self.eval[sigma][(point * d + i) * d + j]
    }

    pub fn matrix(&self, sigma: usize, point: usize) -> ComplexMatrix {
        let d = self.params.dim(sigma);
        ComplexMatrix::new(d, d, self.block(sigma, point).to_vec())
            .expect("stored blocks are finite")
    }

    /// The system restricted to the indices at `indices` (in that order).
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        let params = self.params.subset(indices)?;
        let eval = indices.iter().map(|&s| self.eval[s].clone()).collect();
        let mut out = Self::from_parts(
            SystemRecipe::Restricted {
                parent: alloc::boxed::Box::new(self.recipe.clone()),
                indices: indices.to_vec(),
            },
            params,
            self.space.clone(),
            eval,
            self.declared_bound,
            false,
        )?;
        out.orthonormal_by_construction = self.orthonormal_by_construction;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(SystemParams::from_dims(&[]).is_err());
        assert!(SystemParams::from_dims(&[1, 0]).is_err());
        assert!(SystemParams::new(alloc::vec!["a".into(), "a".into()], alloc::vec![1, 1]).is_err());
        let p = SystemParams::from_dims(&[1, 2, 3]).unwrap();
        assert_eq!(p.entry_count(), 14);
        assert_eq!(p.position("2"), Some(1));
        assert_eq!(p.subset(&[2, 0]).unwrap().dims(), &[3, 1]);
    }

    #[test]
    fn recipes_rebuild_identically() {
        use crate::matcore::RngStream;
        let params = SystemParams::from_dims(&[1, 2]).unwrap();
        let sys = build_rademacher(&params, 1000, &RngStream::new(4, 2)).unwrap();
        let again = sys.recipe().build().unwrap();
        assert_eq!(sys.eval, again.eval);
        let r = sys.restrict(&[1]).unwrap();
        assert_eq!(r.recipe().build().unwrap().eval, r.eval);
    }
}
