//! Dense complex matrices, Schatten norms, decompositions and the random
//! matrix ensembles every other module samples from.

mod decomp;
mod exponent;
mod matrix;
mod norms;
pub(crate) use norms::powered_sum;
pub(crate) mod rng;
mod sample;

pub use decomp::{qr, singular_values, svd, Svd};
pub use exponent::Exponent;
pub use matrix::ComplexMatrix;
pub use norms::{kron, lq_norm, schatten_norm, trace_pair, CompensatedSum};
pub use rng::{RngStream, StreamDescriptor};
pub use sample::{gaussian_matrix, haar_orthogonal, haar_unitary, unit_quaternion};
