//! Densities on [0, 1] and the function-space machinery around them.

mod assumptions;
mod density;
pub mod family;
mod haar;
mod norms;
mod poly;
pub mod quadrature;
pub mod text;

pub use assumptions::{check_assumption, Assumption, AssumptionParams, AssumptionReport};
pub use density::DensitySpec;
pub use haar::{haar_approximants, HaarPyramid};
pub use norms::{besov_norm, fourier_coefficient, lipschitz_norm, sobolev_norm, BesovValue, DEFAULT_BESOV_LEVELS};
pub use poly::{Cubic, PiecewisePoly};
pub(crate) use poly::{gauss_legendre4, horner};
