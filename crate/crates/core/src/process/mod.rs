//! Gaussian target processes on dyadic grids and BV functionals of paths.

mod bv;
mod gaussian;
pub mod levy;
mod path;

pub use bv::{integrate_bv, BvFunction, BvIntegral};
pub use gaussian::{
    gaussian_bridge, gaussian_cdf_process, white_noise_drift_path, wiener_path,
    DEGENERATE_NORMALIZER, MAX_PATH_DEPTH,
};
pub(crate) use gaussian::gaussian_cdf_values;
pub use path::{fmt17, DyadicPath, PathKind};
