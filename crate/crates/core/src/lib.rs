//! Strong approximation laboratory.
//!
//! Builds, couples and checks the approximations between empirical
//! processes (fixed-size iid samples and inhomogeneous Poisson processes)
//! and their Gaussian targets: the Gaussian bridge `B̂_n` of the KMT
//! construction and the white noise `W̃_n` with drift `√f`.
//!
//! Module map:
//!
//! * [`function_spaces`]: piecewise-polynomial densities, Haar pyramids,
//!   Besov / Lipschitz / Sobolev norms and the smoothness assumptions.
//! * [`process`]: Gaussian target paths on dyadic grids and
//!   bounded-variation functionals of paths.
//! * [`samplers`]: iid and Poisson-process samples, empirical CDFs and
//!   empirical bridges.
//! * [`coupling`]: quantile couplings, count trees, the two dyadic
//!   coupling constructions and the maximal-coupling corrector.
//! * [`metrics`]: sup distances, exceedance curves, rate fits, total
//!   variation and Hellinger bounds.
//! * [`rng`]: counter-based seed streams for reproducible replication.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod error;
pub mod function_spaces;
pub mod gof;
pub mod metrics;
pub mod normal;
pub mod process;
pub mod rng;
pub mod samplers;

pub use coupling::{
    apply_corrected_map, build_count_tree, couple_empirical_to_bridge,
    couple_poisson_to_rootwhite, derandomize_kernel, quantile_couple_binomial,
    quantile_couple_poisson, variance_stabilize, CorrectionDetail, CoupledPair, CountTree,
    Derandomizer, FiniteDist, FiniteKernel,
};
pub use error::{Error, Result};
pub use function_spaces::{
    besov_norm, check_assumption, haar_approximants, lipschitz_norm, sobolev_norm, Assumption,
    AssumptionParams, AssumptionReport, DensitySpec, HaarPyramid, PiecewisePoly,
};
pub use metrics::{
    exceedance, rate_fit, sup_distance, tv_finite, tv_product_bound, ExceedanceCurve, Law1d,
    RateFit,
};
pub use process::{
    gaussian_bridge, gaussian_cdf_process, integrate_bv, white_noise_drift_path, wiener_path,
    BvFunction, DyadicPath, PathKind,
};
pub use rng::{seed_stream, StreamRole, StreamRng};
pub use samplers::{
    bridge_functional, empirical_bridge, empirical_cdf, sample_iid, sample_poisson_process,
    Sample, SampleMode,
};

/// Crate version, stamped into experiment outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest supported dyadic depth for grids and pyramids.
pub const MAX_DEPTH: u32 = 30;

/// Default grid depth for `n` observations: `⌈log₂ n⌉ + 2`.
pub fn default_depth(n: u64) -> u32 {
    let n = n.max(1);
    let ceil_log2 = 64 - (n - 1).leading_zeros();
    ceil_log2 + 2
}
