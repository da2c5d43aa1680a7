//! Couplings of empirical and Poisson processes to Gaussian targets, and the
//! finite-space maximal-coupling corrector.

mod derandomize;
mod kmt;
pub mod lattice;
mod pair;
pub mod quantile;
mod rootwhite;
mod tree;

pub use derandomize::{
    apply_corrected_map, derandomize_kernel, CorrectedDraw, Derandomizer, FiniteDist, FiniteKernel,
};
pub use kmt::{couple_empirical_to_bridge, couple_poisson_to_gaussian};
pub use pair::{CorrectionDetail, CoupledPair, PairMetadata};
pub use quantile::{quantile_couple_binomial, quantile_couple_poisson};
pub use rootwhite::{
    couple_poisson_to_rootwhite, couple_rootwhite_given_counts, rootwhite_cell_laws,
    variance_stabilize, CellLaw,
};
pub use tree::{build_count_tree, CountTree};
