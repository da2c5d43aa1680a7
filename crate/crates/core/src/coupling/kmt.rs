use rand::Rng;

use super::pair::{CorrectionDetail, CoupledPair};
use super::quantile::{quantile_couple_binomial, quantile_couple_poisson, MAX_BINOMIAL_SIZE};
use super::tree::{counts_to_bridge, split_probabilities};
use crate::error::{Error, Result};
use crate::function_spaces::DensitySpec;
use crate::process::levy::NodeGaussians;
use crate::process::{gaussian_bridge, gaussian_cdf_values, DyadicPath, PathKind, MAX_PATH_DEPTH};

/// Resamples allowed before a degenerate bridge normalizer becomes an error.
const MAX_RESAMPLES: u32 = 64;

pub(crate) fn check_coupler_args(n: u64, depth: u32) -> Result<()> {
    if n < 4 {
        return Err(Error::param(format!("couplers need n ≥ 4, got {n}")));
    }
    if depth == 0 || depth > MAX_PATH_DEPTH {
        return Err(Error::DepthTooLarge { depth, max: MAX_PATH_DEPTH });
    }
    Ok(())
}

/// Leaf counts from a root count and binomial splits, each split quantile-
/// coupled to its node's Gaussian.
pub(crate) fn split_counts(root: u64, split_p: &[Vec<f64>], g: &NodeGaussians) -> Result<Vec<u64>> {
    if root > MAX_BINOMIAL_SIZE {
        return Err(Error::param(format!("count {root} above the binomial limit {MAX_BINOMIAL_SIZE}")));
    }
    let mut counts = vec![root];
    for (level, probs) in split_p.iter().enumerate() {
        let mut next = Vec::with_capacity(2 * counts.len());
        for (cell, (&c, &p)) in counts.iter().zip(probs).enumerate() {
            let (left, _) = quantile_couple_binomial(c, p, g.node(level as u32, cell));
            next.push(left);
            next.push(c - left);
        }
        counts = next;
    }
    Ok(counts)
}

/// Dyadic coupling of the empirical bridge Ẑ_n of `n` iid draws from `f` to
/// the Gaussian bridge B̂_n, on the depth-`depth` grid.
///
/// One standard normal per tree node drives both sides: it splits the
/// parent count binomially (by quantile coupling) and splits the matching
/// increment of Ŵ_n (by conditional Gaussian refinement). The root draw only
/// enters Ŵ_n(1), which the bridge normalizes away. Draws with a degenerate
/// normalizer are discarded and counted.
pub fn couple_empirical_to_bridge<R: Rng + ?Sized>(
    f: &DensitySpec,
    n: u64,
    depth: u32,
    rng: &mut R,
) -> Result<CoupledPair> {
    check_coupler_args(n, depth)?;
    let split_p = split_probabilities(f, depth);
    let mut detail = CorrectionDetail { total_count: n, ..Default::default() };
    loop {
        let g = NodeGaussians::draw(rng, depth);
        let w = DyadicPath::new(depth, gaussian_cdf_values(f, n, &g), PathKind::CdfLike)?;
        let bridge = match gaussian_bridge(&w, f) {
            Ok(b) => b,
            Err(Error::DegenerateNormalizer { .. }) if detail.degenerate_resamples < MAX_RESAMPLES => {
                detail.degenerate_resamples += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let leaves = split_counts(n, &split_p, &g)?;
        let empirical = counts_to_bridge(&leaves, f, n)?;
        return CoupledPair::new(empirical, bridge, n, false, detail);
    }
}

/// Poissonized variant: root N ~ Poisson(n) quantile-coupled to the root
/// draw, the same node splits below it, and the Gaussian partner Ŵ_n − F
/// (not renormalized, since Ẑ_n(1) = N/n − 1 is not pinned).
pub fn couple_poisson_to_gaussian<R: Rng + ?Sized>(
    f: &DensitySpec,
    n: u64,
    depth: u32,
    rng: &mut R,
) -> Result<CoupledPair> {
    check_coupler_args(n, depth)?;
    let split_p = split_probabilities(f, depth);
    let g = NodeGaussians::draw(rng, depth);
    let (root, _) = quantile_couple_poisson(n as f64, g.root)?;
    let leaves = split_counts(root, &split_p, &g)?;
    let empirical = counts_to_bridge(&leaves, f, n)?;
    let w = DyadicPath::new(depth, gaussian_cdf_values(f, n, &g), PathKind::CdfLike)?;
    let cells = w.cells() as f64;
    let centred = DyadicPath::new(
        depth,
        w.values().iter().enumerate().map(|(i, v)| v - f.cdf_unchecked(i as f64 / cells)).collect(),
        PathKind::Bridge,
    )?;
    let detail = CorrectionDetail { total_count: root, ..Default::default() };
    CoupledPair::new(empirical, centred, n, false, detail)
}
