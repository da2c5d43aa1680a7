use rand::Rng;

use super::levy::{levy_values, NodeGaussians};
use super::path::{DyadicPath, PathKind};
use crate::error::{Error, Result};
use crate::function_spaces::DensitySpec;

/// Largest depth for generated Gaussian paths.
pub const MAX_PATH_DEPTH: u32 = 24;

/// |Ŵ_n(1)| at or below this is treated as a degenerate bridge normalizer.
pub const DEGENERATE_NORMALIZER: f64 = 1e-6;

fn check_depth(depth: u32) -> Result<()> {
    if depth > MAX_PATH_DEPTH {
        Err(Error::DepthTooLarge { depth, max: MAX_PATH_DEPTH })
    } else {
        Ok(())
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::param("n must be at least 1"))
    } else {
        Ok(())
    }
}

/// Standard Wiener process by midpoint refinement.
pub fn wiener_path<R: Rng + ?Sized>(rng: &mut R, depth: u32) -> Result<DyadicPath> {
    check_depth(depth)?;
    let g = NodeGaussians::draw(rng, depth);
    DyadicPath::new(depth, levy_values(&g, |a, b| (0.0, b - a)), PathKind::WhiteNoise)
}

/// W̃_n(t) = G(t) + W(t)/(2√n), with G the root CDF of f.
pub fn white_noise_drift_path<R: Rng + ?Sized>(
    f: &DensitySpec,
    n: u64,
    rng: &mut R,
    depth: u32,
) -> Result<DyadicPath> {
    check_n(n)?;
    let w = wiener_path(rng, depth)?;
    let scale = 0.5 / (n as f64).sqrt();
    let mut values = Vec::with_capacity(w.values().len());
    for (i, &wv) in w.values().iter().enumerate() {
        values.push(f.root_cdf(w.t(i))? + scale * wv);
    }
    DyadicPath::new(depth, values, PathKind::WhiteNoise)
}

/// Ŵ_n from given node draws: independent increments with mean F(t) − F(s)
/// and variance (F(t) − F(s))/n.
pub(crate) fn gaussian_cdf_values(f: &DensitySpec, n: u64, g: &NodeGaussians) -> Vec<f64> {
    let inv_n = 1.0 / n as f64;
    levy_values(g, |a, b| {
        let m = f.mass(a, b);
        (m, m * inv_n)
    })
}

/// Gaussian CDF process Ŵ_n with mean F and local variance f/n.
pub fn gaussian_cdf_process<R: Rng + ?Sized>(
    f: &DensitySpec,
    n: u64,
    rng: &mut R,
    depth: u32,
) -> Result<DyadicPath> {
    check_n(n)?;
    check_depth(depth)?;
    let g = NodeGaussians::draw(rng, depth);
    DyadicPath::new(depth, gaussian_cdf_values(f, n, &g), PathKind::CdfLike)
}

/// B̂_n(t) = Ŵ_n(t)/Ŵ_n(1) − F(t).
pub fn gaussian_bridge(w: &DyadicPath, f: &DensitySpec) -> Result<DyadicPath> {
    let norm = w.last();
    if !(norm.abs() > DEGENERATE_NORMALIZER) {
        return Err(Error::DegenerateNormalizer { value: norm });
    }
    let cells = w.cells();
    let values = w
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| v / norm - f.cdf_unchecked(i as f64 / cells as f64))
        .collect();
    DyadicPath::new(w.depth(), values, PathKind::Bridge)
}
