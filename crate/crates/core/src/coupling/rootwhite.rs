//! Coupling of the Poisson-process functional Z̃_n to the white noise with
//! drift W̃_n(t) = G(t) + W(t)/(2√n), G = ∫√f.
//!
//! Work in square-root units on the depth-J grid with `K = 2^J` cells:
//! the count `C_j` of cell j is Poisson(λ_j), `λ_j = n·F(cell j)`, and Z̃_n
//! has increments `√(C_j/(nK))`. The increment of W̃_n times `√(nK)` is
//! N(μ_j, ¼) with `μ_j = √(nK)·G(cell j)`. Binning that Gaussian on the
//! stabilized lattice gives a target law on counts.
//!
//! The counts come from the quantile-coupled tree. A joint maximal-coupling
//! corrector then keeps the realized lattice state with probability
//! `min(1, Π target/achieved)` and otherwise redraws it from the residual
//! law by rejection from the target. The Gaussian increment is drawn inside
//! the final lattice bin, so W̃_n has exactly its Gaussian law and agrees with
//! Z̃_n on every lattice coordinate unless the corrector fired.

use rand::Rng;

use super::kmt::{check_coupler_args, split_counts};
use super::lattice::{bin_lower, bin_upper, gaussian_bin_mass, lattice_bin};
use super::pair::{CorrectionDetail, CoupledPair};
use super::quantile::{poisson_pmf, quantile_couple_poisson};
use super::tree::split_probabilities;
use crate::error::{Error, Result};
use crate::function_spaces::DensitySpec;
use crate::metrics::Law1d;
use crate::normal;
use crate::process::levy::NodeGaussians;
use crate::process::{DyadicPath, PathKind};
use rand_distr::StandardNormal;

/// Cap on residual proposals; reaching it means the residual mass is
/// numerically zero.
const MAX_PROPOSALS: u32 = 10_000_000;

/// `2(√count − √expected)/√(4nK)`: the centred square-root increment in the
/// units of W̃_n, so that for `count ~ Poisson(expected)` the variance is
/// about `1/(4nK)`, the variance of a W̃_n increment over one of K cells.
pub fn variance_stabilize(count: u64, expected: f64, cells: u64, n: u64) -> Result<f64> {
    if !(expected > 0.0) {
        return Err(Error::param(format!("expected count must be positive, got {expected}")));
    }
    if cells == 0 || n == 0 {
        return Err(Error::param("cells and n must be positive"));
    }
    let normalizer = (4.0 * n as f64 * cells as f64).sqrt();
    Ok(2.0 * ((count as f64).sqrt() - expected.sqrt()) / normalizer)
}

/// Per-cell (achieved, target) laws in square-root units.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLaw {
    /// λ_j = n·F(cell j).
    pub lambda: f64,
    /// μ_j = √(nK)·G(cell j).
    pub mu: f64,
}

impl CellLaw {
    pub fn achieved(&self) -> Law1d {
        Law1d::SqrtPoisson { lambda: self.lambda }
    }

    pub fn target(&self) -> Law1d {
        Law1d::Gaussian { mean: self.mu, sd: 0.5 }
    }

    fn log_achieved(&self, c: u64) -> f64 {
        if self.lambda > 0.0 {
            poisson_pmf(self.lambda, c).ln()
        } else if c == 0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    fn log_target(&self, c: u64) -> f64 {
        gaussian_bin_mass(self.mu, 0.5, c).ln()
    }
}

pub fn rootwhite_cell_laws(f: &DensitySpec, n: u64, depth: u32) -> Vec<CellLaw> {
    let cells = 1usize << depth;
    let scale = (n as f64 * cells as f64).sqrt();
    (0..cells)
        .map(|j| {
            let (a, b) = (j as f64 / cells as f64, (j + 1) as f64 / cells as f64);
            CellLaw { lambda: n as f64 * f.mass(a, b), mu: scale * f.root_mass(a, b) }
        })
        .collect()
}

fn cumulative(increments: impl Iterator<Item = f64>, cells: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(cells + 1);
    let mut acc = 0.0;
    v.push(0.0);
    for x in increments {
        acc += x;
        v.push(acc);
    }
    v
}

/// Completes the root-white coupling from realized leaf counts.
pub fn couple_rootwhite_given_counts<R: Rng + ?Sized>(
    f: &DensitySpec,
    n: u64,
    leaves: &[u64],
    rng: &mut R,
) -> Result<CoupledPair> {
    let cells = leaves.len();
    if cells < 2 || !cells.is_power_of_two() {
        return Err(Error::param("leaf count must be a power of two, at least 2"));
    }
    let depth = cells.trailing_zeros();
    let laws = rootwhite_cell_laws(f, n, depth);
    for (j, (&c, law)) in leaves.iter().zip(&laws).enumerate() {
        if c > 0 && law.lambda <= 0.0 {
            return Err(Error::ImpossibleMass {
                left: j as f64 / cells as f64,
                right: (j + 1) as f64 / cells as f64,
                count: c,
            });
        }
    }
    let scale = 1.0 / (n as f64 * cells as f64).sqrt();
    let discrete = cumulative(leaves.iter().map(|&c| (c as f64).sqrt() * scale), cells);

    let log_ratio: f64 =
        leaves.iter().zip(&laws).map(|(&c, l)| l.log_target(c) - l.log_achieved(c)).sum();
    let keep_probability = log_ratio.min(0.0).exp();
    let total_count = leaves.iter().sum();
    let mut detail =
        CorrectionDetail { total_count, keep_probability: Some(keep_probability), ..Default::default() };

    let kept = rng.random::<f64>() < keep_probability;
    let roots: Vec<f64> = if kept {
        leaves
            .iter()
            .zip(&laws)
            .map(|(&c, l)| {
                let (a, b) = ((bin_lower(c) - l.mu) / 0.5, (bin_upper(c) - l.mu) / 0.5);
                l.mu + 0.5 * normal::truncated_quantile(a, b, rng.random::<f64>())
            })
            .collect()
    } else {
        let mut proposals = 0;
        loop {
            if proposals >= MAX_PROPOSALS {
                return Err(Error::param("residual law has numerically zero mass"));
            }
            proposals += 1;
            let s: Vec<f64> =
                laws.iter().map(|l| l.mu + 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
            let log_back: f64 = s
                .iter()
                .zip(&laws)
                .map(|(&x, l)| {
                    let c = lattice_bin(x);
                    l.log_achieved(c) - l.log_target(c)
                })
                .sum();
            let accept = -log_back.min(0.0).exp_m1();
            if rng.random::<f64>() < accept {
                detail.residual_proposals = proposals;
                detail.cells_moved =
                    s.iter().zip(leaves).filter(|(x, &c)| lattice_bin(**x) != c).count() as u32;
                break s;
            }
        }
    };
    let gaussian = cumulative(
        roots.iter().zip(&laws).map(|(s, _)| s * scale),
        cells,
    );
    let discrete = DyadicPath::new(depth, discrete, PathKind::WhiteNoise)?;
    let gaussian = DyadicPath::new(depth, gaussian, PathKind::WhiteNoise)?;
    CoupledPair::new(discrete, gaussian, n, !kept, detail)
}

/// Root-white coupling of a Poisson process with intensity `n·f` at depth
/// `depth`: root count quantile-coupled to a root Gaussian, binomial splits
/// from node Gaussians, then the lattice corrector.
pub fn couple_poisson_to_rootwhite<R: Rng + ?Sized>(
    f: &DensitySpec,
    n: u64,
    depth: u32,
    rng: &mut R,
) -> Result<CoupledPair> {
    check_coupler_args(n, depth)?;
    let g = NodeGaussians::draw(rng, depth);
    let (root, _) = quantile_couple_poisson(n as f64, g.root)?;
    let leaves = split_counts(root, &split_probabilities(f, depth), &g)?;
    couple_rootwhite_given_counts(f, n, &leaves, rng)
}
