use serde::{Deserialize, Serialize};

use super::quantile::P_GUARD;
use crate::error::{Error, Result};
use crate::function_spaces::DensitySpec;
use crate::process::{DyadicPath, PathKind};
use crate::samplers::Sample;
use crate::MAX_DEPTH;

/// Dyadic count tree: `counts[k][ℓ]` is the number of observations in cell
/// `(ℓ 2^{−k}, (ℓ+1) 2^{−k}]` (cell 0 also holds 0), and `split_p[k][ℓ]` is
/// the F-conditional probability of the left child for `k < depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTree {
    depth: u32,
    counts: Vec<Vec<u64>>,
    split_p: Vec<Vec<f64>>,
}

/// Left-child probabilities from exact F-masses, clamped to the guard band.
/// Cells of zero mass get 1/2.
pub(crate) fn split_probabilities(f: &DensitySpec, depth: u32) -> Vec<Vec<f64>> {
    let cells = 1usize << depth;
    let leaf: Vec<f64> = (0..cells)
        .map(|i| f.mass(i as f64 / cells as f64, (i + 1) as f64 / cells as f64))
        .collect();
    let mut masses = vec![leaf];
    for _ in 0..depth {
        let finer = masses.last().unwrap();
        masses.push(finer.chunks(2).map(|c| c[0] + c[1]).collect());
    }
    masses.reverse();
    (0..depth as usize)
        .map(|k| {
            masses[k]
                .iter()
                .enumerate()
                .map(|(l, &parent)| {
                    if parent > 0.0 {
                        (masses[k + 1][2 * l] / parent).clamp(P_GUARD, 1.0 - P_GUARD)
                    } else {
                        0.5
                    }
                })
                .collect()
        })
        .collect()
}

/// Leaf cell of `x` at `cells` cells, with cells closed on the right.
pub(crate) fn leaf_cell(x: f64, cells: usize) -> usize {
    ((x * cells as f64).ceil() as usize).clamp(1, cells) - 1
}

impl CountTree {
    /// Builds the tree from leaf counts; fails if a zero-mass leaf is occupied.
    pub fn from_leaf_counts(leaves: Vec<u64>, f: &DensitySpec) -> Result<Self> {
        let cells = leaves.len();
        if cells < 2 || !cells.is_power_of_two() {
            return Err(Error::param("leaf count must be a power of two, at least 2"));
        }
        let depth = cells.trailing_zeros();
        if depth > MAX_DEPTH {
            return Err(Error::DepthTooLarge { depth, max: MAX_DEPTH });
        }
        for (i, &c) in leaves.iter().enumerate() {
            let (a, b) = (i as f64 / cells as f64, (i + 1) as f64 / cells as f64);
            if c > 0 && f.mass(a, b) <= 0.0 {
                return Err(Error::ImpossibleMass { left: a, right: b, count: c });
            }
        }
        let mut counts = vec![leaves];
        for _ in 0..depth {
            let finer = counts.last().unwrap();
            counts.push(finer.chunks(2).map(|c| c[0] + c[1]).collect());
        }
        counts.reverse();
        Ok(CountTree { depth, counts, split_p: split_probabilities(f, depth) })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn root(&self) -> u64 {
        self.counts[0][0]
    }

    pub fn count(&self, level: u32, cell: usize) -> u64 {
        self.counts[level as usize][cell]
    }

    pub fn level(&self, level: u32) -> &[u64] {
        &self.counts[level as usize]
    }

    pub fn leaf_counts(&self) -> &[u64] {
        &self.counts[self.depth as usize]
    }

    /// Left-split probability of node (level, cell), level < depth.
    pub fn split_p(&self, level: u32, cell: usize) -> f64 {
        self.split_p[level as usize][cell]
    }

    /// Grid path `(#obs ≤ t_i)/n − F(t_i)`.
    pub fn to_bridge(&self, f: &DensitySpec, nominal_n: u64) -> Result<DyadicPath> {
        counts_to_bridge(self.leaf_counts(), f, nominal_n)
    }
}

pub(crate) fn counts_to_bridge(leaves: &[u64], f: &DensitySpec, nominal_n: u64) -> Result<DyadicPath> {
    let cells = leaves.len();
    let n = nominal_n as f64;
    let mut values = Vec::with_capacity(cells + 1);
    let mut acc = 0u64;
    values.push(-f.cdf_unchecked(0.0));
    for (i, &c) in leaves.iter().enumerate() {
        acc += c;
        values.push(acc as f64 / n - f.cdf_unchecked((i + 1) as f64 / cells as f64));
    }
    DyadicPath::new(cells.trailing_zeros(), values, PathKind::Bridge)
}

/// Count tree of a sample at depth `depth`.
pub fn build_count_tree(s: &Sample, f: &DensitySpec, depth: u32) -> Result<CountTree> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::DepthTooLarge { depth, max: MAX_DEPTH });
    }
    let cells = 1usize << depth;
    let mut leaves = vec![0u64; cells];
    for &x in s.observations() {
        leaves[leaf_cell(x, cells)] += 1;
    }
    CountTree::from_leaf_counts(leaves, f)
}
