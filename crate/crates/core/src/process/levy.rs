//! Lévy midpoint construction of Gaussian processes with independent
//! increments on dyadic grids.
//!
//! Node layout: one root draw fixes the total increment over [0, 1]; the
//! node for dyadic cell (k, ℓ) splits that cell's increment between its two
//! halves. Draws are consumed breadth-first, so a deeper tree built from
//! the same stream extends a shallower one without touching its values.

use rand::Rng;
use rand_distr::StandardNormal;

/// Standard normal draws indexing the nodes of a depth-`J` dyadic tree.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGaussians {
    depth: u32,
    pub root: f64,
    /// Breadth-first: node (k, ℓ) at index 2^k − 1 + ℓ, for k < J.
    pub nodes: Vec<f64>,
}

impl NodeGaussians {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, depth: u32) -> Self {
        let root = rng.sample(StandardNormal);
        let nodes = (0..(1usize << depth) - 1).map(|_| rng.sample(StandardNormal)).collect();
        NodeGaussians { depth, root, nodes }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn node(&self, level: u32, cell: usize) -> f64 {
        self.nodes[(1usize << level) - 1 + cell]
    }
}

/// Builds grid values of a process with independent increments whose
/// increment over [a, b] is N(mean, var) with `(mean, var) = moments(a, b)`.
///
/// Each coarse grid value is computed from coarser values only, so it is
/// bit-identical across depths for the same draws.
pub fn levy_values(g: &NodeGaussians, moments: impl Fn(f64, f64) -> (f64, f64)) -> Vec<f64> {
    let depth = g.depth();
    let cells = 1usize << depth;
    let width = 1.0 / cells as f64;
    let mut values = vec![0.0; cells + 1];
    let (m0, v0) = moments(0.0, 1.0);
    values[cells] = m0 + v0.max(0.0).sqrt() * g.root;
    for level in 0..depth {
        let span = cells >> level;
        for cell in 0..(1usize << level) {
            let (i0, i1) = (cell * span, (cell + 1) * span);
            let im = i0 + span / 2;
            let (a, m, b) = (i0 as f64 * width, im as f64 * width, i1 as f64 * width);
            let total = values[i1] - values[i0];
            let (ml, vl) = moments(a, m);
            let (mr, vr) = moments(m, b);
            let v = vl + vr;
            let left = if v > 0.0 {
                ml + vl / v * (total - ml - mr) + (vl * vr / v).max(0.0).sqrt() * g.node(level, cell)
            } else {
                ml
            };
            values[im] = values[i0] + left;
        }
    }
    values
}
