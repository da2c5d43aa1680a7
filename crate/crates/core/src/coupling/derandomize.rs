//! Maximal-coupling correction of a randomized map on finite spaces.
//!
//! Given the law `F′` a map actually produces and the law `F` it should
//! produce, the corrector keeps an output `y` with probability `H(y)/F′(y)`,
//! `H = min(F, F′)`, and otherwise redraws from `(F − H)/(1 − H(total))`.
//! Pushing `F′` through it gives `F`, and an output is changed with
//! probability exactly TV(F, F′).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Probability vector over `m` atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDist {
    probs: Vec<f64>,
}

impl FiniteDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::param("distribution needs at least one atom"));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::param("probabilities must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::param(format!("probabilities sum to {total}, not 1")));
        }
        Ok(FiniteDist { probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::param("weights must have positive total"));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_row(&self.probs, rng.random())
    }
}

/// Row-stochastic `m × m′` matrix; `row(x)` is Q(·|x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteKernel {
    rows: Vec<Vec<f64>>,
    cols: usize,
}

impl FiniteKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::param("kernel needs at least one row and column"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::MismatchedAtoms { left: cols, right: row.len() });
            }
            FiniteDist::new(row.clone())
                .map_err(|e| Error::param(format!("row {i}: {e}")))?;
        }
        Ok(FiniteKernel { rows, cols })
    }

    pub fn identity(m: usize) -> Self {
        let rows = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        FiniteKernel { rows, cols: m }
    }

    /// Deterministic map `x ↦ map[x]` into `cols` atoms.
    pub fn deterministic(map: &[usize], cols: usize) -> Result<Self> {
        let rows = map
            .iter()
            .map(|&y| {
                if y >= cols {
                    return Err(Error::param(format!("image {y} outside {cols} atoms")));
                }
                Ok((0..cols).map(|j| if j == y { 1.0 } else { 0.0 }).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteKernel { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    /// Law of the output when the input has law `p`.
    pub fn pushforward(&self, p: &FiniteDist) -> Result<Vec<f64>> {
        if p.len() != self.rows() {
            return Err(Error::MismatchedAtoms { left: p.len(), right: self.rows() });
        }
        let mut out = vec![0.0; self.cols];
        for (px, row) in p.probs().iter().zip(&self.rows) {
            for (o, k) in out.iter_mut().zip(row) {
                *o += px * k;
            }
        }
        Ok(out)
    }

    /// `self` followed by `next`.
    pub fn compose(&self, next: &FiniteKernel) -> Result<FiniteKernel> {
        if self.cols != next.rows() {
            return Err(Error::MismatchedAtoms { left: self.cols, right: next.rows() });
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = vec![0.0; next.cols];
                for (w, nrow) in row.iter().zip(&next.rows) {
                    if *w != 0.0 {
                        for (o, k) in out.iter_mut().zip(nrow) {
                            *o += w * k;
                        }
                    }
                }
                out
            })
            .collect();
        Ok(FiniteKernel { rows, cols: next.cols })
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        sample_row(&self.rows[x], rng.random())
    }
}

fn sample_row(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = j;
            if u < acc {
                return j;
            }
        }
    }
    last
}

/// Corrector on the output space, the corrected map `Q·C`, and the
/// probability that the corrector moves an output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derandomizer {
    pub corrector: FiniteKernel,
    pub corrected_map: FiniteKernel,
    pub correction_prob: f64,
}

/// Builds the corrector repairing the achieved law `achieved` of `q` to `target`.
pub fn derandomize_kernel(
    target: &FiniteDist,
    achieved: &FiniteDist,
    q: &FiniteKernel,
) -> Result<Derandomizer> {
    let m = target.len();
    if achieved.len() != m {
        return Err(Error::MismatchedAtoms { left: m, right: achieved.len() });
    }
    if q.cols() != m {
        return Err(Error::MismatchedAtoms { left: q.cols(), right: m });
    }
    let (f, fp) = (target.probs(), achieved.probs());
    let h: Vec<f64> = f.iter().zip(fp).map(|(a, b)| a.min(*b)).collect();
    // 1 − H(total) summed from the differences, which avoids cancellation.
    let tv: f64 = f.iter().zip(&h).map(|(a, b)| a - b).sum();
    let corrector = if tv <= 0.0 {
        FiniteKernel::identity(m)
    } else {
        let residual: Vec<f64> = f.iter().zip(&h).map(|(a, b)| (a - b) / tv).collect();
        let rows = (0..m)
            .map(|y| {
                if fp[y] <= 0.0 {
                    return (0..m).map(|j| if j == y { 1.0 } else { 0.0 }).collect();
                }
                let keep = h[y] / fp[y];
                let mut row: Vec<f64> = residual.iter().map(|r| (1.0 - keep) * r).collect();
                row[y] += keep;
                row
            })
            .collect();
        FiniteKernel { rows, cols: m }
    };
    let corrected_map = q.compose(&corrector)?;
    Ok(Derandomizer { corrector, corrected_map, correction_prob: tv })
}

/// One pass through `q` then the corrector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrectedDraw {
    pub uncorrected: usize,
    pub output: usize,
}

impl CorrectedDraw {
    pub fn moved(&self) -> bool {
        self.uncorrected != self.output
    }
}

pub fn apply_corrected_map<R: Rng + ?Sized>(
    x: usize,
    q: &FiniteKernel,
    corrector: &FiniteKernel,
    rng: &mut R,
) -> CorrectedDraw {
    let y = q.sample(x, rng);
    let z = corrector.sample(y, rng);
    CorrectedDraw { uncorrected: y, output: z }
}
