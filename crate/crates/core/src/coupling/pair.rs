use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::sup_distance;
use crate::process::{fmt17, DyadicPath};

/// What the coupler had to do beyond the plain construction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrectionDetail {
    /// Gaussian draws discarded because the bridge normalizer was degenerate.
    pub degenerate_resamples: u32,
    /// Realized total count (n in iid mode).
    pub total_count: u64,
    /// Probability the corrector keeps the realized lattice state.
    pub keep_probability: Option<f64>,
    /// Proposals drawn from the target before the residual draw was accepted.
    pub residual_proposals: u32,
    /// Cells whose lattice value the corrector changed.
    pub cells_moved: u32,
}

/// A discrete path and its Gaussian partner, built from the same draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledPair {
    pub discrete: DyadicPath,
    pub gaussian: DyadicPath,
    pub n: u64,
    pub sup: f64,
    pub argmax: f64,
    pub corrected: bool,
    pub detail: CorrectionDetail,
}

/// One-line summary of a pair, for JSON records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMetadata {
    pub n: u64,
    pub depth: u32,
    pub sup: f64,
    pub argmax: f64,
    pub corrected: bool,
    pub detail: CorrectionDetail,
}

impl CoupledPair {
    pub fn new(
        discrete: DyadicPath,
        gaussian: DyadicPath,
        n: u64,
        corrected: bool,
        detail: CorrectionDetail,
    ) -> Result<Self> {
        let (sup, argmax) = sup_distance(&discrete, &gaussian)?;
        Ok(CoupledPair { discrete, gaussian, n, sup, argmax, corrected, detail })
    }

    pub fn depth(&self) -> u32 {
        self.discrete.depth()
    }

    /// `sup` recomputed from the paths.
    pub fn recompute_sup(&self) -> f64 {
        sup_distance(&self.discrete, &self.gaussian).map(|r| r.0).unwrap_or(f64::NAN)
    }

    pub fn metadata(&self) -> PairMetadata {
        PairMetadata {
            n: self.n,
            depth: self.depth(),
            sup: self.sup,
            argmax: self.argmax,
            corrected: self.corrected,
            detail: self.detail.clone(),
        }
    }

    /// `t,discrete,gaussian` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,discrete,gaussian\n");
        for (i, (a, b)) in self.discrete.values().iter().zip(self.gaussian.values()).enumerate() {
            out.push_str(&format!("{},{},{}\n", fmt17(self.discrete.t(i)), fmt17(*a), fmt17(*b)));
        }
        out
    }
}
