use serde::{Deserialize, Serialize};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::MAX_DEPTH;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    /// Uncentered CDF-like process (F̂_n, Ŵ_n); starts at 0.
    CdfLike,
    /// Centered process (Ẑ_n, B̂_n); starts at 0.
    Bridge,
    /// White noise with drift (W̃_n, Z̃_n, W).
    WhiteNoise,
}

/// Sample path on the grid tᵢ = i / 2^J, i = 0..=2^J.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicPath {
    depth: u32,
    values: Vec<f64>,
    kind: PathKind,
}

impl DyadicPath {
    pub fn new(depth: u32, values: Vec<f64>, kind: PathKind) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::DepthTooLarge { depth, max: MAX_DEPTH });
        }
        let expected = (1usize << depth) + 1;
        if values.len() != expected {
            return Err(Error::param(format!(
                "depth {depth} needs {expected} grid values, got {}",
                values.len()
            )));
        }
        Ok(DyadicPath { depth, values, kind })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        1 << self.depth
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 / self.cells() as f64
    }

    pub fn at(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Value at grid point `t`, which must lie on the grid.
    pub fn at_time(&self, t: f64) -> Option<f64> {
        let x = t * self.cells() as f64;
        let i = x.round();
        (i == x && (0.0..=self.cells() as f64).contains(&i)).then(|| self.values[i as usize])
    }

    /// Values at the grid of a shallower depth.
    pub fn coarsen(&self, depth: u32) -> Option<DyadicPath> {
        if depth > self.depth {
            return None;
        }
        let stride = 1usize << (self.depth - depth);
        let values = self.values.iter().step_by(stride).copied().collect();
        Some(DyadicPath { depth, values, kind: self.kind })
    }

    pub fn map(&self, kind: PathKind, f: impl Fn(f64, f64) -> f64) -> DyadicPath {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(self.t(i), v)).collect();
        DyadicPath { depth: self.depth, values, kind }
    }

    /// `t,value` CSV with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", fmt17(self.t(i)), fmt17(*v)).unwrap();
        }
        out
    }
}

/// Fixed 17-significant-digit rendering used by every CSV writer.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_is_checked() {
        assert!(DyadicPath::new(2, vec![0.0; 5], PathKind::Bridge).is_ok());
        assert!(DyadicPath::new(2, vec![0.0; 4], PathKind::Bridge).is_err());
        assert!(DyadicPath::new(31, vec![], PathKind::Bridge).is_err());
    }

    #[test]
    fn grid_lookup_and_coarsen() {
        let p = DyadicPath::new(2, vec![0.0, 1.0, 2.0, 3.0, 4.0], PathKind::WhiteNoise).unwrap();
        assert_eq!(p.at_time(0.75), Some(3.0));
        assert_eq!(p.at_time(0.3), None);
        assert_eq!(p.coarsen(1).unwrap().values(), &[0.0, 2.0, 4.0]);
        assert!(p.to_csv().starts_with("t,value\n0.0000000000000000e0,0.0000000000000000e0\n"));
    }
}
