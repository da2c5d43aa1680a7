use serde::{Deserialize, Serialize};

use super::density::DensitySpec;
use crate::error::{Error, Result};
use crate::MAX_DEPTH;

/// Dyadic cell averages f̄_k(ℓ) = 2^k ∫_{ℓ/2^k}^{(ℓ+1)/2^k} f for k = 0..=J.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarPyramid {
    levels: Vec<Vec<f64>>,
}

impl HaarPyramid {
    /// Builds from finest-level averages (length must be a power of two).
    pub fn from_finest(finest: Vec<f64>) -> Result<Self> {
        if !finest.len().is_power_of_two() {
            return Err(Error::param("finest level length must be a power of two"));
        }
        let mut levels = vec![finest];
        while levels.last().unwrap().len() > 1 {
            let coarse = levels
                .last()
                .unwrap()
                .chunks_exact(2)
                .map(|pair| 0.5 * (pair[0] + pair[1]))
                .collect();
            levels.push(coarse);
        }
        levels.reverse();
        Ok(HaarPyramid { levels })
    }

    pub fn depth(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn level(&self, k: u32) -> &[f64] {
        &self.levels[k as usize]
    }
}

/// Haar approximants of `f` down to depth `depth`.
///
/// Finest cells are integrated exactly per polynomial piece; coarser levels
/// are pairwise means, which is the same integral.
pub fn haar_approximants(f: &DensitySpec, depth: u32) -> Result<HaarPyramid> {
    if depth > MAX_DEPTH {
        return Err(Error::DepthTooLarge { depth, max: MAX_DEPTH });
    }
    let cells = 1usize << depth;
    let scale = cells as f64;
    let width = 1.0 / scale;
    let poly = f.poly();
    let finest = (0..cells)
        .map(|l| poly.integrate(l as f64 * width, (l + 1) as f64 * width) * scale)
        .collect();
    HaarPyramid::from_finest(finest)
}

#[cfg(test)]
mod tests {
    use super::super::family;
    use super::*;

    #[test]
    fn uniform_averages_are_one() {
        let p = haar_approximants(&family::uniform(), 6).unwrap();
        for k in 0..=6 {
            assert!(p.level(k).iter().all(|&v| (v - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn haar_bump_levels() {
        let p = haar_approximants(&family::haar_bump(0.5), 2).unwrap();
        assert_eq!(p.level(0), &[1.0]);
        assert_eq!(p.level(1), &[1.5, 0.5]);
        assert_eq!(p.level(2), &[1.5, 1.5, 0.5, 0.5]);
    }

    #[test]
    fn linear_halves() {
        let p = haar_approximants(&family::linear(), 1).unwrap();
        assert!((p.level(1)[0] - 0.5).abs() < 1e-15);
        assert!((p.level(1)[1] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn depth_limit() {
        assert!(matches!(
            haar_approximants(&family::uniform(), 31),
            Err(Error::DepthTooLarge { .. })
        ));
    }

    #[test]
    fn pyramid_consistency_at_depth_12() {
        for f in family::builtin() {
            let p = haar_approximants(&f.density, 12).unwrap();
            for k in 0..12 {
                let (coarse, fine) = (p.level(k), p.level(k + 1));
                for (l, &c) in coarse.iter().enumerate() {
                    let mean = 0.5 * (fine[2 * l] + fine[2 * l + 1]);
                    assert!((c - mean).abs() < 1e-12);
                }
            }
        }
    }
}
