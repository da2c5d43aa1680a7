use serde::{Deserialize, Serialize};

use super::path::{DyadicPath, PathKind};
use crate::error::{Error, Result};
use crate::function_spaces::{gauss_legendre4, text, PiecewisePoly};

/// Bounded-variation test function on [0, 1]:
/// `q(t) = p(t) + Σ_{aᵢ < t} sᵢ`, with `p` piecewise cubic (right-continuous
/// at its own breakpoints) and a finite jump list `(aᵢ, sᵢ)` taking effect
/// just after `aᵢ`. With that convention `I_[0,x]` is `1` with a jump of −1 at x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvFunction {
    poly: PiecewisePoly,
    jumps: Vec<(f64, f64)>,
}

impl BvFunction {
    pub fn new(poly: PiecewisePoly, jumps: Vec<(f64, f64)>) -> Result<Self> {
        if poly.lower() != 0.0 || poly.upper() != 1.0 {
            return Err(Error::param("BV function must be defined on [0, 1]"));
        }
        if jumps.iter().any(|&(a, s)| !(0.0..=1.0).contains(&a) || !s.is_finite()) {
            return Err(Error::param("jump locations must lie in [0, 1]"));
        }
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(jumps.len());
        let mut sorted = jumps;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (a, s) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == a => last.1 += s,
                _ => merged.push((a, s)),
            }
        }
        Ok(BvFunction { poly, jumps: merged })
    }

    pub fn constant(c: f64) -> Self {
        BvFunction { poly: PiecewisePoly::single([c, 0.0, 0.0, 0.0]), jumps: Vec::new() }
    }

    /// I_[0,x].
    pub fn indicator(x: f64) -> Result<Self> {
        Self::new(PiecewisePoly::single([1.0, 0.0, 0.0, 0.0]), vec![(x, -1.0)])
    }

    pub fn polynomial(c: [f64; 4]) -> Self {
        BvFunction { poly: PiecewisePoly::single(c), jumps: Vec::new() }
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let parsed = text::parse(s)?;
        Self::new(parsed.poly, parsed.jumps)
    }

    pub fn to_text(&self) -> String {
        text::format(&self.poly, &self.jumps)
    }

    pub fn poly(&self) -> &PiecewisePoly {
        &self.poly
    }

    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.jumps.partition_point(|&(a, _)| a < t);
        self.poly.eval(t) + self.jumps[..k].iter().map(|j| j.1).sum::<f64>()
    }

    /// ∫|p′| + Σ|polynomial jumps| + Σ|listed jumps|. Jumps located at 1
    /// act outside the domain and are not counted.
    pub fn total_variation(&self) -> f64 {
        self.poly.smooth_variation()
            + self.poly.interior_jumps().iter().map(|j| j.1.abs()).sum::<f64>()
            + self.jumps.iter().filter(|j| j.0 < 1.0).map(|j| j.1.abs()).sum::<f64>()
    }

    pub fn scaled(&self, c: f64) -> Self {
        BvFunction {
            poly: self.poly.scaled(c),
            jumps: self.jumps.iter().map(|&(a, s)| (a, c * s)).collect(),
        }
    }

    pub fn add(&self, other: &BvFunction) -> Self {
        let jumps = self.jumps.iter().chain(&other.jumps).copied().collect();
        BvFunction::new(self.poly.add(&other.poly), jumps).expect("both operands valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvIntegral {
    pub value: f64,
    /// Largest distance a jump moved when snapped to the grid.
    pub max_snap: f64,
}

/// L(q) = ∫ q dZ for the grid path Z, by summation by parts:
///
/// `L(q) = q(1)Z(1) − q(0)Z(0) − ∫ Z dq`,
///
/// where Z is the path itself for bridge and white-noise kinds and
/// `path − reference` for CDF-like paths. Between grid points Z is taken
/// piecewise linear; the smooth part of ∫ Z dq is integrated exactly for
/// that interpolant, polynomial jumps of q are evaluated at their (grid)
/// location, and listed jumps off the grid are snapped to the nearest grid
/// point with the snap distance reported.
pub fn integrate_bv(
    path: &DyadicPath,
    reference: Option<&dyn Fn(f64) -> f64>,
    q: &BvFunction,
) -> Result<BvIntegral> {
    let cells = path.cells();
    let h = 1.0 / cells as f64;
    let z: Vec<f64> = match (path.kind(), reference) {
        (PathKind::CdfLike, Some(r)) => {
            path.values().iter().enumerate().map(|(i, &v)| v - r(path.t(i))).collect()
        }
        (PathKind::CdfLike, None) => {
            return Err(Error::param("CDF-like paths need a reference CDF"));
        }
        _ => path.values().to_vec(),
    };
    let interp = |t: f64| -> f64 {
        let x = (t * cells as f64).clamp(0.0, cells as f64);
        let i = (x.floor() as usize).min(cells - 1);
        let w = x - i as f64;
        z[i] * (1.0 - w) + z[i + 1] * w
    };

    // Smooth part: ∫ Z p′ over pieces of the merged grid/breakpoint partition.
    let mut cuts: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
    cuts.extend(q.poly().breakpoints().iter().copied());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let poly = q.poly();
    let mut smooth = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let c = poly.coeffs()[poly.piece_index(0.5 * (a + b))];
        let d = [c[1], 2.0 * c[2], 3.0 * c[3]];
        if d == [0.0; 3] {
            continue;
        }
        smooth += gauss_legendre4(a, b, |t| interp(t) * ((d[2] * t + d[1]) * t + d[0]));
    }

    let poly_jumps: f64 = poly.interior_jumps().iter().map(|&(b, j)| j * interp(b)).sum();

    let mut max_snap = 0.0f64;
    let mut listed = 0.0;
    for &(a, s) in q.jumps() {
        if a >= 1.0 {
            continue;
        }
        let i = (a * cells as f64).round() as usize;
        max_snap = max_snap.max((a - i as f64 * h).abs());
        listed += s * z[i];
    }

    let boundary = q.eval(1.0) * z[cells] - q.eval(0.0) * z[0];
    Ok(BvIntegral { value: boundary - (smooth + poly_jumps + listed), max_snap })
}
