use serde::{Deserialize, Serialize};

use super::poly::{horner, integrate_cubic, PiecewisePoly};
use super::quadrature;
use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-9;
const NONNEGATIVITY_TOL: f64 = 1e-12;
const ROOT_CDF_TOL: f64 = 1e-10;

/// Density (or, when built with [`DensitySpec::unnormalized`], an intensity
/// shape) on `[0, 1]`: a nonnegative piecewise cubic with exact CDF.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensitySpec {
    poly: PiecewisePoly,
    /// ∫ f over pieces `0..i`.
    prefix: Vec<f64>,
    /// ∫ √f over pieces `0..i`.
    root_prefix: Vec<f64>,
    total: f64,
    normalized: bool,
}

impl DensitySpec {
    /// Validated density: nonnegative, unit mass within 1e−9.
    pub fn new(poly: PiecewisePoly) -> Result<Self> {
        let spec = Self::build(poly, true)?;
        if (spec.total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDensity(format!(
                "integral is {} (must be 1 within {NORMALIZATION_TOL:e})",
                spec.total
            )));
        }
        Ok(spec)
    }

    /// Rescales a nonnegative shape to unit mass.
    pub fn normalized(poly: PiecewisePoly) -> Result<Self> {
        let mass = poly.integrate(poly.lower(), poly.upper());
        if !(mass > 0.0) {
            return Err(Error::InvalidDensity("shape has no positive mass".into()));
        }
        Self::new(poly.scaled(1.0 / mass))
    }

    /// Shape without the unit-mass requirement. Still nonnegative, so the
    /// root CDF is defined; `cdf(1)` equals the total mass.
    pub fn unnormalized(poly: PiecewisePoly) -> Result<Self> {
        Self::build(poly, false)
    }

    fn build(poly: PiecewisePoly, normalized: bool) -> Result<Self> {
        if poly.lower() != 0.0 || poly.upper() != 1.0 {
            return Err(Error::InvalidDensity("breakpoints must start at 0 and end at 1".into()));
        }
        let min = poly.minimum();
        if min < -NONNEGATIVITY_TOL {
            return Err(Error::InvalidDensity(format!("negative minimum {min}")));
        }
        let bps = poly.breakpoints();
        let mut prefix = Vec::with_capacity(bps.len());
        let mut root_prefix = Vec::with_capacity(bps.len());
        let (mut acc, mut root_acc) = (0.0, 0.0);
        prefix.push(0.0);
        root_prefix.push(0.0);
        for (i, c) in poly.coeffs().iter().enumerate() {
            let (lo, hi) = (bps[i], bps[i + 1]);
            acc += integrate_cubic(c, lo, hi);
            root_acc += root_integral(c, lo, hi);
            prefix.push(acc);
            root_prefix.push(root_acc);
        }
        Ok(DensitySpec { poly, prefix, root_prefix, total: acc, normalized })
    }

    pub fn poly(&self) -> &PiecewisePoly {
        &self.poly
    }

    pub fn breakpoints(&self) -> &[f64] {
        self.poly.breakpoints()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// ∫₀¹ f.
    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_domain(t)?;
        Ok(self.poly.eval(t))
    }

    /// F(t) = ∫₀ᵗ f. For a normalized density F(1) = 1 exactly.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        check_domain(t)?;
        Ok(self.cdf_unchecked(t))
    }

    pub(crate) fn cdf_unchecked(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let i = self.poly.piece_index(t);
        let lo = self.breakpoints()[i];
        let raw = (self.prefix[i] + integrate_cubic(&self.poly.coeffs()[i], lo, t)).max(0.0);
        if self.normalized {
            (raw / self.total).min(1.0)
        } else {
            raw
        }
    }

    /// F(b) − F(a) without the cancellation of differencing two CDF values.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let m = self.poly.integrate(a.max(0.0), b.min(1.0)).max(0.0);
        if self.normalized {
            m / self.total
        } else {
            m
        }
    }

    /// G(t) = ∫₀ᵗ √f by adaptive quadrature per piece (1e−10 absolute).
    pub fn root_cdf(&self, t: f64) -> Result<f64> {
        check_domain(t)?;
        let i = self.poly.piece_index(t);
        let lo = self.breakpoints()[i];
        Ok((self.root_prefix[i] + root_integral(&self.poly.coeffs()[i], lo, t)) * self.root_scale())
    }

    /// Factor turning raw-coefficient integrals of f into integrals of the density.
    pub fn mass_scale(&self) -> f64 {
        if self.normalized {
            1.0 / self.total
        } else {
            1.0
        }
    }

    fn root_scale(&self) -> f64 {
        if self.normalized {
            self.total.sqrt().recip()
        } else {
            1.0
        }
    }

    /// ∫ₐᵇ √f.
    pub fn root_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let bps = self.breakpoints();
        let (i0, i1) = (self.poly.piece_index(a), self.poly.piece_index(b));
        (i0..=i1)
            .map(|i| {
                let lo = a.max(bps[i]);
                let hi = b.min(bps[i + 1]);
                if hi > lo {
                    root_integral(&self.poly.coeffs()[i], lo, hi)
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            * self.root_scale()
    }

    /// Smallest `x` with `F(x) ≥ u` (right-continuous inverse).
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::OutsideDomain { value: u });
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        let target = if self.normalized { u * self.total } else { u };
        let bps = self.breakpoints();
        let pieces = self.poly.pieces();
        let mut i = 0;
        while i + 1 < pieces
            && (self.prefix[i + 1] < target || self.prefix[i + 1] - self.prefix[i] <= 0.0)
        {
            i += 1;
        }
        let local = (target - self.prefix[i]).max(0.0);
        let c = self.poly.coeffs()[i];
        let (lo, hi) = (bps[i], bps[i + 1]);
        Ok(solve_local_mass(&c, lo, hi, local))
    }
}

fn check_domain(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutsideDomain { value: t })
    }
}

fn root_integral(c: &[f64; 4], lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if c[1] == 0.0 && c[2] == 0.0 && c[3] == 0.0 {
        return c[0].max(0.0).sqrt() * (hi - lo);
    }
    quadrature::integrate(|x| horner(c, x).max(0.0).sqrt(), lo, hi, ROOT_CDF_TOL)
}

/// Solves ∫_lo^x p = target on [lo, hi]: closed form when p is at most
/// linear, otherwise Newton safeguarded by bisection to 1e−12.
fn solve_local_mass(c: &[f64; 4], lo: f64, hi: f64, target: f64) -> f64 {
    if c[2] == 0.0 && c[3] == 0.0 {
        let a0 = c[0] + c[1] * lo;
        let disc = (a0 * a0 + 2.0 * c[1] * target).max(0.0);
        let denom = a0 + disc.sqrt();
        let s = if denom > 0.0 { 2.0 * target / denom } else { 0.0 };
        return (lo + s).clamp(lo, hi);
    }
    let (mut a, mut b) = (lo, hi);
    let mut x = lo + 0.5 * (hi - lo);
    for _ in 0..200 {
        let g = integrate_cubic(c, lo, x) - target;
        if g > 0.0 {
            b = x;
        } else {
            a = x;
        }
        let slope = horner(c, x);
        let mut next = if slope > 0.0 { x - g / slope } else { f64::NAN };
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= 1e-12 * (1.0 + x.abs()) * 1e-3 || b - a <= 1e-15 {
            x = next;
            break;
        }
        x = next;
    }
    x.clamp(lo, hi)
}
