//! Test densities and the built-in experiment family.

use std::f64::consts::PI;

use super::density::DensitySpec;
use super::poly::{Cubic, PiecewisePoly};
use crate::error::{Error, Result};

/// Number of Hermite pieces used to approximate smooth bumps. The
/// interpolation error is at most h⁴/384 · max|f⁗| ≈ 1.5e−6 · amplitude.
pub const SPLINE_PIECES: usize = 32;

#[derive(Debug, Clone)]
pub struct NamedDensity {
    pub id: String,
    pub density: DensitySpec,
}

pub fn uniform() -> DensitySpec {
    DensitySpec::new(PiecewisePoly::single([1.0, 0.0, 0.0, 0.0])).expect("uniform")
}

/// f(x) = 2x.
pub fn linear() -> DensitySpec {
    DensitySpec::new(PiecewisePoly::single([0.0, 2.0, 0.0, 0.0])).expect("linear")
}

/// 1 + δ on [0, ½), 1 − δ on [½, 1).
pub fn haar_bump(delta: f64) -> DensitySpec {
    haar_bump_at(0, 0, delta).expect("level-0 bump")
}

/// 1 ± δ on the two halves of dyadic cell `(level, cell)`, 1 elsewhere.
pub fn haar_bump_at(level: u32, cell: u64, delta: f64) -> Result<DensitySpec> {
    if cell >= 1u64 << level {
        return Err(Error::param(format!("cell {cell} does not exist at level {level}")));
    }
    let width = (0.5f64).powi(level as i32);
    let lo = cell as f64 * width;
    let mid = lo + 0.5 * width;
    let hi = lo + width;
    let mut bps = vec![0.0];
    let mut coeffs: Vec<Cubic> = Vec::new();
    if lo > 0.0 {
        bps.push(lo);
        coeffs.push([1.0, 0.0, 0.0, 0.0]);
    }
    bps.push(mid);
    coeffs.push([1.0 + delta, 0.0, 0.0, 0.0]);
    bps.push(hi);
    coeffs.push([1.0 - delta, 0.0, 0.0, 0.0]);
    if hi < 1.0 {
        bps.push(1.0);
        coeffs.push([1.0, 0.0, 0.0, 0.0]);
    }
    DensitySpec::new(PiecewisePoly::new(bps, coeffs)?)
}

/// Piecewise-cubic Hermite interpolant of `g` (with derivative `dg`) on
/// `pieces` equal cells of [0, 1].
pub fn hermite_spline(g: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64, pieces: usize) -> PiecewisePoly {
    let h = 1.0 / pieces as f64;
    let bps: Vec<f64> = (0..=pieces).map(|i| i as f64 * h).collect();
    let coeffs = bps
        .windows(2)
        .map(|w| {
            let (x0, x1) = (w[0], w[1]);
            let (y0, y1, d0, d1) = (g(x0), g(x1), dg(x0), dg(x1));
            let slope = (y1 - y0) / h;
            // Local form in u = x − x0.
            let local = [y0, d0, (3.0 * slope - 2.0 * d0 - d1) / h, (d0 + d1 - 2.0 * slope) / (h * h)];
            shift_to_global(&local, x0)
        })
        .collect();
    PiecewisePoly::new(bps, coeffs).expect("uniform breakpoints")
}

fn shift_to_global(local: &Cubic, x0: f64) -> Cubic {
    // Σ a_k (x − x0)^k expanded into monomials.
    let [a0, a1, a2, a3] = *local;
    [
        a0 - a1 * x0 + a2 * x0 * x0 - a3 * x0 * x0 * x0,
        a1 - 2.0 * a2 * x0 + 3.0 * a3 * x0 * x0,
        a2 - 3.0 * a3 * x0,
        a3,
    ]
}

/// Spline approximation of 1 + a·cos(2πx), renormalized to unit mass.
pub fn cosine_bump(amplitude: f64) -> DensitySpec {
    let spline = hermite_spline(
        |x| 1.0 + amplitude * (2.0 * PI * x).cos(),
        |x| -2.0 * PI * amplitude * (2.0 * PI * x).sin(),
        SPLINE_PIECES,
    );
    DensitySpec::normalized(spline).expect("cosine bump is nonnegative for |a| <= 1")
}

/// Truncated linear ramp: 0.2 on [0, ½), then rising with slope 6.4.
/// Its infimum is exactly 0.2.
pub fn trunclin() -> DensitySpec {
    let poly = PiecewisePoly::new(
        vec![0.0, 0.5, 1.0],
        vec![[0.2, 0.0, 0.0, 0.0], [0.2 - 3.2, 6.4, 0.0, 0.0]],
    )
    .expect("valid breakpoints");
    DensitySpec::new(poly).expect("unit mass")
}

/// The five built-in experiment densities.
pub fn builtin() -> Vec<NamedDensity> {
    ["uniform", "haar:0.25", "haar:0.5", "cosine:0.4", "trunclin"]
        .iter()
        .map(|id| NamedDensity { id: id.to_string(), density: by_id(id).expect("builtin id") })
        .collect()
}

/// Resolves `uniform`, `linear`, `trunclin`, `haar:<δ>`, `haar:<δ>@<level>/<cell>`
/// and `cosine:<a>`.
pub fn by_id(id: &str) -> Result<DensitySpec> {
    let bad = || Error::param(format!("unknown density id `{id}`"));
    let (name, arg) = match id.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (id, None),
    };
    match (name, arg) {
        ("uniform", None) => Ok(uniform()),
        ("linear", None) => Ok(linear()),
        ("trunclin", None) => Ok(trunclin()),
        ("haar", Some(a)) => {
            let (delta, at) = match a.split_once('@') {
                Some((d, at)) => (d, Some(at)),
                None => (a, None),
            };
            let delta: f64 = delta.parse().map_err(|_| bad())?;
            if !(0.0..=1.0).contains(&delta) {
                return Err(Error::param("haar bump needs 0 <= delta <= 1"));
            }
            match at {
                None => Ok(haar_bump(delta)),
                Some(at) => {
                    let (level, cell) = at.split_once('/').ok_or_else(bad)?;
                    haar_bump_at(level.parse().map_err(|_| bad())?, cell.parse().map_err(|_| bad())?, delta)
                }
            }
        }
        ("cosine", Some(a)) => {
            let amp: f64 = a.parse().map_err(|_| bad())?;
            if !(0.0..=1.0).contains(&amp) {
                return Err(Error::param("cosine amplitude must lie in [0, 1]"));
            }
            Ok(cosine_bump(amp))
        }
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_densities_are_valid() {
        let fam = builtin();
        assert_eq!(fam.len(), 5);
        for f in &fam {
            assert!((f.density.total_mass() - 1.0).abs() < 1e-9, "{}", f.id);
        }
    }

    #[test]
    fn spline_tracks_cosine() {
        let f = cosine_bump(0.4);
        let scale = f.total_mass();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let exact = 1.0 + 0.4 * (2.0 * PI * x).cos();
            assert!((f.eval(x).unwrap() / scale - exact).abs() < 2e-6);
        }
    }

    #[test]
    fn full_amplitude_cosine_stays_nonnegative() {
        let f = cosine_bump(1.0);
        assert!(f.poly().minimum() >= -1e-12);
    }

    #[test]
    fn trunclin_infimum() {
        assert!((trunclin().poly().minimum() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn ids_resolve() {
        assert!(by_id("haar:0.5@2/3").is_ok());
        assert!(by_id("haar:0.5@2/4").is_err());
        assert!(by_id("nope").is_err());
        assert!(by_id("cosine:2").is_err());
    }
}
