use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::density::DensitySpec;
use super::haar::HaarPyramid;
use super::poly::{derivative, horner};
use crate::error::{Error, Result};

/// Default Besov truncation level.
pub const DEFAULT_BESOV_LEVELS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovValue {
    /// Norm truncated after level `K`.
    pub value: f64,
    /// Magnitude of the last summand, 2^{pKα}‖f̄_K − f̄_{K+1}‖_p^p.
    pub tail_estimate: f64,
    pub levels: u32,
}

/// Besov(α, p) norm with shape parameters p = q, truncated at level `k_max`:
///
/// `{ |f̄₀|^p + Σ_{k=0}^{K} 2^{pkα} ‖f̄_k − f̄_{k+1}‖_p^p }^{1/p}`,
///
/// with step-function `L_p` norms evaluated exactly on the level-(k+1) cells.
pub fn besov_norm(pyr: &HaarPyramid, alpha: f64, p: f64, k_max: u32) -> Result<BesovValue> {
    if !(p >= 1.0) {
        return Err(Error::param(format!("Besov exponent p = {p} must be >= 1")));
    }
    if k_max + 1 > pyr.depth() {
        return Err(Error::TruncationTooDeep {
            requested: k_max,
            needed: k_max + 1,
            available: pyr.depth(),
        });
    }
    let mut sum = pyr.level(0)[0].abs().powf(p);
    let mut last = 0.0;
    for k in 0..=k_max {
        let (coarse, fine) = (pyr.level(k), pyr.level(k + 1));
        let width = 0.5f64.powi(k as i32 + 1);
        let lp: f64 = fine
            .iter()
            .enumerate()
            .map(|(l, &v)| (coarse[l / 2] - v).abs().powf(p))
            .sum::<f64>()
            * width;
        last = 2f64.powf(p * k as f64 * alpha) * lp;
        sum += last;
    }
    Ok(BesovValue { value: sum.powf(1.0 / p), tail_estimate: last, levels: k_max })
}

/// Lower bound on the Hölder–Lipschitz seminorm `sup |f(y) − f(x)| / |y − x|^β`,
/// taken over all pairs of a grid of `grid_points` uniform points plus every
/// breakpoint. Exact for piecewise-linear continuous f when β = 1.
pub fn lipschitz_norm(f: &DensitySpec, beta: f64, grid_points: usize) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::param(format!("Lipschitz index {beta} outside (0, 1]")));
    }
    if grid_points < 2 {
        return Err(Error::param("Lipschitz grid needs at least two points"));
    }
    let mut xs: Vec<f64> = (0..grid_points)
        .map(|i| i as f64 / (grid_points - 1) as f64)
        .chain(f.breakpoints().iter().copied())
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let vals: Vec<f64> = xs.iter().map(|&x| f.poly().eval(x)).collect();
    let mut best = 0.0f64;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let q = (vals[j] - vals[i]).abs() / (xs[j] - xs[i]).powf(beta);
            best = best.max(q);
        }
    }
    Ok(best)
}

/// ϑ_k = ∫₀¹ f(x) e^{i 2π k x} dx, exact per piece.
pub fn fourier_coefficient(f: &DensitySpec, k: i64) -> Complex64 {
    let poly = f.poly();
    let bps = poly.breakpoints();
    if k == 0 {
        return Complex64::new(poly.integrate(0.0, 1.0), 0.0);
    }
    let a = Complex64::new(0.0, 2.0 * PI * k as f64);
    // ∫ p e^{ax} = e^{ax} Σ_j (−1)^j p^{(j)}(x) / a^{j+1}
    let antideriv = |c: &[f64; 4], x: f64| -> Complex64 {
        let mut d = *c;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut a_pow = a;
        let mut sign = 1.0;
        for _ in 0..4 {
            acc += sign * horner(&d, x) / a_pow;
            d = derivative(&d);
            a_pow *= a;
            sign = -sign;
        }
        acc * (a * x).exp()
    };
    poly.coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| antideriv(c, bps[i + 1]) - antideriv(c, bps[i]))
        .sum()
}

/// Σ_{0<|k|≤K} |k|^{2β} |ϑ_k|². The k = 0 term has zero weight and is excluded.
pub fn sobolev_norm(f: &DensitySpec, beta: f64, terms: u32) -> Result<f64> {
    if terms < 1 {
        return Err(Error::param("Sobolev truncation needs K >= 1"));
    }
    if !(beta >= 0.0) {
        return Err(Error::param("Sobolev index must be nonnegative"));
    }
    Ok((1..=terms as i64)
        .map(|k| {
            let w = (k as f64).powf(2.0 * beta);
            w * (fourier_coefficient(f, k).norm_sqr() + fourier_coefficient(f, -k).norm_sqr())
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::super::{family, haar::haar_approximants};
    use super::*;

    #[test]
    fn besov_uniform_is_one() {
        let p = haar_approximants(&family::uniform(), 8).unwrap();
        for &(a, e) in &[(0.5, 2.0), (0.5, 4.0), (1.0, 1.0)] {
            assert_eq!(besov_norm(&p, a, e, 7).unwrap().value, 1.0);
        }
    }

    #[test]
    fn besov_level_zero_bump() {
        let p = haar_approximants(&family::haar_bump(0.5), 4).unwrap();
        let v = besov_norm(&p, 0.5, 2.0, 3).unwrap();
        assert!((v.value - 1.25f64.sqrt()).abs() < 1e-12);
        assert_eq!(v.tail_estimate, 0.0);
    }

    #[test]
    fn besov_rejects_deep_truncation() {
        let p = haar_approximants(&family::uniform(), 4).unwrap();
        assert!(besov_norm(&p, 0.5, 2.0, 4).is_err());
        assert!(besov_norm(&p, 0.5, 0.5, 2).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(lipschitz_norm(&family::uniform(), 0.7, 64).unwrap(), 0.0);
        assert!((lipschitz_norm(&family::linear(), 1.0, 64).unwrap() - 2.0).abs() < 1e-12);
        // sup 2|y − x|^{1/2} is attained at |y − x| = 1.
        assert!((lipschitz_norm(&family::linear(), 0.5, 64).unwrap() - 2.0).abs() < 1e-12);
        assert!(lipschitz_norm(&family::linear(), 0.0, 64).is_err());
        assert!(lipschitz_norm(&family::linear(), 1.5, 64).is_err());
    }

    #[test]
    fn lipschitz_of_trunclin_sees_the_ramp() {
        let v = lipschitz_norm(&family::trunclin(), 1.0, 33).unwrap();
        assert!((v - 6.4).abs() < 1e-9);
    }

    #[test]
    fn sobolev_constant_is_zero() {
        assert!(sobolev_norm(&family::uniform(), 0.75, 32).unwrap() < 1e-28);
    }

    #[test]
    fn sobolev_cosine_dominated_by_first_harmonic() {
        let f = family::cosine_bump(1.0);
        let v = sobolev_norm(&f, 0.6, 16).unwrap();
        assert!((v - 0.5).abs() < 1e-3, "{v}");
    }

    #[test]
    fn sobolev_of_linear_has_closed_form() {
        // ϑ_k = −i/(πk) for f = 2x, so the sum is (2/π²) Σ_{k≤K} k^{2β−2}.
        let v = sobolev_norm(&family::linear(), 0.5, 64).unwrap();
        let harmonic: f64 = (1..=64).map(|k| 1.0 / k as f64).sum();
        assert!((v - 2.0 / (PI * PI) * harmonic).abs() < 1e-12);
    }

    #[test]
    fn sobolev_ignores_constant_shift() {
        let f = family::trunclin();
        let g = DensitySpec::unnormalized(f.poly().plus_constant(3.0)).unwrap();
        let (a, b) = (sobolev_norm(&f, 0.8, 40).unwrap(), sobolev_norm(&g, 0.8, 40).unwrap());
        assert!((a - b).abs() < 1e-12 * a.max(1.0));
    }

    #[test]
    fn norms_scale_linearly() {
        let base = family::cosine_bump(0.4);
        let c = 2.5;
        let scaled = DensitySpec::unnormalized(base.poly().scaled(c)).unwrap();
        let (pa, pb) = (haar_approximants(&base, 10).unwrap(), haar_approximants(&scaled, 10).unwrap());
        let (a, b) = (besov_norm(&pa, 0.5, 4.0, 9).unwrap().value, besov_norm(&pb, 0.5, 4.0, 9).unwrap().value);
        assert!((b - c * a).abs() < 1e-12);
        let (a, b) = (lipschitz_norm(&base, 0.6, 50).unwrap(), lipschitz_norm(&scaled, 0.6, 50).unwrap());
        assert!((b - c * a).abs() < 1e-11);
    }
}
