//! Standard normal distribution helpers, accurate in both tails.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{PI, SQRT_2};

/// Φ(z).
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// 1 − Φ(z), computed without cancellation.
pub fn sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// Φ⁻¹(p) for p in (0, 1).
pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let z = -SQRT_2 * erfc_inv(2.0 * p);
    // One Halley step against the accurate CDF, on the smaller tail.
    let err = if z < 0.0 { cdf(z) - p } else { (1.0 - p) - sf(z) };
    let dens = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    if dens == 0.0 || !err.is_finite() {
        return z;
    }
    let t = err / dens;
    z - t / (1.0 + 0.5 * z * t)
}

/// Probability mass of `[a, b)` under N(0, 1), using the tail on the far side of zero.
pub fn interval_mass(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if a >= 0.0 {
        sf(a) - sf(b)
    } else if b <= 0.0 {
        cdf(b) - cdf(a)
    } else {
        1.0 - cdf(a) - sf(b)
    }
}

/// Draws from N(0, 1) truncated to `[a, b)` by inversion, given `u` uniform in [0, 1).
pub fn truncated_quantile(a: f64, b: f64, u: f64) -> f64 {
    debug_assert!(a < b);
    let x = if a >= 0.0 {
        // Work with upper-tail masses so deep right-tail bins keep precision.
        let (sa, sb) = (sf(a), sf(b));
        let target = sa - u * (sa - sb);
        -quantile(target)
    } else {
        let (ca, cb) = (cdf(a), cdf(b));
        quantile(ca + u * (cb - ca))
    };
    if x.is_finite() {
        x.clamp(a, if b.is_finite() { b } else { x })
    } else if a.is_finite() {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_centered() {
        assert_eq!(cdf(0.0), 0.5);
        assert!((cdf(1.0) + cdf(-1.0) - 1.0).abs() < 1e-15);
        assert!((cdf(1.959963984540054) - 0.975).abs() < 1e-12);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-10, 0.001, 0.3, 0.5, 0.9, 1.0 - 1e-9] {
            let z = quantile(p);
            assert!((cdf(z) - p).abs() < 1e-12 * p.max(1e-3), "p = {p}");
        }
    }

    #[test]
    fn tail_mass_keeps_precision() {
        let m = interval_mass(9.0, 10.0);
        assert!(m > 0.0 && m < 1e-18);
        assert!((interval_mass(f64::NEG_INFINITY, f64::INFINITY) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn truncated_draw_stays_inside() {
        for &(a, b) in &[(-1.0, 1.0), (5.0, 5.5), (-9.0, -8.0), (f64::NEG_INFINITY, -3.0)] {
            for i in 0..20 {
                let u = i as f64 / 20.0;
                let x = truncated_quantile(a, b, u);
                assert!(x >= a && x <= b, "{x} not in [{a}, {b})");
            }
        }
    }
}
