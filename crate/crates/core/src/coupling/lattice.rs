//! Stabilized square-root lattice.
//!
//! A count `c` sits at `√c`; its bin is `[√(c − ¼), √(c + ¾))`, with bin 0
//! starting at −∞. A Gaussian N(√λ, ¼) binned this way is close in total
//! variation to Poisson(λ), which is what the root-white coupler uses.

/// Lattice bin of a point `s` in square-root units.
pub fn lattice_bin(s: f64) -> u64 {
    const FIRST_EDGE: f64 = 0.866_025_403_784_438_6; // √(3/4)
    if !(s >= FIRST_EDGE) {
        return 0;
    }
    let c = (s * s + 0.25).floor();
    // Rounding near an edge can land one bin off; settle against the edges.
    let mut c = c as u64;
    while c > 0 && s < bin_lower(c) {
        c -= 1;
    }
    while s >= bin_upper(c) {
        c += 1;
    }
    c
}

pub fn bin_lower(c: u64) -> f64 {
    if c == 0 {
        f64::NEG_INFINITY
    } else {
        (c as f64 - 0.25).sqrt()
    }
}

pub fn bin_upper(c: u64) -> f64 {
    (c as f64 + 0.75).sqrt()
}

/// Mass of bin `c` under N(mean, sd²).
pub fn gaussian_bin_mass(mean: f64, sd: f64, c: u64) -> f64 {
    crate::normal::interval_mass((bin_lower(c) - mean) / sd, (bin_upper(c) - mean) / sd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_map_to_themselves() {
        for c in 0..5000u64 {
            assert_eq!(lattice_bin((c as f64).sqrt()), c);
        }
    }

    #[test]
    fn edges_are_left_closed() {
        for c in 1..200u64 {
            assert_eq!(lattice_bin(bin_lower(c)), c);
            assert_eq!(lattice_bin(bin_upper(c)), c + 1);
        }
        assert_eq!(lattice_bin(-3.0), 0);
        assert_eq!(lattice_bin(f64::NEG_INFINITY), 0);
    }

    #[test]
    fn bin_masses_sum_to_one() {
        let total: f64 = (0..400).map(|c| gaussian_bin_mass(7.3, 0.5, c)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
