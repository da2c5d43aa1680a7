//! Quantile couplings of binomial and Poisson counts to a standard normal draw.
//!
//! Each count is the right-continuous inverse CDF of its law evaluated at
//! Φ(z). Probabilities are held in a window of the pmf grown outward from
//! the mode by ratio recurrences until terms underflow, then normalized by
//! their sum. The search runs on the lower tail for z ≤ 0 and on the upper
//! tail for z > 0, so both tails keep relative precision.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::normal;

/// Split probabilities are clamped into `[P_GUARD, 1 − P_GUARD]`.
pub const P_GUARD: f64 = 1e-16;
/// Largest Poisson mean accepted for inversion.
pub const MAX_POISSON_MEAN: f64 = 1e8;
/// Largest binomial size accepted for inversion.
pub const MAX_BINOMIAL_SIZE: u64 = 100_000;

/// max |X − Zmatch| for m = 16, p = ½ over z ∈ [−4, 4], by enumeration of
/// all 17 atoms. Attained at z = −4, where X = 1 and Zmatch = 0.
pub const BINOMIAL16_COUPLING_GAP: f64 = 1.0;

const UNDERFLOW: f64 = 1e-300;

/// Probability position to invert at: a lower-tail mass P(X ≤ x) target or
/// an upper-tail mass P(X > x) target.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Tail {
    Lower(f64),
    Upper(f64),
}

impl Tail {
    pub(crate) fn from_normal(z: f64) -> Self {
        if z <= 0.0 {
            Tail::Lower(normal::cdf(z))
        } else {
            Tail::Upper(normal::sf(z))
        }
    }

    pub(crate) fn from_uniform(u: f64) -> Self {
        if u <= 0.5 {
            Tail::Lower(u)
        } else {
            Tail::Upper(1.0 - u)
        }
    }
}

/// Normalized pmf on the support window `[lo, lo + pmf.len())`.
#[derive(Debug, Clone)]
pub(crate) struct PmfWindow {
    lo: u64,
    pmf: Vec<f64>,
}

impl PmfWindow {
    /// `ratio_up(x)` = P(x+1)/P(x), `ratio_down(x)` = P(x−1)/P(x).
    fn grow(
        mode: u64,
        min: u64,
        max: Option<u64>,
        ratio_up: impl Fn(u64) -> f64,
        ratio_down: impl Fn(u64) -> f64,
    ) -> Self {
        let mut below = Vec::new();
        let mut p = 1.0;
        let mut x = mode;
        while x > min {
            p *= ratio_down(x);
            if p < UNDERFLOW {
                break;
            }
            below.push(p);
            x -= 1;
        }
        let lo = mode - below.len() as u64;
        below.reverse();
        below.push(1.0);
        let mut p = 1.0;
        let mut x = mode;
        while max.is_none_or(|m| x < m) {
            p *= ratio_up(x);
            if p < UNDERFLOW {
                break;
            }
            below.push(p);
            x += 1;
        }
        let total: f64 = below.iter().sum();
        below.iter_mut().for_each(|v| *v /= total);
        PmfWindow { lo, pmf: below }
    }

    pub(crate) fn binomial(m: u64, p: f64) -> Self {
        let q = 1.0 - p;
        let mode = (((m + 1) as f64) * p).floor().min(m as f64) as u64;
        Self::grow(
            mode,
            0,
            Some(m),
            |x| (m - x) as f64 / (x + 1) as f64 * (p / q),
            |x| x as f64 / (m - x + 1) as f64 * (q / p),
        )
    }

    pub(crate) fn poisson(lambda: f64) -> Self {
        let mode = lambda.floor() as u64;
        Self::grow(mode, 0, None, |x| lambda / (x + 1) as f64, |x| x as f64 / lambda)
    }

    pub(crate) fn lo(&self) -> u64 {
        self.lo
    }

    pub(crate) fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Smallest x with P(X ≤ x) ≥ target.
    pub(crate) fn invert(&self, tail: Tail) -> u64 {
        let last = self.pmf.len() - 1;
        match tail {
            Tail::Lower(u) => {
                let mut acc = 0.0;
                for (i, &w) in self.pmf.iter().enumerate() {
                    acc += w;
                    if acc >= u {
                        return self.lo + i as u64;
                    }
                }
                self.lo + last as u64
            }
            Tail::Upper(s) => {
                // P(X > x) ≤ s  ⇔  P(X ≤ x) ≥ 1 − s.
                let mut acc = 0.0;
                let mut i = last;
                while i > 0 && acc + self.pmf[i] <= s {
                    acc += self.pmf[i];
                    i -= 1;
                }
                self.lo + i as u64
            }
        }
    }

    /// P(X ≤ x).
    #[cfg(test)]
    pub(crate) fn cdf(&self, x: u64) -> f64 {
        if x < self.lo {
            return 0.0;
        }
        let k = ((x - self.lo) as usize + 1).min(self.pmf.len());
        self.pmf[..k].iter().sum()
    }
}

/// Binomial(m, p) pmf at x by log-gamma, for tests and oracles.
pub fn binomial_pmf(m: u64, p: f64, x: u64) -> f64 {
    if x > m {
        return 0.0;
    }
    let (mf, xf) = (m as f64, x as f64);
    (ln_gamma(mf + 1.0) - ln_gamma(xf + 1.0) - ln_gamma(mf - xf + 1.0)
        + xf * p.ln()
        + (mf - xf) * (1.0 - p).ln())
    .exp()
}

/// Poisson(λ) pmf at x by log-gamma.
pub fn poisson_pmf(lambda: f64, x: u64) -> f64 {
    let xf = x as f64;
    (xf * lambda.ln() - lambda - ln_gamma(xf + 1.0)).exp()
}

fn clamp_p(p: f64) -> f64 {
    p.clamp(P_GUARD, 1.0 - P_GUARD)
}

/// Binomial count quantile-coupled to `z`:
/// X = min{x : P(Bin(m, p) ≤ x) ≥ Φ(z)}, paired with `mp + √(mp(1−p))·z`.
///
/// `p` is clamped into the guard band; `m` above [`MAX_BINOMIAL_SIZE`]
/// panics.
pub fn quantile_couple_binomial(m: u64, p: f64, z: f64) -> (u64, f64) {
    assert!(m <= MAX_BINOMIAL_SIZE, "binomial size {m} above {MAX_BINOMIAL_SIZE}");
    let p = clamp_p(p);
    let mf = m as f64;
    let zmatch = mf * p + (mf * p * (1.0 - p)).sqrt() * z;
    if m == 0 {
        return (0, zmatch);
    }
    (PmfWindow::binomial(m, p).invert(Tail::from_normal(z)), zmatch)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(Error::param(format!("Poisson mean must be positive, got {lambda}")));
    }
    if lambda > MAX_POISSON_MEAN {
        return Err(Error::param(format!(
            "Poisson mean {lambda} above the inversion limit {MAX_POISSON_MEAN}"
        )));
    }
    Ok(())
}

/// Poisson count quantile-coupled to `z`: N = F_λ⁻¹(Φ(z)), paired with `λ + √λ·z`.
pub fn quantile_couple_poisson(lambda: f64, z: f64) -> Result<(u64, f64)> {
    check_lambda(lambda)?;
    let n = PmfWindow::poisson(lambda).invert(Tail::from_normal(z));
    Ok((n, lambda + lambda.sqrt() * z))
}

/// Poisson(λ) by inversion of a uniform `u`.
pub fn poisson_from_uniform(lambda: f64, u: f64) -> Result<u64> {
    check_lambda(lambda)?;
    Ok(PmfWindow::poisson(lambda).invert(Tail::from_uniform(u)))
}
