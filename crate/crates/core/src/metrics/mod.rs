//! Coupling quality: sup distances, exceedance curves, rate fits and total
//! variation (exact on finite spaces, Hellinger bounds for product laws).

use serde::{Deserialize, Serialize};

use crate::coupling::lattice::gaussian_bin_mass;
use crate::coupling::quantile::PmfWindow;
use crate::coupling::{CoupledPair, FiniteDist};
use crate::error::{Error, Result};
use crate::process::DyadicPath;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Largest grid difference and the first grid time attaining it.
pub fn sup_distance(a: &DyadicPath, b: &DyadicPath) -> Result<(f64, f64)> {
    if a.depth() != b.depth() {
        return Err(Error::MismatchedDepth { left: a.depth(), right: b.depth() });
    }
    let mut best = (0.0, 0.0);
    for (i, (x, y)) in a.values().iter().zip(b.values()).enumerate() {
        let d = (x - y).abs();
        if d > best.0 || d.is_nan() {
            best = (d, a.t(i));
        }
    }
    Ok(best)
}

/// Empirical survival `P(scale·sup > threshold)` with Wilson 95% intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceCurve {
    pub thresholds: Vec<f64>,
    pub survival: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub reps: usize,
    pub n: Option<u64>,
    pub depth: Option<u32>,
    pub family: Option<String>,
}

/// Wilson score interval for `k` successes in `m` trials.
pub fn wilson_interval(k: usize, m: usize) -> (f64, f64) {
    if m == 0 {
        return (0.0, 1.0);
    }
    let (k, m) = (k as f64, m as f64);
    let p = k / m;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / m;
    let centre = (p + z2 / (2.0 * m)) / denom;
    let half = Z95 * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt() / denom;
    let lo = if k == 0.0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let hi = if k == m { 1.0 } else { (centre + half).clamp(p, 1.0) };
    (lo, hi)
}

/// Exceedance curve of already-scaled discrepancies.
pub fn exceedance_from_values(values: &[f64], thresholds: &[f64]) -> ExceedanceCurve {
    let m = values.len();
    let mut survival = Vec::with_capacity(thresholds.len());
    let mut lower = Vec::with_capacity(thresholds.len());
    let mut upper = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let k = values.iter().filter(|&&v| v > t).count();
        let (lo, hi) = wilson_interval(k, m);
        survival.push(if m == 0 { 0.0 } else { k as f64 / m as f64 });
        lower.push(lo);
        upper.push(hi);
    }
    ExceedanceCurve {
        thresholds: thresholds.to_vec(),
        survival,
        lower,
        upper,
        reps: m,
        n: None,
        depth: None,
        family: None,
    }
}

/// Exceedance curve of `scale·sup` over coupled pairs. `n` and `depth` are
/// filled in when all pairs agree on them.
pub fn exceedance(pairs: &[CoupledPair], scale: f64, thresholds: &[f64]) -> ExceedanceCurve {
    let values: Vec<f64> = pairs.iter().map(|p| scale * p.sup).collect();
    let mut curve = exceedance_from_values(&values, thresholds);
    if let Some(first) = pairs.first() {
        if pairs.iter().all(|p| p.n == first.n) {
            curve.n = Some(first.n);
        }
        if pairs.iter().all(|p| p.depth() == first.depth()) {
            curve.depth = Some(first.depth());
        }
    }
    curve
}

/// Least-squares fit `median ≈ d·ln n` through the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub ns: Vec<u64>,
    pub medians: Vec<f64>,
    pub d: f64,
    /// ‖medians − d·ln n‖₂.
    pub residual: f64,
    /// `residual / ‖medians‖₂`.
    pub relative_residual: f64,
}

pub fn rate_fit(ns: &[u64], medians: &[f64]) -> Result<RateFit> {
    if ns.len() != medians.len() {
        return Err(Error::MismatchedAtoms { left: ns.len(), right: medians.len() });
    }
    let mut distinct = ns.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::param("rate fit needs at least 3 distinct n"));
    }
    if ns.iter().any(|&n| n < 2) {
        return Err(Error::param("rate fit needs n ≥ 2"));
    }
    let logs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let sxy: f64 = logs.iter().zip(medians).map(|(x, y)| x * y).sum();
    let sxx: f64 = logs.iter().map(|x| x * x).sum();
    let d = sxy / sxx;
    let residual = logs
        .iter()
        .zip(medians)
        .map(|(x, y)| (y - d * x).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm = medians.iter().map(|y| y * y).sum::<f64>().sqrt();
    let relative_residual = if norm > 0.0 { residual / norm } else { 0.0 };
    Ok(RateFit { ns: ns.to_vec(), medians: medians.to_vec(), d, residual, relative_residual })
}

/// Median of a sample (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// ½ Σ |p − q|.
pub fn tv_finite(p: &FiniteDist, q: &FiniteDist) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::MismatchedAtoms { left: p.len(), right: q.len() });
    }
    Ok(0.5 * p.probs().iter().zip(q.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// One-dimensional law of a coupled increment.
///
/// Discrete laws live on the stabilized square-root lattice (count `c` at
/// `√c`); a Gaussian compared with a discrete law is binned onto that
/// lattice first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Law1d {
    Gaussian { mean: f64, sd: f64 },
    SqrtPoisson { lambda: f64 },
    SqrtBinomial { m: u64, p: f64 },
    /// Explicit pmf of counts `lo, lo+1, …`.
    Lattice { lo: u64, pmf: Vec<f64> },
}

impl Law1d {
    fn window(&self) -> Result<Option<(u64, Vec<f64>)>> {
        Ok(match self {
            Law1d::Gaussian { .. } => None,
            Law1d::SqrtPoisson { lambda } => {
                if !(*lambda > 0.0) {
                    return Err(Error::UnsupportedLaw(format!("Poisson mean {lambda}")));
                }
                let w = PmfWindow::poisson(*lambda);
                Some((w.lo(), w.pmf().to_vec()))
            }
            Law1d::SqrtBinomial { m, p } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::UnsupportedLaw(format!("binomial p = {p}")));
                }
                let w = PmfWindow::binomial(*m, *p);
                Some((w.lo(), w.pmf().to_vec()))
            }
            Law1d::Lattice { lo, pmf } => Some((*lo, pmf.clone())),
        })
    }
}

/// Hellinger affinity ∫√(dP dQ).
pub fn hellinger_affinity(a: &Law1d, b: &Law1d) -> Result<f64> {
    match (a.window()?, b.window()?) {
        (None, None) => {
            let (Law1d::Gaussian { mean: m1, sd: s1 }, Law1d::Gaussian { mean: m2, sd: s2 }) = (a, b)
            else {
                unreachable!()
            };
            if !(*s1 > 0.0 && *s2 > 0.0) {
                return Err(Error::UnsupportedLaw("Gaussian with nonpositive sd".into()));
            }
            let v = s1 * s1 + s2 * s2;
            Ok((2.0 * s1 * s2 / v).sqrt() * (-(m1 - m2).powi(2) / (4.0 * v)).exp())
        }
        (Some((lo, pmf)), None) | (None, Some((lo, pmf))) => {
            let Law1d::Gaussian { mean, sd } = (if matches!(a, Law1d::Gaussian { .. }) { a } else { b })
            else {
                unreachable!()
            };
            if !(*sd > 0.0) {
                return Err(Error::UnsupportedLaw("Gaussian with nonpositive sd".into()));
            }
            Ok(pmf
                .iter()
                .enumerate()
                .map(|(i, p)| (p * gaussian_bin_mass(*mean, *sd, lo + i as u64)).sqrt())
                .sum())
        }
        (Some((la, pa)), Some((lb, pb))) => {
            let mut s = 0.0;
            for (i, p) in pa.iter().enumerate() {
                let x = la + i as u64;
                if x >= lb && ((x - lb) as usize) < pb.len() {
                    s += (p * pb[(x - lb) as usize]).sqrt();
                }
            }
            Ok(s)
        }
    }
}

/// Upper bound `√(2(1 − Πρᵢ))` on the total variation between the product
/// laws `⊗a` and `⊗b`, from per-coordinate Hellinger affinities.
pub fn tv_product_bound(a: &[Law1d], b: &[Law1d]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::MismatchedAtoms { left: a.len(), right: b.len() });
    }
    let mut log_rho = 0.0;
    for (x, y) in a.iter().zip(b) {
        log_rho += hellinger_affinity(x, y)?.min(1.0).ln();
    }
    Ok((2.0 * -log_rho.exp_m1()).max(0.0).sqrt())
}
