use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cubic in the global monomial basis: `c[0] + c[1] x + c[2] x² + c[3] x³`.
pub type Cubic = [f64; 4];

pub(crate) fn horner(c: &Cubic, x: f64) -> f64 {
    ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
}

pub(crate) fn derivative(c: &Cubic) -> Cubic {
    [c[1], 2.0 * c[2], 3.0 * c[3], 0.0]
}

/// ∫ₐᵇ p, expanded about the midpoint so short intervals keep full precision.
pub(crate) fn integrate_cubic(c: &Cubic, a: f64, b: f64) -> f64 {
    let len = b - a;
    if len == 0.0 {
        return 0.0;
    }
    let mid = 0.5 * (a + b);
    let second = 2.0 * c[2] + 6.0 * c[3] * mid;
    len * horner(c, mid) + second * len * len * len / 24.0
}

/// Real roots of `a + b x + c x²` inside the open interval `(lo, hi)`.
pub(crate) fn quadratic_roots_in(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    if c == 0.0 {
        if b != 0.0 {
            roots.push(-a / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            if q != 0.0 {
                roots.push(q / c);
                roots.push(a / q);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots.retain(|&r| r > lo && r < hi);
    roots.sort_by(f64::total_cmp);
    roots
}

// 4-point Gauss–Legendre on [-1, 1]; exact through degree 7.
const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

pub(crate) fn gauss_legendre4(a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL4_NODES
        .iter()
        .zip(GL4_WEIGHTS.iter())
        .map(|(x, w)| w * g(mid + half * x))
        .sum::<f64>()
        * half
}

/// Piecewise cubic on `[breakpoints[0], breakpoints[last]]`, right-continuous
/// at interior breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    breakpoints: Vec<f64>,
    coeffs: Vec<Cubic>,
}

impl PiecewisePoly {
    pub fn new(breakpoints: Vec<f64>, coeffs: Vec<Cubic>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidDensity("need at least two breakpoints".into()));
        }
        if coeffs.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidDensity(format!(
                "{} breakpoints need {} coefficient rows, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                coeffs.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidDensity("breakpoints must be strictly increasing".into()));
        }
        if breakpoints.iter().chain(coeffs.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDensity("non-finite breakpoint or coefficient".into()));
        }
        Ok(PiecewisePoly { breakpoints, coeffs })
    }

    /// Single cubic on `[0, 1]`.
    pub fn single(c: Cubic) -> Self {
        PiecewisePoly { breakpoints: vec![0.0, 1.0], coeffs: vec![c] }
    }

    /// Step function on `[0, 1]` with the given cell values on equal cells.
    pub fn steps(values: &[f64]) -> Self {
        let m = values.len();
        let breakpoints = (0..=m).map(|i| i as f64 / m as f64).collect();
        let coeffs = values.iter().map(|&v| [v, 0.0, 0.0, 0.0]).collect();
        PiecewisePoly { breakpoints, coeffs }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coeffs(&self) -> &[Cubic] {
        &self.coeffs
    }

    pub fn pieces(&self) -> usize {
        self.coeffs.len()
    }

    pub fn lower(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn upper(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Index of the piece whose half-open interval holds `t`; the last piece owns the upper end.
    pub fn piece_index(&self, t: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        k.saturating_sub(1).min(self.coeffs.len() - 1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        horner(&self.coeffs[self.piece_index(t)], t)
    }

    /// Value just left of `t`.
    pub fn eval_left(&self, t: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b < t);
        horner(&self.coeffs[k.saturating_sub(1).min(self.coeffs.len() - 1)], t)
    }

    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let (i0, i1) = (self.piece_index(a), self.piece_index(b));
        let mut total = 0.0;
        for i in i0..=i1 {
            let lo = a.max(self.breakpoints[i]);
            let hi = b.min(self.breakpoints[i + 1]);
            if hi > lo {
                total += integrate_cubic(&self.coeffs[i], lo, hi);
            }
        }
        total
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PiecewisePoly {
            breakpoints: self.breakpoints.clone(),
            coeffs: self.coeffs.iter().map(|c| c.map(|v| v * factor)).collect(),
        }
    }

    pub fn plus_constant(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            c[0] += shift;
        }
        out
    }

    /// Pointwise sum on the merged breakpoint set.
    pub fn add(&self, other: &PiecewisePoly) -> Self {
        let mut bps: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let coeffs = bps
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let a = self.coeffs[self.piece_index(mid)];
                let b = other.coeffs[other.piece_index(mid)];
                [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
            })
            .collect();
        PiecewisePoly { breakpoints: bps, coeffs }
    }

    /// Minimum over the closed pieces, including one-sided limits at breakpoints.
    pub fn minimum(&self) -> f64 {
        self.extreme_points()
            .map(|(i, x)| horner(&self.coeffs[i], x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn maximum(&self) -> f64 {
        self.extreme_points()
            .map(|(i, x)| horner(&self.coeffs[i], x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn extreme_points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs.iter().enumerate().flat_map(move |(i, c)| {
            let (lo, hi) = (self.breakpoints[i], self.breakpoints[i + 1]);
            let d = derivative(c);
            let mut pts = vec![lo, hi];
            pts.extend(quadratic_roots_in(d[0], d[1], d[2], lo, hi));
            pts.into_iter().map(move |x| (i, x))
        })
    }

    /// ∫|p′| over the pieces (continuous part of the variation only).
    pub fn smooth_variation(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (lo, hi) = (self.breakpoints[i], self.breakpoints[i + 1]);
                let d = derivative(c);
                let mut pts = vec![lo];
                pts.extend(quadratic_roots_in(d[0], d[1], d[2], lo, hi));
                pts.push(hi);
                pts.windows(2).map(|w| (horner(c, w[1]) - horner(c, w[0])).abs()).sum::<f64>()
            })
            .sum()
    }

    /// Jumps `p(b+) − p(b−)` at interior breakpoints.
    pub fn interior_jumps(&self) -> Vec<(f64, f64)> {
        (1..self.coeffs.len())
            .map(|i| {
                let b = self.breakpoints[i];
                (b, horner(&self.coeffs[i], b) - horner(&self.coeffs[i - 1], b))
            })
            .filter(|&(_, j)| j != 0.0)
            .collect()
    }
}
