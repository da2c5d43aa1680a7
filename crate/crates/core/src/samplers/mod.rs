//! Iid samples and inhomogeneous Poisson processes on [0, 1], their
//! empirical CDFs, empirical bridges and BV functionals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coupling::quantile::poisson_from_uniform;
use crate::error::{Error, Result};
use crate::function_spaces::{gauss_legendre4, horner, DensitySpec};
use crate::process::{fmt17, BvFunction, DyadicPath, PathKind};
use crate::MAX_DEPTH;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Exactly `n` iid draws.
    Iid,
    /// Poisson process with intensity `n·f`: N ~ Poisson(n) points.
    Poisson,
}

impl SampleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleMode::Iid => "iid",
            SampleMode::Poisson => "poisson",
        }
    }
}

impl std::str::FromStr for SampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(SampleMode::Iid),
            "poisson" => Ok(SampleMode::Poisson),
            _ => Err(Error::param(format!("unknown sample mode '{s}'"))),
        }
    }
}

/// Sorted observations in [0, 1] with the nominal size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    observations: Vec<f64>,
    nominal_n: u64,
    mode: SampleMode,
}

impl Sample {
    /// Sorts the observations; in iid mode their count must equal `n`.
    pub fn new(mut observations: Vec<f64>, nominal_n: u64, mode: SampleMode) -> Result<Self> {
        if nominal_n == 0 {
            return Err(Error::param("nominal n must be at least 1"));
        }
        if let Some(&x) = observations.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::OutsideDomain { value: x });
        }
        if mode == SampleMode::Iid && observations.len() as u64 != nominal_n {
            return Err(Error::param(format!(
                "iid sample has {} observations, expected {nominal_n}",
                observations.len()
            )));
        }
        observations.sort_by(f64::total_cmp);
        Ok(Sample { observations, nominal_n, mode })
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn nominal_n(&self) -> u64 {
        self.nominal_n
    }

    pub fn mode(&self) -> SampleMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Number of observations `≤ t`.
    pub fn count_le(&self, t: f64) -> usize {
        self.observations.partition_point(|&x| x <= t)
    }

    /// Header `# n=<n> mode=<iid|poisson>`, then one observation per line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# n={} mode={}\n", self.nominal_n, self.mode.as_str());
        for &x in &self.observations {
            out.push_str(&fmt17(x));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (n, mode) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(Error::Parse { line: 0, message: "missing header".into() });
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            break parse_header(line).map_err(|message| Error::Parse { line: i + 1, message })?;
        };
        let mut obs = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let x: f64 = line.parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("not a number: '{line}'"),
            })?;
            obs.push(x);
        }
        Sample::new(obs, n, mode)
    }
}

fn parse_header(line: &str) -> std::result::Result<(u64, SampleMode), String> {
    let body = line.strip_prefix('#').ok_or("expected '# n=<n> mode=<mode>' header")?;
    let (mut n, mut mode) = (None, None);
    for field in body.split_whitespace() {
        match field.split_once('=') {
            Some(("n", v)) => n = Some(v.parse::<u64>().map_err(|e| format!("bad n: {e}"))?),
            Some(("mode", v)) => mode = Some(v.parse::<SampleMode>().map_err(|e| e.to_string())?),
            _ => {}
        }
    }
    match (n, mode) {
        (Some(n), Some(m)) => Ok((n, m)),
        _ => Err("header needs both n= and mode=".into()),
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::param("n must be at least 1"))
    } else {
        Ok(())
    }
}

/// `n` iid draws from `f` by inversion of the exact CDF.
pub fn sample_iid<R: Rng + ?Sized>(f: &DensitySpec, n: u64, rng: &mut R) -> Result<Sample> {
    check_n(n)?;
    let us: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    sample_iid_from_uniforms(f, &us)
}

/// Iid sample from given uniforms in [0, 1].
pub fn sample_iid_from_uniforms(f: &DensitySpec, uniforms: &[f64]) -> Result<Sample> {
    let obs = uniforms.iter().map(|&u| f.inverse_cdf(u)).collect::<Result<Vec<_>>>()?;
    Sample::new(obs, uniforms.len() as u64, SampleMode::Iid)
}

/// Poisson process with intensity `n·f`: N ~ Poisson(n), then N iid draws.
pub fn sample_poisson_process<R: Rng + ?Sized>(
    f: &DensitySpec,
    n: u64,
    rng: &mut R,
) -> Result<Sample> {
    check_n(n)?;
    let count = poisson_from_uniform(n as f64, rng.random::<f64>())?;
    sample_poisson_with_count(f, n, count, rng)
}

/// Poisson-mode sample with the point count fixed to `count`.
pub fn sample_poisson_with_count<R: Rng + ?Sized>(
    f: &DensitySpec,
    n: u64,
    count: u64,
    rng: &mut R,
) -> Result<Sample> {
    check_n(n)?;
    let obs = (0..count)
        .map(|_| f.inverse_cdf(rng.random::<f64>()))
        .collect::<Result<Vec<_>>>()?;
    Sample::new(obs, n, SampleMode::Poisson)
}

/// F̂_n(t) = #{X_j ≤ t}/n, with the nominal `n` in both modes.
pub fn empirical_cdf(s: &Sample, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutsideDomain { value: t });
    }
    Ok(s.count_le(t) as f64 / s.nominal_n as f64)
}

/// Ẑ_n = F̂_n − F on the depth-`depth` grid.
pub fn empirical_bridge(s: &Sample, f: &DensitySpec, depth: u32) -> Result<DyadicPath> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::DepthTooLarge { depth, max: MAX_DEPTH });
    }
    let cells = 1usize << depth;
    let n = s.nominal_n as f64;
    let mut values = Vec::with_capacity(cells + 1);
    let mut k = 0;
    for i in 0..=cells {
        let t = i as f64 / cells as f64;
        while k < s.observations.len() && s.observations[k] <= t {
            k += 1;
        }
        values.push(k as f64 / n - f.cdf_unchecked(t));
    }
    DyadicPath::new(depth, values, PathKind::Bridge)
}

/// Ẑ_n(q) = (1/n)Σ q(X_j) − ∫ q dF, evaluated off the grid.
///
/// The polynomial part of `∫ q f` is exact (Gauss–Legendre on the merged
/// breakpoints of q and f); each listed jump `(a, s)` contributes
/// `s·(F(1) − F(a))`.
pub fn bridge_functional(s: &Sample, f: &DensitySpec, q: &BvFunction) -> f64 {
    let empirical: f64 =
        s.observations.iter().map(|&x| q.eval(x)).sum::<f64>() / s.nominal_n as f64;
    let mut cuts: Vec<f64> =
        q.poly().breakpoints().iter().chain(f.breakpoints()).copied().collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (qp, fp) = (q.poly(), f.poly());
    let scale = f.mass_scale();
    let smooth: f64 = cuts
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let (cq, cf) = (qp.coeffs()[qp.piece_index(mid)], fp.coeffs()[fp.piece_index(mid)]);
            gauss_legendre4(w[0], w[1], |t| {
                horner(&cq, t) * horner(&cf, t)
            })
        })
        .sum::<f64>()
        * scale;
    let f1 = f.cdf_unchecked(1.0);
    let jumps: f64 = q
        .jumps()
        .iter()
        .filter(|j| j.0 < 1.0)
        .map(|&(a, sz)| sz * (f1 - f.cdf_unchecked(a)))
        .sum();
    empirical - (smooth + jumps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_spaces::family;
    use crate::rng::{seed_stream, StreamRole};

    #[test]
    fn forced_uniforms_invert() {
        let s = sample_iid_from_uniforms(&family::uniform(), &[0.5]).unwrap();
        assert_eq!(s.observations(), &[0.5]);
        let s = sample_iid_from_uniforms(&family::linear(), &[0.25]).unwrap();
        assert!((s.observations()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empirical_cdf_counts_ties() {
        let s = Sample::new(vec![0.6, 0.2, 0.6], 3, SampleMode::Iid).unwrap();
        assert_eq!(empirical_cdf(&s, 0.5).unwrap(), 1.0 / 3.0);
        assert_eq!(empirical_cdf(&s, 0.6).unwrap(), 1.0);
        assert_eq!(empirical_cdf(&s, 1.0).unwrap(), 1.0);
        assert!(empirical_cdf(&s, 1.5).is_err());
    }

    #[test]
    fn poisson_mode_uses_nominal_n() {
        let s = Sample::new(vec![0.1, 0.2, 0.3], 2, SampleMode::Poisson).unwrap();
        assert_eq!(empirical_cdf(&s, 1.0).unwrap(), 1.5);
        let p = empirical_bridge(&s, &family::uniform(), 3).unwrap();
        assert_eq!(p.last(), 0.5);
    }

    #[test]
    fn empty_poisson_bridge_is_minus_t() {
        let s = Sample::new(vec![], 10, SampleMode::Poisson).unwrap();
        let p = empirical_bridge(&s, &family::uniform(), 4).unwrap();
        for i in 0..=16 {
            assert_eq!(p.at(i), -(i as f64) / 16.0);
        }
    }

    #[test]
    fn iid_bridge_ends_at_zero() {
        let f = family::by_id("cosine:0.4").unwrap();
        for seed in 0..20 {
            let mut rng = seed_stream(seed, 0, StreamRole::Sampler);
            let s = sample_iid(&f, 37, &mut rng).unwrap();
            assert_eq!(empirical_bridge(&s, &f, 6).unwrap().last(), 0.0);
        }
    }

    #[test]
    fn functional_hand_values() {
        let u = family::uniform();
        let s = Sample::new(vec![0.25, 0.75], 2, SampleMode::Iid).unwrap();
        let q = BvFunction::polynomial([0.0, 1.0, 0.0, 0.0]);
        assert!(bridge_functional(&s, &u, &q).abs() < 1e-15);
        assert!(bridge_functional(&s, &u, &BvFunction::constant(2.5)).abs() < 1e-15);
        let q = BvFunction::indicator(0.5).unwrap();
        assert!((bridge_functional(&s, &u, &q) - 0.0).abs() < 1e-15);
        let q = BvFunction::indicator(0.3).unwrap();
        assert!((bridge_functional(&s, &u, &q) - (0.5 - 0.3)).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let s = Sample::new(vec![0.1, 1.0 / 3.0], 5, SampleMode::Poisson).unwrap();
        let back = Sample::from_csv(&s.to_csv()).unwrap();
        assert_eq!(back, s);
        assert!(Sample::from_csv("0.5\n").is_err());
    }
}
