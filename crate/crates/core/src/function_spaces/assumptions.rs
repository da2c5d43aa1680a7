use serde::{Deserialize, Serialize};

use super::density::DensitySpec;
use super::haar::haar_approximants;
use super::norms::{besov_norm, lipschitz_norm, sobolev_norm, DEFAULT_BESOV_LEVELS};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assumption {
    /// Lower bound ε₀ plus membership in Besov(½,2) and Besov(½,4) balls.
    A,
    /// Lower bound ε₀, bounded Lipschitz(β), Sobolev(α) ball, and the
    /// index condition α ≥ β with β > ½ or (α ≥ ¾ and α + β ≥ 1).
    APrime,
    /// Lower bound ε₀ and bounded Lipschitz(β) with β > ½.
    B,
}

/// Thresholds for the checks. Compactness of a class cannot be decided
/// from one member, so it is checked as membership in a ball of the given
/// radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionParams {
    pub epsilon0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub besov_radius: f64,
    pub lipschitz_bound: f64,
    pub sobolev_radius: f64,
    pub besov_levels: u32,
    pub lipschitz_grid: usize,
    pub sobolev_terms: u32,
}

impl Default for AssumptionParams {
    fn default() -> Self {
        AssumptionParams {
            epsilon0: 0.2,
            alpha: 0.75,
            beta: 0.6,
            besov_radius: 2.0,
            lipschitz_bound: 10.0,
            sobolev_radius: 1.0,
            besov_levels: DEFAULT_BESOV_LEVELS,
            lipschitz_grid: 513,
            sobolev_terms: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub assumption: Assumption,
    pub epsilon0: f64,
    pub inf_f: f64,
    pub lower_bound_pass: bool,
    pub besov_half_2: Option<f64>,
    pub besov_half_4: Option<f64>,
    pub besov_tail_2: Option<f64>,
    pub besov_tail_4: Option<f64>,
    pub besov_in_ball: Option<bool>,
    pub lipschitz: Option<f64>,
    pub lipschitz_bounded: Option<bool>,
    pub sobolev: Option<f64>,
    pub sobolev_in_ball: Option<bool>,
    /// False when (α, β) can never satisfy the index condition; this is a
    /// property of the parameters, not of f.
    pub structurally_satisfiable: bool,
    pub pass: bool,
    pub besov_levels: u32,
    pub lipschitz_grid: usize,
    pub sobolev_terms: u32,
    pub alpha: f64,
    pub beta: f64,
}

pub fn check_assumption(
    f: &DensitySpec,
    which: Assumption,
    params: &AssumptionParams,
) -> Result<AssumptionReport> {
    let inf_f = f.poly().minimum();
    let lower_bound_pass = inf_f >= params.epsilon0;
    let mut report = AssumptionReport {
        assumption: which,
        epsilon0: params.epsilon0,
        inf_f,
        lower_bound_pass,
        besov_half_2: None,
        besov_half_4: None,
        besov_tail_2: None,
        besov_tail_4: None,
        besov_in_ball: None,
        lipschitz: None,
        lipschitz_bounded: None,
        sobolev: None,
        sobolev_in_ball: None,
        structurally_satisfiable: true,
        pass: false,
        besov_levels: params.besov_levels,
        lipschitz_grid: params.lipschitz_grid,
        sobolev_terms: params.sobolev_terms,
        alpha: params.alpha,
        beta: params.beta,
    };
    match which {
        Assumption::A => {
            let pyr = haar_approximants(f, params.besov_levels + 1)?;
            let b2 = besov_norm(&pyr, 0.5, 2.0, params.besov_levels)?;
            let b4 = besov_norm(&pyr, 0.5, 4.0, params.besov_levels)?;
            let in_ball = b2.value <= params.besov_radius && b4.value <= params.besov_radius;
            report.besov_half_2 = Some(b2.value);
            report.besov_half_4 = Some(b4.value);
            report.besov_tail_2 = Some(b2.tail_estimate);
            report.besov_tail_4 = Some(b4.tail_estimate);
            report.besov_in_ball = Some(in_ball);
            report.pass = lower_bound_pass && in_ball;
        }
        Assumption::APrime => {
            let (a, b) = (params.alpha, params.beta);
            report.structurally_satisfiable = a >= b && (b > 0.5 || (a >= 0.75 && a + b >= 1.0));
            let lip = lipschitz_norm(f, b.min(1.0), params.lipschitz_grid)?;
            let sob = sobolev_norm(f, a, params.sobolev_terms)?;
            report.lipschitz = Some(lip);
            report.lipschitz_bounded = Some(lip <= params.lipschitz_bound);
            report.sobolev = Some(sob);
            report.sobolev_in_ball = Some(sob <= params.sobolev_radius);
            report.pass = report.structurally_satisfiable
                && lower_bound_pass
                && lip <= params.lipschitz_bound
                && sob <= params.sobolev_radius;
        }
        Assumption::B => {
            report.structurally_satisfiable = params.beta > 0.5 && params.beta <= 1.0;
            let lip = lipschitz_norm(f, params.beta.clamp(f64::MIN_POSITIVE, 1.0), params.lipschitz_grid)?;
            report.lipschitz = Some(lip);
            report.lipschitz_bounded = Some(lip <= params.lipschitz_bound);
            report.pass = report.structurally_satisfiable && lower_bound_pass && lip <= params.lipschitz_bound;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::family;
    use super::*;

    #[test]
    fn uniform_passes_b() {
        let p = AssumptionParams { epsilon0: 0.5, beta: 0.6, ..Default::default() };
        let r = check_assumption(&family::uniform(), Assumption::B, &p).unwrap();
        assert!(r.pass);
        assert_eq!(r.inf_f, 1.0);
        assert_eq!(r.lipschitz, Some(0.0));
    }

    #[test]
    fn linear_fails_lower_bound() {
        for which in [Assumption::A, Assumption::APrime, Assumption::B] {
            let p = AssumptionParams { epsilon0: 1e-6, ..Default::default() };
            let r = check_assumption(&family::linear(), which, &p).unwrap();
            assert!(!r.lower_bound_pass);
            assert!(!r.pass);
        }
    }

    #[test]
    fn haar_bump_in_besov_ball() {
        let p = AssumptionParams { besov_radius: 2.0, ..Default::default() };
        let r = check_assumption(&family::haar_bump(0.5), Assumption::A, &p).unwrap();
        assert!(r.pass);
        assert!((r.besov_half_2.unwrap() - 1.118_034).abs() < 1e-6);
    }

    #[test]
    fn haar_bump_is_not_lipschitz() {
        let r = check_assumption(&family::haar_bump(0.5), Assumption::B, &AssumptionParams::default()).unwrap();
        assert!(r.lower_bound_pass);
        assert!(!r.pass);
    }

    #[test]
    fn unsatisfiable_index_pair_is_structural() {
        let p = AssumptionParams { alpha: 0.6, beta: 0.3, ..Default::default() };
        let r = check_assumption(&family::uniform(), Assumption::APrime, &p).unwrap();
        assert!(!r.structurally_satisfiable);
        assert!(r.lower_bound_pass);
        assert!(!r.pass);
        let p = AssumptionParams { beta: 0.5, ..Default::default() };
        let r = check_assumption(&family::uniform(), Assumption::B, &p).unwrap();
        assert!(!r.structurally_satisfiable);
    }
}
