//! Rational-cheater economics.
//!
//! A participant weighs `B`, the net benefit of doing a task honestly, against
//! `U`, the utility of an undetected forgery, and `C`, the cost of getting
//! caught with probability `P`. Cheating is rational unless
//! `B > U (1 - P) - C P`; ties go to cheating.
//!
//! The supervisor picks `P` by balancing the expected loss `L` from forged
//! tasks against the cost `S` of shipping `1 + r(P)` copies of each task.

use alloc::vec::Vec;

use libm::pow;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    /// `U + C = 0` while `B < U`: no catch probability makes honesty pay.
    #[error("cheating cannot be deterred (U + C = 0 with B < U)")]
    Undeterrable,
    #[error("catch probability must be below 1 for the balance equation")]
    CertainCatch,
    #[error("invalid utility distribution: {0}")]
    Distribution(&'static str),
}

/// The scalar parameters of the cheating model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconParams {
    /// Net benefit of honest cooperation per task.
    pub b: f64,
    /// Net utility of an undetected forgery.
    pub u: f64,
    /// Cost of being caught.
    pub c: f64,
    /// Catch probability.
    pub p: f64,
    /// Supervisor's loss when a task is not done.
    pub l: f64,
    /// Cost to ship, monitor and receive one task.
    pub s: f64,
    /// Bound on the fraction of non-colluding participants.
    pub g: f64,
}

impl EconParams {
    pub fn validate(&self) -> Result<(), EconError> {
        if self.b.is_nan() || self.b <= 0.0 {
            return Err(EconError::InvalidParameter("B must be positive"));
        }
        if self.c.is_nan() || self.c < 0.0 {
            return Err(EconError::InvalidParameter("C must be non-negative"));
        }
        check_probability(self.p, "P must lie in [0, 1]")?;
        if !(self.g > 0.0 && self.g <= 1.0) {
            return Err(EconError::InvalidParameter("G must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Default replication factor `r(P) = P / G`.
    pub fn replication_factor(&self, p: f64) -> f64 {
        p / self.g
    }
}

fn check_probability(p: f64, what: &'static str) -> Result<(), EconError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(EconError::InvalidParameter(what))
    }
}

/// `B > U (1 - P) - C P`.
pub fn cooperation_preferred(b: f64, u: f64, c: f64, p: f64) -> bool {
    b > u * (1.0 - p) - c * p
}

/// `max(0, (U - B) / (U + C))`: cooperation is preferred once `P` exceeds it.
///
/// With `B > U` cooperation is preferred even at `P = 0`, which the strict
/// comparison against a zero threshold does not express.
pub fn deterrence_threshold(b: f64, u: f64, c: f64) -> Result<f64, EconError> {
    if b >= u {
        return Ok(0.0);
    }
    if u + c <= 0.0 {
        return Err(EconError::Undeterrable);
    }
    Ok(((u - b) / (u + c)).max(0.0))
}

/// Empirical step CDF of `U`, right-continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityDistribution {
    /// `(value, cumulative probability)`, values strictly increasing.
    points: Vec<(f64, f64)>,
}

const CDF_TOLERANCE: f64 = 1e-9;

impl UtilityDistribution {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, EconError> {
        if points.is_empty() {
            return Err(EconError::Distribution("no points"));
        }
        let mut prev: Option<(f64, f64)> = None;
        for &(v, cum) in &points {
            if !v.is_finite() || !(0.0..=1.0 + CDF_TOLERANCE).contains(&cum) {
                return Err(EconError::Distribution(
                    "values must be finite and probabilities in [0, 1]",
                ));
            }
            if let Some((pv, pc)) = prev {
                if v <= pv {
                    return Err(EconError::Distribution(
                        "values must be strictly increasing",
                    ));
                }
                if cum < pc {
                    return Err(EconError::Distribution(
                        "cumulative probabilities must not decrease",
                    ));
                }
            }
            prev = Some((v, cum));
        }
        if (points[points.len() - 1].1 - 1.0).abs() > CDF_TOLERANCE {
            return Err(EconError::Distribution(
                "cumulative probability must reach 1",
            ));
        }
        Ok(UtilityDistribution { points })
    }

    /// From `(value, mass)` pairs sorted by value.
    pub fn from_masses(masses: &[(f64, f64)]) -> Result<Self, EconError> {
        let mut cum = 0.0;
        let points = masses
            .iter()
            .map(|&(v, m)| {
                cum += m;
                (v, cum)
            })
            .collect();
        Self::new(points)
    }

    pub fn point_mass(value: f64) -> Self {
        UtilityDistribution {
            points: alloc::vec![(value, 1.0)],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// `Pr[U <= x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.points.partition_point(|&(v, _)| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.points[idx - 1].1
        }
    }

    /// `Pr[U >= x] = 1 - CDF(x-)`.
    pub fn prob_at_least(&self, x: f64) -> f64 {
        let idx = self.points.partition_point(|&(v, _)| v < x);
        let below = if idx == 0 {
            0.0
        } else {
            self.points[idx - 1].1
        };
        (1.0 - below).max(0.0)
    }
}

/// The fixed scalars of the supervisor's balance equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceParams {
    pub l: f64,
    pub s: f64,
    pub b: f64,
    pub c: f64,
}

/// Smallest utility that still makes cheating rational at catch probability `p`.
fn utility_threshold(params: &BalanceParams, p: f64) -> f64 {
    (params.b + params.c * p) / (1.0 - p)
}

/// `L Pr[U >= (B + C P) / (1 - P)] - (1 + r(P)) S`.
pub fn balance_residual(
    p: f64,
    params: &BalanceParams,
    dist: &UtilityDistribution,
    r: &dyn Fn(f64) -> f64,
) -> Result<f64, EconError> {
    if p == 1.0 {
        return Err(EconError::CertainCatch);
    }
    check_probability(p, "P must lie in [0, 1)")?;
    let at_risk = dist.prob_at_least(utility_threshold(params, p));
    Ok(params.l * at_risk - (1.0 + r(p)) * params.s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceSolution {
    /// Bracket midpoint at convergence.
    pub p: f64,
    pub residual: f64,
    /// The sign change sits on a jump of the utility CDF rather than on a
    /// continuous crossing.
    pub step_boundary: bool,
    pub iterations: u32,
}

/// Upper end of the search interval is `1 - SEARCH_MARGIN`.
pub const SEARCH_MARGIN: f64 = 1e-12;

/// Bisects `[0, 1 - SEARCH_MARGIN]` for a sign change of [`balance_residual`]
/// down to a bracket of width `tolerance`. `None` when the endpoints agree in
/// sign.
pub fn solve_balance(
    params: &BalanceParams,
    dist: &UtilityDistribution,
    r: &dyn Fn(f64) -> f64,
    tolerance: f64,
) -> Result<Option<BalanceSolution>, EconError> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(EconError::InvalidParameter("tolerance must lie in (0, 1)"));
    }
    let f = |p: f64| balance_residual(p, params, dist, r);
    let (mut lo, mut hi) = (0.0f64, 1.0 - SEARCH_MARGIN);
    let (mut f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo == 0.0 {
        return Ok(Some(BalanceSolution {
            p: 0.0,
            residual: 0.0,
            step_boundary: false,
            iterations: 0,
        }));
    }
    if (f_lo > 0.0) == (f_hi > 0.0) || f_hi == 0.0 && f_lo < 0.0 {
        return Ok(None);
    }
    let mut iterations = 0;
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        iterations += 1;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let step_boundary = dist.prob_at_least(utility_threshold(params, lo))
        != dist.prob_at_least(utility_threshold(params, hi));
    Ok(Some(BalanceSolution {
        p: mid,
        residual: f(mid)?,
        step_boundary,
        iterations,
    }))
}

/// Default ramp length for new identities.
pub const DEFAULT_RAMP: u32 = 20;

/// `max(1 - t / ramp, P / G)`: full duplication for fresh identities, decaying
/// to the steady-state rate `P / G`.
pub fn sybil_replication_prob(t: u64, p: f64, g: f64, ramp: u32) -> Result<f64, EconError> {
    check_probability(p, "P must lie in [0, 1]")?;
    if !(g > 0.0 && g <= 1.0) {
        return Err(EconError::InvalidParameter("G must lie in (0, 1]"));
    }
    if p > g {
        return Err(EconError::InvalidParameter("P must not exceed G"));
    }
    if ramp == 0 {
        return Err(EconError::InvalidParameter("ramp must be positive"));
    }
    let floor = p / g;
    let ramped = 1.0 - t as f64 / ramp as f64;
    Ok(ramped.max(floor).min(1.0))
}

/// `1 - (1 - P)^k`: chance of at least one catch in `k` independent attempts.
pub fn repeated_catch_probability(p: f64, attempts: u32) -> Result<f64, EconError> {
    check_probability(p, "P must lie in [0, 1]")?;
    Ok(1.0 - pow(1.0 - p, attempts as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cooperation_examples() {
        assert!(cooperation_preferred(1.0, 2.0, 1.0, 0.5));
        assert!(!cooperation_preferred(2.0, 2.0, 7.0, 0.0));
        for p in [1e-9, 0.3, 1.0] {
            assert!(cooperation_preferred(3.0, 2.0, 0.0, p));
            assert!(cooperation_preferred(2.0, 2.0, 0.0, p));
        }
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(deterrence_threshold(2.0, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(deterrence_threshold(1.0, 2.0, 2.0).unwrap(), 0.25);
        let t = deterrence_threshold(1.0, 4.0, 4.0).unwrap();
        assert!(t < 0.5);
        assert!(cooperation_preferred(1.0, 4.0, 4.0, 0.5));
        let t = deterrence_threshold(1e-9, 1.0, 0.0).unwrap();
        assert!((t - 1.0).abs() < 1e-8);
        assert_eq!(deterrence_threshold(1.0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(
            deterrence_threshold(-1.0, 0.0, 0.0),
            Err(EconError::Undeterrable)
        );
    }

    #[test]
    fn step_cdf_reads() {
        let d = UtilityDistribution::from_masses(&[(1.0, 0.5), (3.0, 0.5)]).unwrap();
        assert_eq!(d.cdf(0.5), 0.0);
        assert_eq!(d.cdf(1.0), 0.5);
        assert_eq!(d.cdf(2.0), 0.5);
        assert_eq!(d.prob_at_least(1.0), 1.0);
        assert_eq!(d.prob_at_least(1.5), 0.5);
        assert_eq!(d.prob_at_least(3.0), 0.5);
        assert_eq!(d.prob_at_least(3.5), 0.0);
        assert!(UtilityDistribution::new(alloc::vec![(1.0, 0.5)]).is_err());
        assert!(UtilityDistribution::new(alloc::vec![(2.0, 0.5), (1.0, 1.0)]).is_err());
        assert!(UtilityDistribution::new(alloc::vec![(1.0, 0.7), (2.0, 0.6)]).is_err());
    }

    fn uniform_ten() -> UtilityDistribution {
        let masses: Vec<(f64, f64)> = (1..=10).map(|v| (v as f64, 0.1)).collect();
        UtilityDistribution::from_masses(&masses).unwrap()
    }

    #[test]
    fn residual_examples() {
        let params = BalanceParams {
            l: 100.0,
            s: 1.0,
            b: 1.0,
            c: 1.0,
        };
        let r = |p: f64| p;
        let v = balance_residual(0.5, &params, &uniform_ten(), &r).unwrap();
        assert!((v - 78.5).abs() < 1e-9);
        let zero_loss = BalanceParams { l: 0.0, ..params };
        for p in [0.0, 0.3, 0.9] {
            assert_eq!(
                balance_residual(p, &zero_loss, &uniform_ten(), &r).unwrap(),
                -(1.0 + p)
            );
        }
        let low = UtilityDistribution::point_mass(2.0);
        assert_eq!(balance_residual(0.5, &params, &low, &r).unwrap(), -1.5);
        assert_eq!(
            balance_residual(1.0, &params, &low, &r),
            Err(EconError::CertainCatch)
        );
    }

    #[test]
    fn sybil_and_repeat_examples() {
        assert_eq!(sybil_replication_prob(0, 0.5, 0.95, 20).unwrap(), 1.0);
        assert_eq!(
            sybil_replication_prob(20, 0.5, 0.95, 20).unwrap(),
            10.0 / 19.0
        );
        assert_eq!(sybil_replication_prob(10, 0.3, 1.0, 20).unwrap(), 0.5);
        assert!(sybil_replication_prob(0, 0.96, 0.95, 20).is_err());
        assert_eq!(
            repeated_catch_probability(0.5, 10).unwrap(),
            1.0 - 1.0 / 1024.0
        );
        assert_eq!(repeated_catch_probability(1.0, 1).unwrap(), 1.0);
        assert_eq!(repeated_catch_probability(0.0, 7).unwrap(), 0.0);
    }

    #[test]
    fn solver_lands_on_step() {
        let params = BalanceParams {
            l: 100.0,
            s: 1.0,
            b: 1.0,
            c: 1.0,
        };
        let r = |p: f64| p;
        let sol = solve_balance(&params, &uniform_ten(), &r, 1e-10)
            .unwrap()
            .unwrap();
        assert!((sol.p - 9.0 / 11.0).abs() < 1e-8);
        assert!(sol.step_boundary);
    }

    #[test]
    fn solver_continuous_crossing() {
        let params = BalanceParams {
            l: 1.5,
            s: 1.0,
            b: 1.0,
            c: 1.0,
        };
        let r = |p: f64| p;
        let big = UtilityDistribution::point_mass(1e300);
        let sol = solve_balance(&params, &big, &r, 1e-12).unwrap().unwrap();
        assert!((sol.p - 0.5).abs() < 1e-10);
        assert!(!sol.step_boundary);
        let never = BalanceParams { l: 0.0, ..params };
        assert_eq!(solve_balance(&never, &big, &r, 1e-9).unwrap(), None);
    }
}
