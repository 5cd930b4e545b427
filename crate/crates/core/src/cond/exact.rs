//! Exact conditional interval and its restricted version.
//!
//! Limits solve `P(θ̂ ≥ θ̂_obs | T, θ) = α/2` (lower) and `1 − α/2` (upper);
//! the conditional median-unbiased estimate solves the same equation at ½.
//! For stopped trials the ratio
//! `(1 − Φ(z₁ − θ√I₁)) / (1 − Φ(e₁ − θ√I₁))` can approach its limits only
//! very slowly, so a root outside the range of a rate difference, `[−1, 1]`,
//! is replaced by the edge of that range and flagged.
//!
//! The restricted interval intersects the conditional interval with the
//! values of `θ` under which the observed stopping stage is not implausible:
//! the upper limit is capped at `(e₁ − Φ⁻¹(α/2))/√I₁` after continuing, and
//! the lower limit raised to `(e₁ − Φ⁻¹(1 − α/2))/√I₁` after stopping. The
//! intersection can be empty; the result then keeps both limits, so that
//! `lower > upper`, and carries a flag.

use super::density::{stage_one_tail, stage_two_tail};
use crate::ci::{CiResult, Flag, Flags, Method};
use crate::design::{effect_bracket, Outcome, Trial};
use crate::error::Result;
use crate::numerics::{normal, roots};

/// Conditional interval limits and median-unbiased estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalLimits {
    pub lower: f64,
    pub upper: f64,
    pub median_unbiased: f64,
    pub flags: Flags,
}

/// `P(θ̂ ≥ θ̂_obs | T, θ)` for the observed outcome.
pub fn conditional_tail(theta: f64, e1: f64, outcome: &Outcome) -> Result<f64> {
    match *outcome {
        Outcome::StageOne { z1, i1 } => Ok(stage_one_tail(theta, e1, z1, i1)),
        Outcome::StageTwo { z2, i1, i2 } => {
            outcome.correlation()?;
            Ok(stage_two_tail(theta, e1, z2, i1, i2))
        }
    }
}

pub fn conditional_limits(e1: f64, alpha: f64, outcome: &Outcome) -> Result<ConditionalLimits> {
    if let Outcome::StageTwo { .. } = outcome {
        outcome.correlation()?;
    }
    let center = outcome.theta_hat();
    let (lo, hi) = effect_bracket(center);
    let tail = |t: f64| conditional_tail(t, e1, outcome).unwrap_or(f64::NAN);
    let mut flags = Flags::empty();
    let mut solve = |target: f64| -> Result<f64> {
        let (x, clamped) = roots::invert_increasing_within(tail, target, center, lo, hi)?;
        if clamped {
            flags.insert(Flag::LimitClamped);
        }
        Ok(x)
    };
    let lower = solve(alpha / 2.0)?;
    let upper = solve(1.0 - alpha / 2.0)?;
    let median_unbiased = solve(0.5)?;
    Ok(ConditionalLimits { lower, upper, median_unbiased, flags })
}

pub fn exact_conditional_ci(trial: &Trial) -> CiResult {
    match conditional_limits(trial.design.e1, trial.design.alpha, &trial.outcome()) {
        Ok(l) => CiResult::new(Method::ConditionalExact, l.lower, l.upper, Some(l.median_unbiased), l.flags),
        Err(e) => CiResult::from_error(Method::ConditionalExact, &e),
    }
}

/// Restriction applied to conditional limits `(lower, upper)`.
pub fn restrict(lower: f64, upper: f64, e1: f64, alpha: f64, outcome: &Outcome) -> (f64, f64) {
    let r1 = outcome.i1().sqrt();
    match outcome {
        Outcome::StageTwo { .. } => {
            let cap = (e1 - normal::quantile_unchecked(alpha / 2.0)) / r1;
            (lower, upper.min(cap))
        }
        Outcome::StageOne { .. } => {
            let floor = (e1 - normal::quantile_unchecked(1.0 - alpha / 2.0)) / r1;
            (lower.max(floor), upper)
        }
    }
}

pub fn restricted_exact_conditional_ci(trial: &Trial) -> CiResult {
    let (e1, alpha) = (trial.design.e1, trial.design.alpha);
    let outcome = trial.outcome();
    match conditional_limits(e1, alpha, &outcome) {
        Ok(l) => {
            let (lo, hi) = restrict(l.lower, l.upper, e1, alpha, &outcome);
            let mut flags = l.flags;
            if lo > hi {
                flags.insert(Flag::EmptyIntersection);
            }
            CiResult::new(Method::RestrictedExact, lo, hi, Some(l.median_unbiased), flags)
        }
        Err(e) => CiResult::from_error(Method::RestrictedExact, &e),
    }
}
