//! Conditional and penalised maximum likelihood.
//!
//! Given the stopping stage `t`, the log-likelihood of `θ` on the `Z` scale is
//! `−½(z_t − θ√I_t)² − log P(T = t | θ)`. The penalised version weights the
//! selection term by `λ ∈ [0, 1]`:
//!
//! ```text
//! L_λ(θ) = −½(z_t − θ√I_t)² − λ log P(T = t | θ)
//! ```
//!
//! so `λ = 0` is the ordinary likelihood and `λ = 1` the conditional one.
//! With `a = e₁ − θ√I₁`, `h` the normal hazard `φ/(1 − Φ)` and `m = φ/Φ`,
//! the scores are
//!
//! * stopped: `√I₁(z₁ − θ√I₁) − λ√I₁ h(a)`;
//! * continued: `√I₂(z₂ − θ√I₂) + λ√I₁ m(a)`.
//!
//! Both are strictly decreasing in `θ` when `I₂ > I₁`, so the maximiser is
//! the unique root of the score. It is found by Newton's method safeguarded
//! with bisection on `[θ̂ − 1, θ̂ + 1]` around the MLE `θ̂`; if the root lies
//! outside, the edge is returned and marked as clamped. After stopping with
//! `z₁` just above the boundary the conditional estimate lies far below `θ̂`,
//! so clamping does occur.
//!
//! `λ*` is the weight at which the penalised estimate for a trial stopping
//! exactly on the boundary is zero; every trial that stops then has a
//! positive penalised estimate.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::ci::{Flag, Flags};
use crate::design::{Outcome, Trial};
use crate::error::{Error, Result};
use crate::numerics::{maximize_1d, normal};

/// Half-width of the search bracket around the MLE.
pub const SEARCH_SPAN: f64 = 1.0;
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 200;
const LAMBDA_TOL: f64 = 1e-13;
const ORACLE_GRID: usize = 400;

/// A likelihood-based estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// The maximiser lies at or beyond the edge of the search bracket.
    pub clamped: bool,
}

/// `L_λ(θ)`.
pub fn penalised_loglik(theta: f64, lambda: f64, e1: f64, outcome: &Outcome) -> f64 {
    match *outcome {
        Outcome::StageOne { z1, i1 } => {
            let r1 = i1.sqrt();
            -0.5 * (z1 - theta * r1).powi(2) - lambda * normal::log_sf(e1 - theta * r1)
        }
        Outcome::StageTwo { z2, i1, i2 } => {
            let (r1, r2) = (i1.sqrt(), i2.sqrt());
            -0.5 * (z2 - theta * r2).powi(2) - lambda * normal::log_cdf(e1 - theta * r1)
        }
    }
}

/// Conditional log-likelihood, `L_1`.
pub fn conditional_loglik(theta: f64, e1: f64, outcome: &Outcome) -> f64 {
    penalised_loglik(theta, 1.0, e1, outcome)
}

/// Score of `L_λ` and its derivative.
pub fn penalised_score(theta: f64, lambda: f64, e1: f64, outcome: &Outcome) -> (f64, f64) {
    match *outcome {
        Outcome::StageOne { z1, i1 } => {
            let r1 = i1.sqrt();
            let a = e1 - theta * r1;
            let h = normal::hazard(a);
            let score = r1 * (z1 - theta * r1) - lambda * r1 * h;
            let slope = -i1 * (1.0 - lambda * h * (h - a));
            (score, slope)
        }
        Outcome::StageTwo { z2, i1, i2 } => {
            let (r1, r2) = (i1.sqrt(), i2.sqrt());
            let a = e1 - theta * r1;
            let m = normal::lower_hazard(a);
            let score = r2 * (z2 - theta * r2) + lambda * r1 * m;
            let slope = -i2 + lambda * i1 * m * (a + m);
            (score, slope)
        }
    }
}

/// Maximiser of `L_λ` over the range of a rate difference, by safeguarded
/// Newton on the score.
pub fn penalised_estimate(lambda: f64, e1: f64, outcome: &Outcome) -> Estimate {
    let center = outcome.theta_hat();
    let (mut lo, mut hi) = search_bracket(outcome);
    let s_lo = penalised_score(lo, lambda, e1, outcome).0;
    if !(s_lo > 0.0) {
        return Estimate { value: lo, clamped: true };
    }
    let s_hi = penalised_score(hi, lambda, e1, outcome).0;
    if !(s_hi < 0.0) {
        return Estimate { value: hi, clamped: true };
    }
    let mut x = center;
    for _ in 0..NEWTON_MAX_ITER {
        let (s, ds) = penalised_score(x, lambda, e1, outcome);
        if s == 0.0 {
            break;
        }
        if s > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - s / ds;
        let next = if ds < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step < NEWTON_TOL || hi - lo < NEWTON_TOL {
            break;
        }
    }
    Estimate { value: x, clamped: false }
}

/// Conditional MLE of a trial.
///
/// Debug builds cross-check the score root against direct numerical
/// maximisation of the conditional log-likelihood and against a 400-point
/// grid over the search bracket.
pub fn conditional_mle(trial: &Trial) -> Result<Estimate> {
    conditional_mle_of(trial.design.e1, &trial.outcome())
}

pub fn conditional_mle_of(e1: f64, outcome: &Outcome) -> Result<Estimate> {
    let est = penalised_estimate(1.0, e1, outcome);
    if !est.value.is_finite() {
        return Err(Error::NonFinite("conditional MLE"));
    }
    if cfg!(debug_assertions) {
        check_against_maximisation(1.0, e1, outcome, est);
    }
    Ok(est)
}

/// `[θ̂ − 1, θ̂ + 1]`.
pub fn search_bracket(outcome: &Outcome) -> (f64, f64) {
    let center = outcome.theta_hat();
    (center - SEARCH_SPAN, center + SEARCH_SPAN)
}

/// Panics if the score root disagrees with numerical maximisation.
fn check_against_maximisation(lambda: f64, e1: f64, outcome: &Outcome, est: Estimate) {
    let (lo, hi) = search_bracket(outcome);
    let f = |t: f64| penalised_loglik(t, lambda, e1, outcome);
    let argmax = maximize_1d(f, lo, hi).expect("bounded maximisation");
    assert!(
        (argmax - est.value).abs() <= 1e-6,
        "score root {} vs numerical argmax {argmax} for {outcome:?}",
        est.value
    );
    let step = (hi - lo) / (ORACLE_GRID - 1) as f64;
    let best = (0..ORACLE_GRID)
        .map(|k| lo + step * k as f64)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .expect("non-empty grid");
    assert!(
        (best - est.value).abs() <= step,
        "grid maximum {best} far from score root {} for {outcome:?}",
        est.value
    );
}

/// Penalty weight and its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaStar {
    pub value: f64,
    pub flags: Flags,
}

static LAMBDA_CACHE: RwLock<Option<HashMap<(u64, u64), LambdaStar>>> = RwLock::new(None);

/// `λ*` for interim boundary `e1` and interim information `i1`: the weight
/// at which the penalised estimate of a trial stopping with `z₁ = e₁` is 0.
///
/// Found by bisection on `λ`, each step maximising `L_λ` numerically.
/// Results are cached.
pub fn lambda_star(e1: f64, i1: f64) -> LambdaStar {
    let key = (e1.to_bits(), i1.to_bits());
    if let Some(hit) = LAMBDA_CACHE
        .read()
        .ok()
        .and_then(|g| g.as_ref().and_then(|m| m.get(&key).copied()))
    {
        return hit;
    }
    let value = compute_lambda_star(e1, i1);
    if let Ok(mut guard) = LAMBDA_CACHE.write() {
        guard.get_or_insert_with(HashMap::new).insert(key, value);
    }
    value
}

/// Penalised estimate at the boundary datum, by direct maximisation.
pub fn boundary_estimate(lambda: f64, e1: f64, i1: f64) -> f64 {
    let outcome = Outcome::StageOne { z1: e1, i1 };
    let (lo, hi) = search_bracket(&outcome);
    let f = |t: f64| penalised_loglik(t, lambda, e1, &outcome);
    maximize_1d(f, lo, hi).unwrap_or(f64::NAN)
}

fn compute_lambda_star(e1: f64, i1: f64) -> LambdaStar {
    let at = |lambda: f64| boundary_estimate(lambda, e1, i1);
    let (mut lo, mut hi) = (0.0, 1.0);
    let (p_lo, p_hi) = (at(lo), at(hi));
    if !(p_lo > 0.0) {
        return LambdaStar { value: 0.0, flags: Flags::empty().with(Flag::LambdaClamped) };
    }
    if !(p_hi < 0.0) {
        return LambdaStar { value: 1.0, flags: Flags::empty().with(Flag::LambdaClamped) };
    }
    while hi - lo > LAMBDA_TOL {
        let mid = 0.5 * (lo + hi);
        if at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    LambdaStar { value: 0.5 * (lo + hi), flags: Flags::empty() }
}

/// Penalised estimate of a stopped trial; the conditional MLE otherwise.
pub fn penalised_mle(trial: &Trial) -> Result<(Estimate, Flags)> {
    let outcome = trial.outcome();
    match outcome {
        Outcome::StageTwo { .. } => Ok((conditional_mle(trial)?, Flags::empty())),
        Outcome::StageOne { i1, .. } => {
            let ls = lambda_star(trial.design.e1, i1);
            let est = penalised_estimate(ls.value, trial.design.e1, &outcome);
            if !est.value.is_finite() {
                return Err(Error::NonFinite("penalised MLE"));
            }
            if cfg!(debug_assertions) {
                check_against_maximisation(ls.value, trial.design.e1, &outcome, est);
            }
            Ok((est, ls.flags))
        }
    }
}
