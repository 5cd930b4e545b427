//! Exact interval and median-unbiased estimate under stagewise ordering.
//!
//! Outcomes are ordered by stopping stage first (any interim rejection is
//! more extreme than any final-analysis outcome) and by `Z` within a stage.
//! The p-value function is `P(θ) = P_θ(outcome at least as extreme as
//! observed)`:
//!
//! * stopped at stage 1: `1 − Φ(z₁ − θ√I₁)`;
//! * continued: `P_θ(Z₁ ≥ e₁) + P_θ(Z₁ < e₁, Z₂ ≥ z₂)`.
//!
//! The interim-rejection term belongs in the second line; without it `P` is
//! not a distribution function in `θ` over the whole sample space and the
//! limits stop agreeing with the test decision.

use crate::ci::{CiResult, Flag, Flags, Method};
use crate::design::{Outcome, Trial};
use crate::error::{Error, Result};
use crate::numerics::{bvnu, normal, roots};

/// Half-width of the effect-scale region searched for confidence limits.
pub const SEARCH_SPAN: f64 = 1.5;

/// Stagewise-ordering p-value function at `theta`.
pub fn stagewise_pvalue(theta: f64, e1: f64, outcome: &Outcome) -> Result<f64> {
    if theta.is_nan() {
        return Err(Error::NonFinite("theta"));
    }
    match *outcome {
        Outcome::StageOne { z1, i1 } => Ok(normal::sf(z1 - theta * i1.sqrt())),
        Outcome::StageTwo { z2, i1, i2 } => {
            let rho = outcome.correlation()?;
            Ok(pvalue_stage_two(theta, e1, z2, i1, i2, rho))
        }
    }
}

fn pvalue_stage_two(theta: f64, e1: f64, z2: f64, i1: f64, i2: f64, rho: f64) -> f64 {
    let a = e1 - theta * i1.sqrt();
    let b = z2 - theta * i2.sqrt();
    (normal::sf(a) + normal::sf(b) - bvnu(a, b, rho)).clamp(0.0, 1.0)
}

/// Solves `P(θ) = target`.
pub fn invert_pvalue(target: f64, e1: f64, outcome: &Outcome) -> Result<f64> {
    match *outcome {
        Outcome::StageOne { z1, i1 } => {
            Ok((z1 - normal::quantile(1.0 - target)?) / i1.sqrt())
        }
        Outcome::StageTwo { z2, i1, i2 } => {
            let rho = outcome.correlation()?;
            let f = |t: f64| pvalue_stage_two(t, e1, z2, i1, i2, rho);
            roots::invert_increasing(f, target, outcome.theta_hat(), SEARCH_SPAN)
        }
    }
}

/// Limits solving `P = α/2` and `P = 1 − α/2`; the point is the MUE, `P = ½`.
pub fn exact_ci(trial: &Trial) -> CiResult {
    let alpha = trial.design.alpha;
    let e1 = trial.design.e1;
    let outcome = trial.outcome();
    let solve = || -> Result<(f64, f64, f64)> {
        Ok((
            invert_pvalue(alpha / 2.0, e1, &outcome)?,
            invert_pvalue(1.0 - alpha / 2.0, e1, &outcome)?,
            invert_pvalue(0.5, e1, &outcome)?,
        ))
    };
    match solve() {
        Ok((lo, hi, mue)) => CiResult::new(Method::Exact, lo, hi, Some(mue), Flags::empty()),
        Err(e) => CiResult::failed(Method::Exact, Flag::from_error(&e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use crate::rng::{stream, Purpose};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    #[test]
    fn musec_exact_interval_and_mue() {
        let ci = exact_ci(&fixture::musec_trial());
        assert!((ci.lower - 0.034).abs() < 0.0005, "{ci:?}");
        assert!((ci.upper - 0.234).abs() < 0.0005, "{ci:?}");
        assert!((ci.point.unwrap() - 0.134).abs() < 0.0005, "{ci:?}");
        assert!(ci.flags.is_empty());
    }

    #[test]
    fn stage_one_centering() {
        let outcome = Outcome::StageOne { z1: 3.1, i1: 300.0 };
        let p = stagewise_pvalue(3.1 / 300f64.sqrt(), 2.797, &outcome).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn stage_one_closed_form_matches_root_finding() {
        let outcome = Outcome::StageOne { z1: 3.3, i1: 312.81 };
        let f = |t: f64| stagewise_pvalue(t, 2.797, &outcome).unwrap();
        for target in [0.025, 0.5, 0.975] {
            let closed = invert_pvalue(target, 2.797, &outcome).unwrap();
            let found = roots::invert_increasing(f, target, 0.0, SEARCH_SPAN).unwrap();
            assert_abs_diff_eq!(closed, found, epsilon = 1e-8);
        }
    }

    #[test]
    fn stage_one_boundary_consistency() {
        // z₁ = e₁: lower limit (e₁ − 1.96)/√I₁, positive because e₁ > 1.96.
        let i1: f64 = 312.81;
        let outcome = Outcome::StageOne { z1: 2.797, i1 };
        let lo = invert_pvalue(0.025, 2.797, &outcome).unwrap();
        assert_abs_diff_eq!(lo, (2.797 - 1.959_963_984_540_054) / i1.sqrt(), epsilon = 1e-12);
        assert!(lo > 0.0);
    }

    #[test]
    fn pvalue_matches_monte_carlo() {
        // Simulate the stagewise-more-extreme event directly.
        let (e1, i1, i2, z2obs) = (2.797, 312.81, 393.69, 2.718);
        let outcome = Outcome::StageTwo { z2: z2obs, i1, i2 };
        let rho = (i1 / i2).sqrt();
        let s = (1.0 - rho * rho).sqrt();
        let n = 10_000_000u64;
        for (k, theta) in [0.0, 0.137].into_iter().enumerate() {
            let (m1, m2) = (theta * f64::sqrt(i1), theta * f64::sqrt(i2));
            let mut rng = stream(99, Purpose::Trial, k as u64, 0);
            let mut hits = 0u64;
            for _ in 0..n {
                let x = standard_normal(&mut rng);
                let w = standard_normal(&mut rng);
                let z1 = m1 + x;
                let z2 = m2 + rho * x + s * w;
                if z1 >= e1 || z2 >= z2obs {
                    hits += 1;
                }
            }
            let mc = hits as f64 / n as f64;
            let se = (mc * (1.0 - mc) / n as f64).sqrt();
            let p = stagewise_pvalue(theta, e1, &outcome).unwrap();
            assert!((mc - p).abs() < 3.0 * se, "theta={theta}: mc {mc} vs {p} (se {se})");
        }
    }

    proptest! {
        #[test]
        fn pvalue_strictly_increasing(
            e1 in 2.0f64..4.0,
            i1 in 20.0f64..800.0,
            ratio in 1.05f64..4.0,
            z2 in -2.0f64..5.0,
        ) {
            let outcome = Outcome::StageTwo { z2, i1, i2: i1 * ratio };
            let center = outcome.theta_hat();
            let mut prev = f64::NEG_INFINITY;
            for k in 0..100 {
                let theta = center + f64::from(k - 50) / 50.0 * 5.0 / i1.sqrt();
                let p = stagewise_pvalue(theta, e1, &outcome).unwrap();
                // Near 1 the value is limited by rounding.
                prop_assert!(p > prev || (p > 1.0 - 1e-12 && p >= prev - 1e-15), "k={} p={} prev={}", k, p, prev);
                prev = p;
            }
        }
    }
}
