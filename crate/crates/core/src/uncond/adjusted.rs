//! Bias- and variance-adjusted normal interval.
//!
//! Under the stopping rule the final statistic is a mixture of the upper tail
//! of `Z₁` (stop) and `Z₂` restricted to `Z₁ ≤ e₁` (continue). Writing
//! `Z₁ = θ√I₁ + X` and `Z₂ = θ√I₂ + ρX + sW` with `X, W` independent standard
//! normals, `ρ = √(I₁/I₂)`, `s² = 1 − ρ²` and `a = e₁ − θ√I₁`, the truncated
//! moments of `X` give every moment in closed form:
//!
//! * `E[X; X > a] = φ(a)`, `E[X²; X > a] = 1 − Φ(a) + aφ(a)`;
//! * `E[X; X ≤ a] = −φ(a)`, `E[X²; X ≤ a] = Φ(a) − aφ(a)`.
//!
//! The interval is built on the score scale, `S_T = Z_T√I_T`. The bias term
//! `E(S_T) − θE(I_T)` vanishes (the score process minus `θ` times information
//! is a martingale), and the spread term is the second moment of the pivot
//! `Z_T − θ√I_T`, which equals `1 + s²·aφ(a)`. The spread is carried to the
//! effect scale by the observed standard error of the final estimate.

use crate::ci::{CiResult, Flag, Flags, Method};
use crate::design::Trial;
use crate::error::{Error, Result};
use crate::numerics::normal;
use crate::uncond::wald::wald_se;

/// Moments of the final MLE under the stopping rule at fixed `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustedMoments {
    pub theta: f64,
    /// `E_θ(θ̂)`.
    pub e_theta_hat: f64,
    /// `Var_θ(θ̂)`.
    pub var_theta_hat: f64,
    /// `P_θ(T = 1)`.
    pub stop_probability: f64,
    /// `E_θ(√I_T)`.
    pub e_sqrt_info: f64,
    /// `E_θ(I_T)`.
    pub e_info: f64,
    /// `E_θ(S_T) − θE_θ(I_T)` on the score scale.
    pub score_bias: f64,
    /// `E_θ[(Z_T − θ√I_T)²] − score_bias²`.
    pub pivot_variance: f64,
}

/// Moments of `θ̂` at `theta` with interim boundary `e1` and information
/// levels `i1 < i2`.
pub fn adjusted_moments(theta: f64, e1: f64, i1: f64, i2: f64) -> Result<AdjustedMoments> {
    if !(i2 > i1) {
        return Err(Error::InformationDecrease { i1, i2 });
    }
    if !theta.is_finite() {
        return Err(Error::NonFinite("theta"));
    }
    let (r1, r2) = (i1.sqrt(), i2.sqrt());
    let rho = r1 / r2;
    let s2 = 1.0 - rho * rho;
    let (m1, m2) = (theta * r1, theta * r2);
    let a = e1 - m1;
    let (dens, up, low) = if a.is_finite() {
        (normal::pdf(a), normal::sf(a), normal::cdf(a))
    } else {
        (0.0, if a > 0.0 { 0.0 } else { 1.0 }, if a > 0.0 { 1.0 } else { 0.0 })
    };
    let a_dens = if dens == 0.0 { 0.0 } else { a * dens };

    // Stop: Z₁ = m1 + X on X > a.
    let z1_1 = m1 * up + dens;
    let z1_2 = m1 * m1 * up + 2.0 * m1 * dens + up + a_dens;
    // Continue: Z₂ = m2 + ρX + sW on X ≤ a.
    let z2_1 = m2 * low - rho * dens;
    let z2_2 = m2 * m2 * low - 2.0 * m2 * rho * dens + rho * rho * (low - a_dens) + s2 * low;

    let mean = z1_1 / r1 + z2_1 / r2;
    let second = z1_2 / i1 + z2_2 / i2;
    let e_info = i1 * up + i2 * low;
    let score_bias = r1 * z1_1 + r2 * z2_1 - theta * e_info;
    let pivot_second = 1.0 + s2 * a_dens;
    Ok(AdjustedMoments {
        theta,
        e_theta_hat: mean,
        var_theta_hat: (second - mean * mean).max(0.0),
        stop_probability: up,
        e_sqrt_info: r1 * up + r2 * low,
        e_info,
        score_bias,
        pivot_variance: (pivot_second - score_bias * score_bias).max(0.0),
    })
}

/// Point `θ̂ − μ/I_T`, interval `point ± Φ⁻¹(1 − α/2)·σ·SE`, with `μ` the
/// score bias and `σ²` the pivot variance at `θ = θ̂`, and `SE` the unpooled
/// standard error at the stopping stage.
///
/// A trial that stopped early uses the projected final information.
pub fn adjusted_asymptotic_ci(trial: &Trial) -> CiResult {
    let theta = trial.theta_hat();
    let i1 = trial.stage1.info;
    let i2 = trial.projected_i2();
    let (s_c, s_t, n_c, n_t) = trial.final_counts();
    let se = wald_se(s_c, s_t, n_c, n_t);
    let info = trial.final_stats().info;
    match adjusted_moments(theta, trial.design.e1, i1, i2) {
        Ok(m) => {
            let point = theta - m.score_bias / info;
            let half = trial.design.z_crit() * m.pivot_variance.sqrt() * se;
            let mut flags = Flags::empty();
            if half == 0.0 {
                flags.insert(Flag::ZeroVariance);
            }
            CiResult::new(Method::AdjustedAsymptotic, point - half, point + half, Some(point), flags)
        }
        Err(e) => CiResult::from_error(Method::AdjustedAsymptotic, &e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Design;
    use crate::fixture;
    use crate::numerics::quadrature::{integrate, QuadratureTol};
    use crate::rng::{stream, Purpose};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Mean and second moment of θ̂ by quadrature over the interim statistic.
    fn moments_by_quadrature(theta: f64, e1: f64, i1: f64, i2: f64) -> (f64, f64) {
        let (r1, r2) = (i1.sqrt(), i2.sqrt());
        let rho = r1 / r2;
        let s2 = 1.0 - rho * rho;
        let (m1, m2) = (theta * r1, theta * r2);
        let a = e1 - m1;
        let tol = QuadratureTol::default();
        let stop1 = integrate(|x| (m1 + x) / r1 * normal::pdf(x), a, f64::INFINITY, tol).unwrap();
        let stop2 = integrate(|x| ((m1 + x) / r1).powi(2) * normal::pdf(x), a, f64::INFINITY, tol).unwrap();
        // Given X = x, Z₂ ~ N(m2 + ρx, s²).
        let cont1 = integrate(|x| (m2 + rho * x) / r2 * normal::pdf(x), f64::NEG_INFINITY, a, tol).unwrap();
        let cont2 = integrate(
            |x| (((m2 + rho * x).powi(2) + s2) / i2) * normal::pdf(x),
            f64::NEG_INFINITY,
            a,
            tol,
        )
        .unwrap();
        (stop1 + cont1, stop2 + cont2)
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for &(theta, e1, i1, i2) in &[
            (0.137, 2.797, 312.81, 393.69),
            (0.0, 2.797, 312.81, 393.69),
            (0.3, 2.2, 100.0, 400.0),
            (-0.2, 3.5, 50.0, 60.0),
        ] {
            let m = adjusted_moments(theta, e1, i1, i2).unwrap();
            let (mean, second) = moments_by_quadrature(theta, e1, i1, i2);
            assert_abs_diff_eq!(m.e_theta_hat, mean, epsilon = 1e-9);
            assert_abs_diff_eq!(m.var_theta_hat, second - mean * mean, epsilon = 1e-9);
        }
    }

    #[test]
    fn no_stopping_limit() {
        let m = adjusted_moments(0.2, 1e3, 300.0, 400.0).unwrap();
        assert_abs_diff_eq!(m.e_theta_hat, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(m.var_theta_hat, 1.0 / 400.0, epsilon = 1e-12);
    }

    #[test]
    fn expected_root_information_is_a_two_point_mixture() {
        let (theta, e1, i1, i2) = (0.137, 2.797, 312.81, 393.69);
        let m = adjusted_moments(theta, e1, i1, i2).unwrap();
        let (p1, p2) = crate::design::stop_probability(theta, e1, i1).unwrap();
        assert_eq!(m.e_sqrt_info, i1.sqrt() * p1 + i2.sqrt() * p2);
    }

    #[test]
    fn information_decrease_is_an_error() {
        assert!(matches!(
            adjusted_moments(0.1, 2.797, 300.0, 300.0),
            Err(Error::InformationDecrease { .. })
        ));
    }

    #[test]
    fn musec_adjusted_interval() {
        let ci = adjusted_asymptotic_ci(&fixture::musec_trial());
        assert!((ci.point.unwrap() - 0.137).abs() < 0.0005, "{ci:?}");
        assert!((ci.lower - 0.039).abs() < 0.0005, "{ci:?}");
        assert!((ci.upper - 0.235).abs() < 0.0005, "{ci:?}");
        assert!((ci.width() - 0.196).abs() < 0.001);
    }

    #[test]
    fn no_stopping_reduces_to_wald() {
        let m = adjusted_moments(0.15, 60.0, 312.81, 393.69).unwrap();
        assert_abs_diff_eq!(m.score_bias, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(m.pivot_variance, 1.0, epsilon = 1e-14);
        let data = fixture::musec_data();
        let design = Design { e1: 60.0, ..fixture::musec_design() };
        let trial = Trial::new(design, data).unwrap();
        let (a, w) = (adjusted_asymptotic_ci(&trial), crate::uncond::wald_ci(&trial));
        assert_abs_diff_eq!(a.lower, w.lower, epsilon = 1e-12);
        assert_abs_diff_eq!(a.upper, w.upper, epsilon = 1e-12);
    }

    #[test]
    fn score_bias_vanishes() {
        for &(theta, e1, i1, i2) in &[(0.137, 2.797, 312.81, 393.69), (0.4, 2.0, 40.0, 90.0), (-0.3, 2.5, 100.0, 300.0)] {
            let m = adjusted_moments(theta, e1, i1, i2).unwrap();
            assert_abs_diff_eq!(m.score_bias, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn pivot_moments_by_quadrature() {
        let (theta, e1, i1, i2) = (0.137, 2.797, 312.81, 393.69);
        let m = adjusted_moments(theta, e1, i1, i2).unwrap();
        let (r1, r2) = (i1.sqrt(), i2.sqrt());
        let rho = r1 / r2;
        let a = e1 - theta * r1;
        let tol = QuadratureTol::default();
        let stop = integrate(|x| x * x * normal::pdf(x), a, f64::INFINITY, tol).unwrap();
        let cont = integrate(|x| (rho * rho * x * x + 1.0 - rho * rho) * normal::pdf(x), f64::NEG_INFINITY, a, tol).unwrap();
        assert_abs_diff_eq!(m.pivot_variance, stop + cont, epsilon = 1e-9);
        // Stopping raises the spread when the boundary lies above the mean
        // interim statistic and lowers it otherwise.
        assert!(m.pivot_variance > 1.0);
        assert!(adjusted_moments(0.3, e1, i1, i2).unwrap().pivot_variance < 1.0);
    }

    #[test]
    fn moments_match_monte_carlo() {
        // 20 random (θ, design) pairs against 10⁷ normal-model replicates each
        // would take minutes; the acceptance suite runs that. Here 2·10⁶ draws
        // on four pairs.
        let cases = [
            (0.137, 2.797, 312.81, 393.69),
            (0.05, 2.5, 150.0, 320.0),
            (0.4, 3.0, 40.0, 90.0),
            (-0.1, 2.2, 200.0, 260.0),
        ];
        for (k, &(theta, e1, i1, i2)) in cases.iter().enumerate() {
            let m = adjusted_moments(theta, e1, i1, i2).unwrap();
            let (mean, var, n) = simulate_moments(theta, e1, i1, i2, 2_000_000, k as u64);
            let se_mean = (var / n).sqrt();
            assert!((mean - m.e_theta_hat).abs() < 3.0 * se_mean, "case {k}: {mean} vs {}", m.e_theta_hat);
            // SE of a sample variance ≈ var·√(2/n) for near-normal data; the
            // mixture has heavier structure, so allow a generous factor.
            let se_var = var * (4.0 / n).sqrt();
            assert!((var - m.var_theta_hat).abs() < 3.0 * se_var, "case {k}: {var} vs {}", m.var_theta_hat);
        }
    }

    fn simulate_moments(theta: f64, e1: f64, i1: f64, i2: f64, n: usize, key: u64) -> (f64, f64, f64) {
        let (r1, r2) = (i1.sqrt(), i2.sqrt());
        let rho = r1 / r2;
        let s = (1.0 - rho * rho).sqrt();
        let mut rng = stream(7, Purpose::Trial, key, 1);
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let x = standard_normal(&mut rng);
            let z1 = theta * r1 + x;
            let est = if z1 > e1 {
                z1 / r1
            } else {
                (theta * r2 + rho * x + s * standard_normal(&mut rng)) / r2
            };
            sum += est;
            sum2 += est * est;
        }
        let nf = n as f64;
        let mean = sum / nf;
        (mean, (sum2 - nf * mean * mean) / (nf - 1.0), nf)
    }
}
