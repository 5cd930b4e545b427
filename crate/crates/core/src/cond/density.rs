//! Sampling distribution of the MLE given the stopping stage.
//!
//! Continuing (`T = 2`), with `ρ = √(I₁/I₂)`:
//!
//! ```text
//! f(θ̂ | θ, T = 2) = Φ((e₁ − θ̂√I₁)/√(1 − I₁/I₂)) · √I₂ φ(√I₂(θ̂ − θ)) / Φ(e₁ − θ√I₁)
//! ```
//!
//! The first factor is `P(Z₁ < e₁ | Z₂ = θ̂√I₂)`; the denominator is
//! `P_θ(T = 2)`. Stopping (`T = 1`), `θ̂ = Z₁/√I₁` is normal truncated to
//! `Z₁ > e₁`.

use crate::design::Stage;
use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate, QuadratureTol};
use crate::numerics::{bvnu, normal};

/// Below this `P(T = 2)` the closed-form tail loses relative precision and
/// the tail is integrated in log space instead.
const SMALL_CONTINUE_PROBABILITY: f64 = 1e-6;

/// Density and upper tail of the MLE conditional on the stopping stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalDensity {
    pub theta: f64,
    pub e1: f64,
    pub i1: f64,
    /// Final information; unused when `stage` is one.
    pub i2: f64,
    pub stage: Stage,
}

impl ConditionalDensity {
    pub fn new(theta: f64, e1: f64, i1: f64, i2: Option<f64>, stage: Stage) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFinite("theta"));
        }
        let i2 = match (stage, i2) {
            (Stage::One, _) => f64::NAN,
            (Stage::Two, Some(i2)) if i2 > i1 => i2,
            (Stage::Two, Some(i2)) => return Err(Error::InformationDecrease { i1, i2 }),
            (Stage::Two, None) => {
                return Err(Error::InvalidData("stage-2 information is required".into()))
            }
        };
        Ok(Self { theta, e1, i1, i2, stage })
    }

    /// `f(θ̂ | θ, T)`.
    pub fn density(&self, theta_hat: f64) -> f64 {
        match self.stage {
            Stage::One => {
                let r1 = self.i1.sqrt();
                if theta_hat * r1 <= self.e1 {
                    return 0.0;
                }
                let log = normal::log_pdf(r1 * (theta_hat - self.theta)) + r1.ln()
                    - normal::log_sf(self.e1 - self.theta * r1);
                log.exp()
            }
            Stage::Two => {
                let (r1, r2) = (self.i1.sqrt(), self.i2.sqrt());
                let s = (1.0 - self.i1 / self.i2).sqrt();
                let log = normal::log_cdf((self.e1 - theta_hat * r1) / s)
                    + normal::log_pdf(r2 * (theta_hat - self.theta))
                    + r2.ln()
                    - normal::log_cdf(self.e1 - self.theta * r1);
                log.exp()
            }
        }
    }

    /// `P(θ̂ ≥ observed | θ, T)`.
    pub fn upper_tail(&self, observed: f64) -> f64 {
        match self.stage {
            Stage::One => stage_one_tail(self.theta, self.e1, observed * self.i1.sqrt(), self.i1),
            Stage::Two => stage_two_tail(self.theta, self.e1, observed * self.i2.sqrt(), self.i1, self.i2),
        }
    }
}

/// `P(Z₁ ≥ z₁ | Z₁ > e₁)` at effect `theta`.
pub fn stage_one_tail(theta: f64, e1: f64, z1: f64, i1: f64) -> f64 {
    if z1 <= e1 {
        return 1.0;
    }
    let mu = theta * i1.sqrt();
    (normal::log_sf(z1 - mu) - normal::log_sf(e1 - mu)).exp().min(1.0)
}

/// `P(Z₂ ≥ z₂ | Z₁ < e₁)` at effect `theta`.
pub fn stage_two_tail(theta: f64, e1: f64, z2: f64, i1: f64, i2: f64) -> f64 {
    let rho = (i1 / i2).sqrt();
    let a = e1 - theta * i1.sqrt();
    let b = z2 - theta * i2.sqrt();
    let cont = normal::cdf(a);
    if cont >= SMALL_CONTINUE_PROBABILITY {
        return ((normal::sf(b) - bvnu(a, b, rho)) / cont).clamp(0.0, 1.0);
    }
    // E[1 − Φ((b − ρX)/s) | X < a] with X = a − t, weight φ(a − t)/Φ(a).
    let s = (1.0 - rho * rho).sqrt();
    let log_cont = normal::log_cdf(a);
    let integrand = |t: f64| {
        let x = a - t;
        normal::sf((b - rho * x) / s) * (normal::log_pdf(x) - log_cont).exp()
    };
    let tol = QuadratureTol { abs: 1e-14, rel: 1e-10, max_intervals: 2000 };
    integrate(integrand, 0.0, f64::INFINITY, tol)
        .map(|v| v.clamp(0.0, 1.0))
        .unwrap_or(f64::NAN)
}
