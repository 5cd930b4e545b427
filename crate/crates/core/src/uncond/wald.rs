//! Standard (naive) Wald interval with unpooled variance.

use crate::ci::{CiResult, Flag, Flags, Method};
use crate::design::Trial;

/// `√(p̂_t(1 − p̂_t)/n_t + p̂_c(1 − p̂_c)/n_c)`.
pub fn wald_se(s_ctrl: u32, s_trt: u32, n_ctrl: u32, n_trt: u32) -> f64 {
    let pc = f64::from(s_ctrl) / f64::from(n_ctrl);
    let pt = f64::from(s_trt) / f64::from(n_trt);
    (pt * (1.0 - pt) / f64::from(n_trt) + pc * (1.0 - pc) / f64::from(n_ctrl)).sqrt()
}

/// `θ̂ ± Φ⁻¹(1 − α/2)·SE` on the cumulative data at the stopping stage.
pub fn wald_ci(trial: &Trial) -> CiResult {
    let (s_c, s_t, n_c, n_t) = trial.final_counts();
    let se = wald_se(s_c, s_t, n_c, n_t);
    let theta = trial.theta_hat();
    let half = trial.design.z_crit() * se;
    let mut flags = Flags::empty();
    if se == 0.0 {
        flags.insert(Flag::ZeroVariance);
    }
    CiResult::new(Method::Wald, theta - half, theta + half, Some(theta), flags)
}
