//! Repeated confidence interval.

use crate::ci::{CiResult, Flags, Method};
use crate::design::Trial;

/// `θ̂ ± e_T/√I_T`, with no point estimate.
pub fn repeated_ci(trial: &Trial) -> CiResult {
    let stats = trial.final_stats();
    let half = trial.design.boundary(stats.stage) / stats.info.sqrt();
    CiResult::new(
        Method::Repeated,
        stats.theta_hat - half,
        stats.theta_hat + half,
        None,
        Flags::empty(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{Design, TrialData};
    use crate::fixture;
    use proptest::prelude::*;

    #[test]
    fn musec() {
        let ci = repeated_ci(&fixture::musec_trial());
        assert!((ci.lower - 0.037).abs() < 0.0005, "{ci:?}");
        assert!((ci.upper - 0.237).abs() < 0.0005, "{ci:?}");
        assert!(ci.point.is_none());
    }

    proptest! {
        #[test]
        fn lower_positive_iff_boundary_crossed(s1c in 0u32..=40, s1t in 0u32..=40, s2c in 0u32..=40, s2t in 0u32..=40) {
            let design = Design::new(40, 40, 80, 80, 2.797, 1.977, 0.05).unwrap();
            let data = TrialData::continued(s1c, s1t, s2c, s2t);
            let trial = match Trial::new(design, data) {
                Ok(t) => t,
                Err(_) => match Trial::new(design, TrialData::stopped_at_stage1(s1c, s1t)) {
                    Ok(t) => t,
                    Err(_) => return Ok(()),
                },
            };
            let ci = repeated_ci(&trial);
            let stats = trial.final_stats();
            prop_assert_eq!(ci.lower > 0.0, stats.z > design.boundary(stats.stage));
        }
    }
}
