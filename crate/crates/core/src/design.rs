//! The two-stage design, observed trial data and the statistics derived from
//! them.
//!
//! Counts are per arm. Stage-2 counts are stored as stage-2-only increments;
//! cumulative values are derived on demand. The standardised statistic uses
//! pooled-variance information, `Iₖ = 1 / [p̃(1 − p̃)(1/n_ctrl + 1/n_trt)]`
//! with `p̃` the pooled response rate through stage k.

use crate::error::{Error, Result};
use crate::numerics::normal;

/// Analysis stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    One,
    Two,
}

impl Stage {
    pub fn index(self) -> usize {
        match self {
            Stage::One => 1,
            Stage::Two => 2,
        }
    }
}

/// A two-stage design with one efficacy interim analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Design {
    /// Stage-1 sample size, control arm.
    pub n1_ctrl: u32,
    /// Stage-1 sample size, treatment arm.
    pub n1_trt: u32,
    /// Final cumulative sample size, control arm.
    pub n2_ctrl: u32,
    /// Final cumulative sample size, treatment arm.
    pub n2_trt: u32,
    /// Efficacy boundary at the interim analysis (Z scale).
    pub e1: f64,
    /// Efficacy boundary at the final analysis (Z scale).
    pub e2: f64,
    /// Two-sided error level of the intervals.
    pub alpha: f64,
}

impl Design {
    pub fn new(
        n1_ctrl: u32,
        n1_trt: u32,
        n2_ctrl: u32,
        n2_trt: u32,
        e1: f64,
        e2: f64,
        alpha: f64,
    ) -> Result<Self> {
        let d = Self {
            n1_ctrl,
            n1_trt,
            n2_ctrl,
            n2_trt,
            e1,
            e2,
            alpha,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0 < self.n1_ctrl && self.n1_ctrl < self.n2_ctrl) {
            return Err(Error::InvalidDesign(format!(
                "need 0 < n1_ctrl < n2_ctrl, got {} and {}",
                self.n1_ctrl, self.n2_ctrl
            )));
        }
        if !(0 < self.n1_trt && self.n1_trt < self.n2_trt) {
            return Err(Error::InvalidDesign(format!(
                "need 0 < n1_trt < n2_trt, got {} and {}",
                self.n1_trt, self.n2_trt
            )));
        }
        if !(self.e1.is_finite() && self.e2.is_finite() && self.e1 > self.e2 && self.e2 > 0.0) {
            return Err(Error::InvalidDesign(format!(
                "need e1 > e2 > 0, got e1 = {}, e2 = {}",
                self.e1, self.e2
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidDesign(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Cumulative `(n_ctrl, n_trt)` through `stage`.
    pub fn sizes(&self, stage: Stage) -> (u32, u32) {
        match stage {
            Stage::One => (self.n1_ctrl, self.n1_trt),
            Stage::Two => (self.n2_ctrl, self.n2_trt),
        }
    }

    /// Stage-2-only `(n_ctrl, n_trt)`.
    pub fn increments(&self) -> (u32, u32) {
        (self.n2_ctrl - self.n1_ctrl, self.n2_trt - self.n1_trt)
    }

    pub fn boundary(&self, stage: Stage) -> f64 {
        match stage {
            Stage::One => self.e1,
            Stage::Two => self.e2,
        }
    }

    /// Φ⁻¹(1 − α/2).
    pub fn z_crit(&self) -> f64 {
        normal::quantile_unchecked(1.0 - self.alpha / 2.0)
    }
}

/// Observed success counts. Stage-2 counts are stage-2-only increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialData {
    pub s1_ctrl: u32,
    pub s1_trt: u32,
    /// `(s2_ctrl, s2_trt)`, present iff the trial continued to stage 2.
    pub stage2: Option<(u32, u32)>,
}

impl TrialData {
    pub fn stopped_at_stage1(s1_ctrl: u32, s1_trt: u32) -> Self {
        Self {
            s1_ctrl,
            s1_trt,
            stage2: None,
        }
    }

    pub fn continued(s1_ctrl: u32, s1_trt: u32, s2_ctrl: u32, s2_trt: u32) -> Self {
        Self {
            s1_ctrl,
            s1_trt,
            stage2: Some((s2_ctrl, s2_trt)),
        }
    }

    /// Builds stage-2 increments from cumulative final counts.
    pub fn from_cumulative(s1_ctrl: u32, s1_trt: u32, final_ctrl: u32, final_trt: u32) -> Result<Self> {
        if final_ctrl < s1_ctrl || final_trt < s1_trt {
            return Err(Error::InvalidData(
                "final cumulative counts smaller than stage-1 counts".into(),
            ));
        }
        Ok(Self::continued(s1_ctrl, s1_trt, final_ctrl - s1_ctrl, final_trt - s1_trt))
    }

    /// Cumulative `(s_ctrl, s_trt)` through `stage`, if available.
    pub fn successes(&self, stage: Stage) -> Option<(u32, u32)> {
        match stage {
            Stage::One => Some((self.s1_ctrl, self.s1_trt)),
            Stage::Two => self
                .stage2
                .map(|(c, t)| (self.s1_ctrl + c, self.s1_trt + t)),
        }
    }

    fn check_ranges(&self, design: &Design) -> Result<()> {
        if self.s1_ctrl > design.n1_ctrl || self.s1_trt > design.n1_trt {
            return Err(Error::InvalidData(format!(
                "stage-1 successes ({}, {}) exceed stage-1 sizes ({}, {})",
                self.s1_ctrl, self.s1_trt, design.n1_ctrl, design.n1_trt
            )));
        }
        if let Some((c, t)) = self.stage2 {
            let (mc, mt) = design.increments();
            if c > mc || t > mt {
                return Err(Error::InvalidData(format!(
                    "stage-2 successes ({c}, {t}) exceed stage-2 sizes ({mc}, {mt})"
                )));
            }
        }
        Ok(())
    }
}

/// Pooled-variance information `1 / [p̃(1 − p̃)(1/n_ctrl + 1/n_trt)]`.
pub fn information(s_ctrl: u32, s_trt: u32, n_ctrl: u32, n_trt: u32) -> Result<f64> {
    let n = f64::from(n_ctrl) + f64::from(n_trt);
    let pooled = (f64::from(s_ctrl) + f64::from(s_trt)) / n;
    if !(pooled > 0.0 && pooled < 1.0) {
        return Err(Error::DegeneratePooledRate(pooled));
    }
    Ok(1.0 / (pooled * (1.0 - pooled) * (1.0 / f64::from(n_ctrl) + 1.0 / f64::from(n_trt))))
}

/// Range of a difference of two response rates.
pub const EFFECT_RANGE: (f64, f64) = (-1.0, 1.0);

/// Search region for estimates and limits of the rate difference: the effect
/// range, widened if needed to contain `center`.
pub fn effect_bracket(center: f64) -> (f64, f64) {
    (EFFECT_RANGE.0.min(center), EFFECT_RANGE.1.max(center))
}

/// `p̂_trt − p̂_ctrl`.
#[inline]
pub fn rate_difference(s_ctrl: u32, s_trt: u32, n_ctrl: u32, n_trt: u32) -> f64 {
    f64::from(s_trt) / f64::from(n_trt) - f64::from(s_ctrl) / f64::from(n_ctrl)
}

/// Z statistic for the counts; zero when the pooled rate is 0 or 1 (both
/// arms then have identical observed rates).
pub(crate) fn z_or_zero(s_ctrl: u32, s_trt: u32, n_ctrl: u32, n_trt: u32) -> f64 {
    match information(s_ctrl, s_trt, n_ctrl, n_trt) {
        Ok(info) => rate_difference(s_ctrl, s_trt, n_ctrl, n_trt) * info.sqrt(),
        Err(_) => 0.0,
    }
}

/// Per-stage summary: MLE, information and standardised statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageStatistics {
    pub stage: Stage,
    /// `p̂_trt − p̂_ctrl` on cumulative data through the stage.
    pub theta_hat: f64,
    pub info: f64,
    /// `theta_hat · √info`.
    pub z: f64,
    /// Stage at which the trial stopped.
    pub stop_stage: Stage,
}

/// Statistics at `stage`; requires the stage's cumulative counts.
pub fn stage_statistics(design: &Design, data: &TrialData, stage: Stage) -> Result<StageStatistics> {
    data.check_ranges(design)?;
    let (s_ctrl, s_trt) = data
        .successes(stage)
        .ok_or_else(|| Error::InvalidData("stage-2 counts requested but absent".into()))?;
    let (n_ctrl, n_trt) = design.sizes(stage);
    let info = information(s_ctrl, s_trt, n_ctrl, n_trt)?;
    let theta_hat = rate_difference(s_ctrl, s_trt, n_ctrl, n_trt);
    let z1 = z_or_zero(data.s1_ctrl, data.s1_trt, design.n1_ctrl, design.n1_trt);
    let stop_stage = if z1 > design.e1 { Stage::One } else { Stage::Two };
    Ok(StageStatistics {
        stage,
        theta_hat,
        info,
        z: theta_hat * info.sqrt(),
        stop_stage,
    })
}

/// A validated trial: design, data consistent with the stopping rule, and
/// the statistics every interval method consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trial {
    pub design: Design,
    pub data: TrialData,
    pub stage1: StageStatistics,
    /// Present iff the trial continued to stage 2.
    pub stage2: Option<StageStatistics>,
}

impl Trial {
    pub fn new(design: Design, data: TrialData) -> Result<Self> {
        design.validate()?;
        data.check_ranges(&design)?;
        let z1 = z_or_zero(data.s1_ctrl, data.s1_trt, design.n1_ctrl, design.n1_trt);
        let stops = z1 > design.e1;
        match (stops, data.stage2.is_some()) {
            (true, true) => {
                return Err(Error::InvalidData(format!(
                    "Z1 = {z1:.4} crosses e1 = {} but stage-2 counts were supplied",
                    design.e1
                )))
            }
            (false, false) => {
                return Err(Error::InvalidData(format!(
                    "Z1 = {z1:.4} does not cross e1 = {}; stage-2 counts are required",
                    design.e1
                )))
            }
            _ => {}
        }
        let stage1 = stage_statistics(&design, &data, Stage::One)?;
        let stage2 = if stops {
            None
        } else {
            Some(stage_statistics(&design, &data, Stage::Two)?)
        };
        Ok(Self {
            design,
            data,
            stage1,
            stage2,
        })
    }

    pub fn stop_stage(&self) -> Stage {
        self.stage1.stop_stage
    }

    /// Statistics at the stopping stage.
    pub fn final_stats(&self) -> &StageStatistics {
        self.stage2.as_ref().unwrap_or(&self.stage1)
    }

    pub fn theta_hat(&self) -> f64 {
        self.final_stats().theta_hat
    }

    /// Whether the trial rejects H₀: Z₁ > e₁, or Z₂ > e₂ at the final analysis.
    pub fn rejects(&self) -> bool {
        match self.stage2 {
            None => true,
            Some(s2) => s2.z > self.design.e2,
        }
    }

    /// Cumulative `(s_ctrl, s_trt, n_ctrl, n_trt)` at the stopping stage.
    pub fn final_counts(&self) -> (u32, u32, u32, u32) {
        let stage = self.stop_stage();
        let (s_ctrl, s_trt) = self.data.successes(stage).expect("validated");
        let (n_ctrl, n_trt) = self.design.sizes(stage);
        (s_ctrl, s_trt, n_ctrl, n_trt)
    }

    /// Information levels used by the model-based formulas.
    pub fn info_levels(&self) -> InfoLevels {
        InfoLevels {
            i1: self.stage1.info,
            i2: self.stage2.map(|s| s.info),
        }
    }
}

impl Trial {
    /// What the normal-model formulas need from this trial.
    pub fn outcome(&self) -> Outcome {
        match self.stage2 {
            None => Outcome::StageOne {
                z1: self.stage1.z,
                i1: self.stage1.info,
            },
            Some(s2) => Outcome::StageTwo {
                z2: s2.z,
                i1: self.stage1.info,
                i2: s2.info,
            },
        }
    }

    /// Final-analysis information for a trial that stopped early, projected
    /// from the stage-1 pooled rate and the planned final sample sizes.
    pub fn projected_i2(&self) -> f64 {
        match self.stage2 {
            Some(s2) => s2.info,
            None => {
                let d = &self.design;
                let n1 = f64::from(d.n1_ctrl + d.n1_trt);
                let p = f64::from(self.data.s1_ctrl + self.data.s1_trt) / n1;
                1.0 / (p * (1.0 - p) * (1.0 / f64::from(d.n2_ctrl) + 1.0 / f64::from(d.n2_trt)))
            }
        }
    }
}

/// The observed end of a trial on the standardised scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// Stopped at the interim analysis with statistic `z1`.
    StageOne { z1: f64, i1: f64 },
    /// Continued; final statistic `z2`.
    StageTwo { z2: f64, i1: f64, i2: f64 },
}

impl Outcome {
    pub fn stage(&self) -> Stage {
        match self {
            Outcome::StageOne { .. } => Stage::One,
            Outcome::StageTwo { .. } => Stage::Two,
        }
    }

    pub fn i1(&self) -> f64 {
        match *self {
            Outcome::StageOne { i1, .. } | Outcome::StageTwo { i1, .. } => i1,
        }
    }

    /// `(Z_T, I_T)`.
    pub fn final_z_info(&self) -> (f64, f64) {
        match *self {
            Outcome::StageOne { z1, i1 } => (z1, i1),
            Outcome::StageTwo { z2, i2, .. } => (z2, i2),
        }
    }

    /// `Z_T / √I_T`.
    pub fn theta_hat(&self) -> f64 {
        let (z, i) = self.final_z_info();
        z / i.sqrt()
    }

    /// `√(I₁/I₂)` for a continued trial, or the information-decrease error.
    pub fn correlation(&self) -> Result<f64> {
        match *self {
            Outcome::StageOne { .. } => Err(Error::InvalidData(
                "stage-2 information is not available".into(),
            )),
            Outcome::StageTwo { i1, i2, .. } if i2 > i1 => Ok((i1 / i2).sqrt()),
            Outcome::StageTwo { i1, i2, .. } => Err(Error::InformationDecrease { i1, i2 }),
        }
    }
}

/// Information at each analysis; `i2` is absent when the trial stopped early.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoLevels {
    pub i1: f64,
    pub i2: Option<f64>,
}

impl InfoLevels {
    /// `I₂` when it exceeds `I₁`, otherwise the information-decrease error.
    pub fn increasing_i2(&self) -> Result<f64> {
        match self.i2 {
            Some(i2) if i2 > self.i1 => Ok(i2),
            Some(i2) => Err(Error::InformationDecrease { i1: self.i1, i2 }),
            None => Err(Error::InvalidData("stage-2 information is not available".into())),
        }
    }
}

/// `(P(T = 1 | θ), P(T = 2 | θ))` under the normal model with interim
/// information `i1`.
pub fn stop_probability(theta: f64, e1: f64, i1: f64) -> Result<(f64, f64)> {
    if theta.is_nan() {
        return Err(Error::NonFinite("theta"));
    }
    let a = e1 - theta * i1.sqrt();
    let p1 = normal::sf(a);
    Ok((p1, 1.0 - p1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn musec_information() {
        // 1 / [p̃(1 − p̃)(1/97 + 1/101)] with p̃ = 39/198
        let i1 = information(12, 27, 97, 101).unwrap();
        let p: f64 = 39.0 / 198.0;
        assert_abs_diff_eq!(i1, 1.0 / (p * (1.0 - p) * (1.0 / 97.0 + 1.0 / 101.0)), epsilon = 1e-12);
        assert!((i1 - 312.82).abs() < 0.01, "{i1}");
        let i2 = information(21, 42, 134, 143).unwrap();
        assert!((i2 - 393.70).abs() < 0.01, "{i2}");
    }

    #[test]
    fn half_and_half_information() {
        assert_abs_diff_eq!(information(0, 50, 50, 50).unwrap(), 100.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_pooled_rate() {
        assert_eq!(information(0, 0, 10, 10), Err(Error::DegeneratePooledRate(0.0)));
        assert_eq!(information(10, 10, 10, 10), Err(Error::DegeneratePooledRate(1.0)));
    }

    #[test]
    fn musec_statistics() {
        let trial = fixture::musec_trial();
        assert!((trial.stage1.z - 2.540).abs() < 0.001, "{}", trial.stage1.z);
        let s2 = trial.stage2.unwrap();
        assert!((s2.z - 2.718).abs() < 0.001, "{}", s2.z);
        assert!((s2.theta_hat - 0.137).abs() < 0.0005);
        assert_eq!(trial.stop_stage(), Stage::Two);
        assert!(trial.rejects());
    }

    #[test]
    fn equal_arms_give_zero() {
        let design = Design::new(50, 50, 100, 100, 2.8, 2.0, 0.05).unwrap();
        let data = TrialData::continued(10, 10, 12, 12);
        let s = stage_statistics(&design, &data, Stage::Two).unwrap();
        assert_eq!(s.theta_hat, 0.0);
        assert_eq!(s.z, 0.0);
    }

    #[test]
    fn stage2_presence_must_match_stopping() {
        let design = fixture::musec_design();
        // Stops at stage 1 (huge effect) but stage-2 counts supplied.
        assert!(Trial::new(design, TrialData::continued(5, 60, 5, 20)).is_err());
        // Continues but stage-2 counts missing.
        assert!(Trial::new(design, TrialData::stopped_at_stage1(12, 27)).is_err());
        // Out-of-range counts.
        assert!(Trial::new(design, TrialData::stopped_at_stage1(98, 27)).is_err());
    }

    #[test]
    fn design_invariants() {
        assert!(Design::new(100, 100, 100, 200, 2.8, 2.0, 0.05).is_err());
        assert!(Design::new(100, 100, 200, 200, 2.0, 2.8, 0.05).is_err());
        assert!(Design::new(100, 100, 200, 200, 2.8, 2.0, 1.0).is_err());
        assert!(Design::new(100, 100, 200, 200, 2.8, -1.0, 0.05).is_err());
    }

    #[test]
    fn stop_probability_examples() {
        let i1 = 312.81;
        let e1 = 2.797;
        let (p1, p2) = stop_probability(e1 / f64::sqrt(i1), e1, i1).unwrap();
        assert_abs_diff_eq!(p1, 0.5, epsilon = 1e-15);
        assert_eq!(p1 + p2, 1.0);
        // Information implied by the true rates rather than the observed ones.
        let (pc, pt) = (0.157, 0.294);
        let pool = (97.0 * pc + 101.0 * pt) / 198.0;
        let i_true = 1.0 / (pool * (1.0 - pool) * (1.0 / 97.0 + 1.0 / 101.0));
        let (p1, _) = stop_probability(pt - pc, e1, i_true).unwrap();
        assert!((p1 - 0.308).abs() < 0.01, "{p1}");
        let (p1, _) = stop_probability(f64::NEG_INFINITY, e1, i1).unwrap();
        assert_eq!(p1, 0.0);
    }

    proptest! {
        #[test]
        fn swapping_arms_negates_theta(s_c in 0u32..=60, s_t in 0u32..=60, extra_c in 1u32..40, extra_t in 1u32..40) {
            let (n_c, n_t) = (60 + extra_c, 60 + extra_t);
            prop_assume!(s_c + s_t > 0 && s_c + s_t < n_c + n_t);
            let i = information(s_c, s_t, n_c, n_t).unwrap();
            let i_swapped = information(s_t, s_c, n_t, n_c).unwrap();
            prop_assert!(i > 0.0);
            prop_assert!((i - i_swapped).abs() <= 1e-12 * i);
            let th = rate_difference(s_c, s_t, n_c, n_t);
            prop_assert_eq!(th, -rate_difference(s_t, s_c, n_t, n_c));
        }

        #[test]
        fn z_matches_recomputation(s1c in 0u32..=97, s1t in 0u32..=101) {
            let design = fixture::musec_design();
            prop_assume!(s1c + s1t > 0 && s1c + s1t < 198);
            let data = TrialData::stopped_at_stage1(s1c, s1t);
            let s = stage_statistics(&design, &data, Stage::One).unwrap();
            prop_assert!((s.z - s.theta_hat * s.info.sqrt()).abs() < 1e-12);
            let p = f64::from(s1c + s1t) / 198.0;
            let z = (f64::from(s1t) / 101.0 - f64::from(s1c) / 97.0)
                / (p * (1.0 - p) * (1.0 / 97.0 + 1.0 / 101.0)).sqrt();
            prop_assert!((s.z - z).abs() <= 1e-12 * z.abs().max(1.0));
        }

        #[test]
        fn stop_probability_increasing(t1 in -1.0f64..1.0, dt in 1e-4f64..0.5) {
            let (a, b) = (stop_probability(t1, 2.797, 312.81).unwrap().0, stop_probability(t1 + dt, 2.797, 312.81).unwrap().0);
            prop_assert!(a <= b);
            prop_assert!(a < b || b == 1.0);
        }
    }
}
