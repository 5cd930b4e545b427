//! Simulation scenarios.

use crate::ci::Method;
use crate::design::Design;
use crate::error::{Error, Result};

/// True response rates, replicate counts and the methods to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub design: Design,
    pub p_ctrl: f64,
    pub p_trt: f64,
    /// Number of simulated trials.
    pub replicates: usize,
    /// Bootstrap replicates per simulated trial.
    pub bootstrap: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.design.validate()?;
        for (name, p) in [("p_ctrl", self.p_ctrl), ("p_trt", self.p_trt)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidScenario(format!("{name} = {p} must lie in (0, 1)")));
            }
        }
        if self.replicates == 0 {
            return Err(Error::InvalidScenario("at least one replicate is required".into()));
        }
        if self.methods.contains(&Method::Randomisation) {
            return Err(Error::InvalidScenario(
                "the randomisation interval is not available in simulations".into(),
            ));
        }
        let resampling = self.methods.iter().any(|m| m.is_resampling());
        if resampling && self.bootstrap == 0 {
            return Err(Error::InvalidScenario(
                "bootstrap methods requested with zero bootstrap replicates".into(),
            ));
        }
        Ok(())
    }

    /// `p_trt − p_ctrl`.
    pub fn true_theta(&self) -> f64 {
        self.p_trt - self.p_ctrl
    }
}
