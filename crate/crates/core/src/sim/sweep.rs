//! Metrics over a grid of treatment response rates.
//!
//! Every grid point reuses the scenario seed, so neighbouring points are
//! driven by the same uniform draws.

use super::engine::{run, SimReport};
use super::scenario::Scenario;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub p_trt: f64,
    pub report: SimReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

/// Evenly spaced grid of `count` points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Runs `base` once per treatment rate in `grid`.
pub fn run_sweep(base: &Scenario, grid: &[f64]) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::InvalidScenario("sweep grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidScenario("sweep grid must be strictly increasing".into()));
    }
    let points = grid
        .iter()
        .map(|&p_trt| {
            let scenario = Scenario { p_trt, ..base.clone() };
            Ok(SweepPoint {
                p_trt,
                report: run(&scenario)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { points })
}
