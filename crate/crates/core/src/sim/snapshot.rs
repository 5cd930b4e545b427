//! Per-replicate records for inspecting a simulation.

use super::engine::replicate_results;
use super::scenario::Scenario;
use crate::ci::CiResult;
use crate::design::{Stage, TrialData};
use crate::error::Result;

/// One simulated trial with its intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub index: u64,
    pub data: TrialData,
    pub stage: Stage,
    pub rejects: bool,
    /// NaN when the trial is degenerate.
    pub theta_hat: f64,
    pub cis: Vec<CiResult>,
}

/// The first `count` replicates of `scenario`, identical to the replicates
/// that [`run`](super::run) evaluates.
pub fn replicate_snapshot(scenario: &Scenario, count: usize) -> Result<Vec<SnapshotRecord>> {
    let count = count.min(scenario.replicates) as u64;
    Ok(replicate_results(scenario, 0..count)?
        .into_iter()
        .map(|r| SnapshotRecord {
            index: r.trial.index,
            data: r.trial.data,
            stage: r.trial.stage,
            rejects: r.trial.rejects,
            theta_hat: r.trial.trial.map_or(f64::NAN, |t| t.theta_hat()),
            cis: r.cis,
        })
        .collect())
}
