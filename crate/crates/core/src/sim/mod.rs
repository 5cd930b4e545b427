//! Monte Carlo evaluation of interval methods under a true scenario.

pub mod engine;
pub mod metrics;
pub mod scenario;
pub mod snapshot;
pub mod sweep;

pub use engine::{replicate_results, run, simulate_trial, ReplicateResult, SimReport, SimulatedTrial};
pub use metrics::{evaluate_metrics, Conditioning, Metric, MetricRow};
pub use scenario::Scenario;
pub use snapshot::{replicate_snapshot, SnapshotRecord};
pub use sweep::{linear_grid, run_sweep, SweepPoint, SweepResult};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
