//! Trial generation and parallel metric accumulation.
//!
//! Replicate `i` draws its trial from the stream keyed `(seed, trial, i)` and
//! its bootstrap draws from streams keyed by `i` as well, so a replicate's
//! intervals do not depend on which thread computes it. Replicates are
//! grouped into fixed chunks; chunk tallies are merged in chunk order.

use rayon::prelude::*;

use super::metrics::{Accumulator, MetricRow};
use super::scenario::Scenario;
use crate::analysis::{analyze_with, AnalysisOptions};
use crate::ci::{CiResult, Flag, Method};
use crate::design::{z_or_zero, Stage, Trial, TrialData};
use crate::error::Result;
use crate::rng::{stream, Purpose};
use crate::tables::DesignTables;
use crate::uncond::bootstrap::ArmSamplers;

/// Replicates per accumulation chunk.
const CHUNK: usize = 64;

/// One simulated trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedTrial {
    pub index: u64,
    pub data: TrialData,
    pub stage: Stage,
    pub rejects: bool,
    /// `None` when a pooled response rate is 0 or 1.
    pub trial: Option<Trial>,
}

/// Generates replicate `index` of `scenario`.
pub fn simulate_trial(scenario: &Scenario, index: u64) -> SimulatedTrial {
    let tables = DesignTables::new(scenario.design);
    let samplers = ArmSamplers::new(&tables, scenario.p_ctrl, scenario.p_trt);
    draw_trial(scenario, &tables, &samplers, index)
}

pub(crate) fn draw_trial(
    scenario: &Scenario,
    tables: &DesignTables,
    samplers: &ArmSamplers,
    index: u64,
) -> SimulatedTrial {
    let d = &scenario.design;
    let mut rng = stream(scenario.seed, Purpose::Trial, index, 0);
    let c1 = samplers.s1_ctrl.sample(&mut rng);
    let t1 = samplers.s1_trt.sample(&mut rng);
    let (data, stage, rejects) = if tables.stops(c1, t1) {
        (TrialData::stopped_at_stage1(c1, t1), Stage::One, true)
    } else {
        let c2 = samplers.s2_ctrl.sample(&mut rng);
        let t2 = samplers.s2_trt.sample(&mut rng);
        let z2 = z_or_zero(c1 + c2, t1 + t2, d.n2_ctrl, d.n2_trt);
        (TrialData::continued(c1, t1, c2, t2), Stage::Two, z2 > d.e2)
    };
    SimulatedTrial {
        index,
        data,
        stage,
        rejects,
        trial: Trial::new(*d, data).ok(),
    }
}

/// A simulated trial with one interval per scenario method.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub trial: SimulatedTrial,
    pub cis: Vec<CiResult>,
}

fn evaluate(scenario: &Scenario, tables: &DesignTables, sim: SimulatedTrial) -> ReplicateResult {
    let cis = match &sim.trial {
        Some(trial) => {
            let options = AnalysisOptions {
                bootstrap: scenario.bootstrap,
                randomisations: 0,
                seed: scenario.seed,
                include_observed: false,
                count_ties: false,
            };
            analyze_with(trial, tables, &scenario.methods, &options, sim.index)
        }
        None => scenario
            .methods
            .iter()
            .map(|&m| CiResult::failed(m, Flag::DegenerateData))
            .collect(),
    };
    ReplicateResult { trial: sim, cis }
}

/// Intervals for replicates `range` of `scenario`, in index order.
pub fn replicate_results(scenario: &Scenario, range: std::ops::Range<u64>) -> Result<Vec<ReplicateResult>> {
    scenario.validate()?;
    let tables = DesignTables::new(scenario.design);
    let samplers = ArmSamplers::new(&tables, scenario.p_ctrl, scenario.p_trt);
    Ok(range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|i| evaluate(scenario, &tables, draw_trial(scenario, &tables, &samplers, i)))
        .collect())
}

/// Metric tables of a completed simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub methods: Vec<Method>,
    pub true_theta: f64,
    pub replicates: u64,
    /// Replicates that stopped at the interim analysis.
    pub stage1_stops: u64,
    /// Rows ordered by conditioning (overall, stage 1, stage 2), then method.
    pub rows: Vec<MetricRow>,
}

impl SimReport {
    pub fn stop_probability(&self) -> f64 {
        self.stage1_stops as f64 / self.replicates as f64
    }

    pub fn stop_probability_se(&self) -> f64 {
        let p = self.stop_probability();
        (p * (1.0 - p) / self.replicates as f64).sqrt()
    }

    pub fn row(&self, method: Method, conditioning: super::Conditioning) -> Option<&MetricRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.conditioning == conditioning)
    }
}

/// Runs the full simulation.
pub fn run(scenario: &Scenario) -> Result<SimReport> {
    scenario.validate()?;
    let tables = DesignTables::new(scenario.design);
    let samplers = ArmSamplers::new(&tables, scenario.p_ctrl, scenario.p_trt);
    let theta = scenario.true_theta();
    let n = scenario.replicates as u64;
    let chunks: Vec<u64> = (0..n.div_ceil(CHUNK as u64)).collect();
    let partial: Vec<Accumulator> = chunks
        .into_par_iter()
        .map(|k| {
            let mut acc = Accumulator::new(&scenario.methods);
            let end = ((k + 1) * CHUNK as u64).min(n);
            for i in k * CHUNK as u64..end {
                let r = evaluate(scenario, &tables, draw_trial(scenario, &tables, &samplers, i));
                acc.add(r.trial.stage, r.trial.rejects, &r.cis, theta);
            }
            acc
        })
        .collect();
    let mut total = Accumulator::new(&scenario.methods);
    for acc in &partial {
        total.merge(acc);
    }
    Ok(SimReport {
        methods: scenario.methods.clone(),
        true_theta: theta,
        replicates: total.replicates,
        stage1_stops: total.stage1,
        rows: total.rows(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use crate::sim::Conditioning;

    fn scenario(p_trt: f64, replicates: usize, methods: Vec<Method>) -> Scenario {
        Scenario {
            design: fixture::musec_design(),
            p_ctrl: 0.157,
            p_trt,
            replicates,
            bootstrap: 200,
            methods,
            seed: 2024,
        }
    }

    #[test]
    fn replicate_draws_are_deterministic() {
        let s = scenario(0.294, 10, vec![Method::Wald]);
        for i in [0, 7, 123_456] {
            assert_eq!(simulate_trial(&s, i), simulate_trial(&s, i));
        }
        assert_ne!(simulate_trial(&s, 0).data, simulate_trial(&s, 1).data);
    }

    #[test]
    fn stop_probability_under_the_null() {
        // One-sided stage-1 error of the boundary: 1 − Φ(2.797) ≈ 0.0026.
        let s = scenario(0.157, 200_000, vec![Method::Repeated]);
        let report = run(&s).unwrap();
        let p = report.stop_probability();
        let want = crate::numerics::normal::sf(2.797);
        let se = (want * (1.0 - want) / 200_000.0).sqrt();
        assert!((p - want).abs() < 3.0 * se + 0.0005, "{p} vs {want}");
    }

    #[test]
    fn repeated_interval_is_always_consistent() {
        let s = scenario(0.294, 5000, vec![Method::Repeated, Method::Wald]);
        let report = run(&s).unwrap();
        for c in Conditioning::ALL {
            assert_eq!(report.row(Method::Repeated, c).unwrap().consistency, 1.0);
        }
    }

    #[test]
    fn overall_is_stage_mixture() {
        let s = scenario(0.294, 3000, vec![Method::Wald, Method::Exact]);
        let report = run(&s).unwrap();
        for m in [Method::Wald, Method::Exact] {
            let o = report.row(m, Conditioning::Overall).unwrap();
            let a = report.row(m, Conditioning::Stage1).unwrap();
            let b = report.row(m, Conditioning::Stage2).unwrap();
            assert_eq!(o.n_effective, a.n_effective + b.n_effective);
            let mix = (a.coverage * a.n_effective as f64 + b.coverage * b.n_effective as f64)
                / o.n_effective as f64;
            assert!((o.coverage - mix).abs() < 1e-12);
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let s = scenario(0.294, 300, vec![Method::Wald, Method::ParametricBootstrap, Method::PenalisedLikelihood]);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| run(&s).unwrap());
        let b = three.install(|| run(&s).unwrap());
        assert_eq!(format!("{:?}", a.rows), format!("{:?}", b.rows));
    }

    #[test]
    fn metrics_from_replicates_match_run() {
        let s = scenario(0.294, 200, vec![Method::Wald, Method::ConditionalExact]);
        let results = replicate_results(&s, 0..200).unwrap();
        let rows = crate::sim::evaluate_metrics(
            &s.methods,
            s.true_theta(),
            results.iter().map(|r| (r.trial.stage, r.trial.rejects, r.cis.as_slice())),
        );
        let report = run(&s).unwrap();
        for (a, b) in rows.iter().zip(&report.rows) {
            assert_eq!(a.n_effective, b.n_effective);
            assert_eq!(a.coverage, b.coverage);
            assert!((a.width_mean - b.width_mean).abs() < 1e-14);
        }
    }

    #[test]
    fn randomisation_is_rejected() {
        let s = scenario(0.294, 10, vec![Method::Randomisation]);
        assert!(run(&s).is_err());
    }
}
