//! Running a set of interval methods on one trial.

use crate::ci::{CiResult, Method};
use crate::cond::{exact_conditional_ci, likelihood_cis, restricted_exact_conditional_ci};
use crate::design::Trial;
use crate::rng::OBSERVED;
use crate::tables::DesignTables;
use crate::uncond::{
    adjusted_asymptotic_ci, exact_ci, parametric_bootstrap_ci, randomisation_ci, repeated_ci, wald_ci,
    RandomisationOptions, Resampling,
};

/// Resampling settings for [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Bootstrap replicates (parametric and conditional bootstraps).
    pub bootstrap: usize,
    /// Re-randomisations.
    pub randomisations: usize,
    pub seed: u64,
    /// Count the observed allocation among the re-randomisations.
    pub include_observed: bool,
    /// Count re-randomisations that tie with the observed trial as extreme.
    pub count_ties: bool,
}

impl AnalysisOptions {
    /// No resampling: resampling methods report a failure.
    pub fn deterministic() -> Self {
        Self {
            bootstrap: 0,
            randomisations: 0,
            seed: 0,
            include_observed: false,
            count_ties: false,
        }
    }
}

/// Intervals for `methods`, in the order given.
pub fn analyze(trial: &Trial, methods: &[Method], options: &AnalysisOptions) -> Vec<CiResult> {
    let tables = DesignTables::new(trial.design);
    analyze_with(trial, &tables, methods, options, OBSERVED)
}

/// As [`analyze`] with shared lookup tables; `outer` keys the random streams.
pub fn analyze_with(
    trial: &Trial,
    tables: &DesignTables,
    methods: &[Method],
    options: &AnalysisOptions,
    outer: u64,
) -> Vec<CiResult> {
    let boot = Resampling {
        count: options.bootstrap,
        seed: options.seed,
        outer,
    };
    let wants_likelihood = methods
        .iter()
        .any(|m| matches!(m, Method::ConditionalLikelihood | Method::PenalisedLikelihood));
    let likelihood = wants_likelihood.then(|| likelihood_cis(trial, tables, boot));
    methods
        .iter()
        .map(|&m| match m {
            Method::Wald => wald_ci(trial),
            Method::Exact => exact_ci(trial),
            Method::Repeated => repeated_ci(trial),
            Method::AdjustedAsymptotic => adjusted_asymptotic_ci(trial),
            Method::ParametricBootstrap => parametric_bootstrap_ci(trial, tables, boot),
            Method::Randomisation => randomisation_ci(
                trial,
                tables,
                RandomisationOptions {
                    resampling: Resampling {
                        count: options.randomisations,
                        ..boot
                    },
                    include_observed: options.include_observed,
                    count_ties: options.count_ties,
                },
            ),
            Method::ConditionalExact => exact_conditional_ci(trial),
            Method::RestrictedExact => restricted_exact_conditional_ci(trial),
            Method::ConditionalLikelihood => likelihood.expect("computed above").0,
            Method::PenalisedLikelihood => likelihood.expect("computed above").1,
        })
        .collect()
}
