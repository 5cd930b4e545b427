//! Conditional bootstrap intervals for the conditional and penalised MLEs.
//!
//! Replicate trials are generated at the end-of-trial response rates and
//! kept only when they stop at the same stage as the observed trial; stage-1
//! draws are repeated until that happens. Replicates whose stage-1 pooled
//! rate is 0 or 1 have no defined estimate and are also redrawn. The interval
//! is the pair of `(α/2, 1 − α/2)` empirical quantiles of the replicate
//! estimates.
//!
//! After continuing, the penalised interval is the conditional-likelihood
//! interval. After stopping, both intervals are computed from the same
//! accepted replicates.

use rayon::prelude::*;

use super::mle::{conditional_mle, penalised_mle};
use crate::ci::{CiResult, Flag, Method};
use crate::design::{Stage, Trial};
use crate::error::{Error, Result};
use crate::numerics::quantile::two_sided_quantiles;
use crate::rng::{blocks, stream, Purpose};
use crate::tables::DesignTables;
use crate::uncond::bootstrap::{ArmSamplers, Resampling};

/// Minimum acceptance rate of the stage-matching rejection step.
pub const ACCEPTANCE_FLOOR: f64 = 1e-4;
/// Draws attempted before the acceptance rate is checked.
const MIN_ATTEMPTS: usize = 100_000;

/// Conditional-bootstrap replicate estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalReplicates {
    pub conditional: Vec<f64>,
    /// Penalised estimates; present only when the observed trial stopped.
    pub penalised: Option<Vec<f64>>,
}

/// Accepted replicates in stream order.
pub fn conditional_replicates(
    trial: &Trial,
    tables: &DesignTables,
    resampling: Resampling,
) -> Result<ConditionalReplicates> {
    let (s_c, s_t, n_c, n_t) = trial.final_counts();
    let samplers = ArmSamplers::new(tables, f64::from(s_c) / f64::from(n_c), f64::from(s_t) / f64::from(n_t));
    let stage = trial.stop_stage();
    let per_block: Vec<Result<(Vec<f64>, Vec<f64>)>> = blocks(resampling.count)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(j, size)| {
            let mut rng = stream(resampling.seed, Purpose::ConditionalBootstrap, resampling.outer, j);
            let mut cond = Vec::with_capacity(size);
            let mut pen = Vec::with_capacity(if stage == Stage::One { size } else { 0 });
            let mut attempts = 0usize;
            while cond.len() < size {
                attempts += 1;
                if attempts >= MIN_ATTEMPTS && (cond.len() as f64) < ACCEPTANCE_FLOOR * attempts as f64 {
                    return Err(Error::RejectionStarvation {
                        floor: ACCEPTANCE_FLOOR,
                        accepted: cond.len(),
                        attempts,
                    });
                }
                let c1 = samplers.s1_ctrl.sample(&mut rng);
                let t1 = samplers.s1_trt.sample(&mut rng);
                let stops = tables.stops(c1, t1);
                if stops != (stage == Stage::One) || tables.degenerate_stage1(c1, t1) {
                    continue;
                }
                if stops {
                    cond.push(tables.conditional_stage1(c1, t1));
                    pen.push(tables.penalised_stage1(c1, t1));
                } else {
                    let c = c1 + samplers.s2_ctrl.sample(&mut rng);
                    let t = t1 + samplers.s2_trt.sample(&mut rng);
                    cond.push(tables.conditional_stage2(c1 + t1, c, t));
                }
            }
            Ok((cond, pen))
        })
        .collect();
    let mut conditional = Vec::with_capacity(resampling.count);
    let mut penalised = Vec::new();
    for block in per_block {
        let (c, p) = block?;
        conditional.extend(c);
        penalised.extend(p);
    }
    Ok(ConditionalReplicates {
        conditional,
        penalised: (stage == Stage::One).then_some(penalised),
    })
}

fn percentile(method: Method, mut sample: Vec<f64>, alpha: f64, point: f64, flags: crate::ci::Flags) -> CiResult {
    match two_sided_quantiles(&mut sample, alpha / 2.0) {
        Ok((lo, hi)) => CiResult::new(method, lo, hi, Some(point), flags),
        Err(e) => CiResult::from_error(method, &e),
    }
}

/// Conditional-likelihood and penalised-likelihood intervals from one set of
/// conditional bootstrap replicates.
pub fn likelihood_cis(trial: &Trial, tables: &DesignTables, resampling: Resampling) -> (CiResult, CiResult) {
    let fail = |flag: Flag| {
        (
            CiResult::failed(Method::ConditionalLikelihood, flag),
            CiResult::failed(Method::PenalisedLikelihood, flag),
        )
    };
    if resampling.count == 0 {
        return fail(Flag::NonConvergence);
    }
    let cond_point = match conditional_mle(trial) {
        Ok(e) => e,
        Err(e) => return fail(Flag::from_error(&e)),
    };
    let (pen_point, pen_flags) = match penalised_mle(trial) {
        Ok(v) => v,
        Err(e) => return fail(Flag::from_error(&e)),
    };
    let reps = match conditional_replicates(trial, tables, resampling) {
        Ok(r) => r,
        Err(e) => return fail(Flag::from_error(&e)),
    };
    let alpha = trial.design.alpha;
    let mut cond_flags = crate::ci::Flags::empty();
    if cond_point.clamped {
        cond_flags.insert(Flag::EstimateClamped);
    }
    let mut pen_flags = pen_flags;
    if pen_point.clamped {
        pen_flags.insert(Flag::EstimateClamped);
    }
    match reps.penalised {
        None => {
            let cond = percentile(Method::ConditionalLikelihood, reps.conditional, alpha, cond_point.value, cond_flags);
            let pen = CiResult { method: Method::PenalisedLikelihood, ..cond };
            (cond, pen)
        }
        Some(pen_sample) => (
            percentile(Method::ConditionalLikelihood, reps.conditional, alpha, cond_point.value, cond_flags),
            percentile(Method::PenalisedLikelihood, pen_sample, alpha, pen_point.value, pen_flags),
        ),
    }
}

pub fn conditional_likelihood_ci(trial: &Trial, tables: &DesignTables, resampling: Resampling) -> CiResult {
    likelihood_cis(trial, tables, resampling).0
}

pub fn penalised_likelihood_ci(trial: &Trial, tables: &DesignTables, resampling: Resampling) -> CiResult {
    likelihood_cis(trial, tables, resampling).1
}
