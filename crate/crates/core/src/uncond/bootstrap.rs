//! Unconditional parametric bootstrap.
//!
//! Replicate trials are generated at the end-of-trial response rates: binomial
//! stage-1 counts, the interim stopping rule, and binomial stage-2 increments
//! when the replicate continues. The interval is the pair of `(α/2, 1 − α/2)`
//! empirical quantiles of the replicate MLEs; the point is their mean.

use rayon::prelude::*;

use crate::ci::{CiResult, Flag, Flags, Method};
use crate::design::Trial;
use crate::numerics::quantile::two_sided_quantiles;
use crate::rng::{blocks, stream, DiscreteTable, Purpose};
use crate::tables::DesignTables;

/// Resampling size and stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resampling {
    /// Number of resamples.
    pub count: usize,
    pub seed: u64,
    /// Outer stream index; [`crate::rng::OBSERVED`] for a single analysis,
    /// the replicate index inside a simulation.
    pub outer: u64,
}

/// Samplers for one replicate trial at fixed response rates.
pub(crate) struct ArmSamplers {
    pub s1_ctrl: DiscreteTable,
    pub s1_trt: DiscreteTable,
    pub s2_ctrl: DiscreteTable,
    pub s2_trt: DiscreteTable,
}

impl ArmSamplers {
    pub fn new(tables: &DesignTables, p_ctrl: f64, p_trt: f64) -> Self {
        let d = tables.design();
        let (m_c, m_t) = d.increments();
        Self {
            s1_ctrl: DiscreteTable::binomial(d.n1_ctrl, p_ctrl),
            s1_trt: DiscreteTable::binomial(d.n1_trt, p_trt),
            s2_ctrl: DiscreteTable::binomial(m_c, p_ctrl),
            s2_trt: DiscreteTable::binomial(m_t, p_trt),
        }
    }
}

/// MLEs of `count` unconditional replicates, in stream order.
pub(crate) fn replicate_estimates(tables: &DesignTables, samplers: &ArmSamplers, resampling: Resampling) -> Vec<f64> {
    let d = tables.design();
    let per_block: Vec<Vec<f64>> = blocks(resampling.count)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(j, size)| {
            let mut rng = stream(resampling.seed, Purpose::ParametricBootstrap, resampling.outer, j);
            (0..size)
                .map(|_| {
                    let c1 = samplers.s1_ctrl.sample(&mut rng);
                    let t1 = samplers.s1_trt.sample(&mut rng);
                    if tables.stops(c1, t1) {
                        tables.rate_difference_stage1(c1, t1)
                    } else {
                        let c = c1 + samplers.s2_ctrl.sample(&mut rng);
                        let t = t1 + samplers.s2_trt.sample(&mut rng);
                        f64::from(t) / f64::from(d.n2_trt) - f64::from(c) / f64::from(d.n2_ctrl)
                    }
                })
                .collect()
        })
        .collect();
    per_block.concat()
}

/// Percentile interval of the unconditional parametric bootstrap.
pub fn parametric_bootstrap_ci(trial: &Trial, tables: &DesignTables, resampling: Resampling) -> CiResult {
    if resampling.count == 0 {
        return CiResult::failed(Method::ParametricBootstrap, Flag::NonConvergence);
    }
    let (s_c, s_t, n_c, n_t) = trial.final_counts();
    let p_ctrl = f64::from(s_c) / f64::from(n_c);
    let p_trt = f64::from(s_t) / f64::from(n_t);
    let samplers = ArmSamplers::new(tables, p_ctrl, p_trt);
    let mut estimates = replicate_estimates(tables, &samplers, resampling);
    let point = compensated_mean(&estimates);
    match two_sided_quantiles(&mut estimates, trial.design.alpha / 2.0) {
        Ok((lo, hi)) => CiResult::new(Method::ParametricBootstrap, lo, hi, Some(point), Flags::empty()),
        Err(e) => CiResult::from_error(Method::ParametricBootstrap, &e),
    }
}

/// Mean with Neumaier-compensated summation, in slice order.
pub(crate) fn compensated_mean(values: &[f64]) -> f64 {
    let mut sum = crate::sim::NeumaierSum::default();
    for &v in values {
        sum.add(v);
    }
    sum.value() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{Design, TrialData};
    use crate::fixture;
    use crate::rng::OBSERVED;

    #[test]
    fn musec_bootstrap() {
        let trial = fixture::musec_trial();
        let tables = DesignTables::new(trial.design);
        let r = Resampling { count: 200_000, seed: 1, outer: OBSERVED };
        let ci = parametric_bootstrap_ci(&trial, &tables, r);
        assert!((ci.point.unwrap() - 0.143).abs() < 0.005, "{ci:?}");
        assert!((ci.lower - 0.041).abs() < 0.006, "{ci:?}");
        assert!((ci.upper - 0.253).abs() < 0.006, "{ci:?}");
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let trial = fixture::musec_trial();
        let tables = DesignTables::new(trial.design);
        let r = Resampling { count: 10_000, seed: 42, outer: 3 };
        let a = parametric_bootstrap_ci(&trial, &tables, r);
        let b = parametric_bootstrap_ci(&trial, &tables, r);
        assert_eq!(a.lower.to_bits(), b.lower.to_bits());
        assert_eq!(a.upper.to_bits(), b.upper.to_bits());
        assert_eq!(a.point.unwrap().to_bits(), b.point.unwrap().to_bits());
        let c = parametric_bootstrap_ci(&trial, &tables, Resampling { seed: 43, ..r });
        assert_ne!(a.lower.to_bits(), c.lower.to_bits());
    }

    #[test]
    fn equal_rates_centre_near_zero() {
        let design = Design::new(2000, 2000, 4000, 4000, 2.797, 1.977, 0.05).unwrap();
        let trial = Trial::new(design, TrialData::continued(1000, 1000, 1000, 1000)).unwrap();
        let tables = DesignTables::new(design);
        let ci = parametric_bootstrap_ci(&trial, &tables, Resampling { count: 20_000, seed: 5, outer: OBSERVED });
        assert!(ci.point.unwrap().abs() < 0.002, "{ci:?}");
        assert!((ci.lower + ci.upper).abs() < 0.004, "{ci:?}");
    }
}
