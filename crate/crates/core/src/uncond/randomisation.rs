//! Re-randomisation interval.
//!
//! Patient outcomes are held fixed and treatment labels are permuted within
//! each stage, keeping the per-stage arm sizes. For binary outcomes this makes
//! the number of treatment-arm successes in a stage hypergeometric, which is
//! what is sampled. Each re-randomised trial is re-analysed with the
//! group sequential rule, and `p_adjusted` is the proportion more extreme
//! than the observed trial under stagewise ordering. Re-allocations that tie
//! with the observed one are left out unless `count_ties` is set.
//!
//! Permuting labels leaves the pooled rate of every analysis unchanged, so
//! information levels are fixed and, within a stage, `Z` increases with the
//! treatment-arm success count. Extremeness is therefore compared exactly on
//! integer counts.
//!
//! With `SE` the Wald standard error, the point is `Φ⁻¹(1 − p)·SE` and the
//! interval `(Φ⁻¹(1 − p) ± Φ⁻¹(1 − α/2))·SE`.

use rayon::prelude::*;

use crate::ci::{CiResult, Flag, Flags, Method};
use crate::design::{Stage, Trial};
use crate::numerics::normal;
use crate::rng::{blocks, stream, DiscreteTable, Purpose};
use crate::tables::DesignTables;
use crate::uncond::bootstrap::Resampling;
use crate::uncond::wald::wald_se;

/// Options for [`randomisation_ci`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomisationOptions {
    pub resampling: Resampling,
    /// Count the observed allocation as one of the resamples, so that
    /// `p_adjusted ≥ 1/(N + 1)`.
    pub include_observed: bool,
    /// Count re-allocations that tie with the observed one as extreme.
    pub count_ties: bool,
}

/// `p_adjusted` and the number of resamples counted as extreme.
pub fn randomisation_pvalue(trial: &Trial, tables: &DesignTables, options: RandomisationOptions) -> (f64, u64) {
    let d = &trial.design;
    let data = &trial.data;
    let stage1 = DiscreteTable::hypergeometric(d.n1_ctrl + d.n1_trt, data.s1_ctrl + data.s1_trt, d.n1_trt);
    let total1 = data.s1_ctrl + data.s1_trt;
    let (m_c, m_t) = d.increments();
    let stage2 = data
        .stage2
        .map(|(c, t)| DiscreteTable::hypergeometric(m_c + m_t, c + t, m_t));
    let observed_stage = trial.stop_stage();
    let observed_trt = match observed_stage {
        Stage::One => data.s1_trt,
        Stage::Two => trial.final_counts().1,
    };
    let r = options.resampling;
    let beyond = |t: u32| t > observed_trt || (options.count_ties && t == observed_trt);
    let hits: u64 = blocks(r.count)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(j, size)| {
            let mut rng = stream(r.seed, Purpose::Randomisation, r.outer, j);
            let mut hits = 0u64;
            for _ in 0..size {
                let t1 = stage1.sample(&mut rng);
                let c1 = total1 - t1;
                let extreme = if tables.stops(c1, t1) {
                    observed_stage == Stage::Two || beyond(t1)
                } else {
                    match (&stage2, observed_stage) {
                        (Some(table), Stage::Two) => beyond(t1 + table.sample(&mut rng)),
                        _ => false,
                    }
                };
                hits += u64::from(extreme);
            }
            hits
        })
        .sum();
    let (num, den) = if options.include_observed {
        (hits + 1, r.count as u64 + 1)
    } else {
        (hits, r.count as u64)
    };
    (num as f64 / den as f64, hits)
}

/// Interval built from the re-randomisation p-value.
pub fn randomisation_ci(trial: &Trial, tables: &DesignTables, options: RandomisationOptions) -> CiResult {
    if options.resampling.count == 0 {
        return CiResult::failed(Method::Randomisation, Flag::NonConvergence);
    }
    let (p, _) = randomisation_pvalue(trial, tables, options);
    if !(p > 0.0 && p < 1.0) {
        return CiResult::failed(Method::Randomisation, Flag::DegeneratePValue);
    }
    let (s_c, s_t, n_c, n_t) = trial.final_counts();
    let se = wald_se(s_c, s_t, n_c, n_t);
    let q = normal::quantile_unchecked(1.0 - p);
    let z = trial.design.z_crit();
    let mut flags = Flags::empty();
    if se == 0.0 {
        flags.insert(Flag::ZeroVariance);
    }
    CiResult::new(Method::Randomisation, (q - z) * se, (q + z) * se, Some(q * se), flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{Design, TrialData};
    use crate::fixture;
    use crate::rng::OBSERVED;

    fn options(count: usize, seed: u64) -> RandomisationOptions {
        RandomisationOptions {
            resampling: Resampling { count, seed, outer: OBSERVED },
            include_observed: false,
            count_ties: false,
        }
    }

    /// Exact `p_adjusted` by summing over both hypergeometric stages.
    fn enumerated_pvalue(trial: &Trial, count_ties: bool) -> f64 {
        let d = &trial.design;
        let data = &trial.data;
        let tables = DesignTables::new(*d);
        let total1 = data.s1_ctrl + data.s1_trt;
        let stage1 = DiscreteTable::hypergeometric(d.n1_ctrl + d.n1_trt, total1, d.n1_trt);
        let (m_c, m_t) = d.increments();
        let (c2, t2) = data.stage2.unwrap();
        let stage2 = DiscreteTable::hypergeometric(m_c + m_t, c2 + t2, m_t);
        let observed = trial.final_counts().1;
        let mut p = 0.0;
        for t1 in 0..=total1.min(d.n1_trt) {
            let w1 = stage1.pmf(t1 as usize);
            if tables.stops(total1 - t1, t1) {
                p += w1;
                continue;
            }
            for t in 0..=(c2 + t2).min(m_t) {
                let hit = t1 + t > observed || (count_ties && t1 + t == observed);
                if hit {
                    p += w1 * stage2.pmf(t as usize);
                }
            }
        }
        p
    }

    #[test]
    fn musec_exact_enumeration() {
        let trial = fixture::musec_trial();
        let strict = enumerated_pvalue(&trial, false);
        let ties = enumerated_pvalue(&trial, true);
        assert!((strict - 0.004304).abs() < 1e-6, "{strict}");
        assert!((ties - 0.006827).abs() < 1e-6, "{ties}");
        let tables = DesignTables::new(trial.design);
        let n = 400_000;
        for (count_ties, want) in [(false, strict), (true, ties)] {
            let opts = RandomisationOptions { count_ties, ..options(n, 21) };
            let (p, _) = randomisation_pvalue(&trial, &tables, opts);
            let se = (want * (1.0 - want) / n as f64).sqrt();
            assert!((p - want).abs() < 4.0 * se, "{p} vs {want}");
        }
    }

    #[test]
    fn musec_randomisation() {
        let trial = fixture::musec_trial();
        let tables = DesignTables::new(trial.design);
        let ci = randomisation_ci(&trial, &tables, options(200_000, 1));
        assert!((ci.point.unwrap() - 0.130).abs() < 0.005, "{ci:?}");
        assert!((ci.lower - 0.033).abs() < 0.005, "{ci:?}");
        assert!((ci.upper - 0.226).abs() < 0.005, "{ci:?}");
    }

    #[test]
    fn extreme_observation_gives_zero_p_and_a_flag() {
        // Every stage-1 treatment patient responds and no control patient
        // does: no re-allocation is more extreme than the observed one.
        let design = Design::new(30, 30, 60, 60, 2.797, 1.977, 0.05).unwrap();
        let trial = Trial::new(design, TrialData::stopped_at_stage1(0, 30)).unwrap();
        let tables = DesignTables::new(design);
        let (p, hits) = randomisation_pvalue(&trial, &tables, options(2000, 3));
        assert_eq!(hits, 0);
        assert_eq!(p, 0.0);
        let ci = randomisation_ci(&trial, &tables, options(2000, 3));
        assert!(ci.flags.contains(Flag::DegeneratePValue));
        assert!(ci.is_failure());
        let with_obs = RandomisationOptions { include_observed: true, ..options(2000, 3) };
        let (p, _) = randomisation_pvalue(&trial, &tables, with_obs);
        assert_eq!(p, 1.0 / 2001.0);
    }

    #[test]
    fn null_like_data_has_large_p() {
        let design = Design::new(50, 50, 100, 100, 2.797, 1.977, 0.05).unwrap();
        let trial = Trial::new(design, TrialData::continued(10, 10, 10, 10)).unwrap();
        let tables = DesignTables::new(design);
        let (p, _) = randomisation_pvalue(&trial, &tables, options(20_000, 9));
        assert!(p > 0.4 && p < 0.6, "{p}");
    }
}
