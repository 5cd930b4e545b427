//! Per-design lookup tables shared by resampling methods.
//!
//! Bootstrap replicates of a trial are integer count vectors, so every
//! quantity a replicate needs (stopping decision, conditional and penalised
//! estimates) is a function of a small set of counts for a fixed design. The
//! stopping decision is tabulated up front; estimates are filled in lazily
//! the first time a count combination is seen. Each entry is a pure function
//! of its key, so concurrent filling cannot change results.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use crate::cond::mle::{lambda_star, penalised_estimate};
use crate::design::{information, rate_difference, z_or_zero, Design, Outcome};

const EMPTY: u64 = u64::MAX;

/// Lookup tables for one design.
#[derive(Debug)]
pub struct DesignTables {
    design: Design,
    stop: Vec<bool>,
    conditional_stage1: OnceLock<Vec<AtomicU64>>,
    penalised_stage1: OnceLock<Vec<AtomicU64>>,
    conditional_stage2: OnceLock<Vec<AtomicU64>>,
}

impl DesignTables {
    pub fn new(design: Design) -> Self {
        let (n_c, n_t) = (design.n1_ctrl, design.n1_trt);
        let mut stop = Vec::with_capacity(((n_c + 1) * (n_t + 1)) as usize);
        for c in 0..=n_c {
            for t in 0..=n_t {
                stop.push(z_or_zero(c, t, n_c, n_t) > design.e1);
            }
        }
        Self {
            design,
            stop,
            conditional_stage1: OnceLock::new(),
            penalised_stage1: OnceLock::new(),
            conditional_stage2: OnceLock::new(),
        }
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    #[inline]
    fn stage1_index(&self, c1: u32, t1: u32) -> usize {
        (c1 * (self.design.n1_trt + 1) + t1) as usize
    }

    /// Whether stage-1 counts `(c1, t1)` cross the interim boundary.
    #[inline]
    pub fn stops(&self, c1: u32, t1: u32) -> bool {
        self.stop[self.stage1_index(c1, t1)]
    }

    #[inline]
    pub fn rate_difference_stage1(&self, c1: u32, t1: u32) -> f64 {
        rate_difference(c1, t1, self.design.n1_ctrl, self.design.n1_trt)
    }

    /// Whether the stage-1 pooled rate is 0 or 1.
    #[inline]
    pub fn degenerate_stage1(&self, c1: u32, t1: u32) -> bool {
        let total = c1 + t1;
        total == 0 || total == self.design.n1_ctrl + self.design.n1_trt
    }

    fn stage1_outcome(&self, c1: u32, t1: u32) -> Outcome {
        let d = &self.design;
        let i1 = information(c1, t1, d.n1_ctrl, d.n1_trt).unwrap_or(f64::NAN);
        Outcome::StageOne {
            z1: rate_difference(c1, t1, d.n1_ctrl, d.n1_trt) * i1.sqrt(),
            i1,
        }
    }

    fn stage1_table<'a>(cell: &'a OnceLock<Vec<AtomicU64>>, design: &Design) -> &'a [AtomicU64] {
        cell.get_or_init(|| {
            let n = ((design.n1_ctrl + 1) * (design.n1_trt + 1)) as usize;
            (0..n).map(|_| AtomicU64::new(EMPTY)).collect()
        })
    }

    /// Conditional MLE of a replicate that stopped with counts `(c1, t1)`.
    pub fn conditional_stage1(&self, c1: u32, t1: u32) -> f64 {
        let table = Self::stage1_table(&self.conditional_stage1, &self.design);
        lookup(&table[self.stage1_index(c1, t1)], || {
            penalised_estimate(1.0, self.design.e1, &self.stage1_outcome(c1, t1)).value
        })
    }

    /// Penalised MLE of a replicate that stopped with counts `(c1, t1)`.
    pub fn penalised_stage1(&self, c1: u32, t1: u32) -> f64 {
        let table = Self::stage1_table(&self.penalised_stage1, &self.design);
        lookup(&table[self.stage1_index(c1, t1)], || {
            let outcome = self.stage1_outcome(c1, t1);
            let lambda = lambda_star(self.design.e1, outcome.i1()).value;
            penalised_estimate(lambda, self.design.e1, &outcome).value
        })
    }

    /// Conditional MLE of a replicate that continued, from its stage-1
    /// pooled success total and cumulative final counts `(c, t)`.
    pub fn conditional_stage2(&self, stage1_total: u32, c: u32, t: u32) -> f64 {
        let d = &self.design;
        let table = self.conditional_stage2.get_or_init(|| {
            let n = ((d.n1_ctrl + d.n1_trt + 1) * (d.n2_ctrl + 1) * (d.n2_trt + 1)) as usize;
            (0..n).map(|_| AtomicU64::new(EMPTY)).collect()
        });
        let idx = ((stage1_total * (d.n2_ctrl + 1) + c) * (d.n2_trt + 1) + t) as usize;
        lookup(&table[idx], || {
            let n1 = f64::from(d.n1_ctrl + d.n1_trt);
            let p1 = f64::from(stage1_total) / n1;
            let i1 = 1.0 / (p1 * (1.0 - p1) * (1.0 / f64::from(d.n1_ctrl) + 1.0 / f64::from(d.n1_trt)));
            let i2 = information(c, t, d.n2_ctrl, d.n2_trt).unwrap_or(f64::NAN);
            let z2 = rate_difference(c, t, d.n2_ctrl, d.n2_trt) * i2.sqrt();
            penalised_estimate(1.0, d.e1, &Outcome::StageTwo { z2, i1, i2 }).value
        })
    }
}

#[inline]
fn lookup(slot: &AtomicU64, compute: impl FnOnce() -> f64) -> f64 {
    let bits = slot.load(Ordering::Relaxed);
    if bits != EMPTY {
        return f64::from_bits(bits);
    }
    let v = compute();
    slot.store(v.to_bits(), Ordering::Relaxed);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cond::mle::conditional_mle;
    use crate::design::{Trial, TrialData};
    use crate::fixture;

    #[test]
    fn stop_table_matches_trial_rule() {
        let design = fixture::musec_design();
        let tables = DesignTables::new(design);
        for c in (0..=97).step_by(7) {
            for t in 0..=101 {
                let z = z_or_zero(c, t, 97, 101);
                assert_eq!(tables.stops(c, t), z > design.e1);
            }
        }
    }

    #[test]
    fn cached_estimates_match_direct_computation() {
        let trial = fixture::musec_trial();
        let tables = DesignTables::new(trial.design);
        let direct = conditional_mle(&trial).unwrap().value;
        let cached = tables.conditional_stage2(39, 21, 42);
        assert_eq!(direct.to_bits(), cached.to_bits());
        assert_eq!(cached.to_bits(), tables.conditional_stage2(39, 21, 42).to_bits());

        let stopped = Trial::new(trial.design, TrialData::stopped_at_stage1(8, 30)).unwrap();
        let direct = conditional_mle(&stopped).unwrap().value;
        assert_eq!(direct.to_bits(), tables.conditional_stage1(8, 30).to_bits());
        let (pen, _) = crate::cond::mle::penalised_mle(&stopped).unwrap();
        assert_eq!(pen.value.to_bits(), tables.penalised_stage1(8, 30).to_bits());
    }
}
