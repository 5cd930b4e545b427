//! Coverage, width and test-consistency metrics.
//!
//! For true effect `θ` and a replicate interval `(L, U)`:
//!
//! * coverage: `L < θ < U`;
//! * lower miss `L > θ`, upper miss `U < θ`;
//! * consistency: the trial rejects (`Z₁ > e₁`, or `Z₂ > e₂` at the final
//!   analysis) and `L > 0`, or it does not reject and `L ≤ 0 ≤ U`.
//!
//! Rates are reported overall and conditional on the stopping stage. A
//! replicate whose interval carries a failure flag is left out of that
//! method's rates and counted in `failures`. An empty restricted interval is
//! not a failure: it covers nothing and its width is negative. The width
//! standard deviation uses the `n − 1` divisor.

use super::NeumaierSum;
use crate::ci::{CiResult, Method};
use crate::design::Stage;

/// Replicate subset a row summarises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Conditioning {
    Overall,
    Stage1,
    Stage2,
}

impl Conditioning {
    pub const ALL: [Conditioning; 3] = [Conditioning::Overall, Conditioning::Stage1, Conditioning::Stage2];

    pub fn name(self) -> &'static str {
        match self {
            Conditioning::Overall => "overall",
            Conditioning::Stage1 => "stage1",
            Conditioning::Stage2 => "stage2",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn for_stage(stage: Stage) -> Conditioning {
        match stage {
            Stage::One => Conditioning::Stage1,
            Stage::Two => Conditioning::Stage2,
        }
    }
}

/// One summary metric of a [`MetricRow`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Coverage,
    WidthMean,
    WidthSd,
    Consistency,
    LowerMiss,
    UpperMiss,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Coverage,
        Metric::WidthMean,
        Metric::WidthSd,
        Metric::Consistency,
        Metric::LowerMiss,
        Metric::UpperMiss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Coverage => "coverage",
            Metric::WidthMean => "width_mean",
            Metric::WidthSd => "width_sd",
            Metric::Consistency => "consistency",
            Metric::LowerMiss => "lower_miss",
            Metric::UpperMiss => "upper_miss",
        }
    }
}

/// Summary of one method over one replicate subset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub method: Method,
    pub conditioning: Conditioning,
    pub coverage: f64,
    pub width_mean: f64,
    pub width_sd: f64,
    pub consistency: f64,
    pub lower_miss: f64,
    pub upper_miss: f64,
    /// Replicates in the subset with a usable interval.
    pub n_effective: u64,
    /// Replicates in the subset whose interval failed.
    pub failures: u64,
}

impl MetricRow {
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Coverage => self.coverage,
            Metric::WidthMean => self.width_mean,
            Metric::WidthSd => self.width_sd,
            Metric::Consistency => self.consistency,
            Metric::LowerMiss => self.lower_miss,
            Metric::UpperMiss => self.upper_miss,
        }
    }

    /// Monte Carlo standard error of the reported value.
    pub fn mc_se(&self, metric: Metric) -> f64 {
        let n = self.n_effective as f64;
        match metric {
            Metric::WidthMean => self.width_sd / n.sqrt(),
            // Normal-theory approximation for the SD of widths.
            Metric::WidthSd => self.width_sd / (2.0 * (n - 1.0)).sqrt(),
            _ => {
                let p = self.value(metric);
                (p * (1.0 - p) / n).sqrt()
            }
        }
    }
}

/// Running counts for one method and subset.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Tally {
    n: u64,
    covered: u64,
    lower_miss: u64,
    upper_miss: u64,
    consistent: u64,
    failures: u64,
    width: NeumaierSum,
    width_sq: NeumaierSum,
}

impl Tally {
    fn add(&mut self, ci: &CiResult, theta: f64, rejects: bool) {
        if ci.is_failure() {
            self.failures += 1;
            return;
        }
        self.n += 1;
        self.covered += u64::from(ci.contains(theta));
        self.lower_miss += u64::from(ci.lower > theta);
        self.upper_miss += u64::from(ci.upper < theta);
        let consistent = if rejects {
            ci.lower > 0.0
        } else {
            ci.lower <= 0.0 && 0.0 <= ci.upper
        };
        self.consistent += u64::from(consistent);
        let w = ci.width();
        self.width.add(w);
        self.width_sq.add(w * w);
    }

    fn merge(&mut self, other: &Tally) {
        self.n += other.n;
        self.covered += other.covered;
        self.lower_miss += other.lower_miss;
        self.upper_miss += other.upper_miss;
        self.consistent += other.consistent;
        self.failures += other.failures;
        self.width.merge(&other.width);
        self.width_sq.merge(&other.width_sq);
    }

    fn row(&self, method: Method, conditioning: Conditioning) -> MetricRow {
        let n = self.n as f64;
        let rate = |k: u64| if self.n == 0 { f64::NAN } else { k as f64 / n };
        let mean = if self.n == 0 { f64::NAN } else { self.width.value() / n };
        let sd = if self.n < 2 {
            f64::NAN
        } else {
            ((self.width_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0).sqrt()
        };
        MetricRow {
            method,
            conditioning,
            coverage: rate(self.covered),
            width_mean: mean,
            width_sd: sd,
            consistency: rate(self.consistent),
            lower_miss: rate(self.lower_miss),
            upper_miss: rate(self.upper_miss),
            n_effective: self.n,
            failures: self.failures,
        }
    }
}

/// Tallies for every method and subset, plus stage counts.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Accumulator {
    methods: Vec<Method>,
    tallies: Vec<[Tally; 3]>,
    pub replicates: u64,
    pub stage1: u64,
}

impl Accumulator {
    pub fn new(methods: &[Method]) -> Self {
        Self {
            methods: methods.to_vec(),
            tallies: vec![[Tally::default(); 3]; methods.len()],
            replicates: 0,
            stage1: 0,
        }
    }

    /// Adds one replicate; `cis` follows the accumulator's method order.
    pub fn add(&mut self, stage: Stage, rejects: bool, cis: &[CiResult], theta: f64) {
        self.replicates += 1;
        self.stage1 += u64::from(stage == Stage::One);
        let cond = Conditioning::for_stage(stage).index();
        for (tally, ci) in self.tallies.iter_mut().zip(cis) {
            tally[Conditioning::Overall.index()].add(ci, theta, rejects);
            tally[cond].add(ci, theta, rejects);
        }
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.replicates += other.replicates;
        self.stage1 += other.stage1;
        for (a, b) in self.tallies.iter_mut().zip(&other.tallies) {
            for k in 0..3 {
                a[k].merge(&b[k]);
            }
        }
    }

    /// Rows ordered by conditioning, then method.
    pub fn rows(&self) -> Vec<MetricRow> {
        Conditioning::ALL
            .iter()
            .flat_map(|&c| {
                self.methods
                    .iter()
                    .zip(&self.tallies)
                    .map(move |(&m, t)| t[c.index()].row(m, c))
            })
            .collect()
    }
}

/// Metric rows for replicate intervals.
///
/// Each item gives the stopping stage, the test decision and one interval
/// per method in `methods` order.
pub fn evaluate_metrics<'a, I>(methods: &[Method], theta: f64, replicates: I) -> Vec<MetricRow>
where
    I: IntoIterator<Item = (Stage, bool, &'a [CiResult])>,
{
    let mut acc = Accumulator::new(methods);
    for (stage, rejects, cis) in replicates {
        acc.add(stage, rejects, cis, theta);
    }
    acc.rows()
}
