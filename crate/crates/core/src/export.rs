//! CSV rendering of analysis and simulation results.
//!
//! Every function returns the whole document as a string: header row first,
//! `\n` line endings, fields quoted only when they contain a delimiter or a
//! quote. Numbers are written with the shortest representation that reads
//! back to the same `f64`, so output is independent of locale and of the
//! thread count that produced the values.

use csv::{QuoteStyle, Terminator, WriterBuilder};

use crate::ci::CiResult;
use crate::design::Stage;
use crate::sim::{Conditioning, Metric, SimReport, SnapshotRecord, SweepResult};

/// Column names of [`analysis_csv`].
pub const ANALYSIS_HEADER: [&str; 6] = ["method", "point", "lower", "upper", "width", "flags"];
/// Column names of [`metrics_csv`].
pub const METRICS_HEADER: [&str; 9] = [
    "method",
    "coverage",
    "width_mean",
    "width_sd",
    "consistency",
    "lower_miss",
    "upper_miss",
    "n_effective",
    "failures",
];
/// Column names of [`sweep_csv`].
pub const SWEEP_HEADER: [&str; 6] = ["p_trt", "method", "conditioning", "metric", "value", "mc_se"];
/// Column names of [`stop_probability_csv`].
pub const STOP_HEADER: [&str; 4] = ["p_trt", "stop_probability", "mc_se", "replicates"];
/// Column names of [`snapshot_csv`].
pub const SNAPSHOT_HEADER: [&str; 13] = [
    "replicate",
    "stage",
    "rejects",
    "theta_hat",
    "s1_ctrl",
    "s1_trt",
    "s2_ctrl",
    "s2_trt",
    "method",
    "point",
    "lower",
    "upper",
    "flags",
];

/// Text used for an absent point estimate.
pub const MISSING: &str = "-";

fn render<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> String {
    let mut w = WriterBuilder::new()
        .quote_style(QuoteStyle::Necessary)
        .terminator(Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    let bytes = w.into_inner().expect("flushing to memory");
    String::from_utf8(bytes).expect("CSV fields are UTF-8")
}

fn num(x: f64) -> String {
    x.to_string()
}

fn point(p: Option<f64>) -> String {
    p.map_or_else(|| MISSING.to_string(), num)
}

fn stage_number(stage: Stage) -> String {
    match stage {
        Stage::One => "1".into(),
        Stage::Two => "2".into(),
    }
}

/// One row per interval.
pub fn analysis_csv(rows: &[CiResult]) -> String {
    render(
        ANALYSIS_HEADER,
        rows.iter().map(|r| {
            [
                r.method.name().to_string(),
                point(r.point),
                num(r.lower),
                num(r.upper),
                num(r.width()),
                r.flags.to_string(),
            ]
        }),
    )
}

/// One row per method for one replicate subset.
pub fn metrics_csv(report: &SimReport, conditioning: Conditioning) -> String {
    render(
        METRICS_HEADER,
        report
            .rows
            .iter()
            .filter(|r| r.conditioning == conditioning)
            .map(|r| {
                [
                    r.method.name().to_string(),
                    num(r.coverage),
                    num(r.width_mean),
                    num(r.width_sd),
                    num(r.consistency),
                    num(r.lower_miss),
                    num(r.upper_miss),
                    r.n_effective.to_string(),
                    r.failures.to_string(),
                ]
            }),
    )
}

/// Long format: one row per grid point, method, subset and metric.
pub fn sweep_csv(sweep: &SweepResult) -> String {
    let rows = sweep.points.iter().flat_map(|pt| {
        pt.report.rows.iter().flat_map(move |r| {
            Metric::ALL.into_iter().map(move |m| {
                [
                    num(pt.p_trt),
                    r.method.name().to_string(),
                    r.conditioning.name().to_string(),
                    m.name().to_string(),
                    num(r.value(m)),
                    num(r.mc_se(m)),
                ]
            })
        })
    });
    render(SWEEP_HEADER, rows)
}

/// Interim stopping probability at each grid point.
pub fn stop_probability_csv(sweep: &SweepResult) -> String {
    render(
        STOP_HEADER,
        sweep.points.iter().map(|pt| {
            [
                num(pt.p_trt),
                num(pt.report.stop_probability()),
                num(pt.report.stop_probability_se()),
                pt.report.replicates.to_string(),
            ]
        }),
    )
}

/// One row per replicate and method; stage-2 counts are increments and
/// empty when the trial stopped.
pub fn snapshot_csv(records: &[SnapshotRecord]) -> String {
    let rows = records.iter().flat_map(|rec| {
        let (s2_ctrl, s2_trt) = rec
            .data
            .stage2
            .map_or((String::new(), String::new()), |(c, t)| (c.to_string(), t.to_string()));
        rec.cis.iter().map(move |ci| {
            [
                rec.index.to_string(),
                stage_number(rec.stage),
                rec.rejects.to_string(),
                num(rec.theta_hat),
                rec.data.s1_ctrl.to_string(),
                rec.data.s1_trt.to_string(),
                s2_ctrl.clone(),
                s2_trt.clone(),
                ci.method.name().to_string(),
                point(ci.point),
                num(ci.lower),
                num(ci.upper),
                ci.flags.to_string(),
            ]
        })
    });
    render(SNAPSHOT_HEADER, rows)
}
