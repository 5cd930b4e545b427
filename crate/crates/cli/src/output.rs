//! Terminal tables, output files and the run manifest.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use seqci::sim::{Conditioning, SimReport, SnapshotRecord, SweepResult};
use seqci::CiResult;
use sha2::{Digest, Sha256};

use crate::config::{Command, Settings};

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn fixed(x: f64) -> String {
    if x.is_nan() {
        "-".into()
    } else {
        format!("{x:.3}")
    }
}

/// Right-aligned columns after a left-aligned first column.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut out = String::new();
        for (i, (cell, w)) in cells.zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(out, "{cell:<w$}");
            } else {
                let _ = write!(out, "  {cell:>w$}");
            }
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
        out
    };
    let mut out = line(&mut header.iter().copied());
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
    }
    out
}

pub fn analysis_table(rows: &[CiResult]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.method.name().to_string(),
                r.point.map_or_else(|| "-".into(), fixed),
                fixed(r.lower),
                fixed(r.upper),
                r.flags.to_string(),
            ]
        })
        .collect();
    table(&["method", "point", "lower", "upper", "flags"], &body)
}

fn metrics_rows(report: &SimReport, conditioning: Conditioning) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .filter(|r| r.conditioning == conditioning)
        .map(|r| {
            vec![
                r.method.name().to_string(),
                fixed(r.coverage),
                format!("{} ({})", fixed(r.width_mean), fixed(r.width_sd)),
                fixed(r.consistency),
                fixed(r.lower_miss),
                fixed(r.upper_miss),
                r.failures.to_string(),
            ]
        })
        .collect()
}

pub fn simulation_table(report: &SimReport) -> String {
    let mut out = format!(
        "replicates {}  stop probability {} (mc se {})\n",
        report.replicates,
        fixed(report.stop_probability()),
        fixed(report.stop_probability_se())
    );
    let header = ["method", "coverage", "width (sd)", "consistency", "lower miss", "upper miss", "failures"];
    for c in Conditioning::ALL {
        let _ = write!(out, "\n[{}]\n", c.name());
        out.push_str(&table(&header, &metrics_rows(report, c)));
    }
    out
}

pub fn sweep_table(sweep: &SweepResult) -> String {
    let Some(first) = sweep.points.first() else {
        return String::new();
    };
    let methods = &first.report.methods;
    let mut header = vec!["p_trt", "stop"];
    header.extend(methods.iter().map(|m| m.name()));
    let rows: Vec<Vec<String>> = sweep
        .points
        .iter()
        .map(|pt| {
            let mut row = vec![format!("{:.4}", pt.p_trt), fixed(pt.report.stop_probability())];
            row.extend(methods.iter().map(|m| {
                pt.report.row(*m, Conditioning::Overall).map_or_else(|| "-".into(), |r| fixed(r.coverage))
            }));
            row
        })
        .collect();
    format!("overall coverage by treatment rate\n{}", table(&header, &rows))
}

pub fn snapshot_table(records: &[SnapshotRecord]) -> String {
    let mut rows = Vec::new();
    for rec in records {
        let counts = match rec.data.stage2 {
            Some((c, t)) => format!("{}/{} +{}/{}", rec.data.s1_ctrl, rec.data.s1_trt, c, t),
            None => format!("{}/{}", rec.data.s1_ctrl, rec.data.s1_trt),
        };
        for ci in &rec.cis {
            rows.push(vec![
                rec.index.to_string(),
                counts.clone(),
                if rec.rejects { "yes".into() } else { "no".into() },
                fixed(rec.theta_hat),
                ci.method.name().to_string(),
                fixed(ci.lower),
                fixed(ci.upper),
                ci.flags.to_string(),
            ]);
        }
    }
    table(&["replicate", "successes", "rejects", "estimate", "method", "lower", "upper", "flags"], &rows)
}

/// `manifest.toml`: version, resolved configuration, its hash and the hash
/// of every output file. Contains no timestamps.
pub fn manifest(command: Command, settings: &Settings, files: &[(&str, String)]) -> Result<String> {
    let config = settings.result_table(command);
    let config_text = toml::to_string(&config).context("serialising the configuration")?;
    let mut doc = toml::Table::new();
    doc.insert("command".into(), command.name().into());
    doc.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    doc.insert(
        "config_sha256".into(),
        sha256_hex(format!("command = \"{}\"\n{config_text}", command.name()).as_bytes()).into(),
    );
    doc.insert("config".into(), toml::Value::Table(config));
    let sources: toml::Table = settings
        .sources()
        .map(|(k, _, s)| (k.to_string(), toml::Value::String(s.to_string())))
        .collect();
    doc.insert("sources".into(), toml::Value::Table(sources));
    let outputs: toml::Table =
        files.iter().map(|(name, body)| (name.to_string(), sha256_hex(body.as_bytes()).into())).collect();
    doc.insert("outputs".into(), toml::Value::Table(outputs));
    toml::to_string(&doc).context("serialising the manifest")
}

/// Writes each file and the manifest into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, command: Command, settings: &Settings, files: &[(&str, String)]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    let path = dir.join("manifest.toml");
    std::fs::write(&path, manifest(command, settings, files)?).with_context(|| format!("writing {}", path.display()))
}
