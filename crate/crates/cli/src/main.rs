//! `seqci`: confidence intervals for two-stage group sequential trials.
//!
//! Subcommands `analyze`, `simulate`, `sweep` and `snapshot` share one flat
//! set of keys that can come from a TOML file (`--config`), `SEQCI_`
//! environment variables or flags. The worker thread count is taken from
//! `RAYON_NUM_THREADS` and never changes the output.

mod config;
mod keys;
mod output;

use std::process::ExitCode;

use anyhow::Result;
use clap::Command as Cli;
use seqci::export;
use seqci::sim::{self, Conditioning};

use config::{Command, ConfigError, Format, Job, RunConfig};

fn cli() -> Cli {
    let sub = |name: &'static str, about: &'static str| Cli::new(name).about(about).args(keys::args());
    Cli::new("seqci")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Confidence intervals after a two-stage group sequential trial with a binary endpoint")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(sub("analyze", "Compute intervals for one observed trial"))
        .subcommand(sub("simulate", "Estimate coverage, width and consistency at one scenario"))
        .subcommand(sub("sweep", "Repeat the simulation over a grid of treatment rates"))
        .subcommand(sub("snapshot", "Record the first simulated replicates with their intervals"))
}

/// Files to write under `--out` and the text for standard output.
fn execute(cfg: &RunConfig) -> Result<(Vec<(&'static str, String)>, String)> {
    Ok(match &cfg.job {
        Job::Analyze { trial, methods, options } => {
            let rows = seqci::analyze(trial, methods, options);
            let csv = export::analysis_csv(&rows);
            let table = output::analysis_table(&rows);
            (vec![("analysis.csv", csv)], table)
        }
        Job::Simulate { scenario } => {
            let report = sim::run(scenario)?;
            let files = vec![
                ("overall.csv", export::metrics_csv(&report, Conditioning::Overall)),
                ("stage1.csv", export::metrics_csv(&report, Conditioning::Stage1)),
                ("stage2.csv", export::metrics_csv(&report, Conditioning::Stage2)),
            ];
            (files, output::simulation_table(&report))
        }
        Job::Sweep { scenario, grid } => {
            let sweep = sim::run_sweep(scenario, grid)?;
            let files = vec![
                ("sweep.csv", export::sweep_csv(&sweep)),
                ("stop_probability.csv", export::stop_probability_csv(&sweep)),
            ];
            (files, output::sweep_table(&sweep))
        }
        Job::Snapshot { scenario, records } => {
            let recs = sim::replicate_snapshot(scenario, *records)?;
            (vec![("snapshot.csv", export::snapshot_csv(&recs))], output::snapshot_table(&recs))
        }
    })
}

fn run(command: Command, matches: &clap::ArgMatches) -> std::result::Result<(), ExitCode> {
    let cfg = config::load(command, matches).map_err(|e: ConfigError| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })?;
    let fail = |e: anyhow::Error| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    };
    let (files, table) = execute(&cfg).map_err(fail)?;
    match cfg.format {
        Format::Table => print!("{table}"),
        Format::Csv => {
            for (i, (name, body)) in files.iter().enumerate() {
                if files.len() > 1 {
                    if i > 0 {
                        println!();
                    }
                    println!("# {name}");
                }
                print!("{body}");
            }
        }
    }
    if let Some(dir) = &cfg.out {
        output::write_outputs(dir, command, &cfg.settings, &files).map_err(fail)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("a subcommand is required");
    let command = match name {
        "analyze" => Command::Analyze,
        "simulate" => Command::Simulate,
        "sweep" => Command::Sweep,
        _ => Command::Snapshot,
    };
    match run(command, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn cli_definition_is_consistent() {
        super::cli().debug_assert();
    }
}
