//! The flat configuration schema shared by the file, environment and flags.

use clap::{builder::BoolishValueParser, value_parser, Arg, ArgAction};

/// Value type of a configuration key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Bool,
    Count,
    Seed,
    Real,
    Text,
}

impl Kind {
    pub fn describe(self) -> &'static str {
        match self {
            Kind::Bool => "a boolean",
            Kind::Count => "a non-negative integer",
            Kind::Seed => "a non-negative integer",
            Kind::Real => "a number",
            Kind::Text => "a string",
        }
    }
}

/// One configuration key.
#[derive(Debug, Clone, Copy)]
pub struct Key {
    /// Name in the config file; also the clap id.
    pub name: &'static str,
    /// Long flag without the leading dashes.
    pub flag: &'static str,
    pub kind: Kind,
    pub help: &'static str,
}

impl Key {
    /// `SEQCI_` followed by the upper-cased key name.
    pub fn env_var(&self) -> String {
        format!("SEQCI_{}", self.name.to_ascii_uppercase())
    }
}

const fn key(name: &'static str, flag: &'static str, kind: Kind, help: &'static str) -> Key {
    Key { name, flag, kind, help }
}

/// Every key the file, the environment and the flags accept.
pub const KEYS: &[Key] = &[
    key("musec", "musec", Kind::Bool, "Fill unset design, data and rate keys from the bundled MUSEC trial"),
    key("n1_ctrl", "n1-ctrl", Kind::Count, "Control patients at the interim analysis"),
    key("n1_trt", "n1-trt", Kind::Count, "Treatment patients at the interim analysis"),
    key("n2_ctrl", "n2-ctrl", Kind::Count, "Control patients at the final analysis (cumulative)"),
    key("n2_trt", "n2-trt", Kind::Count, "Treatment patients at the final analysis (cumulative)"),
    key("e1", "e1", Kind::Real, "Interim efficacy boundary on the Z scale"),
    key("e2", "e2", Kind::Real, "Final efficacy boundary on the Z scale"),
    key("alpha", "alpha", Kind::Real, "Two-sided error level of the intervals [default: 0.05]"),
    key("s1_ctrl", "s1-ctrl", Kind::Count, "Control successes at the interim analysis"),
    key("s1_trt", "s1-trt", Kind::Count, "Treatment successes at the interim analysis"),
    key("final_ctrl", "final-ctrl", Kind::Count, "Control successes at the final analysis (cumulative)"),
    key("final_trt", "final-trt", Kind::Count, "Treatment successes at the final analysis (cumulative)"),
    key("stop_stage", "stop-stage", Kind::Count, "Claimed stopping stage (1 or 2), checked against the data"),
    key("p_ctrl", "p-ctrl", Kind::Real, "True control response rate"),
    key("p_trt", "p-trt", Kind::Real, "True treatment response rate"),
    key("methods", "methods", Kind::Text, "Comma-separated interval methods, or `all`"),
    key("N", "N", Kind::Count, "Simulated trials [default: 100000]"),
    key("B", "B", Kind::Count, "Bootstrap replicates [default: 10000]"),
    key("N_rand", "N-rand", Kind::Count, "Re-randomisations [default: 10000]"),
    key("seed", "seed", Kind::Seed, "Random seed; required whenever resampling or simulation is involved"),
    key("grid", "grid", Kind::Text, "Treatment-rate grid LO:HI:COUNT for `sweep`"),
    key("records", "records", Kind::Count, "Replicates to record in `snapshot` [default: 10]"),
    key("include_observed", "include-observed", Kind::Bool, "Count the observed allocation among the re-randomisations"),
    key("count_ties", "count-ties", Kind::Bool, "Count re-randomisations tying with the observed trial as extreme"),
    key("out", "out", Kind::Text, "Directory for CSV outputs and the run manifest"),
    key("format", "format", Kind::Text, "Standard output format: csv or table [default: table]"),
];

pub fn lookup(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

/// Clap arguments for every key, plus `--config`.
pub fn args() -> Vec<Arg> {
    let mut out = vec![Arg::new("config")
        .long("config")
        .value_name("PATH")
        .env("SEQCI_CONFIG")
        .help("Flat TOML configuration file; flags and SEQCI_ variables override it")];
    for k in KEYS {
        let arg = Arg::new(k.name).long(k.flag).env(k.env_var()).help(k.help);
        let arg = match k.kind {
            Kind::Bool => arg
                .num_args(0..=1)
                .require_equals(true)
                .default_missing_value("true")
                .value_parser(BoolishValueParser::new())
                .action(ArgAction::Set),
            Kind::Count => arg.value_name("N").value_parser(value_parser!(u64)),
            Kind::Seed => arg.value_name("SEED").value_parser(value_parser!(u64)),
            Kind::Real => arg.value_name("X").value_parser(value_parser!(f64)),
            Kind::Text => arg.value_name("TEXT"),
        };
        out.push(arg);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_flags_are_unique() {
        for (i, a) in KEYS.iter().enumerate() {
            for b in &KEYS[i + 1..] {
                assert_ne!(a.name, b.name);
                assert_ne!(a.flag, b.flag);
            }
        }
    }

    #[test]
    fn environment_names() {
        assert_eq!(lookup("N_rand").unwrap().env_var(), "SEQCI_N_RAND");
        assert_eq!(lookup("p_trt").unwrap().env_var(), "SEQCI_P_TRT");
    }
}
