//! Configuration loading, layering and validation.
//!
//! Values are layered from lowest to highest priority: built-in defaults,
//! the bundled MUSEC trial (when `musec` is set), the config file, `SEQCI_`
//! environment variables, and command-line flags. Every error names the
//! offending key and where its value came from.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::ArgMatches;
use seqci::sim::{linear_grid, Scenario};
use seqci::{fixture, AnalysisOptions, Design, Method, Trial, TrialData};

use crate::keys::{lookup, Kind, Key, KEYS};

/// Subcommand being configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Simulate,
    Sweep,
    Snapshot,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Snapshot => "snapshot",
        }
    }

    /// Keys whose values determine the numbers a run produces.
    fn result_keys(self) -> &'static [&'static str] {
        const DESIGN: [&str; 7] = ["n1_ctrl", "n1_trt", "n2_ctrl", "n2_trt", "e1", "e2", "alpha"];
        match self {
            Command::Analyze => &[
                "n1_ctrl", "n1_trt", "n2_ctrl", "n2_trt", "e1", "e2", "alpha", "s1_ctrl", "s1_trt",
                "final_ctrl", "final_trt", "methods", "B", "N_rand", "seed", "include_observed",
                "count_ties",
            ],
            Command::Simulate => {
                const K: [&str; 12] = concat(DESIGN, ["p_ctrl", "p_trt", "methods", "N", "B", "seed"]);
                &K
            }
            Command::Sweep => {
                const K: [&str; 12] = concat(DESIGN, ["p_ctrl", "grid", "methods", "N", "B", "seed"]);
                &K
            }
            Command::Snapshot => {
                const K: [&str; 13] =
                    concat(DESIGN, ["p_ctrl", "p_trt", "methods", "N", "B", "seed", "records"]);
                &K
            }
        }
    }
}

const fn concat<const A: usize, const B: usize, const C: usize>(
    a: [&'static str; A],
    b: [&'static str; B],
) -> [&'static str; C] {
    let mut out = [""; C];
    let mut i = 0;
    while i < A {
        out[i] = a[i];
        i += 1;
    }
    while i < C {
        out[i] = b[i - A];
        i += 1;
    }
    out
}

/// Where a value came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Default,
    Fixture,
    File { path: String, line: Option<usize> },
    Env(String),
    Flag(String),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Default => f.write_str("default"),
            Source::Fixture => f.write_str("MUSEC fixture"),
            Source::File { path, line: Some(l) } => write!(f, "{path} line {l}"),
            Source::File { path, line: None } => f.write_str(path),
            Source::Env(var) => write!(f, "environment variable {var}"),
            Source::Flag(flag) => write!(f, "flag --{flag}"),
        }
    }
}

/// A typed configuration value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(u64),
    Real(f64),
    Text(String),
}

impl Value {
    fn to_toml(&self) -> toml::Value {
        match self {
            Value::Bool(b) => toml::Value::Boolean(*b),
            Value::Int(n) => match i64::try_from(*n) {
                Ok(v) => toml::Value::Integer(v),
                Err(_) => toml::Value::String(n.to_string()),
            },
            Value::Real(x) => toml::Value::Float(*x),
            Value::Text(s) => toml::Value::String(s.clone()),
        }
    }
}

/// A configuration error tied to a key when one is responsible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub source: Option<Source>,
    pub message: String,
}

impl ConfigError {
    fn general(message: impl Into<String>) -> Self {
        Self { key: None, source: None, message: message.into() }
    }

    fn at(key: &str, source: Option<&Source>, message: impl Into<String>) -> Self {
        Self { key: Some(key.to_string()), source: source.cloned(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.key, &self.source) {
            (Some(k), Some(s)) => write!(f, "{s}: `{k}` {}", self.message),
            (Some(k), None) => write!(f, "`{k}` {}", self.message),
            (None, _) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

/// Resolved key values with their sources.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<&'static str, (Value, Source)>,
}

impl Settings {
    fn set(&mut self, key: &'static str, value: Value, source: Source) {
        self.values.insert(key, (value, source));
    }

    fn set_default(&mut self, key: &'static str, value: Value, source: Source) {
        self.values.entry(key).or_insert((value, source));
    }

    fn source(&self, key: &str) -> Option<&Source> {
        self.values.get(key).map(|(_, s)| s)
    }

    fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn bool(&self, key: &str) -> bool {
        matches!(self.values.get(key), Some((Value::Bool(true), _)))
    }

    fn int(&self, key: &str) -> Option<(u64, &Source)> {
        match self.values.get(key) {
            Some((Value::Int(n), s)) => Some((*n, s)),
            _ => None,
        }
    }

    fn real(&self, key: &str) -> Option<(f64, &Source)> {
        match self.values.get(key) {
            Some((Value::Real(x), s)) => Some((*x, s)),
            Some((Value::Int(n), s)) => Some((*n as f64, s)),
            _ => None,
        }
    }

    fn text(&self, key: &str) -> Option<(&str, &Source)> {
        match self.values.get(key) {
            Some((Value::Text(t), s)) => Some((t.as_str(), s)),
            _ => None,
        }
    }

    fn required<T>(&self, key: &str, value: Option<T>, command: Command) -> Result<T> {
        value.ok_or_else(|| ConfigError::at(key, None, format!("is required for `{}`", command.name())))
    }

    /// A `u32` key.
    fn u32(&self, key: &str, command: Command) -> Result<u32> {
        let (n, s) = self.required(key, self.int(key), command)?;
        u32::try_from(n).map_err(|_| ConfigError::at(key, Some(s), format!("= {n} exceeds {}", u32::MAX)))
    }

    fn usize(&self, key: &str, command: Command) -> Result<usize> {
        let (n, s) = self.required(key, self.int(key), command)?;
        usize::try_from(n).map_err(|_| ConfigError::at(key, Some(s), format!("= {n} is too large")))
    }

    fn f64(&self, key: &str, command: Command) -> Result<f64> {
        Ok(self.required(key, self.real(key), command)?.0)
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::at(key, self.source(key), message)
    }

    /// TOML table of the keys that determine a run's results.
    pub fn result_table(&self, command: Command) -> toml::Table {
        command
            .result_keys()
            .iter()
            .filter_map(|k| self.values.get(k).map(|(v, _)| (k.to_string(), v.to_toml())))
            .collect()
    }

    /// Every resolved key with its source, for the manifest.
    pub fn sources(&self) -> impl Iterator<Item = (&'static str, &Value, &Source)> + '_ {
        self.values.iter().map(|(k, (v, s))| (*k, v, s))
    }
}

/// Standard-output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Table,
}

/// What to run.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Analyze { trial: Trial, methods: Vec<Method>, options: AnalysisOptions },
    Simulate { scenario: Scenario },
    Sweep { scenario: Scenario, grid: Vec<f64> },
    Snapshot { scenario: Scenario, records: usize },
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub job: Job,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub settings: Settings,
}

/// 1-based line of the first assignment to `key` in `text`.
fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|line| {
        let t = line.trim_start();
        let rest = t
            .strip_prefix(key)
            .or_else(|| t.strip_prefix(&format!("\"{key}\"")))
            .or_else(|| t.strip_prefix(&format!("'{key}'")));
        rest.is_some_and(|r| r.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

fn toml_type(v: &toml::Value) -> &'static str {
    match v {
        toml::Value::String(_) => "a string",
        toml::Value::Integer(_) => "an integer",
        toml::Value::Float(_) => "a float",
        toml::Value::Boolean(_) => "a boolean",
        toml::Value::Datetime(_) => "a datetime",
        toml::Value::Array(_) => "an array",
        toml::Value::Table(_) => "a table",
    }
}

fn from_toml(key: &Key, v: &toml::Value, source: &Source) -> Result<Value> {
    let wrong = || {
        ConfigError::at(
            key.name,
            Some(source),
            format!("must be {}, found {}", key.kind.describe(), toml_type(v)),
        )
    };
    match (key.kind, v) {
        (Kind::Bool, toml::Value::Boolean(b)) => Ok(Value::Bool(*b)),
        (Kind::Count | Kind::Seed, toml::Value::Integer(n)) => u64::try_from(*n)
            .map(Value::Int)
            .map_err(|_| ConfigError::at(key.name, Some(source), format!("must be non-negative, found {n}"))),
        (Kind::Real, toml::Value::Float(x)) => Ok(Value::Real(*x)),
        (Kind::Real, toml::Value::Integer(n)) => Ok(Value::Real(*n as f64)),
        (Kind::Text, toml::Value::String(s)) => Ok(Value::Text(s.clone())),
        (Kind::Text, toml::Value::Array(items)) if key.name == "methods" => {
            let names = items
                .iter()
                .map(|i| i.as_str().map(str::to_string).ok_or_else(wrong))
                .collect::<Result<Vec<_>>>()?;
            Ok(Value::Text(names.join(",")))
        }
        _ => Err(wrong()),
    }
}

/// Parses a config file's text into settings.
pub fn parse_file(text: &str, path: &str) -> Result<Settings> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::general(format!("{path}: {}", e.to_string().trim_end())))?;
    let mut settings = Settings::default();
    for (name, v) in &table {
        let source = Source::File { path: path.to_string(), line: key_line(text, name) };
        let key = lookup(name).ok_or_else(|| ConfigError::at(name, Some(&source), "is not a known key"))?;
        settings.set(key.name, from_toml(key, v, &source)?, source);
    }
    Ok(settings)
}

fn from_matches(matches: &ArgMatches) -> Settings {
    let mut settings = Settings::default();
    for key in KEYS {
        let source = match matches.value_source(key.name) {
            Some(ValueSource::CommandLine) => Source::Flag(key.flag.to_string()),
            Some(ValueSource::EnvVariable) => Source::Env(key.env_var()),
            _ => continue,
        };
        let value = match key.kind {
            Kind::Bool => matches.get_one::<bool>(key.name).map(|b| Value::Bool(*b)),
            Kind::Count | Kind::Seed => matches.get_one::<u64>(key.name).map(|n| Value::Int(*n)),
            Kind::Real => matches.get_one::<f64>(key.name).map(|x| Value::Real(*x)),
            Kind::Text => matches.get_one::<String>(key.name).map(|s| Value::Text(s.clone())),
        };
        if let Some(v) = value {
            settings.set(key.name, v, source);
        }
    }
    settings
}

fn layer(file: Settings, overrides: Settings) -> Settings {
    let mut merged = file;
    for (k, (v, s)) in overrides.values {
        merged.set(k, v, s);
    }
    if merged.bool("musec") {
        let f = Source::Fixture;
        for (k, n) in [
            ("n1_ctrl", fixture::N1_CTRL),
            ("n1_trt", fixture::N1_TRT),
            ("n2_ctrl", fixture::N2_CTRL),
            ("n2_trt", fixture::N2_TRT),
            ("s1_ctrl", fixture::S1_CTRL),
            ("s1_trt", fixture::S1_TRT),
            ("final_ctrl", fixture::S2_CTRL_CUMULATIVE),
            ("final_trt", fixture::S2_TRT_CUMULATIVE),
        ] {
            merged.set_default(k, Value::Int(u64::from(n)), f.clone());
        }
        for (k, x) in [
            ("e1", fixture::E1),
            ("e2", fixture::E2),
            ("alpha", fixture::ALPHA),
            ("p_ctrl", fixture::P_CTRL),
            ("p_trt", fixture::P_TRT),
        ] {
            merged.set_default(k, Value::Real(x), f.clone());
        }
    }
    let d = Source::Default;
    merged.set_default("alpha", Value::Real(0.05), d.clone());
    merged.set_default("N", Value::Int(100_000), d.clone());
    merged.set_default("B", Value::Int(10_000), d.clone());
    merged.set_default("N_rand", Value::Int(10_000), d.clone());
    merged.set_default("records", Value::Int(10), d.clone());
    merged.set_default("format", Value::Text("table".into()), d.clone());
    merged.set_default("include_observed", Value::Bool(false), d.clone());
    merged.set_default("count_ties", Value::Bool(false), d);
    merged
}

/// Reads the optional config file and layers environment and flag values
/// from `matches` over it.
pub fn load(command: Command, matches: &ArgMatches) -> Result<RunConfig> {
    let file = match matches.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(Path::new(path))
                .map_err(|e| ConfigError::general(format!("cannot read config file {path}: {e}")))?;
            parse_file(&text, path)?
        }
        None => Settings::default(),
    };
    resolve(command, layer(file, from_matches(matches)))
}

fn design(s: &Settings, command: Command) -> Result<Design> {
    let n1_ctrl = s.u32("n1_ctrl", command)?;
    let n1_trt = s.u32("n1_trt", command)?;
    let n2_ctrl = s.u32("n2_ctrl", command)?;
    let n2_trt = s.u32("n2_trt", command)?;
    for (k, n) in [("n1_ctrl", n1_ctrl), ("n1_trt", n1_trt)] {
        if n == 0 {
            return Err(s.error(k, "must be at least 1"));
        }
    }
    if n2_ctrl <= n1_ctrl {
        return Err(s.error("n2_ctrl", format!("= {n2_ctrl} must exceed n1_ctrl = {n1_ctrl}")));
    }
    if n2_trt <= n1_trt {
        return Err(s.error("n2_trt", format!("= {n2_trt} must exceed n1_trt = {n1_trt}")));
    }
    let e1 = s.f64("e1", command)?;
    let e2 = s.f64("e2", command)?;
    let alpha = s.f64("alpha", command)?;
    if !(e2.is_finite() && e2 > 0.0) {
        return Err(s.error("e2", format!("= {e2} must be positive")));
    }
    if !(e1.is_finite() && e1 > e2) {
        return Err(s.error("e1", format!("= {e1} must exceed e2 = {e2}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(s.error("alpha", format!("= {alpha} must lie in (0, 1)")));
    }
    Design::new(n1_ctrl, n1_trt, n2_ctrl, n2_trt, e1, e2, alpha).map_err(|e| ConfigError::general(e.to_string()))
}

fn trial(s: &Settings, design: Design) -> Result<Trial> {
    let c = Command::Analyze;
    let s1_ctrl = s.u32("s1_ctrl", c)?;
    let s1_trt = s.u32("s1_trt", c)?;
    if s1_ctrl > design.n1_ctrl {
        return Err(s.error("s1_ctrl", format!("= {s1_ctrl} exceeds n1_ctrl = {}", design.n1_ctrl)));
    }
    if s1_trt > design.n1_trt {
        return Err(s.error("s1_trt", format!("= {s1_trt} exceeds n1_trt = {}", design.n1_trt)));
    }
    let finals = match (s.has("final_ctrl"), s.has("final_trt")) {
        (true, true) => {
            let f_ctrl = s.u32("final_ctrl", c)?;
            let f_trt = s.u32("final_trt", c)?;
            let (m_c, m_t) = design.increments();
            for (k, f, s1, m) in [("final_ctrl", f_ctrl, s1_ctrl, m_c), ("final_trt", f_trt, s1_trt, m_t)] {
                if f < s1 || f - s1 > m {
                    return Err(s.error(k, format!("= {f} must lie between {s1} and {}", s1 + m)));
                }
            }
            Some((f_ctrl, f_trt))
        }
        (false, false) => None,
        (true, false) => return Err(ConfigError::at("final_trt", None, "is required when final_ctrl is set")),
        (false, true) => return Err(ConfigError::at("final_ctrl", None, "is required when final_trt is set")),
    };
    let claimed = match s.int("stop_stage") {
        None => None,
        Some((n @ (1 | 2), _)) => Some(n),
        Some((n, _)) => return Err(s.error("stop_stage", format!("= {n} must be 1 or 2"))),
    };
    if claimed == Some(2) && finals.is_none() {
        return Err(ConfigError::at(
            "final_ctrl",
            None,
            "and `final_trt` are required when the trial continued to stage 2 (stop_stage = 2)",
        ));
    }
    let data = match finals {
        Some((f_ctrl, f_trt)) => TrialData::continued(s1_ctrl, s1_trt, f_ctrl - s1_ctrl, f_trt - s1_trt),
        None => TrialData::stopped_at_stage1(s1_ctrl, s1_trt),
    };
    let trial = Trial::new(design, data).map_err(|e| match finals {
        Some(_) => s.error("final_ctrl", format!("conflicts with the interim data: {e}")),
        None => ConfigError::at("final_ctrl", None, format!("is missing: {e}")),
    })?;
    let stage = match trial.stop_stage() {
        seqci::Stage::One => 1,
        seqci::Stage::Two => 2,
    };
    if let Some(n) = claimed {
        if n != stage {
            return Err(s.error("stop_stage", format!("= {n} but the data stop at stage {stage}")));
        }
    }
    Ok(trial)
}

fn methods(s: &Settings, command: Command) -> Result<Vec<Method>> {
    let default: &[Method] = match command {
        Command::Analyze => &Method::ALL,
        _ => &Method::SIMULATED,
    };
    let Some((text, _)) = s.text("methods") else {
        return Ok(default.to_vec());
    };
    if text.trim() == "all" {
        return Ok(default.to_vec());
    }
    let mut out = Vec::new();
    for name in text.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        let m: Method = name.parse().map_err(|_| {
            let known: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
            s.error("methods", format!("names unknown method `{name}` (known: {})", known.join(", ")))
        })?;
        if command != Command::Analyze && m == Method::Randomisation {
            return Err(s.error("methods", "cannot include randomisation in simulations"));
        }
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(s.error("methods", "selects no method"));
    }
    Ok(out)
}

fn rate(s: &Settings, key: &str, command: Command) -> Result<f64> {
    let p = s.f64(key, command)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(s.error(key, format!("= {p} must lie in (0, 1)")));
    }
    Ok(p)
}

fn seed(s: &Settings, command: Command, why: &str) -> Result<u64> {
    s.int("seed")
        .map(|(n, _)| n)
        .ok_or_else(|| {
            let msg = format!("is required for `{}`{why}", command.name());
            ConfigError::at("seed", None, msg)
        })
}

/// Parses `LO:HI:COUNT`.
pub fn parse_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, count] = parts[..] else {
        return Err(format!("`{text}` is not of the form LO:HI:COUNT"));
    };
    let lo: f64 = lo.trim().parse().map_err(|_| format!("LO `{lo}` is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("HI `{hi}` is not a number"))?;
    let count: usize = count.trim().parse().map_err(|_| format!("COUNT `{count}` is not a positive integer"))?;
    if count == 0 {
        return Err("COUNT must be at least 1".into());
    }
    if !(lo > 0.0 && hi < 1.0) {
        return Err(format!("rates {lo} and {hi} must lie in (0, 1)"));
    }
    if count > 1 && !(lo < hi) {
        return Err(format!("LO = {lo} must be below HI = {hi}"));
    }
    Ok(linear_grid(lo, hi, count))
}

fn resolve(command: Command, mut s: Settings) -> Result<RunConfig> {
    let format = match s.text("format") {
        Some(("csv", _)) => Format::Csv,
        Some(("table", _)) => Format::Table,
        Some((other, _)) => return Err(s.error("format", format!("= `{other}` must be csv or table"))),
        None => Format::Table,
    };
    let out = s.text("out").map(|(t, _)| PathBuf::from(t));
    let design = design(&s, command)?;
    let methods = methods(&s, command)?;
    let names: Vec<&str> = methods.iter().map(|m| m.name()).collect();
    let source = s.source("methods").cloned().unwrap_or(Source::Default);
    s.set("methods", Value::Text(names.join(",")), source);
    let resampling = methods.iter().any(|m| m.is_resampling());
    let boot = s.usize("B", command)?;
    let bootstraps = methods.iter().any(|m| *m != Method::Randomisation && m.is_resampling());
    if bootstraps && boot == 0 {
        return Err(s.error("B", "must be at least 1 when bootstrap methods are requested"));
    }
    let job = match command {
        Command::Analyze => {
            let trial = trial(&s, design)?;
            let randomisations = s.usize("N_rand", command)?;
            if methods.contains(&Method::Randomisation) && randomisations == 0 {
                return Err(s.error("N_rand", "must be at least 1 when randomisation is requested"));
            }
            let seed = if resampling {
                seed(&s, command, " with resampling methods")?
            } else {
                s.int("seed").map_or(0, |(n, _)| n)
            };
            let options = AnalysisOptions {
                bootstrap: boot,
                randomisations,
                seed,
                include_observed: s.bool("include_observed"),
                count_ties: s.bool("count_ties"),
            };
            Job::Analyze { trial, methods, options }
        }
        Command::Simulate | Command::Sweep | Command::Snapshot => {
            let replicates = s.usize("N", command)?;
            if replicates == 0 {
                return Err(s.error("N", "must be at least 1"));
            }
            let p_ctrl = rate(&s, "p_ctrl", command)?;
            if command != Command::Sweep {
                rate(&s, "p_trt", command)?;
            }
            let seed = seed(&s, command, "")?;
            let scenario = |p_trt: f64| Scenario {
                design,
                p_ctrl,
                p_trt,
                replicates,
                bootstrap: boot,
                methods: methods.clone(),
                seed,
            };
            match command {
                Command::Simulate => Job::Simulate { scenario: scenario(rate(&s, "p_trt", command)?) },
                Command::Snapshot => {
                    let records = s.usize("records", command)?;
                    if records > replicates {
                        return Err(s.error("records", format!("= {records} exceeds N = {replicates}")));
                    }
                    Job::Snapshot { scenario: scenario(rate(&s, "p_trt", command)?), records }
                }
                _ => {
                    let (text, _) = s.required("grid", s.text("grid"), command)?;
                    let grid = parse_grid(text).map_err(|m| s.error("grid", m))?;
                    Job::Sweep { scenario: scenario(grid[0]), grid }
                }
            }
        }
    };
    Ok(RunConfig { command, job, out, format, settings: s })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_text(command: Command, text: &str) -> Result<RunConfig> {
        resolve(command, layer(parse_file(text, "run.toml")?, Settings::default()))
    }

    fn musec_flag() -> Settings {
        let mut s = Settings::default();
        s.set("musec", Value::Bool(true), Source::Flag("musec".into()));
        s.set("seed", Value::Int(7), Source::Flag("seed".into()));
        s
    }

    #[test]
    fn empty_file_with_musec_is_the_fixture() {
        let cfg = resolve(Command::Analyze, layer(parse_file("", "run.toml").unwrap(), musec_flag())).unwrap();
        match cfg.job {
            Job::Analyze { trial, methods, .. } => {
                assert_eq!(trial, fixture::musec_trial());
                assert_eq!(methods, Method::ALL);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn range_error_names_key_and_line() {
        let text = "musec = true\nseed = 1\n\np_trt = 1.5\n";
        let err = resolve_text(Command::Simulate, text).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("p_trt"));
        let msg = err.to_string();
        assert!(msg.contains("run.toml line 4") && msg.contains("p_trt"), "{msg}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_file("musec = true\np_treatment = 0.3\n", "run.toml").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("p_treatment"));
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn type_error_names_key() {
        let err = parse_file("N = \"many\"\n", "run.toml").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("N"));
        assert!(err.to_string().contains("non-negative integer"), "{err}");
        let err = parse_file("seed = -3\n", "run.toml").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("seed"));
    }

    #[test]
    fn syntax_error_has_a_line() {
        let err = parse_file("musec = true\nN = = 3\n", "run.toml").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn claimed_second_stage_needs_final_counts() {
        let mut s = Settings::default();
        for (k, v) in [("n1_ctrl", 97), ("n1_trt", 101), ("n2_ctrl", 134), ("n2_trt", 143), ("s1_ctrl", 12), ("s1_trt", 27), ("stop_stage", 2)] {
            s.set(lookup(k).unwrap().name, Value::Int(v), Source::Default);
        }
        s.set("e1", Value::Real(2.797), Source::Default);
        s.set("e2", Value::Real(1.977), Source::Default);
        let err = resolve(Command::Analyze, layer(s, Settings::default())).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("final_ctrl"));
    }

    #[test]
    fn continuing_data_without_final_counts_is_rejected() {
        let text = "n1_ctrl = 97\nn1_trt = 101\nn2_ctrl = 134\nn2_trt = 143\ne1 = 2.797\ne2 = 1.977\ns1_ctrl = 12\ns1_trt = 27\n";
        let err = resolve_text(Command::Analyze, text).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("final_ctrl"));
    }

    #[test]
    fn seed_is_mandatory_for_resampling() {
        let err = resolve_text(Command::Analyze, "musec = true\nmethods = \"bootstrap\"\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("seed"));
        assert!(resolve_text(Command::Analyze, "musec = true\nmethods = \"wald,exact\"\n").is_ok());
        let err = resolve_text(Command::Simulate, "musec = true\nmethods = \"wald\"\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("seed"));
    }

    #[test]
    fn overrides_beat_the_file() {
        let file = parse_file("musec = true\nseed = 1\np_trt = 0.3\n", "run.toml").unwrap();
        let mut flags = Settings::default();
        flags.set("p_trt", Value::Real(0.35), Source::Flag("p-trt".into()));
        let cfg = resolve(Command::Simulate, layer(file, flags)).unwrap();
        match cfg.job {
            Job::Simulate { scenario } => assert_eq!(scenario.p_trt, 0.35),
            other => panic!("{other:?}"),
        }
        assert_eq!(cfg.settings.source("p_trt"), Some(&Source::Flag("p-trt".into())));
    }

    #[test]
    fn methods_lists_and_arrays() {
        let cfg = resolve_text(Command::Analyze, "musec = true\nmethods = [\"wald\", \"repeated\"]\n").unwrap();
        match cfg.job {
            Job::Analyze { methods, .. } => assert_eq!(methods, [Method::Wald, Method::Repeated]),
            other => panic!("{other:?}"),
        }
        let err = resolve_text(Command::Analyze, "musec = true\nmethods = \"wald,nope\"\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("methods"));
        let err = resolve_text(Command::Simulate, "musec = true\nseed = 1\nmethods = \"randomisation\"\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("methods"));
    }

    #[test]
    fn grids() {
        let g = parse_grid("0.224:0.434:22").unwrap();
        assert_eq!(g.len(), 22);
        assert_eq!(g[0], 0.224);
        assert!((g[21] - 0.434).abs() < 1e-15);
        assert_eq!(parse_grid("0.3:0.3:1").unwrap(), [0.3]);
        for bad in ["0.2:0.4", "0.4:0.2:3", "0:0.4:3", "0.2:0.4:0", "a:0.4:3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
        let err = resolve_text(Command::Sweep, "musec = true\nseed = 1\ngrid = \"0.2:1.2:3\"\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("grid"));
    }

    #[test]
    fn snapshot_records_at_most_n() {
        let err = resolve_text(Command::Snapshot, "musec = true\nseed = 1\nN = 5\nrecords = 6\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("records"));
    }

    #[test]
    fn result_table_ignores_presentation_keys() {
        let a = resolve_text(Command::Simulate, "musec = true\nseed = 1\nformat = \"csv\"\n").unwrap();
        let b = resolve_text(Command::Simulate, "musec = true\nseed = 1\nout = \"x\"\n").unwrap();
        assert_eq!(a.settings.result_table(Command::Simulate), b.settings.result_table(Command::Simulate));
    }
}
