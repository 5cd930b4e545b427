//! Interval results shared by every method.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The ten interval constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Standard Wald interval, unpooled variance.
    Wald,
    /// Exact unconditional interval under stagewise ordering (point: MUE).
    Exact,
    /// Repeated confidence interval `θ̂ ± e_T/√I_T`; no point estimate.
    Repeated,
    /// Bias- and variance-adjusted normal interval.
    AdjustedAsymptotic,
    /// Percentile interval from the unconditional parametric bootstrap.
    ParametricBootstrap,
    /// Re-randomisation interval built from an adjusted p-value.
    Randomisation,
    /// Exact interval conditional on the stopping stage (point: conditional MUE).
    ConditionalExact,
    /// Conditional exact interval intersected with the stopping-stage region.
    RestrictedExact,
    /// Conditional bootstrap of the conditional MLE.
    ConditionalLikelihood,
    /// Conditional bootstrap of the penalised MLE.
    PenalisedLikelihood,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Wald,
        Method::Exact,
        Method::Repeated,
        Method::AdjustedAsymptotic,
        Method::ParametricBootstrap,
        Method::Randomisation,
        Method::ConditionalExact,
        Method::RestrictedExact,
        Method::ConditionalLikelihood,
        Method::PenalisedLikelihood,
    ];

    /// Methods used in simulation sweeps (everything but randomisation).
    pub const SIMULATED: [Method; 9] = [
        Method::Wald,
        Method::Exact,
        Method::Repeated,
        Method::AdjustedAsymptotic,
        Method::ParametricBootstrap,
        Method::ConditionalExact,
        Method::RestrictedExact,
        Method::ConditionalLikelihood,
        Method::PenalisedLikelihood,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Wald => "wald",
            Method::Exact => "exact",
            Method::Repeated => "repeated",
            Method::AdjustedAsymptotic => "adjusted",
            Method::ParametricBootstrap => "bootstrap",
            Method::Randomisation => "randomisation",
            Method::ConditionalExact => "cond-exact",
            Method::RestrictedExact => "restricted",
            Method::ConditionalLikelihood => "cond-likelihood",
            Method::PenalisedLikelihood => "penalised",
        }
    }

    pub fn is_resampling(self) -> bool {
        matches!(
            self,
            Method::ParametricBootstrap
                | Method::Randomisation
                | Method::ConditionalLikelihood
                | Method::PenalisedLikelihood
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let m = match key.as_str() {
            "wald" | "standard" => Method::Wald,
            "exact" => Method::Exact,
            "repeated" | "rci" => Method::Repeated,
            "adjusted" | "adjusted-asymptotic" => Method::AdjustedAsymptotic,
            "bootstrap" | "parametric-bootstrap" => Method::ParametricBootstrap,
            "randomisation" | "randomization" => Method::Randomisation,
            "cond-exact" | "conditional-exact" => Method::ConditionalExact,
            "restricted" | "restricted-exact" => Method::RestrictedExact,
            "cond-likelihood" | "conditional-likelihood" | "likelihood" => {
                Method::ConditionalLikelihood
            }
            "penalised" | "penalized" | "penalised-likelihood" => Method::PenalisedLikelihood,
            _ => return Err(format!("unknown method `{s}`")),
        };
        Ok(m)
    }
}

/// Diagnostics attached to an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flag {
    /// I₂ ≤ I₁; the model-based formulas are undefined.
    InformationDecrease,
    /// Pooled response rate of 0 or 1 at some analysis.
    DegenerateData,
    /// Zero Wald standard error.
    ZeroVariance,
    /// A confidence-limit equation had no root in the search region.
    NoRoot,
    /// A limit was pinned to the edge of the search region.
    LimitClamped,
    /// An estimate was pinned to the edge of its search bracket.
    EstimateClamped,
    /// The randomisation p-value was 0 or 1.
    DegeneratePValue,
    /// Conditional bootstrap could not generate enough accepted replicas.
    RejectionStarvation,
    /// The associated point estimate lies outside the interval.
    PointOutsideInterval,
    /// The penalty weight had to be clamped to an end of [0, 1].
    LambdaClamped,
    /// An iterative solver did not converge.
    NonConvergence,
    /// The restricted interval's two constraints do not overlap; the limits
    /// are kept with `lower > upper`.
    EmptyIntersection,
}

impl Flag {
    const ALL: [Flag; 12] = [
        Flag::InformationDecrease,
        Flag::DegenerateData,
        Flag::ZeroVariance,
        Flag::NoRoot,
        Flag::LimitClamped,
        Flag::EstimateClamped,
        Flag::DegeneratePValue,
        Flag::RejectionStarvation,
        Flag::PointOutsideInterval,
        Flag::LambdaClamped,
        Flag::NonConvergence,
        Flag::EmptyIntersection,
    ];

    /// Whether the flag means no usable interval was produced.
    pub fn is_failure(self) -> bool {
        matches!(
            self,
            Flag::InformationDecrease
                | Flag::DegenerateData
                | Flag::NoRoot
                | Flag::DegeneratePValue
                | Flag::RejectionStarvation
                | Flag::NonConvergence
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Flag::InformationDecrease => "information-decrease",
            Flag::DegenerateData => "degenerate-data",
            Flag::ZeroVariance => "zero-variance",
            Flag::NoRoot => "no-root",
            Flag::LimitClamped => "limit-clamped",
            Flag::EstimateClamped => "estimate-clamped",
            Flag::DegeneratePValue => "degenerate-p-value",
            Flag::RejectionStarvation => "rejection-starvation",
            Flag::PointOutsideInterval => "point-outside-interval",
            Flag::LambdaClamped => "lambda-clamped",
            Flag::NonConvergence => "non-convergence",
            Flag::EmptyIntersection => "empty-intersection",
        }
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }

    /// The flag an error maps to when a method cannot be computed.
    pub fn from_error(err: &Error) -> Flag {
        match err {
            Error::InformationDecrease { .. } => Flag::InformationDecrease,
            Error::DegeneratePooledRate(_) => Flag::DegenerateData,
            Error::NoSignChange { .. } => Flag::NoRoot,
            Error::RejectionStarvation { .. } => Flag::RejectionStarvation,
            Error::DegeneratePValue(_) => Flag::DegeneratePValue,
            _ => Flag::NonConvergence,
        }
    }
}

/// A small set of [`Flag`]s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Flags(u16);

impl Flags {
    pub fn empty() -> Self {
        Self(0)
    }

    pub fn insert(&mut self, flag: Flag) {
        self.0 |= flag.bit();
    }

    pub fn with(mut self, flag: Flag) -> Self {
        self.insert(flag);
        self
    }

    pub fn contains(&self, flag: Flag) -> bool {
        self.0 & flag.bit() != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Flags) -> Flags {
        Flags(self.0 | other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Flag> + '_ {
        Flag::ALL.into_iter().filter(|f| self.contains(*f))
    }

    pub fn has_failure(&self) -> bool {
        self.iter().any(Flag::is_failure)
    }
}

impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for flag in self.iter() {
            if !first {
                f.write_str(";")?;
            }
            f.write_str(flag.name())?;
            first = false;
        }
        Ok(())
    }
}

/// One confidence interval with its associated point estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiResult {
    pub method: Method,
    pub lower: f64,
    pub upper: f64,
    pub point: Option<f64>,
    pub flags: Flags,
}

impl CiResult {
    /// Builds an interval, flagging (never clamping) a point estimate that
    /// falls outside it.
    pub fn new(method: Method, lower: f64, upper: f64, point: Option<f64>, flags: Flags) -> Self {
        let mut flags = flags;
        if let Some(p) = point {
            if method != Method::Repeated && !(lower <= p && p <= upper) {
                flags.insert(Flag::PointOutsideInterval);
            }
        }
        Self {
            method,
            lower,
            upper,
            point,
            flags,
        }
    }

    /// A method that could not be computed.
    pub fn failed(method: Method, flag: Flag) -> Self {
        Self {
            method,
            lower: f64::NAN,
            upper: f64::NAN,
            point: None,
            flags: Flags::empty().with(flag),
        }
    }

    pub fn from_error(method: Method, err: &Error) -> Self {
        Self::failed(method, Flag::from_error(err))
    }

    /// A failure flag, a missing limit, or reversed limits without the
    /// empty-intersection flag.
    pub fn is_failure(&self) -> bool {
        if self.flags.has_failure() || self.lower.is_nan() || self.upper.is_nan() {
            return true;
        }
        self.lower > self.upper && !self.flags.contains(Flag::EmptyIntersection)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lower < theta && theta < self.upper
    }
}
