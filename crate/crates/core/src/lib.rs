//! Confidence intervals for two-stage group sequential trials with a binary
//! endpoint and one efficacy interim analysis, plus a Monte Carlo engine that
//! measures their coverage, width and agreement with the trial's test
//! decision.
//!
//! ```
//! use seqci::{analyze, AnalysisOptions, Method, fixture};
//!
//! let trial = fixture::musec_trial();
//! let opts = AnalysisOptions::deterministic();
//! let rows = analyze(&trial, &[Method::Wald, Method::Repeated], &opts);
//! assert!((rows[0].lower - 0.040).abs() < 0.001);
//! assert!(rows[1].point.is_none());
//! ```

// Test data include the observed final Z of 2.718.
#![cfg_attr(test, allow(clippy::approx_constant))]

pub mod analysis;
pub mod ci;
pub mod cond;
pub mod design;
pub mod error;
pub mod export;
pub mod fixture;
pub mod numerics;
pub mod rng;
pub mod sim;
pub mod tables;
pub mod uncond;

pub use analysis::{analyze, AnalysisOptions};
pub use ci::{CiResult, Flag, Flags, Method};
pub use design::{Design, Outcome, Stage, StageStatistics, Trial, TrialData};
pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/design.md")]
mod book_design {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/unconditional.md")]
mod book_unconditional {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/conditional.md")]
mod book_conditional {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/simulation.md")]
mod book_simulation {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/numerics.md")]
mod book_numerics {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
