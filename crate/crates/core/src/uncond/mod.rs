//! Intervals that ignore the realised stopping stage: Wald, exact
//! (stagewise ordering), repeated, adjusted asymptotic, parametric bootstrap
//! and re-randomisation.

pub mod adjusted;
pub mod bootstrap;
pub mod exact;
pub mod randomisation;
pub mod repeated;
pub mod wald;

pub use adjusted::{adjusted_asymptotic_ci, adjusted_moments, AdjustedMoments};
pub use bootstrap::{parametric_bootstrap_ci, Resampling};
pub use exact::{exact_ci, stagewise_pvalue};
pub use randomisation::{randomisation_ci, randomisation_pvalue, RandomisationOptions};
pub use repeated::repeated_ci;
pub use wald::{wald_ci, wald_se};
