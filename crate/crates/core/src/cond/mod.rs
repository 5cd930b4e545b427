//! Intervals conditional on the realised stopping stage: exact conditional,
//! restricted exact conditional, conditional likelihood and penalised
//! likelihood.

pub mod density;
pub mod exact;
pub mod likelihood;
pub mod mle;

pub use density::ConditionalDensity;
pub use exact::{conditional_limits, exact_conditional_ci, restricted_exact_conditional_ci};
pub use likelihood::{conditional_likelihood_ci, likelihood_cis, penalised_likelihood_ci};
pub use mle::{conditional_mle, lambda_star, penalised_mle, Estimate, LambdaStar};
