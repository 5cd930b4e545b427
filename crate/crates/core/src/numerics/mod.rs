//! Scalar numeric kernel used by every interval construction.

pub mod bvn;
pub mod normal;
pub mod optimize;
pub mod quadrature;
pub mod quantile;
pub mod roots;

pub use bvn::{bvn_rect, bvn_rect_quadrature, bvnu, BivariateSpec};
pub use optimize::maximize_1d;
pub use quantile::empirical_quantile;
pub use roots::{find_root, RootProblem};
