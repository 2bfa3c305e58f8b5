//! Bearing-only source localization in the plane and in space.
//!
//! Pseudo-linear regression turns angle-of-arrival measurements into a
//! linear model whose noise correlates with the regressors. The estimators
//! here remove the resulting bias using the sine variance of the angle noise
//! (known or estimated from the data), then refine with Gauss-Newton.

pub mod crlb;
pub mod error;
pub mod estimate;
pub mod estimator2d;
pub mod estimator3d;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod presets;

pub use error::{AoaError, Result};
pub use estimate::{Diagnostics, Estimate, Estimate2d, Estimate3d, Method};
pub use model::{MeasurementSet, NoiseModel, SensorArray, SourceLocation};
