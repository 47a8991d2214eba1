//! Power-distortion bounds, optimal power allocation and greedy path
//! planning for Gaussian sensor networks observing a common source over a
//! multiple-access channel.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). The
//! `*64` aliases below fix the scalar to `f64`.

pub mod error;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod planner;
pub mod model;
pub mod power_alloc;
pub mod rate_distortion;
pub mod scenarios;
pub mod validation;
pub mod scalar;

pub use error::{Error, Result};
pub use metrics::{evaluate, BoundValue, PowerInput};
pub use model::{
    build_network_params, validate_scenario, Bound, Diagnostic, FrLowerMode, GridSpec, MetricSpec, NetworkParams,
    Objective, Point, PowerAllocation, PowerMode, Scenario,
};
pub use power_alloc::OptResult;
pub use scalar::Scalar;

pub type NetworkParams64 = NetworkParams<f64>;
pub type PowerAllocation64 = PowerAllocation<f64>;
pub type Scenario64 = Scenario<f64>;
pub type BoundValue64 = BoundValue<f64>;
pub type OptResult64 = OptResult<f64>;
