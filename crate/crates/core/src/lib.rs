//! Two-setting EPR steerability of two-qubit states.
//!
//! The steerability of a state is the largest value of a joint-measurability
//! criterion over pairs of measurement directions of the steering party. This
//! crate evaluates it numerically for any state, in closed form for X-states
//! and several named families, and provides the related CHSH, steering-radius
//! and steering-ellipsoid quantities.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > eps)` deliberately rejects NaN

pub mod analytic;
pub mod bell;
pub mod error;
pub mod family;
pub mod functional;
pub mod geometry;
pub mod input;
pub mod optimizer;
pub mod qstate;
pub mod tolerance;

pub use analytic::{
    classify_zero_state, delta_values, family_steerability, steerability_x_analytic, x_derived,
    XDerived, ZeroStateClass, ZeroVerdict,
};
pub use bell::{bell_diagonal_steerability, chsh_max, region_scan, RegionSample, RegionSampler};
pub use error::{Error, Result};
pub use family::{make_family, Family, FamilySpec};
pub use functional::{
    compute_map, steering_objective, Direction, MeasurementDirection, SteeringMap,
};
pub use geometry::{steering_ellipsoid, steering_radius, EllipsoidResult, RadiusResult};
pub use optimizer::{maximize_steerability, Method, OptimizerConfig, SteeringResult};
pub use qstate::{canonicalize, to_pauli, DensityMatrix, PauliRepresentation, XStateParams};
pub use tolerance::Tolerances;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
