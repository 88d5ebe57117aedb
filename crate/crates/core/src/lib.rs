//! Magnetic-anomaly navigation over scalar field maps.
//!
//! Building blocks, bottom up:
//!
//! - [`map`]: grid maps, bilinear queries, finite-difference derivatives, map files.
//! - [`vehicle`]: unicycle motion and the scalar magnetometer model.
//! - [`particle_filter`]: Monte Carlo localization against a map.
//! - [`observability`]: local observability of position from field measurements.
//! - [`planner`]: receding-horizon dynamic programming over discrete turns.
//! - [`belief`]: histogram belief and expected-entropy-reduction guidance.
//! - [`sim`]: closed-loop experiments, configuration files, traces and sweeps.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod belief;
pub mod error;
pub mod map;
pub mod observability;
pub mod particle_filter;
pub mod planner;
pub mod sim;
pub mod vehicle;

pub use error::{Error, Result};
pub use map::{Bounds, GaussianSource, GridMap};
pub use vehicle::{ControlInput, NoiseConfig, Pose};
