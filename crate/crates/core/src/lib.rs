//! Mean curvature flow of compact spacelike submanifolds in ambient spaces
//! carrying metrics of signature (n, m).
//!
//! * [`linalg`] — O(n,m) blocks, their canonical form, tilt and frame norms.
//! * [`ambient`] — metrics, connections, curvature and time functions.
//! * [`submanifold`] — grid immersions and their extrinsic geometry.
//! * [`flow`] — explicit time stepping with runtime monitors.
//! * [`radial`] — radial vector-field sections of the neutral tangent bundle.

pub mod error;
pub mod flow;
pub mod ambient;
pub mod linalg;
pub mod radial;
pub mod submanifold;

pub use error::{Error, Result};
