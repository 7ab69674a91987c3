//! Spacelike immersions sampled on tensor-product grids, with finite
//! difference extrinsic geometry.

pub mod grid;
mod identities;
pub mod init;
mod io;
mod patch;

pub use grid::{Grid, Topology, MARGIN};
pub use identities::{check_laplacian_identity, check_slice_identity, height_field, ResidualField};
pub use io::write_snapshot;
pub use patch::{Geometry, ImmersedPatch, NodeCurvature, NodeFrame, MAX_NORMAL_CONDITION};

#[cfg(test)]
mod tests;
