//! Computational tools for Gromov–Hausdorff precompactness of length spaces.
//!
//! Spaces are finite: either dense distance tables or weighted graphs whose
//! shortest-path metric discretizes a length space at resolution `h` (the
//! longest edge). On top of that substrate the crate computes packing and
//! covering numbers, local and global doubling constants, boundary
//! undistortedness certificates, truncated universal and normal covers of
//! balls in glued polygon complexes, and Gromov–Hausdorff distance bounds.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod cli;
pub mod covers;
pub mod doubling;
pub mod domains;
pub mod error;
pub mod gh;
pub mod invariants;
pub mod io;
pub mod metric;
pub mod spaces;

pub use error::{Error, Result};
pub use metric::{BallMode, DiscretizedLengthSpace, FiniteMetricSpace, MetricSpace, Subspace, WeightedGraph};
