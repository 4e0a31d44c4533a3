//! Polygon complexes, concrete glued surfaces, and universal covers of balls
//! built by unfolding their triangles.

mod complex;
mod experiments;
mod meshes;
mod unfold;

pub use complex::{Geometry, Mesh, PolygonComplex};
pub use experiments::{
    experiment_petersen, experiment_sw_packing, lifts_within, min_pairwise_distance, petersen_region, pointed_ball, sw_cover, sw_normal_cover,
    sw_radius, sw_row, PetersenReport, PetersenRow, SwOptions, SwReport, SwRow,
};
pub use meshes::{flat_torus, glued_sphere, polygon_rp2, GluedSphereOptions};
pub use unfold::{normal_cover, universal_cover, universal_cover_ball, CoverGraph, CoverOptions, DEFAULT_MAX_VERTICES};
