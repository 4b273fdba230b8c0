//! Discrete differential geometry of sampled planar curves and networks.
//!
//! Curves are sampled on the implicit uniform parameter grid x_j = j/N.
//! Tangents use second-order central differences in the interior and
//! second-order one-sided differences at open ends; closed curves wrap.
//! The normal is the tangent rotated anticlockwise by π/2, so an
//! anticlockwise circle of radius r has curvature +1/r.

mod curve;
mod faces;
mod network;

pub use curve::{
    curvature, end_quantities, frames, quantities, resample_arclength, tangential_velocity,
    CurvatureData, DiscreteCurve, EndQuantities, Frames, GeometricQuantities,
};
pub use faces::{enclosed_area, find_loops, loop_polyline, LoopPath};
pub use network::{
    check_embedded, check_regular, hausdorff_distance, total_length, CurveEnd, End, FixedEndpoint,
    IntersectionEvent, Junction, JunctionReport, Network, NetworkTopology, RegularityReport,
    Tolerances,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("curve `{id}` is degenerate: {detail}")]
    DegenerateCurve { id: String, detail: String },
    #[error("curve `{id}` has too few samples for this operation (needs {needed}, has {got})")]
    TooFewSamples {
        id: String,
        needed: usize,
        got: usize,
    },
    #[error("loop is not closed: gap {gap} exceeds tolerance {tol}")]
    OpenLoop { gap: f64, tol: f64 },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
}
