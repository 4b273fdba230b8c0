//! Motion by curvature of regular planar networks.
//!
//! A network is a finite set of planar curves joined at triple junctions
//! where the three unit tangents sum to zero (the 120-degree condition),
//! with remaining ends pinned at fixed points. This crate simulates the
//! L²-gradient flow of total length for such networks and provides the
//! diagnostics that make the flow's exact structure checkable numerically:
//!
//! - [`geometry`]: discrete curves, frames, curvature, tangential velocity,
//!   lengths, enclosed areas, regularity and embeddedness checks;
//! - [`flow`]: the semi-implicit solver for the parametric flow
//!   `γ_t = γ_xx / |γ_x|²` with junction coupling, admissibility checks and
//!   the reparametrization that produces admissible initial data;
//! - [`diagnostics`]: length-law and area-law audits, blow-up rate fits and
//!   singularity classification on recorded trajectories;
//! - [`monotonicity`]: backward-heat-kernel Gaussian densities, the
//!   monotonicity audit, Huisken rescaling and rescaled-density checks;
//! - [`selfsimilar`]: translating, rotating and shrinking solutions
//!   (grim reaper, circle, standard triod, Brakke spoon, lens,
//!   Abresch–Langer curves) built by residual checks and ODE shooting;
//! - [`io`]: the network file format, trajectory persistence and CSV
//!   emission for all audits.

// `!(x > 0.0)` guards reject NaN as well; rewriting them with `<=` would let
// NaN through. Index loops over several parallel arrays stay as indices.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod diagnostics;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod monotonicity;
mod numerics;
pub mod selfsimilar;
mod vec2;

pub use vec2::Vec2;
