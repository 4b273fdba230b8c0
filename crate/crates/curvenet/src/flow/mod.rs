//! Semi-implicit time stepping of the special flow γ_t = γ_xx/|γ_x|² with
//! junction coupling (concurrency and the 120-degree angle condition) and
//! Dirichlet endpoints, plus admissibility checking and the polynomial
//! reparametrization that turns geometrically admissible networks into
//! admissible initial parametrizations.
//!
//! The scheme treats the diffusion implicitly and lags the metric |γ_x|²
//! one step, so each step reduces to per-curve tridiagonal solves; the
//! junction positions are the only nonlinear unknowns and a small Newton
//! iteration enforces the angle condition on them.

mod admissible;
mod junction;
mod stepper;

pub use admissible::{
    check_admissible, make_admissible, AdmissibilityReport, AdmissibilityTolerances,
    MakeAdmissibleOptions,
};
pub use junction::{junction_identities, junction_residuals, JunctionIdentityResidual};
pub use stepper::{evolve, step};

use crate::geometry::{GeometryError, LoopPath, Network};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error("junction Newton iteration failed to converge (residual {residual:.3e} after {iters} iterations)")]
    NewtonDivergence { residual: f64, iters: usize },
    #[error("network is not geometrically admissible: {0}")]
    NotGeometricallyAdmissible(String),
    #[error("reparametrization is not monotone even at the highest blend degree (curve `{0}`)")]
    NonMonotoneReparam(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Solver parameters. `min_curve_length` and `max_curvature` are the
/// singularity thresholds: the run stops once any curve is shorter than the
/// former or the sampled curvature exceeds the latter.
#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    pub dt: f64,
    pub max_newton_iters: usize,
    pub newton_tol: f64,
    /// Resample a curve when its max/min node spacing ratio exceeds this.
    pub resample_threshold: f64,
    pub min_curve_length: f64,
    pub max_curvature: f64,
    /// Snapshot cadence in steps; scalar diagnostics are recorded every step.
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(dt: f64) -> Self {
        SolverConfig {
            dt,
            max_newton_iters: 25,
            newton_tol: 1e-10,
            resample_threshold: 3.0,
            min_curve_length: 1e-3,
            max_curvature: 1e4,
            record_every: 100,
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let positive = [
            ("dt", self.dt),
            ("newton_tol", self.newton_tol),
            ("min_curve_length", self.min_curve_length),
            ("max_curvature", self.max_curvature),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(FlowError::BadConfig(format!("{name} must be positive")));
            }
        }
        if !(self.resample_threshold > 1.0) {
            return Err(FlowError::BadConfig(
                "resample_threshold must exceed 1".into(),
            ));
        }
        if self.max_newton_iters == 0 || self.record_every == 0 {
            return Err(FlowError::BadConfig(
                "max_newton_iters and record_every must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A timestamped network along the flow.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub time: f64,
    pub network: Network,
    pub dt: f64,
    pub step_count: u64,
}

impl FlowState {
    pub fn new(network: Network) -> Self {
        FlowState {
            time: 0.0,
            network,
            dt: 0.0,
            step_count: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub network: Network,
}

/// Per-step scalar series recorded along a run.
#[derive(Clone, Debug, Default)]
pub struct DiagnosticSeries {
    pub time: Vec<f64>,
    pub total_length: Vec<f64>,
    /// ∫ k² ds over the network.
    pub curvature_sq: Vec<f64>,
    /// ∫ k_s² ds over the network.
    pub curvature_deriv_sq: Vec<f64>,
    pub min_curve_length: Vec<f64>,
    pub max_curvature: Vec<f64>,
    /// Signed areas of the tracked loops, one inner vector per loop.
    pub loop_areas: Vec<Vec<f64>>,
}

impl DiagnosticSeries {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Ran to the requested final time.
    TimeLimit,
    /// A curve length fell below the threshold.
    LengthCollapse,
    /// The sampled curvature exceeded the threshold.
    CurvatureBlowup,
    /// Both thresholds tripped on the same step.
    LengthCollapseAndCurvatureBlowup,
}

impl StopReason {
    pub fn is_singular(self) -> bool {
        !matches!(self, StopReason::TimeLimit)
    }
}

#[derive(Clone, Debug)]
pub struct Termination {
    pub reason: StopReason,
    pub time: f64,
    /// Singular time extrapolated from the diagnostics tail, when the run
    /// stopped on a singularity threshold.
    pub estimated_singular_time: Option<f64>,
    /// Curve with the smallest final length.
    pub shortest_curve: Option<usize>,
    /// Curve attaining the largest final curvature.
    pub most_curved: Option<usize>,
}

/// A recorded run: snapshots, per-step diagnostics, the loops tracked from
/// the initial topology, and the termination record.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub series: DiagnosticSeries,
    pub loops: Vec<LoopPath>,
    pub termination: Termination,
}

impl Trajectory {
    /// Time step of the recorded series.
    pub fn dt(&self) -> f64 {
        if self.series.time.len() >= 2 {
            self.series.time[1] - self.series.time[0]
        } else {
            0.0
        }
    }

    /// Best available singular-time estimate: the extrapolated one when the
    /// run stopped on a singularity, otherwise the final time.
    pub fn singular_time_hint(&self) -> f64 {
        self.termination
            .estimated_singular_time
            .unwrap_or(self.termination.time)
    }
}
