//! Audits of the exact evolution laws on recorded trajectories: the length
//! law dL/dt = −∫k² ds for fixed-endpoint networks, the linear area law
//! A'(t) = −(2 − m/3)π for a region bounded by m curves meeting at triple
//! junctions, the extinction-time bound, blow-up rate fits and the
//! singularity dichotomy (length collapse versus curvature blow-up).

use thiserror::Error;

use crate::flow::{DiagnosticSeries, StopReason, Trajectory};
use crate::geometry::{curvature, end_quantities, Network};
use crate::numerics::linear_fit;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("need at least {needed} recorded samples, have {got}")]
    TooFewSnapshots { needed: usize, got: usize },
    #[error("loop index {0} is not tracked by this trajectory")]
    UnknownLoop(usize),
    #[error("loop collapsed or left the audit window: {0}")]
    LoopLost(String),
    #[error("a region bounded by {0} curves does not shrink")]
    NotShrinkingRegion(usize),
    #[error("blow-up fit window contains only {0} samples")]
    InsufficientWindow(usize),
    #[error("trajectory did not end in a detected blow-up")]
    NoBlowup,
}

/// Centered differences on a (possibly non-uniform) time series, one-sided
/// at the first and last sample.
fn time_derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    d[0] = (y[1] - y[0]) / (t[1] - t[0]);
    d[n - 1] = (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]);
    for i in 1..n - 1 {
        d[i] = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1]);
    }
    d
}

#[derive(Clone, Copy, Debug)]
pub struct LengthLawSample {
    pub time: f64,
    pub total_length: f64,
    /// Measured dL/dt.
    pub length_rate: f64,
    /// ∫ k² ds.
    pub curvature_sq: f64,
    /// |dL/dt + ∫k²| / max(1, ∫k²).
    pub relative_residual: f64,
}

/// Compare the measured length rate against −∫k² ds along a trajectory with
/// fixed endpoints (tangential end terms vanish there).
pub fn length_law_audit(trajectory: &Trajectory) -> Result<Vec<LengthLawSample>, DiagnosticsError> {
    let s = &trajectory.series;
    if s.len() < 3 {
        return Err(DiagnosticsError::TooFewSnapshots {
            needed: 3,
            got: s.len(),
        });
    }
    let rate = time_derivative(&s.time, &s.total_length);
    Ok((0..s.len())
        .map(|i| {
            let ksq = s.curvature_sq[i];
            LengthLawSample {
                time: s.time[i],
                total_length: s.total_length[i],
                length_rate: rate[i],
                curvature_sq: ksq,
                relative_residual: (rate[i] + ksq).abs() / ksq.abs().max(1.0),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug)]
pub struct AreaLawSample {
    pub time: f64,
    pub area: f64,
    pub rate: f64,
    pub expected_rate: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct AreaLawAudit {
    pub samples: Vec<AreaLawSample>,
    /// Least-squares slope of A(t) over the audit window.
    pub fitted_slope: f64,
    /// −(2 − m/3)π with m the junction count of the loop.
    pub expected_slope: f64,
    pub junction_count: usize,
}

/// Audit the linear area law of a tracked loop. The audit window drops the
/// collapse endgame (area below 5% of the initial value).
pub fn area_law_audit(
    trajectory: &Trajectory,
    loop_index: usize,
) -> Result<AreaLawAudit, DiagnosticsError> {
    let lp = trajectory
        .loops
        .get(loop_index)
        .ok_or(DiagnosticsError::UnknownLoop(loop_index))?;
    if !lp.simple {
        return Err(DiagnosticsError::LoopLost(
            "loop traverses a junction or endpoint more than once".into(),
        ));
    }
    let s = &trajectory.series;
    let areas = &s.loop_areas[loop_index];
    if areas.len() < 3 {
        return Err(DiagnosticsError::TooFewSnapshots {
            needed: 3,
            got: areas.len(),
        });
    }
    let initial = areas[0];
    if !(initial > 0.0) || !initial.is_finite() {
        return Err(DiagnosticsError::LoopLost(format!(
            "initial area {initial}"
        )));
    }
    let cutoff = 0.05 * initial;
    let mut end = areas.len();
    for (i, a) in areas.iter().enumerate() {
        if !a.is_finite() || *a <= cutoff {
            end = i;
            break;
        }
    }
    if end < 3 {
        return Err(DiagnosticsError::LoopLost(
            "loop collapsed within the first samples".into(),
        ));
    }
    let expected_slope = -(2.0 - lp.junction_count as f64 / 3.0) * std::f64::consts::PI;
    let t = &s.time[..end];
    let a = &areas[..end];
    let rate = time_derivative(t, a);
    let samples = (0..end)
        .map(|i| AreaLawSample {
            time: t[i],
            area: a[i],
            rate: rate[i],
            expected_rate: expected_slope,
            residual: rate[i] - expected_slope,
        })
        .collect();
    let (fitted_slope, _) = linear_fit(t, a).unwrap_or((f64::NAN, f64::NAN));
    Ok(AreaLawAudit {
        samples,
        fitted_slope,
        expected_slope,
        junction_count: lp.junction_count,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ExtinctionBound {
    /// A₀ / ((2 − m/3)π): extinction time of the region itself.
    pub region_bound: f64,
    /// 3A₀/π, the universal bound over all shrinking regions.
    pub universal_bound: f64,
}

/// Upper bounds on the time a region of initial area `a0` bounded by
/// `junction_count` < 6 curves can survive.
pub fn extinction_bound(
    a0: f64,
    junction_count: usize,
) -> Result<ExtinctionBound, DiagnosticsError> {
    if junction_count >= 6 {
        return Err(DiagnosticsError::NotShrinkingRegion(junction_count));
    }
    let rate = (2.0 - junction_count as f64 / 3.0) * std::f64::consts::PI;
    Ok(ExtinctionBound {
        region_bound: a0 / rate,
        universal_bound: 3.0 * a0 / std::f64::consts::PI,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct BlowupFit {
    /// Fitted exponent and log-constant of ∫k² ds ~ C (T−t)^p.
    pub integral_exponent: f64,
    pub integral_log_constant: f64,
    /// Fitted exponent of sup k² ~ C (T−t)^p.
    pub sup_exponent: f64,
    pub sup_log_constant: f64,
    pub singular_time: f64,
    pub window: (f64, f64),
    pub sample_count: usize,
}

/// Least-squares fit of log ∫k² and log sup k² against log(T − t) over a
/// window before the detected singular time. Defaults to the last half of
/// the trajectory, excluding the final 20 steps where the estimate of T
/// distorts the abscissa.
pub fn blowup_fit(
    trajectory: &Trajectory,
    window: Option<(f64, f64)>,
) -> Result<BlowupFit, DiagnosticsError> {
    if !trajectory.termination.reason.is_singular() {
        return Err(DiagnosticsError::NoBlowup);
    }
    let s = &trajectory.series;
    let t_sing = trajectory.singular_time_hint();
    let dt = trajectory.dt();
    let (lo, hi) = window.unwrap_or_else(|| {
        let t_first = s.time[0];
        let span = t_sing - t_first;
        (t_sing - 0.5 * span, t_sing - 20.0 * dt)
    });
    let mut xs = Vec::new();
    let mut ys_int = Vec::new();
    let mut ys_sup = Vec::new();
    for i in 0..s.len() {
        let t = s.time[i];
        if t < lo || t > hi || t >= t_sing {
            continue;
        }
        let ksq = s.curvature_sq[i];
        let supk = s.max_curvature[i];
        if !(ksq > 0.0) || !(supk > 0.0) {
            continue;
        }
        xs.push((t_sing - t).ln());
        ys_int.push(ksq.ln());
        ys_sup.push((supk * supk).ln());
    }
    if xs.len() < 8 {
        return Err(DiagnosticsError::InsufficientWindow(xs.len()));
    }
    let (pi_slope, pi_c) = linear_fit(&xs, &ys_int).unwrap();
    let (ps_slope, ps_c) = linear_fit(&xs, &ys_sup).unwrap();
    Ok(BlowupFit {
        integral_exponent: pi_slope,
        integral_log_constant: pi_c,
        sup_exponent: ps_slope,
        sup_log_constant: ps_c,
        singular_time: t_sing,
        window: (lo, hi),
        sample_count: xs.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularityKind {
    None,
    LengthCollapse,
    CurvatureBlowup,
    Both,
}

#[derive(Clone, Debug)]
pub struct SingularityReport {
    pub kind: SingularityKind,
    pub estimated_singular_time: Option<f64>,
    pub final_min_length: f64,
    pub final_sup_curvature: f64,
    /// Curves with collapsing length / exploding curvature, when singular.
    pub offending_curves: Vec<usize>,
}

/// Classify a terminated trajectory by the dichotomy: vanishing curve
/// length, curvature blow-up, or both, via tail extrapolation of the
/// diagnostics series.
pub fn singularity_classify(trajectory: &Trajectory) -> SingularityReport {
    let s = &trajectory.series;
    let n = s.len();
    let final_min_length = *s.min_curve_length.last().unwrap_or(&f64::NAN);
    let final_sup_curvature = *s.max_curvature.last().unwrap_or(&f64::NAN);
    if !trajectory.termination.reason.is_singular() {
        return SingularityReport {
            kind: SingularityKind::None,
            estimated_singular_time: None,
            final_min_length,
            final_sup_curvature,
            offending_curves: Vec::new(),
        };
    }
    let w = tail_window(n);
    let t_tail = &s.time[n - w..];
    let span = s.time[n - 1] - s.time[0];
    let t_end = s.time[n - 1];

    // Length collapse: the tail of the shortest length extrapolates to zero
    // just past the end of the run.
    let len_tail = &s.min_curve_length[n - w..];
    let length_collapse = match linear_fit(t_tail, len_tail) {
        Some((slope, intercept)) if slope < 0.0 => {
            let root = -intercept / slope;
            root <= t_end + 0.25 * span
        }
        _ => false,
    };
    // Curvature blow-up: 1/sup k² extrapolates to zero just past the end.
    let inv_tail: Vec<f64> = s.max_curvature[n - w..]
        .iter()
        .map(|k| 1.0 / (k * k))
        .collect();
    let curvature_blowup = match linear_fit(t_tail, &inv_tail) {
        Some((slope, intercept)) if slope < 0.0 => {
            let root = -intercept / slope;
            root <= t_end + 0.25 * span
        }
        _ => false,
    };
    let kind = match (length_collapse, curvature_blowup) {
        (true, true) => SingularityKind::Both,
        (true, false) => SingularityKind::LengthCollapse,
        (false, true) => SingularityKind::CurvatureBlowup,
        (false, false) => match trajectory.termination.reason {
            StopReason::LengthCollapse => SingularityKind::LengthCollapse,
            StopReason::CurvatureBlowup => SingularityKind::CurvatureBlowup,
            _ => SingularityKind::Both,
        },
    };
    let mut offending = Vec::new();
    if matches!(
        kind,
        SingularityKind::LengthCollapse | SingularityKind::Both
    ) {
        if let Some(c) = trajectory.termination.shortest_curve {
            offending.push(c);
        }
    }
    if matches!(
        kind,
        SingularityKind::CurvatureBlowup | SingularityKind::Both
    ) {
        if let Some(c) = trajectory.termination.most_curved {
            if !offending.contains(&c) {
                offending.push(c);
            }
        }
    }
    SingularityReport {
        kind,
        estimated_singular_time: trajectory.termination.estimated_singular_time,
        final_min_length,
        final_sup_curvature,
        offending_curves: offending,
    }
}

fn tail_window(n: usize) -> usize {
    (n / 20).clamp(5, 50).min(n)
}

/// Extrapolated singular time from the diagnostics tail: the zero crossing
/// of 1/sup k² (exactly linear for homothetic collapse), falling back to the
/// zero of the shortest length.
pub fn estimate_singular_time(series: &DiagnosticSeries) -> Option<f64> {
    let n = series.len();
    if n < 4 {
        return None;
    }
    let w = tail_window(n);
    let t = &series.time[n - w..];
    let t_end = series.time[n - 1];
    let inv: Vec<f64> = series.max_curvature[n - w..]
        .iter()
        .map(|k| if *k > 0.0 { 1.0 / (k * k) } else { f64::NAN })
        .collect();
    if inv.iter().all(|v| v.is_finite()) {
        if let Some((slope, intercept)) = linear_fit(t, &inv) {
            if slope < 0.0 {
                let root = -intercept / slope;
                if root >= t_end {
                    return Some(root);
                }
            }
        }
    }
    let len = &series.min_curve_length[n - w..];
    if let Some((slope, intercept)) = linear_fit(t, len) {
        if slope < 0.0 {
            let root = -intercept / slope;
            if root >= t_end {
                return Some(root);
            }
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct CurvatureSeminorms {
    /// ∫ k² ds over the network.
    pub curvature_sq: f64,
    /// ∫ k_s² ds over the network.
    pub curvature_deriv_sq: f64,
    /// Σᵢ (kⁱ kⁱ_s + λⁱ (kⁱ)²) per junction, exterior orientation; vanishes
    /// for the exact flow.
    pub junction_flux: Vec<f64>,
}

pub fn curvature_seminorms(
    network: &Network,
) -> Result<CurvatureSeminorms, crate::geometry::GeometryError> {
    let mut k_sq = 0.0;
    let mut ks_sq = 0.0;
    let mut end_ks: Vec<(f64, f64)> = Vec::with_capacity(network.curves.len());
    for c in &network.curves {
        let k = curvature(c)?;
        let w = c.arclength_weights();
        let s = c.arclength_table();
        let n = c.points.len();
        for j in 0..n {
            k_sq += k.scalar[j] * k.scalar[j] * w[j];
        }
        for j in 0..n {
            let ks = if c.closed {
                let m = n - 1;
                let jp = (j + 1) % m;
                let jm = (j + m - 1) % m;
                let ds = c.points[j % m].dist(c.points[jp]) + c.points[j % m].dist(c.points[jm]);
                (k.scalar[jp] - k.scalar[jm]) / ds
            } else if j == 0 {
                one_sided_ks(&k.scalar, &s, false)
            } else if j == n - 1 {
                one_sided_ks(&k.scalar, &s, true)
            } else {
                (k.scalar[j + 1] - k.scalar[j - 1]) / (s[j + 1] - s[j - 1])
            };
            ks_sq += ks * ks * w[j];
        }
        if c.closed {
            end_ks.push((0.0, 0.0));
        } else {
            end_ks.push((
                one_sided_ks(&k.scalar, &s, false),
                one_sided_ks(&k.scalar, &s, true),
            ));
        }
    }
    let mut junction_flux = Vec::new();
    for junction in &network.topology.junctions {
        let mut flux = 0.0;
        for e in junction.ends {
            let q = end_quantities(&network.curves[e.curve], e.end)?;
            // k_s is invariant under orientation reversal; k and λ flip.
            let ks = match e.end {
                crate::geometry::End::Start => end_ks[e.curve].0,
                crate::geometry::End::Finish => end_ks[e.curve].1,
            };
            flux += q.curvature_out * ks + q.velocity_out * q.curvature_out * q.curvature_out;
        }
        junction_flux.push(flux);
    }
    Ok(CurvatureSeminorms {
        curvature_sq: k_sq,
        curvature_deriv_sq: ks_sq,
        junction_flux,
    })
}

/// Second-order one-sided dk/ds at the first (or last) node, assuming
/// near-uniform local spacing.
fn one_sided_ks(k: &[f64], s: &[f64], at_end: bool) -> f64 {
    let n = k.len();
    if n < 3 {
        return 0.0;
    }
    if at_end {
        let ds = (s[n - 1] - s[n - 3]) / 2.0;
        (3.0 * k[n - 1] - 4.0 * k[n - 2] + k[n - 3]) / (2.0 * ds)
    } else {
        let ds = (s[2] - s[0]) / 2.0;
        (-3.0 * k[0] + 4.0 * k[1] - k[2]) / (2.0 * ds)
    }
}
