//! Gaussian densities and the monotonicity structure of the flow: the
//! backward heat kernel ρ(t,x) = e^{−|x−x₀|²/(4(t₀−t))}/√(4π(t₀−t)),
//! density Θ = ∫ρ ds and its limit, the audit of
//! dΘ/dt = −∫|k_vec + (x−x₀)^⊥/(2(t₀−t))|²ρ ds + endpoint terms,
//! the dynamical rescaling Ñ = (N_t − x₀)/√(2(T−t)) and the rescaled
//! density (1/√(2π))∫e^{−|x|²/2} ds.

use thiserror::Error;

use crate::flow::Trajectory;
use crate::geometry::{curvature, end_quantities, frames, GeometryError, Network};
use crate::numerics::linear_fit;
use crate::Vec2;

#[derive(Debug, Error)]
pub enum MonotonicityError {
    #[error("evaluation time {t} is not before the kernel time {t0}")]
    BadTimeOrder { t: f64, t0: f64 },
    #[error("no usable snapshots before the kernel time (need {needed}, found {got})")]
    InsufficientTail { needed: usize, got: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// The one-dimensional backward heat kernel in the plane relative to
/// (t0, x0), evaluated at (t, x).
pub fn backward_heat_kernel(t0: f64, x0: Vec2, t: f64, x: Vec2) -> Result<f64, MonotonicityError> {
    if !(t < t0) {
        return Err(MonotonicityError::BadTimeOrder { t, t0 });
    }
    let a = t0 - t;
    Ok((-(x - x0).norm_sq() / (4.0 * a)).exp() / (4.0 * std::f64::consts::PI * a).sqrt())
}

/// Gaussian density Θ_{t0,x0}(t): trapezoid quadrature of the backward heat
/// kernel over all curves.
pub fn gaussian_density(
    network: &Network,
    t0: f64,
    x0: Vec2,
    t: f64,
) -> Result<f64, MonotonicityError> {
    if !(t < t0) {
        return Err(MonotonicityError::BadTimeOrder { t, t0 });
    }
    let a = t0 - t;
    let norm = (4.0 * std::f64::consts::PI * a).sqrt();
    let mut total = 0.0;
    for c in &network.curves {
        let w = c.arclength_weights();
        for (p, w) in c.points.iter().zip(w) {
            total += (-(*p - x0).norm_sq() / (4.0 * a)).exp() / norm * w;
        }
    }
    Ok(total)
}

/// ∫ e^{−|x|²/2} ds over the network (the rescaled Gaussian weight).
pub fn gaussian_weighted_length(network: &Network) -> f64 {
    let mut total = 0.0;
    for c in &network.curves {
        let w = c.arclength_weights();
        for (p, w) in c.points.iter().zip(w) {
            total += (-p.norm_sq() / 2.0).exp() * w;
        }
    }
    total
}

/// A network mapped by the dynamical rescaling around (T, x0).
#[derive(Clone, Debug)]
pub struct RescaledNetwork {
    pub network: Network,
    /// Rescaled time 𝔱 = −½ log(T − t).
    pub rescaled_time: f64,
    pub center: Vec2,
    /// The applied scale factor 1/√(2(T−t)).
    pub scale: f64,
}

/// Apply the rescaling x ↦ (x − x0)/√(2(T − t)) to a snapshot network.
pub fn huisken_rescale(
    network: &Network,
    t: f64,
    x0: Vec2,
    singular_time: f64,
) -> Result<RescaledNetwork, MonotonicityError> {
    if !(t < singular_time) {
        return Err(MonotonicityError::BadTimeOrder {
            t,
            t0: singular_time,
        });
    }
    let denom = (2.0 * (singular_time - t)).sqrt();
    let mut out = network.clone();
    for c in out.curves.iter_mut() {
        for p in c.points.iter_mut() {
            *p = (*p - x0) / denom;
        }
    }
    for e in out.topology.endpoints.iter_mut() {
        e.position = (e.position - x0) / denom;
    }
    Ok(RescaledNetwork {
        network: out,
        rescaled_time: -0.5 * (singular_time - t).ln(),
        center: x0,
        scale: 1.0 / denom,
    })
}

/// Rescaled Gaussian density (1/√(2π)) ∫ e^{−|x|²/2} ds.
pub fn rescaled_density(rescaled: &RescaledNetwork) -> f64 {
    gaussian_weighted_length(&rescaled.network) / (2.0 * std::f64::consts::PI).sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct ShrinkerResidualNorms {
    pub sup: f64,
    /// √∫ |k_vec + x^⊥|² e^{−|x|²/2} ds.
    pub weighted_l2: f64,
}

/// Pointwise |k_vec + x^⊥| on a rescaled network; small values mean the
/// rescaled flow is close to a self-similarly shrinking solution.
pub fn rescaled_shrinker_residual(
    rescaled: &RescaledNetwork,
) -> Result<ShrinkerResidualNorms, MonotonicityError> {
    let mut sup = 0.0f64;
    let mut l2 = 0.0;
    for c in &rescaled.network.curves {
        let f = frames(c)?;
        let k = curvature(c)?;
        let w = c.arclength_weights();
        for j in 0..c.points.len() {
            let x = c.points[j];
            let perp = f.normal[j] * x.dot(f.normal[j]);
            let r = (k.vector[j] + perp).norm();
            sup = sup.max(r);
            l2 += r * r * (-x.norm_sq() / 2.0).exp() * w[j];
        }
    }
    Ok(ShrinkerResidualNorms {
        sup,
        weighted_l2: l2.sqrt(),
    })
}

/// Max over probe balls of clipped length over radius, H¹(Ñ ∩ B_R(c))/R.
pub fn length_ratio_check(rescaled: &RescaledNetwork, probes: &[(Vec2, f64)]) -> f64 {
    let mut worst = 0.0f64;
    for (center, radius) in probes {
        let mut clipped = 0.0;
        for c in &rescaled.network.curves {
            for seg in c.points.windows(2) {
                clipped += clip_segment_to_disk(seg[0], seg[1], *center, *radius);
            }
        }
        worst = worst.max(clipped / radius);
    }
    worst
}

fn clip_segment_to_disk(a: Vec2, b: Vec2, c: Vec2, r: f64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sq();
    if len2 == 0.0 {
        return 0.0;
    }
    // |a + t d − c|² = r²
    let e = a - c;
    let qa = len2;
    let qb = 2.0 * e.dot(d);
    let qc = e.norm_sq() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    if t1 <= t0 {
        0.0
    } else {
        (t1 - t0) * len2.sqrt()
    }
}

/// Snapshots of a trajectory that can resolve the kernel at (t0, ·): the
/// kernel width must exceed a few node spacings.
fn usable_snapshots(trajectory: &Trajectory, t0: f64) -> Vec<(&crate::flow::Snapshot, f64)> {
    trajectory
        .snapshots
        .iter()
        .filter_map(|snap| {
            if snap.time >= t0 {
                return None;
            }
            let h_max = snap
                .network
                .curves
                .iter()
                .map(|c| c.spacing_range().1)
                .fold(0.0f64, f64::max);
            if t0 - snap.time >= 4.0 * h_max * h_max {
                Some((snap, t0 - snap.time))
            } else {
                None
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct LimitDensity {
    pub value: f64,
    /// The (t, Θ) tail used for the extrapolation.
    pub tail: Vec<(f64, f64)>,
}

/// Limit Gaussian density Θ̂(T, x0): evaluate Θ_{T,x0} on the last usable
/// snapshots and extrapolate t → T linearly (the series is monotone by the
/// monotonicity formula, which justifies tail extrapolation).
pub fn limit_density(trajectory: &Trajectory, x0: Vec2) -> Result<LimitDensity, MonotonicityError> {
    let t0 = trajectory.singular_time_hint();
    let usable = usable_snapshots(trajectory, t0);
    const K: usize = 10;
    if usable.len() < 3 {
        return Err(MonotonicityError::InsufficientTail {
            needed: 3,
            got: usable.len(),
        });
    }
    let tail = &usable[usable.len().saturating_sub(K)..];
    let mut pairs = Vec::with_capacity(tail.len());
    for (snap, _) in tail {
        let theta = gaussian_density(&snap.network, t0, x0, snap.time)?;
        pairs.push((snap.time, theta));
    }
    let gaps: Vec<f64> = pairs.iter().map(|(t, _)| t0 - t).collect();
    let thetas: Vec<f64> = pairs.iter().map(|(_, v)| *v).collect();
    let value = match linear_fit(&gaps, &thetas) {
        Some((_, intercept)) => intercept,
        None => *thetas.last().unwrap(),
    };
    // The density is a limit of nonnegative quantities; the extrapolation
    // may undershoot for probes far from the network.
    Ok(LimitDensity {
        value: value.max(0.0),
        tail: pairs,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct MonotonicitySample {
    pub time: f64,
    pub density: f64,
    /// Centered-difference dΘ/dt (None at the window ends).
    pub density_rate: Option<f64>,
    /// ∫ |k_vec + (x−x0)^⊥/(2(t0−t))|² ρ ds.
    pub dissipation: f64,
    /// Σ_r [⟨(P^r−x0)/(2(t0−t)), τ⟩ − λ] ρ(P^r) over fixed endpoints,
    /// oriented out of the curve at the endpoint.
    pub boundary_term: f64,
    /// dΘ/dt + dissipation − boundary (an exact identity for the flow).
    pub identity_residual: Option<f64>,
}

/// Audit the monotonicity identity along a trajectory for the probe
/// (t0, x0). For boundary-free networks the boundary term is zero and Θ is
/// non-increasing.
pub fn monotonicity_audit(
    trajectory: &Trajectory,
    t0: f64,
    x0: Vec2,
) -> Result<Vec<MonotonicitySample>, MonotonicityError> {
    let usable = usable_snapshots(trajectory, t0);
    if usable.len() < 3 {
        return Err(MonotonicityError::InsufficientTail {
            needed: 3,
            got: usable.len(),
        });
    }
    let mut samples = Vec::with_capacity(usable.len());
    for (snap, gap) in &usable {
        let network = &snap.network;
        let density = gaussian_density(network, t0, x0, snap.time)?;
        let norm = (4.0 * std::f64::consts::PI * gap).sqrt();
        let mut dissipation = 0.0;
        for c in &network.curves {
            let f = frames(c)?;
            let k = curvature(c)?;
            let w = c.arclength_weights();
            for j in 0..c.points.len() {
                let rel = c.points[j] - x0;
                let perp = f.normal[j] * rel.dot(f.normal[j]) / (2.0 * gap);
                let r = (k.vector[j] + perp).norm_sq();
                dissipation += r * (-rel.norm_sq() / (4.0 * gap)).exp() / norm * w[j];
            }
        }
        let mut boundary = 0.0;
        for p in &network.topology.endpoints {
            let q = end_quantities(&network.curves[p.at.curve], p.at.end)?;
            // Outward of the curve at its endpoint = away from the network.
            let tau = -q.tangent_out;
            let lambda = -q.velocity_out;
            let rel = q.position - x0;
            let rho = (-rel.norm_sq() / (4.0 * gap)).exp() / norm;
            boundary += (rel.dot(tau) / (2.0 * gap) - lambda) * rho;
        }
        samples.push(MonotonicitySample {
            time: snap.time,
            density,
            density_rate: None,
            dissipation,
            boundary_term: boundary,
            identity_residual: None,
        });
    }
    for i in 1..samples.len().saturating_sub(1) {
        let rate = (samples[i + 1].density - samples[i - 1].density)
            / (samples[i + 1].time - samples[i - 1].time);
        samples[i].density_rate = Some(rate);
        samples[i].identity_residual =
            Some(rate + samples[i].dissipation - samples[i].boundary_term);
    }
    Ok(samples)
}

/// Limit-density map over a rectangular grid of probe centres,
/// row-major with `nx` columns.
pub struct DensityMapSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

pub fn density_map(
    trajectory: &Trajectory,
    spec: &DensityMapSpec,
) -> Result<Vec<(Vec2, f64)>, MonotonicityError> {
    let mut out = Vec::with_capacity(spec.nx * spec.ny);
    for jy in 0..spec.ny {
        for jx in 0..spec.nx {
            let fx = if spec.nx > 1 {
                jx as f64 / (spec.nx - 1) as f64
            } else {
                0.5
            };
            let fy = if spec.ny > 1 {
                jy as f64 / (spec.ny - 1) as f64
            } else {
                0.5
            };
            let p = Vec2::new(
                spec.x_min + (spec.x_max - spec.x_min) * fx,
                spec.y_min + (spec.y_max - spec.y_min) * fy,
            );
            let v = limit_density(trajectory, p)?.value;
            out.push((p, v));
        }
    }
    Ok(out)
}
