//! Self-similar solutions of the curvature flow: translators (the grim
//! reaper), rotators, and the shrinkers satisfying k_vec + η^⊥ = 0 (circle,
//! standard triod, Brakke spoon, standard lens, Abresch–Langer curves).
//! Curved shrinkers are produced by shooting the turning-angle ODE
//! x' = cos θ, y' = sin θ, θ' = x sin θ − y cos θ.

mod shooting;

pub use shooting::{
    find_abresch_langer, find_brakke_spoon, find_brakke_spoon_with, find_lens, find_lens_with,
    shrinker_ode_step, ShooterState,
};

use std::collections::BTreeMap;

use crate::geometry::{
    curvature, frames, CurveEnd, DiscreteCurve, End, FixedEndpoint, GeometryError, Junction,
    Network, NetworkTopology,
};
use crate::Vec2;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SelfSimilarError {
    #[error("requested range [{lo}, {hi}] is not inside (-π/2, π/2)")]
    RangeOutOfDomain { lo: f64, hi: f64 },
    #[error("shooting failed: {0}")]
    ShootingFailed(String),
    #[error("no closed orbit found within the step budget")]
    NoClosureInWindow,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Truncation radius for unbounded curves (halflines); the Gaussian weight
/// e^{-r²/2} is below 1.3e-14 outside this radius.
pub const HALFLINE_RADIUS: f64 = 8.0;

/// Sup and arclength-L² norms of a pointwise residual.
#[derive(Clone, Copy, Debug, Default)]
pub struct ResidualNorms {
    pub sup: f64,
    pub l2: f64,
}

fn residual_norms(values: &[f64], weights: &[f64]) -> ResidualNorms {
    let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let l2 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| v * v * w)
        .sum::<f64>()
        .sqrt();
    ResidualNorms { sup, l2 }
}

/// The grim reaper: the graph x = −log cos y sampled uniformly in
/// y over `[y_lo, y_hi] ⊂ (−π/2, π/2)`; it translates with velocity e₁.
pub fn grim_reaper(y_lo: f64, y_hi: f64, n: usize) -> Result<DiscreteCurve, SelfSimilarError> {
    use std::f64::consts::FRAC_PI_2;
    if !(y_lo < y_hi) || y_lo <= -FRAC_PI_2 || y_hi >= FRAC_PI_2 {
        return Err(SelfSimilarError::RangeOutOfDomain { lo: y_lo, hi: y_hi });
    }
    let points = (0..=n)
        .map(|j| {
            let y = y_lo + (y_hi - y_lo) * j as f64 / n as f64;
            Vec2::new(-y.cos().ln(), y)
        })
        .collect();
    Ok(DiscreteCurve::new("grim-reaper", points)?)
}

/// Pointwise residual |k − ⟨v, ν⟩| of the translator equation.
pub fn translator_residual(
    curve: &DiscreteCurve,
    velocity: Vec2,
) -> Result<ResidualNorms, SelfSimilarError> {
    let f = frames(curve)?;
    let k = curvature(curve)?;
    let resid: Vec<f64> = k
        .scalar
        .iter()
        .zip(f.normal.iter())
        .map(|(k, nu)| k - velocity.dot(*nu))
        .collect();
    Ok(residual_norms(&resid, &curve.arclength_weights()))
}

/// Pointwise residual |k − ω⟨η, τ⟩| of the rotator equation, with η the
/// position relative to the rotation centre (the origin).
pub fn rotator_residual(
    curve: &DiscreteCurve,
    omega: f64,
) -> Result<ResidualNorms, SelfSimilarError> {
    let f = frames(curve)?;
    let k = curvature(curve)?;
    let resid: Vec<f64> = k
        .scalar
        .iter()
        .zip(f.tangent.iter().zip(curve.points.iter()))
        .map(|(k, (tau, eta))| k - omega * eta.dot(*tau))
        .collect();
    Ok(residual_norms(&resid, &curve.arclength_weights()))
}

/// Per-curve and global norms of the shrinker residual |k_vec + η^⊥|.
#[derive(Clone, Debug)]
pub struct NetworkResidual {
    pub per_curve: Vec<ResidualNorms>,
    pub sup: f64,
    pub l2: f64,
}

pub fn shrinker_residual(network: &Network) -> Result<NetworkResidual, SelfSimilarError> {
    let mut per_curve = Vec::new();
    let mut sup = 0.0f64;
    let mut l2_sq = 0.0;
    for c in &network.curves {
        let f = frames(c)?;
        let k = curvature(c)?;
        let resid: Vec<f64> = (0..c.points.len())
            .map(|j| {
                let eta = c.points[j];
                let perp = f.normal[j] * eta.dot(f.normal[j]);
                (k.vector[j] + perp).norm()
            })
            .collect();
        let norms = residual_norms(&resid, &c.arclength_weights());
        sup = sup.max(norms.sup);
        l2_sq += norms.l2 * norms.l2;
        per_curve.push(norms);
    }
    Ok(NetworkResidual {
        per_curve,
        sup,
        l2: l2_sq.sqrt(),
    })
}

/// Three straight rays at 120 degrees through the origin, each of length
/// `scale`, with fixed endpoints at the far ends.
pub fn standard_triod(scale: f64, n: usize) -> Network {
    assert!(scale > 0.0 && n >= 3);
    let angles = [
        std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::FRAC_PI_3,
        std::f64::consts::FRAC_PI_2 + 4.0 * std::f64::consts::FRAC_PI_3,
    ];
    let mut curves = Vec::new();
    let mut endpoints = Vec::new();
    for (i, a) in angles.iter().enumerate() {
        let dir = Vec2::new(a.cos(), a.sin());
        let points: Vec<Vec2> = (0..=n)
            .map(|j| dir * (scale * j as f64 / n as f64))
            .collect();
        let tip = points[n];
        curves.push(DiscreteCurve::new(format!("leg-{i}"), points).expect("leg is regular"));
        endpoints.push(FixedEndpoint {
            at: CurveEnd {
                curve: i,
                end: End::Finish,
            },
            position: tip,
        });
    }
    let topology = NetworkTopology {
        junctions: vec![Junction {
            ends: [
                CurveEnd {
                    curve: 0,
                    end: End::Start,
                },
                CurveEnd {
                    curve: 1,
                    end: End::Start,
                },
                CurveEnd {
                    curve: 2,
                    end: End::Start,
                },
            ],
        }],
        endpoints,
    };
    Network::new(curves, topology).expect("triod topology is valid")
}

/// The unit circle centred at the origin, sampled anticlockwise.
pub fn circle_shrinker(n: usize) -> Network {
    let points: Vec<Vec2> = (0..=n)
        .map(|j| {
            let a = std::f64::consts::TAU * j as f64 / n as f64;
            Vec2::new(a.cos(), a.sin())
        })
        .collect();
    let mut points = points;
    points[n] = points[0];
    let c = DiscreteCurve::new_closed("circle", points).expect("circle is regular");
    Network::closed_curve(c).expect("closed curve network")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShrinkerKind {
    Circle,
    Triod,
    Spoon,
    Lens,
    AbreschLanger,
}

impl ShrinkerKind {
    pub fn name(self) -> &'static str {
        match self {
            ShrinkerKind::Circle => "circle",
            ShrinkerKind::Triod => "triod",
            ShrinkerKind::Spoon => "spoon",
            ShrinkerKind::Lens => "lens",
            ShrinkerKind::AbreschLanger => "abresch-langer",
        }
    }
}

/// A constructed and validated self-similar solution.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub kind: ShrinkerKind,
    pub network: Network,
    /// Shooting parameters and closure data, by name.
    pub parameters: BTreeMap<String, f64>,
    /// |Στ| at the worst junction, from the shooter's analytic tangents.
    pub angle_residual: f64,
    /// Sup norm of the discrete shrinker residual.
    pub shrinker_residual: f64,
    /// Rescaled Gaussian density (1/√(2π)) ∫ e^{−|x|²/2} ds.
    pub density: f64,
    /// Endpoint gap of the shooting orbit, when the entry is built by
    /// closing an orbit.
    pub closure_residual: Option<f64>,
}

pub fn catalog_entry(kind: ShrinkerKind, samples: usize) -> Result<CatalogEntry, SelfSimilarError> {
    match kind {
        ShrinkerKind::Circle => {
            let network = circle_shrinker(samples.max(16));
            let resid = shrinker_residual(&network)?;
            let density = crate::monotonicity::gaussian_weighted_length(&network)
                / (2.0 * std::f64::consts::PI).sqrt();
            Ok(CatalogEntry {
                kind,
                network,
                parameters: BTreeMap::from([("radius".to_string(), 1.0)]),
                angle_residual: 0.0,
                shrinker_residual: resid.sup,
                density,
                closure_residual: None,
            })
        }
        ShrinkerKind::Triod => {
            let network = standard_triod(HALFLINE_RADIUS, samples.max(16));
            let resid = shrinker_residual(&network)?;
            let density = crate::monotonicity::gaussian_weighted_length(&network)
                / (2.0 * std::f64::consts::PI).sqrt();
            Ok(CatalogEntry {
                kind,
                network,
                parameters: BTreeMap::from([("scale".to_string(), HALFLINE_RADIUS)]),
                angle_residual: 0.0,
                shrinker_residual: resid.sup,
                density,
                closure_residual: None,
            })
        }
        ShrinkerKind::Spoon => find_brakke_spoon_with(samples),
        ShrinkerKind::Lens => find_lens_with(samples),
        ShrinkerKind::AbreschLanger => find_abresch_langer(0.5, 4_000_000),
    }
}
