use super::FlowError;
use crate::geometry::{end_quantities, DiscreteCurve, End, EndQuantities, Network};
use crate::numerics::CubicSpline;
use crate::Vec2;

/// Residuals of the compatibility conditions an initial parametrization must
/// satisfy, one per condition:
/// 1–2. every curve is discretely regular (positive tangent magnitude);
/// 3.   the three ends at each junction coincide;
/// 4.   the exterior unit tangents at each junction sum to zero;
/// 5.   the flow velocity γ_xx/|γ_x|² agrees across each junction;
/// 6.   ends assigned to fixed endpoints sit at their positions;
/// 7.   γ_xx vanishes at fixed endpoints.
///
/// `max_endpoint_accel` is the raw |γ_xx| of condition 7;
/// `max_endpoint_velocity` is the same end measured as a flow velocity
/// |γ_xx|/|γ_x|², which is what the pass/fail tolerance applies to (raw
/// γ_xx scales with the square of curve length).
#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub min_tangent_magnitude: f64,
    pub max_junction_gap: f64,
    pub max_tangent_sum: f64,
    pub max_velocity_mismatch: f64,
    pub max_endpoint_gap: f64,
    pub max_endpoint_accel: f64,
    pub max_endpoint_velocity: f64,
    pub tolerances: AdmissibilityTolerances,
}

#[derive(Clone, Copy, Debug)]
pub struct AdmissibilityTolerances {
    pub junction_gap: f64,
    pub tangent_sum: f64,
    /// Tolerance on junction flow-velocity mismatch and endpoint flow
    /// velocity; these are discretization-limited (O(h²) for admissible
    /// smooth data).
    pub velocity: f64,
}

impl Default for AdmissibilityTolerances {
    fn default() -> Self {
        AdmissibilityTolerances {
            junction_gap: 1e-9,
            tangent_sum: 1e-6,
            velocity: 1e-2,
        }
    }
}

impl AdmissibilityReport {
    pub fn passes(&self) -> bool {
        self.min_tangent_magnitude > 0.0
            && self.max_junction_gap <= self.tolerances.junction_gap
            && self.max_tangent_sum <= self.tolerances.tangent_sum
            && self.max_velocity_mismatch <= self.tolerances.velocity
            && self.max_endpoint_gap <= self.tolerances.junction_gap
            && self.max_endpoint_velocity <= self.tolerances.velocity
    }

    /// Per-condition pass flags: regularity, concurrency, angle condition,
    /// velocity agreement across junctions, endpoint positions, endpoint
    /// second derivative.
    pub fn condition_flags(&self) -> [bool; 6] {
        [
            self.min_tangent_magnitude > 0.0,
            self.max_junction_gap <= self.tolerances.junction_gap,
            self.max_tangent_sum <= self.tolerances.tangent_sum,
            self.max_velocity_mismatch <= self.tolerances.velocity,
            self.max_endpoint_gap <= self.tolerances.junction_gap,
            self.max_endpoint_velocity <= self.tolerances.velocity,
        ]
    }

    pub fn summary(&self) -> String {
        format!(
            "regularity min|γ_x|={:.3e}; junction gap={:.3e} (tol {:.1e}); |Στ|={:.3e} (tol {:.1e}); \
             velocity mismatch={:.3e} (tol {:.1e}); endpoint gap={:.3e}; endpoint |γ_xx|={:.3e} \
             (as velocity {:.3e}, tol {:.1e}) => {}",
            self.min_tangent_magnitude,
            self.max_junction_gap,
            self.tolerances.junction_gap,
            self.max_tangent_sum,
            self.tolerances.tangent_sum,
            self.max_velocity_mismatch,
            self.tolerances.velocity,
            self.max_endpoint_gap,
            self.max_endpoint_accel,
            self.max_endpoint_velocity,
            self.tolerances.velocity,
            if self.passes() { "PASS" } else { "FAIL" }
        )
    }
}

fn end_data(network: &Network, ce: crate::geometry::CurveEnd) -> Result<EndQuantities, FlowError> {
    Ok(end_quantities(&network.curves[ce.curve], ce.end)?)
}

/// Evaluate the compatibility conditions of the special-flow system on a
/// network. The junction-gap tolerance is scaled by the bounding-box
/// diameter.
pub fn check_admissible(
    network: &Network,
    tolerances: &AdmissibilityTolerances,
) -> Result<AdmissibilityReport, FlowError> {
    let scale = network.bbox_diameter().max(f64::MIN_POSITIVE);
    let mut report = AdmissibilityReport {
        min_tangent_magnitude: f64::INFINITY,
        max_junction_gap: 0.0,
        max_tangent_sum: 0.0,
        max_velocity_mismatch: 0.0,
        max_endpoint_gap: 0.0,
        max_endpoint_accel: 0.0,
        max_endpoint_velocity: 0.0,
        tolerances: AdmissibilityTolerances {
            junction_gap: tolerances.junction_gap * scale,
            ..*tolerances
        },
    };
    for c in &network.curves {
        for d in c.parameter_derivative() {
            report.min_tangent_magnitude = report.min_tangent_magnitude.min(d.norm());
        }
    }
    for junction in &network.topology.junctions {
        let q: Vec<EndQuantities> = junction
            .ends
            .iter()
            .map(|e| end_data(network, *e))
            .collect::<Result<_, _>>()?;
        let gap = q[0]
            .position
            .dist(q[1].position)
            .max(q[0].position.dist(q[2].position))
            .max(q[1].position.dist(q[2].position));
        report.max_junction_gap = report.max_junction_gap.max(gap);
        let tangent_sum = (q[0].tangent_out + q[1].tangent_out + q[2].tangent_out).norm();
        report.max_tangent_sum = report.max_tangent_sum.max(tangent_sum);
        for i in 0..3 {
            for j in i + 1..3 {
                let mismatch = q[i].flow_velocity.dist(q[j].flow_velocity);
                report.max_velocity_mismatch = report.max_velocity_mismatch.max(mismatch);
            }
        }
    }
    for p in &network.topology.endpoints {
        let q = end_data(network, p.at)?;
        report.max_endpoint_gap = report.max_endpoint_gap.max(q.position.dist(p.position));
        report.max_endpoint_accel = report.max_endpoint_accel.max(q.accel.norm());
        report.max_endpoint_velocity = report.max_endpoint_velocity.max(q.flow_velocity.norm());
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug)]
pub struct MakeAdmissibleOptions {
    /// Tolerance on |Σkⁱ| at junctions and |k| at endpoints; these are
    /// geometric preconditions the reparametrization cannot repair.
    pub curvature_tol: f64,
    /// Tolerance on the angle condition |Στ|.
    pub angle_tol: f64,
    /// Highest blend degree tried before giving up on monotonicity.
    pub max_blend_degree: usize,
}

impl Default for MakeAdmissibleOptions {
    fn default() -> Self {
        MakeAdmissibleOptions {
            curvature_tol: 5e-2,
            angle_tol: 1e-4,
            max_blend_degree: 31,
        }
    }
}

/// Sort junction end indices anticlockwise by exterior tangent angle. The
/// junction identity λⁱ = (k^{i−1} − k^{i+1})/√3 holds in this cyclic order.
pub(super) fn anticlockwise_order(tangents: &[Vec2; 3]) -> [usize; 3] {
    let mut idx = [0usize, 1, 2];
    let angles: Vec<f64> = tangents.iter().map(|t| t.angle()).collect();
    idx.sort_by(|a, b| angles[*a].partial_cmp(&angles[*b]).unwrap());
    idx
}

/// Reparametrize each curve by a polynomial θ : [0,1] → [0,1] with unit end
/// derivatives and the end second-derivatives that make the parametrization
/// admissible: the tangential velocity becomes (k^{i−1} − k^{i+1})/√3 at
/// junctions and 0 at fixed endpoints. The underlying set is unchanged up to
/// interpolation error.
pub fn make_admissible(
    network: &Network,
    options: &MakeAdmissibleOptions,
) -> Result<Network, FlowError> {
    // Geometric preconditions: regularity, angle condition, Σk = 0 at each
    // junction, k = 0 at endpoints.
    let mut lambda_targets: Vec<[Option<f64>; 2]> = vec![[None, None]; network.curves.len()];

    for junction in &network.topology.junctions {
        let q: Vec<EndQuantities> = junction
            .ends
            .iter()
            .map(|e| end_data(network, *e))
            .collect::<Result<_, _>>()?;
        let tangent_sum = (q[0].tangent_out + q[1].tangent_out + q[2].tangent_out).norm();
        if tangent_sum > options.angle_tol {
            return Err(FlowError::NotGeometricallyAdmissible(format!(
                "junction tangent sum {tangent_sum:.3e} exceeds {:.1e}",
                options.angle_tol
            )));
        }
        let k_sum: f64 = q.iter().map(|e| e.curvature_out).sum();
        if k_sum.abs() > options.curvature_tol {
            return Err(FlowError::NotGeometricallyAdmissible(format!(
                "junction curvature sum {k_sum:.3e} exceeds {:.1e}",
                options.curvature_tol
            )));
        }
        let tangents = [q[0].tangent_out, q[1].tangent_out, q[2].tangent_out];
        let order = anticlockwise_order(&tangents);
        for pos in 0..3 {
            let i = order[pos];
            let prev = order[(pos + 2) % 3];
            let next = order[(pos + 1) % 3];
            let target = (q[prev].curvature_out - q[next].curvature_out) / 3f64.sqrt();
            let e = junction.ends[i];
            let slot = match e.end {
                End::Start => 0,
                End::Finish => 1,
            };
            lambda_targets[e.curve][slot] = Some(target);
        }
    }
    for p in &network.topology.endpoints {
        let q = end_data(network, p.at)?;
        // k must vanish at the endpoint; the curvature scale is set by the
        // flow velocity to stay parametrization independent.
        if q.curvature_out.abs() > options.curvature_tol {
            return Err(FlowError::NotGeometricallyAdmissible(format!(
                "endpoint curvature {:.3e} exceeds {:.1e}",
                q.curvature_out, options.curvature_tol
            )));
        }
        let slot = match p.at.end {
            End::Start => 0,
            End::Finish => 1,
        };
        lambda_targets[p.at.curve][slot] = Some(0.0);
    }

    let mut curves = Vec::with_capacity(network.curves.len());
    for (ci, c) in network.curves.iter().enumerate() {
        if c.closed {
            curves.push(c.clone());
            continue;
        }
        let start = end_quantities(c, End::Start)?;
        let finish = end_quantities(c, End::Finish)?;
        // θ_xx at each border: (λ_target − λ_current)·|γ_x| in the curve's
        // own orientation; outward values flip sign at the finish end.
        let a = match lambda_targets[ci][0] {
            Some(t) => (t - start.velocity_out) * start.metric,
            None => 0.0,
        };
        let b = match lambda_targets[ci][1] {
            Some(t) => -(t - finish.velocity_out) * finish.metric,
            None => 0.0,
        };
        if a.abs() < 1e-10 && b.abs() < 1e-10 {
            curves.push(c.clone());
            continue;
        }
        let theta = monotone_blend(a, b, options.max_blend_degree)
            .ok_or_else(|| FlowError::NonMonotoneReparam(c.id.clone()))?;
        curves.push(reparametrize(c, &theta)?);
    }
    let out = Network {
        curves,
        topology: network.topology.clone(),
    };
    out.validate()?;
    Ok(out)
}

/// θ(x) = x + (a/2)·x²(1−x)^d + (b/2)·x^d(1−x)², the lowest blend degree
/// d ≥ 3 keeping θ strictly monotone.
struct Blend {
    a: f64,
    b: f64,
    degree: i32,
}

impl Blend {
    fn eval(&self, x: f64) -> f64 {
        let d = self.degree;
        x + 0.5 * self.a * x * x * (1.0 - x).powi(d)
            + 0.5 * self.b * x.powi(d) * (1.0 - x) * (1.0 - x)
    }

    fn derivative(&self, x: f64) -> f64 {
        let d = self.degree as f64;
        let one = 1.0 - x;
        1.0 + 0.5
            * self.a
            * (2.0 * x * one.powi(self.degree) - d * x * x * one.powi(self.degree - 1))
            + 0.5
                * self.b
                * (d * x.powi(self.degree - 1) * one * one - 2.0 * x.powi(self.degree) * one)
    }
}

fn monotone_blend(a: f64, b: f64, max_degree: usize) -> Option<Blend> {
    let mut degree = 3i32;
    while degree <= max_degree as i32 {
        let blend = Blend { a, b, degree };
        let monotone = (0..=2000).all(|i| blend.derivative(i as f64 / 2000.0) > 1e-6);
        if monotone {
            return Some(blend);
        }
        degree += 2;
    }
    None
}

fn reparametrize(curve: &DiscreteCurve, theta: &Blend) -> Result<DiscreteCurve, FlowError> {
    let xs: Vec<f64> = curve.points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = curve.points.iter().map(|p| p.y).collect();
    let sx = CubicSpline::fit(&xs)
        .ok_or_else(|| FlowError::BadConfig("curve too short for spline".into()))?;
    let sy = CubicSpline::fit(&ys)
        .ok_or_else(|| FlowError::BadConfig("curve too short for spline".into()))?;
    let n = curve.segment_count();
    let mut points = Vec::with_capacity(n + 1);
    points.push(curve.points[0]);
    for j in 1..n {
        let t = theta.eval(j as f64 / n as f64).clamp(0.0, 1.0);
        points.push(Vec2::new(sx.eval(t), sy.eval(t)));
    }
    points.push(curve.points[n]);
    let out = DiscreteCurve {
        id: curve.id.clone(),
        points,
        closed: curve.closed,
    };
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selfsimilar::standard_triod;

    #[test]
    fn straight_triod_is_admissible_and_unchanged() {
        let net = standard_triod(1.0, 32);
        let report = check_admissible(&net, &AdmissibilityTolerances::default()).unwrap();
        assert!(report.passes(), "{}", report.summary());
        assert!(report.max_velocity_mismatch < 1e-10);
        let out = make_admissible(&net, &MakeAdmissibleOptions::default()).unwrap();
        for (a, b) in out.curves.iter().zip(net.curves.iter()) {
            assert_eq!(a.points, b.points);
        }
    }

    #[test]
    fn endpoint_cluster_violates_condition_seven() {
        let mut net = standard_triod(1.0, 32);
        // Quadratic parameter stretch piles samples toward the endpoint:
        // γ_xx ≠ 0 there although the leg is straight.
        let dir = (net.curves[0].points[32] - net.curves[0].points[0])
            .normalized()
            .unwrap();
        for (j, p) in net.curves[0].points.iter_mut().enumerate() {
            let x = j as f64 / 32.0;
            *p = dir * (x * (2.0 - x)) * 1.0;
        }
        let report = check_admissible(&net, &AdmissibilityTolerances::default()).unwrap();
        assert!(report.max_endpoint_velocity > 0.1);
        assert!(!report.passes());
    }

    #[test]
    fn blend_hits_requested_end_derivatives() {
        let blend = monotone_blend(0.7, -0.4, 31).unwrap();
        let h = 1e-5;
        // Second differences at the borders approximate θ_xx.
        let at0 = (blend.eval(2.0 * h) - 2.0 * blend.eval(h) + blend.eval(0.0)) / (h * h);
        let at1 =
            (blend.eval(1.0) - 2.0 * blend.eval(1.0 - h) + blend.eval(1.0 - 2.0 * h)) / (h * h);
        assert!((at0 - 0.7).abs() < 1e-3, "θ_xx(0)={at0}");
        assert!((at1 + 0.4).abs() < 1e-3, "θ_xx(1)={at1}");
        assert!((blend.eval(0.0)).abs() < 1e-15 && (blend.eval(1.0) - 1.0).abs() < 1e-15);
        let d0 = (blend.eval(h) - blend.eval(0.0)) / h;
        let d1 = (blend.eval(1.0) - blend.eval(1.0 - h)) / h;
        assert!((d0 - 1.0).abs() < 1e-4 && (d1 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn curved_admissible_triod_gains_admissible_parametrization() {
        // Legs bent by a normal bump vanishing to second order at both ends:
        // the set stays geometrically admissible (Σk = 0 with every k = 0 at
        // the junction, k = 0 at endpoints), but a quadratic parameter
        // stretch on one leg breaks condition 5/7 for the parametrization.
        let net = curved_triod(96, 0.12, true);
        // Discrete tangents of curved samples carry O(h²) angle error, so the
        // angle tolerance is looser than for exact constructions.
        let tol = AdmissibilityTolerances {
            tangent_sum: 1e-3,
            ..Default::default()
        };
        let before = check_admissible(&net, &tol).unwrap();
        assert!(!before.passes(), "{}", before.summary());
        let out = make_admissible(&net, &MakeAdmissibleOptions::default()).unwrap();
        let after = check_admissible(&out, &tol).unwrap();
        assert!(after.passes(), "{}", after.summary());
        // The set is unchanged up to interpolation error.
        for (a, b) in out.curves.iter().zip(net.curves.iter()) {
            assert!(crate::geometry::hausdorff_distance(&a.points, &b.points) < 1e-3);
        }
    }

    #[test]
    fn nonzero_junction_curvature_sum_breaks_condition_five() {
        // Bend a single leg with a bump whose curvature does not vanish at
        // the junction: Σk ≠ 0 there, the three flow velocities disagree,
        // and the defect is geometric (reparametrization cannot fix it).
        let n = 64;
        let mut net = standard_triod(1.0, n);
        let c = &mut net.curves[0];
        let dir = (c.points[n] - c.points[0]).normalized().unwrap();
        let normal = dir.rot90();
        for (j, p) in c.points.iter_mut().enumerate() {
            let x = j as f64 / n as f64;
            let bump = 0.15 * x * x * (1.0 - x).powi(3);
            *p = dir * x + normal * bump;
        }
        let report = check_admissible(&net, &AdmissibilityTolerances::default()).unwrap();
        assert!(report.max_velocity_mismatch > 0.05, "{}", report.summary());
        assert!(matches!(
            make_admissible(&net, &MakeAdmissibleOptions::default()),
            Err(FlowError::NotGeometricallyAdmissible(_))
        ));
    }

    #[test]
    fn non_regular_network_is_rejected() {
        let mut net = standard_triod(1.0, 32);
        // Rotate one leg by 30 degrees: angle condition broken.
        let rot = |p: Vec2| {
            let (s, c) = (30f64.to_radians()).sin_cos();
            Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y)
        };
        for p in net.curves[0].points.iter_mut() {
            *p = rot(*p);
        }
        net.topology.endpoints[0].position = *net.curves[0].points.last().unwrap();
        assert!(matches!(
            make_admissible(&net, &MakeAdmissibleOptions::default()),
            Err(FlowError::NotGeometricallyAdmissible(_))
        ));
    }

    /// A triod with curved legs (normal bump u³(1−u)³) that is geometrically
    /// admissible; `stretch` optionally destroys the uniform parametrization
    /// of the first leg.
    pub fn curved_triod(n: usize, amplitude: f64, stretch: bool) -> Network {
        let mut net = standard_triod(1.0, n);
        for (ci, c) in net.curves.iter_mut().enumerate() {
            let dir = (c.points[n] - c.points[0]).normalized().unwrap();
            let normal = dir.rot90();
            let amp = amplitude * (1.0 + 0.3 * ci as f64);
            for (j, p) in c.points.iter_mut().enumerate() {
                let mut x = j as f64 / n as f64;
                if stretch && ci == 0 {
                    x = x * (1.3 - 0.3 * x); // non-uniform parameter speed
                }
                let bump = amp * x.powi(3) * (1.0 - x).powi(3);
                *p = dir * x + normal * bump;
            }
        }
        net
    }
}
