use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use super::{shrinker_residual, CatalogEntry, SelfSimilarError, ShrinkerKind, HALFLINE_RADIUS};
use crate::geometry::{
    CurveEnd, DiscreteCurve, End, FixedEndpoint, Junction, Network, NetworkTopology,
};
use crate::Vec2;

/// State of the shrinker shooting integrator: position, turning angle θ
/// (the unit tangent is (cos θ, sin θ)) and accumulated arclength.
#[derive(Clone, Copy, Debug)]
pub struct ShooterState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub s: f64,
}

impl ShooterState {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        ShooterState {
            x,
            y,
            theta,
            s: 0.0,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn tangent(&self) -> Vec2 {
        Vec2::new(self.theta.cos(), self.theta.sin())
    }

    /// Signed curvature θ' = x sin θ − y cos θ of the shrinker equation.
    pub fn curvature(&self) -> f64 {
        self.x * self.theta.sin() - self.y * self.theta.cos()
    }

    /// Radial speed ⟨η, τ⟩; zero at apsides of the orbit.
    pub fn radial_speed(&self) -> f64 {
        self.x * self.theta.cos() + self.y * self.theta.sin()
    }
}

fn derivative(s: &ShooterState) -> (f64, f64, f64) {
    (
        s.theta.cos(),
        s.theta.sin(),
        s.x * s.theta.sin() - s.y * s.theta.cos(),
    )
}

/// One classical fourth-order Runge–Kutta step of the shrinker ODE.
pub fn shrinker_ode_step(state: ShooterState, ds: f64) -> ShooterState {
    let eval = |st: &ShooterState| derivative(st);
    let advance = |st: &ShooterState, d: (f64, f64, f64), h: f64| ShooterState {
        x: st.x + h * d.0,
        y: st.y + h * d.1,
        theta: st.theta + h * d.2,
        s: st.s,
    };
    let k1 = eval(&state);
    let k2 = eval(&advance(&state, k1, ds / 2.0));
    let k3 = eval(&advance(&state, k2, ds / 2.0));
    let k4 = eval(&advance(&state, k3, ds));
    ShooterState {
        x: state.x + ds / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y: state.y + ds / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        theta: state.theta + ds / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2),
        s: state.s + ds,
    }
}

const DS: f64 = 1e-3;

/// Refine an event crossing g(state) = 0 inside one step by bisection on the
/// substep length.
fn refine_crossing(
    before: ShooterState,
    ds: f64,
    g: impl Fn(&ShooterState) -> f64,
) -> ShooterState {
    let mut lo = 0.0;
    let mut hi = ds;
    let g_lo = g(&before);
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        let st = shrinker_ode_step(before, mid);
        if (g(&st) > 0.0) == (g_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    shrinker_ode_step(before, 0.5 * (lo + hi))
}

struct EventSearch {
    state_at_event: ShooterState,
    trace: Vec<ShooterState>,
}

/// Integrate until g changes sign (after `warmup` arclength), recording the
/// trace. Gives up when the step budget is exhausted or |position| leaves
/// `escape_radius`.
fn integrate_to_event(
    start: ShooterState,
    g: impl Fn(&ShooterState) -> f64 + Copy,
    warmup: f64,
    max_steps: usize,
    escape_radius: f64,
) -> Option<EventSearch> {
    let mut trace = vec![start];
    let mut current = start;
    for _ in 0..max_steps {
        let next = shrinker_ode_step(current, DS);
        if next.position().norm() > escape_radius {
            return None;
        }
        if next.s - start.s > warmup && g(&current) > 0.0 && g(&next) <= 0.0
            || next.s - start.s > warmup && g(&current) < 0.0 && g(&next) >= 0.0
        {
            let refined = refine_crossing(current, DS, g);
            trace.push(refined);
            return Some(EventSearch {
                state_at_event: refined,
                trace,
            });
        }
        trace.push(next);
        current = next;
    }
    None
}

/// Expand a bracket around `x0` for f until a sign change appears, then
/// bisect. f may be undefined (None) away from the valid region.
fn bisect_root(f: impl Fn(f64) -> Option<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if (f_lo > 0.0) == (f_hi > 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid.abs() < tol {
            return Some(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < 1e-16 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Scan for a sign change of f over [lo, hi] in `steps` increments and refine
/// with bisection.
fn scan_and_bisect(
    f: impl Fn(f64) -> Option<f64> + Copy,
    lo: f64,
    hi: f64,
    steps: usize,
    tol: f64,
) -> Option<f64> {
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        let Some(v) = f(x) else {
            prev = None;
            continue;
        };
        if let Some((px, pv)) = prev {
            if (pv > 0.0) != (v > 0.0) {
                return bisect_root(f, px, x, tol);
            }
        }
        prev = Some((x, v));
    }
    None
}

fn straight_samples(from: Vec2, to: Vec2, n: usize) -> Vec<Vec2> {
    (0..=n)
        .map(|j| from.lerp(to, j as f64 / n as f64))
        .collect()
}

/// Integrate `n` equal arclength steps covering `total_s`, returning the
/// n+1 states. Sampling the orbit directly (rather than interpolating a
/// finer trace) keeps the samples on the orbit to integrator accuracy, so
/// discrete curvature is free of interpolation noise.
fn reintegrate(start: ShooterState, total_s: f64, n: usize) -> Vec<ShooterState> {
    let ds = total_s / n as f64;
    let mut states = Vec::with_capacity(n + 1);
    states.push(start);
    let mut current = start;
    for _ in 0..n {
        current = shrinker_ode_step(current, ds);
        states.push(current);
    }
    states
}

/// The Brakke spoon: a closed loop meeting a halfline on the x-axis at 120
/// degrees, the halfline lying on the ray through the origin. The loop's
/// upper half is shot from the junction (q, 0) with launch angle +60° and
/// closed by requiring a perpendicular crossing of the axis.
pub fn find_brakke_spoon() -> Result<CatalogEntry, SelfSimilarError> {
    find_brakke_spoon_with(1600)
}

pub fn find_brakke_spoon_with(samples: usize) -> Result<CatalogEntry, SelfSimilarError> {
    // Closing condition: the upper half-loop launched at +60° must hit the
    // axis descending vertically (θ = −π/2).
    let closing = |q: f64| -> Option<f64> {
        let start = ShooterState::new(q, 0.0, FRAC_PI_3);
        let hit = integrate_to_event(start, |s| s.y, 0.05, 40_000, 12.0)?;
        Some(hit.state_at_event.theta + FRAC_PI_2)
    };
    let q = scan_and_bisect(closing, -2.5, -0.05, 49, 1e-10)
        .ok_or_else(|| SelfSimilarError::ShootingFailed("no spoon bracket found".into()))?;

    let start = ShooterState::new(q, 0.0, FRAC_PI_3);
    let hit = integrate_to_event(start, |s| s.y, 0.05, 40_000, 12.0)
        .ok_or_else(|| SelfSimilarError::ShootingFailed("spoon re-integration failed".into()))?;
    let closing_residual = (hit.state_at_event.theta + FRAC_PI_2).abs();
    let half_length = hit.state_at_event.s - start.s;

    // Assemble the loop anticlockwise: mirrored lower half from the junction
    // to the far axis point, then the upper half back to the junction.
    let m = (samples.max(64) / 2).max(32);
    let mut upper: Vec<Vec2> = reintegrate(start, half_length, m)
        .iter()
        .map(|s| s.position())
        .collect();
    if let Some(last) = upper.last_mut() {
        last.y = 0.0;
    }
    upper[0] = Vec2::new(q, 0.0);
    let mut loop_points: Vec<Vec2> = upper.iter().map(|p| Vec2::new(p.x, -p.y)).collect();
    loop_points.extend(upper.iter().rev().skip(1));
    let loop_curve = DiscreteCurve::new("loop", loop_points)?;

    let tail_n = samples.max(64);
    let tail_points = straight_samples(Vec2::new(q, 0.0), Vec2::new(-HALFLINE_RADIUS, 0.0), tail_n);
    let tail = DiscreteCurve::new("tail", tail_points)?;

    let topology = NetworkTopology {
        junctions: vec![Junction {
            ends: [
                CurveEnd {
                    curve: 0,
                    end: End::Start,
                },
                CurveEnd {
                    curve: 0,
                    end: End::Finish,
                },
                CurveEnd {
                    curve: 1,
                    end: End::Start,
                },
            ],
        }],
        endpoints: vec![FixedEndpoint {
            at: CurveEnd {
                curve: 1,
                end: End::Finish,
            },
            position: Vec2::new(-HALFLINE_RADIUS, 0.0),
        }],
    };
    let network = Network::new(vec![loop_curve, tail], topology)?;

    // Analytic junction tangents: ±60° loop launches and the axis halfline.
    let tangent_sum = Vec2::new(FRAC_PI_3.cos(), -(FRAC_PI_3.sin()))
        + Vec2::new(FRAC_PI_3.cos(), FRAC_PI_3.sin())
        + Vec2::new(-1.0, 0.0);
    let angle_residual = tangent_sum.norm().max(closing_residual);

    let resid = shrinker_residual(&network)?;
    let density = crate::monotonicity::gaussian_weighted_length(&network) / (2.0 * PI).sqrt();
    Ok(CatalogEntry {
        kind: ShrinkerKind::Spoon,
        network,
        parameters: BTreeMap::from([
            ("junction_x".to_string(), q),
            ("closing_residual".to_string(), closing_residual),
        ]),
        angle_residual,
        shrinker_residual: resid.sup,
        density,
        closure_residual: Some(closing_residual),
    })
}

/// The standard lens: two symmetric arcs bounding a region around the
/// origin, joined at two junctions on the x-axis with two halflines pointing
/// away along the axis. A quarter arc is shot from (0, h) with horizontal
/// tangent and closed by requiring arrival at the axis at −60°.
pub fn find_lens() -> Result<CatalogEntry, SelfSimilarError> {
    find_lens_with(1600)
}

pub fn find_lens_with(samples: usize) -> Result<CatalogEntry, SelfSimilarError> {
    let closing = |h: f64| -> Option<f64> {
        let start = ShooterState::new(0.0, h, 0.0);
        let hit = integrate_to_event(start, |s| s.y, 0.05, 40_000, 12.0)?;
        Some(hit.state_at_event.theta + FRAC_PI_3)
    };
    let h = scan_and_bisect(closing, 0.05, 2.5, 49, 1e-10)
        .ok_or_else(|| SelfSimilarError::ShootingFailed("no lens bracket found".into()))?;

    let start = ShooterState::new(0.0, h, 0.0);
    let hit = integrate_to_event(start, |s| s.y, 0.05, 40_000, 12.0)
        .ok_or_else(|| SelfSimilarError::ShootingFailed("lens re-integration failed".into()))?;
    let closing_residual = (hit.state_at_event.theta + FRAC_PI_3).abs();
    let junction_x = hit.state_at_event.x;
    let quarter_length = hit.state_at_event.s - start.s;

    // Quarter arc from (0, h) to (x_J, 0).
    let m = (samples.max(64) / 2).max(32);
    let mut quarter: Vec<Vec2> = reintegrate(start, quarter_length, m)
        .iter()
        .map(|s| s.position())
        .collect();
    quarter[0] = Vec2::new(0.0, h);
    if let Some(last) = quarter.last_mut() {
        last.y = 0.0;
        last.x = junction_x;
    }
    // Top arc from the right junction over (0, h) to the left junction.
    let mut top: Vec<Vec2> = quarter.iter().rev().copied().collect();
    top.extend(quarter.iter().skip(1).map(|p| Vec2::new(-p.x, p.y)));
    let arc_top = DiscreteCurve::new("arc-top", top)?;
    // Bottom arc from the left junction to the right junction.
    let bottom: Vec<Vec2> = arc_top
        .points
        .iter()
        .rev()
        .map(|p| Vec2::new(p.x, -p.y))
        .collect();
    let arc_bottom = DiscreteCurve::new("arc-bottom", bottom)?;

    let tail_n = samples.max(64);
    let tail_right = DiscreteCurve::new(
        "tail-right",
        straight_samples(
            Vec2::new(junction_x, 0.0),
            Vec2::new(HALFLINE_RADIUS, 0.0),
            tail_n,
        ),
    )?;
    let tail_left = DiscreteCurve::new(
        "tail-left",
        straight_samples(
            Vec2::new(-junction_x, 0.0),
            Vec2::new(-HALFLINE_RADIUS, 0.0),
            tail_n,
        ),
    )?;

    let topology = NetworkTopology {
        junctions: vec![
            Junction {
                ends: [
                    CurveEnd {
                        curve: 0,
                        end: End::Start,
                    },
                    CurveEnd {
                        curve: 1,
                        end: End::Finish,
                    },
                    CurveEnd {
                        curve: 2,
                        end: End::Start,
                    },
                ],
            },
            Junction {
                ends: [
                    CurveEnd {
                        curve: 0,
                        end: End::Finish,
                    },
                    CurveEnd {
                        curve: 1,
                        end: End::Start,
                    },
                    CurveEnd {
                        curve: 3,
                        end: End::Start,
                    },
                ],
            },
        ],
        endpoints: vec![
            FixedEndpoint {
                at: CurveEnd {
                    curve: 2,
                    end: End::Finish,
                },
                position: Vec2::new(HALFLINE_RADIUS, 0.0),
            },
            FixedEndpoint {
                at: CurveEnd {
                    curve: 3,
                    end: End::Finish,
                },
                position: Vec2::new(-HALFLINE_RADIUS, 0.0),
            },
        ],
    };
    let network = Network::new(vec![arc_top, arc_bottom, tail_right, tail_left], topology)?;

    let tangent_sum = Vec2::new(-(FRAC_PI_3.cos()), FRAC_PI_3.sin())
        + Vec2::new(-(FRAC_PI_3.cos()), -(FRAC_PI_3.sin()))
        + Vec2::new(1.0, 0.0);
    let angle_residual = tangent_sum.norm().max(closing_residual);

    let resid = shrinker_residual(&network)?;
    let density = crate::monotonicity::gaussian_weighted_length(&network) / (2.0 * PI).sqrt();
    Ok(CatalogEntry {
        kind: ShrinkerKind::Lens,
        network,
        parameters: BTreeMap::from([
            ("height".to_string(), h),
            ("junction_x".to_string(), junction_x),
            ("closing_residual".to_string(), closing_residual),
        ]),
        angle_residual,
        shrinker_residual: resid.sup,
        density,
        closure_residual: Some(closing_residual),
    })
}

/// Apsidal data of one oscillation arc of the shrinker orbit through
/// (r, 0, π/2): angular advance to the next apsis and the trace.
fn apsidal_arc(r: f64, max_steps: usize) -> Option<(f64, Vec<ShooterState>)> {
    let start = ShooterState::new(r, 0.0, FRAC_PI_2);
    let hit = integrate_to_event(start, |s| s.radial_speed(), 0.01, max_steps, 40.0)?;
    let mut phi = 0.0;
    for w in hit.trace.windows(2) {
        let a = w[0].position();
        let b = w[1].position();
        phi += a.cross(b).atan2(a.dot(b));
    }
    Some((phi.abs(), hit.trace))
}

/// Valid petal/winding targets: a closed orbit with q petals winds p times,
/// and the apsidal angle πp/q must lie in (π/2, π/√2).
fn closure_targets() -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for q in 2..=9u32 {
        for p in 1..q {
            if gcd(p, q) != 1 {
                continue;
            }
            let ratio = p as f64 / q as f64;
            if ratio > 0.5 && ratio < std::f64::consts::FRAC_1_SQRT_2 {
                out.push((p, q));
            }
        }
    }
    out
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Search for a closed Abresch–Langer orbit near the initial apsis distance
/// `r0` by bisecting the apsidal angle onto the nearest admissible rational
/// multiple of π, then integrating the full orbit.
pub fn find_abresch_langer(r0: f64, max_steps: usize) -> Result<CatalogEntry, SelfSimilarError> {
    if !(r0 > 0.0) || (r0 - 1.0).abs() < 1e-12 {
        return Err(SelfSimilarError::ShootingFailed(
            "initial apsis must be positive and distinct from the unit circle".into(),
        ));
    }
    let arc_budget = max_steps / 4;
    let (phi0, _) = apsidal_arc(r0, arc_budget).ok_or(SelfSimilarError::NoClosureInWindow)?;
    let (winding, petals) = closure_targets()
        .into_iter()
        .min_by(|a, b| {
            let da = (PI * a.0 as f64 / a.1 as f64 - phi0).abs();
            let db = (PI * b.0 as f64 / b.1 as f64 - phi0).abs();
            da.partial_cmp(&db).unwrap()
        })
        .ok_or(SelfSimilarError::NoClosureInWindow)?;
    let target = PI * winding as f64 / petals as f64;

    let g = |r: f64| -> Option<f64> {
        if r <= 1e-6 {
            return None;
        }
        apsidal_arc(r, arc_budget).map(|(phi, _)| phi - target)
    };

    // Expand a bracket multiplicatively away from r0 (towards the circle the
    // apsidal angle tends to π/√2, away from it to π/2).
    let mut lo = r0;
    let mut hi = r0;
    let mut g_lo = g(lo).ok_or(SelfSimilarError::NoClosureInWindow)?;
    let mut found = false;
    for _ in 0..120 {
        if g_lo == 0.0 {
            break;
        }
        let (towards_circle, away) = if r0 < 1.0 {
            (1.04, 1.0 / 1.04)
        } else {
            (1.0 / 1.04, 1.04)
        };
        let factor = if g_lo < 0.0 { towards_circle } else { away };
        let mut next = hi * factor;
        // The apsidal angle tends to its supremum at the circle, so a sign
        // change must appear on this side; approach r = 1 geometrically.
        if (r0 < 1.0 && next >= 1.0) || (r0 > 1.0 && next <= 1.0) {
            next = 0.5 * (hi + 1.0);
        }
        if (next - 1.0).abs() < 1e-9 || next <= 1e-6 || next > 30.0 {
            break;
        }
        let Some(g_next) = g(next) else { break };
        if (g_next > 0.0) != (g_lo > 0.0) {
            lo = hi;
            hi = next;
            found = true;
            break;
        }
        hi = next;
        g_lo = g_next;
    }
    if !found && g_lo != 0.0 {
        return Err(SelfSimilarError::NoClosureInWindow);
    }
    let r_star =
        bisect_root(g, lo.min(hi), lo.max(hi), 1e-13).ok_or(SelfSimilarError::NoClosureInWindow)?;

    // Measure the orbit length through 2q apsidal arcs, then sample the
    // closed orbit at uniform arclength.
    let launch = ShooterState::new(r_star, 0.0, FRAC_PI_2);
    let mut apsides = 0u32;
    let mut current = launch;
    let mut guard = 0usize;
    while apsides < 2 * petals {
        let hit = integrate_to_event(current, |s| s.radial_speed(), 0.01, arc_budget, 40.0)
            .ok_or(SelfSimilarError::NoClosureInWindow)?;
        guard += hit.trace.len();
        current = hit.state_at_event;
        apsides += 1;
        if guard > max_steps {
            return Err(SelfSimilarError::NoClosureInWindow);
        }
    }
    let orbit_length = current.s - launch.s;
    let closure_residual = (current.position() - launch.position()).norm();

    let n = 4000usize;
    let states = reintegrate(launch, orbit_length, n);
    let mut points: Vec<Vec2> = states.iter().map(|s| s.position()).collect();
    let first = points[0];
    *points.last_mut().unwrap() = first;
    let raw = DiscreteCurve {
        id: "abresch-langer".to_string(),
        points,
        closed: true,
    };
    raw.validate()?;
    let network = Network::closed_curve(raw)?;

    let resid = shrinker_residual(&network)?;
    let density = crate::monotonicity::gaussian_weighted_length(&network) / (2.0 * PI).sqrt();
    Ok(CatalogEntry {
        kind: ShrinkerKind::AbreschLanger,
        network,
        parameters: BTreeMap::from([
            ("r0".to_string(), r_star),
            ("petals".to_string(), petals as f64),
            ("winding".to_string(), winding as f64),
            ("apsidal_angle".to_string(), target),
        ]),
        angle_residual: 0.0,
        shrinker_residual: resid.sup,
        density,
        closure_residual: Some(closure_residual),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn shooter_conserves_the_unit_circle() {
        let mut state = ShooterState::new(1.0, 0.0, FRAC_PI_2);
        let mut worst = 0.0f64;
        let steps = (TAU / DS) as usize + 1;
        for _ in 0..steps {
            state = shrinker_ode_step(state, DS);
            worst = worst.max((state.x * state.x + state.y * state.y - 1.0).abs());
        }
        assert!(worst < 1e-8, "circle drift {worst}");
    }

    #[test]
    fn ray_through_origin_stays_straight() {
        let theta: f64 = 0.7;
        let mut state = ShooterState::new(0.3 * theta.cos(), 0.3 * theta.sin(), theta);
        for _ in 0..1000 {
            state = shrinker_ode_step(state, DS);
            assert!((state.theta - theta).abs() < 1e-12);
        }
    }

    #[test]
    fn reflection_symmetry_of_the_orbit() {
        let mut a = ShooterState::new(0.5, 0.2, 0.9);
        let mut b = ShooterState::new(0.5, -0.2, -0.9);
        for _ in 0..2000 {
            a = shrinker_ode_step(a, DS);
            b = shrinker_ode_step(b, DS);
        }
        assert!((a.x - b.x).abs() < 1e-12);
        assert!((a.y + b.y).abs() < 1e-12);
        assert!((a.theta + b.theta).abs() < 1e-12);
    }

    #[test]
    fn curvature_invariant_is_conserved() {
        // k e^{−r²/2} is a first integral of the shrinker equation.
        let mut state = ShooterState::new(0.5, 0.0, FRAC_PI_2);
        let inv0 = state.curvature() * (-state.position().norm_sq() / 2.0).exp();
        for _ in 0..20_000 {
            state = shrinker_ode_step(state, DS);
            let inv = state.curvature() * (-state.position().norm_sq() / 2.0).exp();
            assert!(
                (inv - inv0).abs() < 1e-9,
                "invariant drift {}",
                (inv - inv0).abs()
            );
        }
    }
}
