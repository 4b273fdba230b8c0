use super::curve::{end_quantities, DiscreteCurve};
use super::GeometryError;
use crate::Vec2;

/// Which end of a curve a topology record refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum End {
    Start,
    Finish,
}

impl End {
    pub fn node_index(self, curve: &DiscreteCurve) -> usize {
        match self {
            End::Start => 0,
            End::Finish => curve.points.len() - 1,
        }
    }
}

/// A curve end, addressed by curve index within the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CurveEnd {
    pub curve: usize,
    pub end: End,
}

/// A triple junction: exactly three distinct curve ends meet.
#[derive(Clone, Debug)]
pub struct Junction {
    pub ends: [CurveEnd; 3],
}

/// A fixed (Dirichlet) endpoint of the network.
#[derive(Clone, Debug)]
pub struct FixedEndpoint {
    pub at: CurveEnd,
    pub position: Vec2,
}

#[derive(Clone, Debug, Default)]
pub struct NetworkTopology {
    pub junctions: Vec<Junction>,
    pub endpoints: Vec<FixedEndpoint>,
}

/// A set of curves plus topology. Every end of an open curve belongs to
/// exactly one junction or one fixed endpoint; closed curves carry no
/// topology records.
#[derive(Clone, Debug)]
pub struct Network {
    pub curves: Vec<DiscreteCurve>,
    pub topology: NetworkTopology,
}

/// Tolerances for the structural checks.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Concurrency gap tolerance, relative to the bounding-box diameter.
    pub concurrency_rel: f64,
    /// Absolute tolerance on the junction tangent sum |Στ|.
    pub angle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            concurrency_rel: 1e-9,
            angle: 1e-6,
        }
    }
}

impl Network {
    pub fn new(
        curves: Vec<DiscreteCurve>,
        topology: NetworkTopology,
    ) -> Result<Self, GeometryError> {
        let network = Network { curves, topology };
        network.validate()?;
        Ok(network)
    }

    /// A network consisting of a single closed curve.
    pub fn closed_curve(curve: DiscreteCurve) -> Result<Self, GeometryError> {
        if !curve.closed {
            return Err(GeometryError::InvalidNetwork("curve is not closed".into()));
        }
        Network::new(vec![curve], NetworkTopology::default())
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        for c in &self.curves {
            c.validate()?;
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.curves {
            if !seen.insert(c.id.clone()) {
                return Err(GeometryError::InvalidNetwork(format!(
                    "duplicate curve id `{}`",
                    c.id
                )));
            }
        }
        let mut use_count = vec![[0usize; 2]; self.curves.len()];
        let mut tally = |ce: CurveEnd| -> Result<(), GeometryError> {
            if ce.curve >= self.curves.len() {
                return Err(GeometryError::InvalidNetwork(format!(
                    "curve index {} out of range",
                    ce.curve
                )));
            }
            let slot = match ce.end {
                End::Start => 0,
                End::Finish => 1,
            };
            use_count[ce.curve][slot] += 1;
            Ok(())
        };
        for j in &self.topology.junctions {
            if j.ends[0] == j.ends[1] || j.ends[0] == j.ends[2] || j.ends[1] == j.ends[2] {
                return Err(GeometryError::InvalidNetwork(
                    "junction references the same curve end twice".into(),
                ));
            }
            for e in j.ends {
                tally(e)?;
            }
        }
        for p in &self.topology.endpoints {
            tally(p.at)?;
        }
        for (i, c) in self.curves.iter().enumerate() {
            let expected = if c.closed { 0 } else { 1 };
            if use_count[i][0] != expected || use_count[i][1] != expected {
                return Err(GeometryError::InvalidNetwork(format!(
                    "curve `{}` ends must belong to exactly {} junction/endpoint each",
                    c.id, expected
                )));
            }
        }
        // No two fixed endpoints share a position.
        for (a, pa) in self.topology.endpoints.iter().enumerate() {
            for pb in self.topology.endpoints.iter().skip(a + 1) {
                if pa.position == pb.position {
                    return Err(GeometryError::InvalidNetwork(
                        "two fixed endpoints share a position".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn end_position(&self, ce: CurveEnd) -> Vec2 {
        let curve = &self.curves[ce.curve];
        curve.points[ce.end.node_index(curve)]
    }

    pub fn curve_index(&self, id: &str) -> Option<usize> {
        self.curves.iter().position(|c| c.id == id)
    }

    /// Diameter of the bounding box of all samples.
    pub fn bbox_diameter(&self) -> f64 {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &self.curves {
            for p in &c.points {
                lo.x = lo.x.min(p.x);
                lo.y = lo.y.min(p.y);
                hi.x = hi.x.max(p.x);
                hi.y = hi.y.max(p.y);
            }
        }
        hi.dist(lo)
    }

    pub fn min_curve_length(&self) -> f64 {
        self.curves
            .iter()
            .map(|c| c.length())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Total length of all curves.
pub fn total_length(network: &Network) -> f64 {
    network.curves.iter().map(|c| c.length()).sum()
}

/// Per-junction residual record of the regularity check.
#[derive(Clone, Debug)]
pub struct JunctionReport {
    /// Largest pairwise distance of the three end samples.
    pub concurrency_gap: f64,
    /// |Σ τ_out| over the three exterior unit tangents.
    pub tangent_sum: f64,
}

#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub junctions: Vec<JunctionReport>,
    pub max_concurrency_gap: f64,
    pub max_tangent_sum: f64,
    pub concurrency_tolerance: f64,
    pub angle_tolerance: f64,
    pub pass: bool,
}

/// Check the regular-network conditions: concurrency of the three ends at
/// each junction and vanishing sum of exterior unit tangents.
pub fn check_regular(network: &Network, tol: &Tolerances) -> RegularityReport {
    let scale = network.bbox_diameter().max(f64::MIN_POSITIVE);
    let conc_tol = tol.concurrency_rel * scale;
    let mut reports = Vec::new();
    let mut max_gap = 0.0f64;
    let mut max_sum = 0.0f64;
    for j in &network.topology.junctions {
        let pos: Vec<Vec2> = j.ends.iter().map(|e| network.end_position(*e)).collect();
        let gap = pos[0]
            .dist(pos[1])
            .max(pos[0].dist(pos[2]))
            .max(pos[1].dist(pos[2]));
        let mut sum = Vec2::ZERO;
        for e in j.ends {
            match end_quantities(&network.curves[e.curve], e.end) {
                Ok(q) => sum += q.tangent_out,
                Err(_) => sum += Vec2::new(f64::NAN, f64::NAN),
            }
        }
        let tangent_sum = sum.norm();
        max_gap = max_gap.max(gap);
        max_sum = max_sum.max(tangent_sum);
        reports.push(JunctionReport {
            concurrency_gap: gap,
            tangent_sum,
        });
    }
    let pass = max_gap <= conc_tol && max_sum <= tol.angle && max_sum.is_finite();
    RegularityReport {
        junctions: reports,
        max_concurrency_gap: max_gap,
        max_tangent_sum: max_sum,
        concurrency_tolerance: conc_tol,
        angle_tolerance: tol.angle,
        pass,
    }
}

/// A transversal crossing between two polyline segments that is not a shared
/// network node.
#[derive(Clone, Copy, Debug)]
pub struct IntersectionEvent {
    pub curve_a: usize,
    pub segment_a: usize,
    pub curve_b: usize,
    pub segment_b: usize,
    pub point: Vec2,
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn segments_cross(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> Option<Vec2> {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        let t = d1 / (d1 - d2);
        return Some(p1.lerp(p2, t));
    }
    None
}

/// All pairwise strict segment–segment crossings, excluding segments that are
/// adjacent along a curve or share a network node. An empty list means the
/// network is embedded (as a sampled set).
pub fn check_embedded(network: &Network) -> Vec<IntersectionEvent> {
    struct Seg {
        curve: usize,
        index: usize,
        a: Vec2,
        b: Vec2,
        lo: Vec2,
        hi: Vec2,
    }
    let scale = network.bbox_diameter().max(f64::MIN_POSITIVE);
    let touch_tol = 1e-12 * scale;
    let mut segs = Vec::new();
    for (ci, c) in network.curves.iter().enumerate() {
        for (si, w) in c.points.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            segs.push(Seg {
                curve: ci,
                index: si,
                a,
                b,
                lo: Vec2::new(a.x.min(b.x), a.y.min(b.y)),
                hi: Vec2::new(a.x.max(b.x), a.y.max(b.y)),
            });
        }
    }
    let mut events = Vec::new();
    for i in 0..segs.len() {
        let s = &segs[i];
        for t in segs.iter().skip(i + 1) {
            if s.lo.x > t.hi.x || t.lo.x > s.hi.x || s.lo.y > t.hi.y || t.lo.y > s.hi.y {
                continue;
            }
            if s.curve == t.curve {
                let n = network.curves[s.curve].points.len() - 1;
                let adjacent = t.index == s.index + 1
                    || (network.curves[s.curve].closed && s.index == 0 && t.index == n - 1);
                if adjacent {
                    continue;
                }
            }
            // Segments meeting at a shared node (junction or concurrency
            // within tolerance) do not count as crossings.
            let min_end_gap =
                s.a.dist(t.a)
                    .min(s.a.dist(t.b))
                    .min(s.b.dist(t.a))
                    .min(s.b.dist(t.b));
            if min_end_gap <= touch_tol {
                continue;
            }
            if let Some(point) = segments_cross(s.a, s.b, t.a, t.b) {
                events.push(IntersectionEvent {
                    curve_a: s.curve,
                    segment_a: s.index,
                    curve_b: t.curve,
                    segment_b: t.index,
                    point,
                });
            }
        }
    }
    events
}

/// Symmetric Hausdorff distance between two sample sets, measured against
/// the polylines they span.
pub fn hausdorff_distance(a: &[Vec2], b: &[Vec2]) -> f64 {
    fn point_to_polyline(p: Vec2, poly: &[Vec2]) -> f64 {
        let mut best = f64::INFINITY;
        for w in poly.windows(2) {
            let d = w[1] - w[0];
            let len2 = d.norm_sq();
            let t = if len2 > 0.0 {
                ((p - w[0]).dot(d) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            best = best.min(p.dist(w[0] + d * t));
        }
        best
    }
    let fwd = a
        .iter()
        .map(|p| point_to_polyline(*p, b))
        .fold(0.0, f64::max);
    let bwd = b
        .iter()
        .map(|p| point_to_polyline(*p, a))
        .fold(0.0, f64::max);
    fwd.max(bwd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selfsimilar::standard_triod;

    #[test]
    fn standard_triod_is_regular() {
        let net = standard_triod(1.0, 20);
        let report = check_regular(&net, &Tolerances::default());
        assert!(report.pass, "{report:?}");
        assert!(report.max_concurrency_gap == 0.0);
        assert!(report.max_tangent_sum < 1e-12);
    }

    #[test]
    fn t_shaped_junction_fails_angle_condition() {
        // Angles 90/90/180: tangent sum has norm |(−1,0)+(1,0)+(0,1)| = 1... use
        // rays at 0°, 90°, 180°: sum = (0,1), norm 1.
        let mk = |id: &str, dir: Vec2| {
            let pts = (0..=10).map(|j| dir * (j as f64 / 10.0)).collect();
            DiscreteCurve::new(id, pts).unwrap()
        };
        let curves = vec![
            mk("a", Vec2::new(1.0, 0.0)),
            mk("b", Vec2::new(-1.0, 0.0)),
            mk("c", Vec2::new(0.0, 1.0)),
        ];
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
            endpoints: vec![
                FixedEndpoint {
                    at: CurveEnd {
                        curve: 0,
                        end: End::Finish,
                    },
                    position: Vec2::new(1.0, 0.0),
                },
                FixedEndpoint {
                    at: CurveEnd {
                        curve: 1,
                        end: End::Finish,
                    },
                    position: Vec2::new(-1.0, 0.0),
                },
                FixedEndpoint {
                    at: CurveEnd {
                        curve: 2,
                        end: End::Finish,
                    },
                    position: Vec2::new(0.0, 1.0),
                },
            ],
        };
        let net = Network::new(curves, topology).unwrap();
        let report = check_regular(&net, &Tolerances::default());
        assert!(!report.pass);
        assert!((report.max_tangent_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn displaced_junction_reports_gap() {
        let mut net = standard_triod(1.0, 20);
        let d = 1e-3;
        net.curves[0].points[0] += Vec2::new(d, 0.0);
        let report = check_regular(&net, &Tolerances::default());
        assert!(!report.pass);
        assert!((report.max_concurrency_gap - d).abs() < 1e-12);
    }

    #[test]
    fn embedded_triod_and_figure_eight() {
        let net = standard_triod(1.0, 20);
        assert!(check_embedded(&net).is_empty());

        // Figure eight: lemniscate-like closed polyline crossing itself at
        // the origin; a phase offset keeps the crossing away from the nodes.
        let n = 200;
        let pts: Vec<Vec2> = (0..=n)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / n as f64 + 0.37;
                Vec2::new(t.sin(), (2.0 * t).sin() * 0.5)
            })
            .collect();
        let c = DiscreteCurve::new_closed("eight", pts).unwrap();
        let net = Network::closed_curve(c).unwrap();
        let events = check_embedded(&net);
        assert_eq!(events.len(), 1, "{events:?}");
        assert!(events[0].point.norm() < 1e-1, "{events:?}");
    }

    #[test]
    fn transversal_crossing_of_two_curves_reports_both_ids() {
        let a = DiscreteCurve::new(
            "a",
            (0..=10)
                .map(|j| Vec2::new(j as f64 / 10.0 - 0.5, 0.0))
                .collect(),
        )
        .unwrap();
        let b = DiscreteCurve::new(
            "b",
            (0..=10)
                .map(|j| Vec2::new(0.013, j as f64 / 10.0 - 0.47))
                .collect(),
        )
        .unwrap();
        let topology = NetworkTopology {
            junctions: vec![],
            endpoints: vec![
                FixedEndpoint {
                    at: CurveEnd {
                        curve: 0,
                        end: End::Start,
                    },
                    position: Vec2::new(-0.5, 0.0),
                },
                FixedEndpoint {
                    at: CurveEnd {
                        curve: 0,
                        end: End::Finish,
                    },
                    position: Vec2::new(0.5, 0.0),
                },
                FixedEndpoint {
                    at: CurveEnd {
                        curve: 1,
                        end: End::Start,
                    },
                    position: Vec2::new(0.013, -0.47),
                },
                FixedEndpoint {
                    at: CurveEnd {
                        curve: 1,
                        end: End::Finish,
                    },
                    position: Vec2::new(0.013, 0.53),
                },
            ],
        };
        let net = Network::new(vec![a, b], topology).unwrap();
        let events = check_embedded(&net);
        assert_eq!(events.len(), 1);
        let e = events[0];
        assert_eq!((e.curve_a, e.curve_b), (0, 1));
    }

    #[test]
    fn network_validation_rejects_dangling_ends() {
        let c =
            DiscreteCurve::new("a", (0..=4).map(|j| Vec2::new(j as f64, 0.0)).collect()).unwrap();
        assert!(Network::new(vec![c], NetworkTopology::default()).is_err());
    }
}
