use super::curve::end_quantities;
use super::network::{End, Network, Tolerances};
use super::GeometryError;
use crate::Vec2;

/// An oriented closed boundary of a bounded region: an ordered list of curve
/// traversals (`forward` follows the curve's own orientation). The traversal
/// is anticlockwise, so the enclosed area is positive.
#[derive(Clone, Debug)]
pub struct LoopPath {
    /// (curve index, traversed forward) in boundary order.
    pub steps: Vec<(usize, bool)>,
    /// Number of distinct curves on the loop.
    pub curve_count: usize,
    /// Number of triple junctions traversed (counted with multiplicity);
    /// zero for a single closed curve. This is the `m` of the area law.
    pub junction_count: usize,
    /// True when no junction is traversed twice and no endpoint bounce
    /// occurs; the area law applies only to simple loops.
    pub simple: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct HalfEdge {
    curve: usize,
    forward: bool,
}

impl HalfEdge {
    fn twin(self) -> HalfEdge {
        HalfEdge {
            curve: self.curve,
            forward: !self.forward,
        }
    }
    fn start_end(self) -> End {
        if self.forward {
            End::Start
        } else {
            End::Finish
        }
    }
    fn finish_end(self) -> End {
        if self.forward {
            End::Finish
        } else {
            End::Start
        }
    }
}

/// Identify the bounded regions of the network by planar face traversal.
/// Junction cyclic order comes from the exterior tangent angles; faces keep
/// their interior on the left, and only anticlockwise (positive-area) faces
/// are returned. Closed curves contribute their anticlockwise orientation.
pub fn find_loops(network: &Network) -> Vec<LoopPath> {
    let mut loops = Vec::new();

    for (ci, c) in network.curves.iter().enumerate() {
        if c.closed {
            let area = polyline_signed_area(&c.points);
            loops.push(LoopPath {
                steps: vec![(ci, area >= 0.0)],
                curve_count: 1,
                junction_count: 0,
                simple: true,
            });
        }
    }

    // vertex id per open-curve end: junction index, or endpoints offset past them.
    let nj = network.topology.junctions.len();
    let mut vertex_of: std::collections::HashMap<(usize, End), usize> = Default::default();
    for (ji, j) in network.topology.junctions.iter().enumerate() {
        for e in j.ends {
            vertex_of.insert((e.curve, e.end), ji);
        }
    }
    for (pi, p) in network.topology.endpoints.iter().enumerate() {
        vertex_of.insert((p.at.curve, p.at.end), nj + pi);
    }

    // Outgoing half-edges per vertex with their outward tangent angle.
    let nv = nj + network.topology.endpoints.len();
    let mut outgoing: Vec<Vec<(HalfEdge, f64)>> = vec![Vec::new(); nv];
    for (ci, c) in network.curves.iter().enumerate() {
        if c.closed {
            continue;
        }
        for he in [
            HalfEdge {
                curve: ci,
                forward: true,
            },
            HalfEdge {
                curve: ci,
                forward: false,
            },
        ] {
            let end = he.start_end();
            let v = vertex_of[&(ci, end)];
            let angle = match end_quantities(c, end) {
                Ok(q) => q.tangent_out.angle(),
                Err(_) => 0.0,
            };
            outgoing[v].push((he, angle));
        }
    }

    let next_after = |arrival: HalfEdge| -> HalfEdge {
        let v = vertex_of[&(arrival.curve, arrival.finish_end())];
        let cands = &outgoing[v];
        if cands.len() == 1 {
            // Degree-one vertex: bounce back along the same curve.
            return arrival.twin();
        }
        let rev = arrival.twin();
        let rev_angle = cands
            .iter()
            .find(|(he, _)| *he == rev)
            .map(|(_, a)| *a)
            .unwrap_or(0.0);
        // First outgoing edge clockwise from the reversed arrival direction
        // keeps the face interior on the left.
        let mut best = rev;
        let mut best_delta = f64::INFINITY;
        for (he, angle) in cands {
            if *he == rev {
                continue;
            }
            let mut delta = rev_angle - angle;
            while delta <= 1e-12 {
                delta += std::f64::consts::TAU;
            }
            if delta < best_delta {
                best_delta = delta;
                best = *he;
            }
        }
        best
    };

    let mut visited: std::collections::HashSet<HalfEdge> = Default::default();
    for (ci, c) in network.curves.iter().enumerate() {
        if c.closed {
            continue;
        }
        for start in [
            HalfEdge {
                curve: ci,
                forward: true,
            },
            HalfEdge {
                curve: ci,
                forward: false,
            },
        ] {
            if visited.contains(&start) {
                continue;
            }
            let mut face = Vec::new();
            let mut he = start;
            loop {
                visited.insert(he);
                face.push(he);
                he = next_after(he);
                if he == start {
                    break;
                }
                if face.len() > 4 * network.curves.len() + 8 {
                    break; // malformed topology; bail out of the trace
                }
            }
            let steps: Vec<(usize, bool)> = face.iter().map(|h| (h.curve, h.forward)).collect();
            let poly = trace_polyline(network, &steps);
            if polyline_signed_area(&poly) <= 0.0 {
                continue;
            }
            let mut curve_set: Vec<usize> = steps.iter().map(|(c, _)| *c).collect();
            curve_set.sort_unstable();
            curve_set.dedup();
            let mut junction_visits = Vec::new();
            let mut bounce = false;
            for h in &face {
                let v = vertex_of[&(h.curve, h.finish_end())];
                if v < nj {
                    junction_visits.push(v);
                } else {
                    bounce = true;
                }
            }
            let mut unique = junction_visits.clone();
            unique.sort_unstable();
            unique.dedup();
            let simple = !bounce && unique.len() == junction_visits.len();
            loops.push(LoopPath {
                steps,
                curve_count: curve_set.len(),
                junction_count: junction_visits.len(),
                simple,
            });
        }
    }
    loops
}

fn trace_polyline(network: &Network, steps: &[(usize, bool)]) -> Vec<Vec2> {
    let mut poly = Vec::new();
    for (ci, forward) in steps {
        let pts = &network.curves[*ci].points;
        if *forward {
            poly.extend(pts.iter().copied());
        } else {
            poly.extend(pts.iter().rev().copied());
        }
    }
    poly
}

fn polyline_signed_area(poly: &[Vec2]) -> f64 {
    let mut acc = 0.0;
    for w in poly.windows(2) {
        acc += w[0].cross(w[1]);
    }
    if let (Some(last), Some(first)) = (poly.last(), poly.first()) {
        acc += last.cross(*first);
    }
    0.5 * acc
}

/// Concatenated boundary polyline of a loop.
pub fn loop_polyline(network: &Network, lp: &LoopPath) -> Vec<Vec2> {
    trace_polyline(network, &lp.steps)
}

/// Signed shoelace area enclosed by a loop; positive for anticlockwise
/// traversal. Fails with `OpenLoop` when the concatenated boundary does not
/// close within tolerance.
pub fn enclosed_area(
    network: &Network,
    lp: &LoopPath,
    tol: &Tolerances,
) -> Result<f64, GeometryError> {
    let poly = loop_polyline(network, lp);
    let scale = network.bbox_diameter().max(f64::MIN_POSITIVE);
    let gap_tol = (tol.concurrency_rel * scale).max(1e-12 * scale);
    // Consecutive pieces must chain within tolerance as well.
    let mut max_gap = poly.last().unwrap().dist(poly[0]);
    let mut offset = 0;
    for (ci, _) in &lp.steps {
        let len = network.curves[*ci].points.len();
        if offset > 0 {
            max_gap = max_gap.max(poly[offset - 1].dist(poly[offset]));
        }
        offset += len;
    }
    if max_gap > gap_tol {
        return Err(GeometryError::OpenLoop {
            gap: max_gap,
            tol: gap_tol,
        });
    }
    Ok(polyline_signed_area(&poly))
}
