use super::GeometryError;
use crate::Vec2;

/// A regular planar curve sampled on the uniform parameter grid
/// x_j = j/N, j = 0..N. Orientation is the sample order. A closed curve
/// stores its first sample again as the last one and uses periodic stencils.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCurve {
    pub id: String,
    pub points: Vec<Vec2>,
    pub closed: bool,
}

impl DiscreteCurve {
    pub fn new(id: impl Into<String>, points: Vec<Vec2>) -> Result<Self, GeometryError> {
        let curve = DiscreteCurve {
            id: id.into(),
            points,
            closed: false,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn new_closed(id: impl Into<String>, points: Vec<Vec2>) -> Result<Self, GeometryError> {
        let curve = DiscreteCurve {
            id: id.into(),
            points,
            closed: true,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let n = self.points.len();
        let min = if self.closed { 4 } else { 3 };
        if n < min {
            return Err(GeometryError::TooFewSamples {
                id: self.id.clone(),
                needed: min,
                got: n,
            });
        }
        if self.points.iter().any(|p| !p.is_finite()) {
            return Err(self.degenerate("non-finite sample"));
        }
        if self.closed {
            let gap = self.points[0].dist(self.points[n - 1]);
            let scale = self.bounding_radius().max(1e-300);
            if gap > 1e-9 * scale {
                return Err(self.degenerate(&format!("closed curve gap {gap}")));
            }
        }
        for w in self.points.windows(2) {
            if w[0] == w[1] {
                return Err(self.degenerate("coincident consecutive samples"));
            }
        }
        Ok(())
    }

    fn degenerate(&self, detail: &str) -> GeometryError {
        GeometryError::DegenerateCurve {
            id: self.id.clone(),
            detail: detail.to_string(),
        }
    }

    /// Number of parameter cells N.
    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    pub fn grid_step(&self) -> f64 {
        1.0 / self.segment_count() as f64
    }

    pub fn bounding_radius(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn reversed(&self) -> DiscreteCurve {
        let mut points = self.points.clone();
        points.reverse();
        DiscreteCurve {
            id: self.id.clone(),
            points,
            closed: self.closed,
        }
    }

    /// Polyline length (trapezoidal arclength sum).
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    /// Cumulative arclength at every node.
    pub fn arclength_table(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.points.len());
        let mut acc = 0.0;
        s.push(0.0);
        for w in self.points.windows(2) {
            acc += w[0].dist(w[1]);
            s.push(acc);
        }
        s
    }

    /// Trapezoid weights for quadrature against the arclength measure.
    pub fn arclength_weights(&self) -> Vec<f64> {
        let n = self.points.len();
        let mut w = vec![0.0; n];
        for j in 0..n - 1 {
            let len = self.points[j].dist(self.points[j + 1]);
            w[j] += 0.5 * len;
            w[j + 1] += 0.5 * len;
        }
        w
    }

    /// Min and max node spacing.
    pub fn spacing_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for w in self.points.windows(2) {
            let d = w[0].dist(w[1]);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (lo, hi)
    }

    /// Parameter derivative γ_x at every node (central inside, one-sided
    /// second-order at open ends, periodic when closed).
    pub fn parameter_derivative(&self) -> Vec<Vec2> {
        let n = self.segment_count();
        let h = self.grid_step();
        let p = &self.points;
        let mut d = Vec::with_capacity(n + 1);
        if self.closed {
            for j in 0..n {
                let prev = p[(j + n - 1) % n];
                let next = p[(j + 1) % n];
                d.push((next - prev) / (2.0 * h));
            }
            d.push(d[0]);
        } else {
            d.push((p[0] * -3.0 + p[1] * 4.0 - p[2]) / (2.0 * h));
            for j in 1..n {
                d.push((p[j + 1] - p[j - 1]) / (2.0 * h));
            }
            d.push((p[n] * 3.0 - p[n - 1] * 4.0 + p[n - 2]) / (2.0 * h));
        }
        d
    }

    /// Second parameter derivative γ_xx at every node. Open ends use the
    /// second-order one-sided stencil when four samples are available and the
    /// first-order three-point stencil otherwise.
    pub fn second_parameter_derivative(&self) -> Vec<Vec2> {
        let n = self.segment_count();
        let h = self.grid_step();
        let h2 = h * h;
        let p = &self.points;
        let mut d = Vec::with_capacity(n + 1);
        if self.closed {
            for j in 0..n {
                let prev = p[(j + n - 1) % n];
                let next = p[(j + 1) % n];
                d.push((next - p[j] * 2.0 + prev) / h2);
            }
            d.push(d[0]);
        } else {
            if n >= 3 {
                d.push((p[0] * 2.0 - p[1] * 5.0 + p[2] * 4.0 - p[3]) / h2);
            } else {
                d.push((p[0] - p[1] * 2.0 + p[2]) / h2);
            }
            for j in 1..n {
                d.push((p[j + 1] - p[j] * 2.0 + p[j - 1]) / h2);
            }
            if n >= 3 {
                d.push((p[n] * 2.0 - p[n - 1] * 5.0 + p[n - 2] * 4.0 - p[n - 3]) / h2);
            } else {
                d.push((p[n] - p[n - 1] * 2.0 + p[n - 2]) / h2);
            }
        }
        d
    }
}

/// Unit tangent and unit normal per node; the normal is the tangent rotated
/// anticlockwise by π/2.
#[derive(Clone, Debug)]
pub struct Frames {
    pub tangent: Vec<Vec2>,
    pub normal: Vec<Vec2>,
}

pub fn frames(curve: &DiscreteCurve) -> Result<Frames, GeometryError> {
    let deriv = curve.parameter_derivative();
    let mut tangent = Vec::with_capacity(deriv.len());
    let mut normal = Vec::with_capacity(deriv.len());
    for d in deriv {
        let t = d
            .normalized()
            .ok_or_else(|| GeometryError::DegenerateCurve {
                id: curve.id.clone(),
                detail: "zero finite-difference tangent".to_string(),
            })?;
        tangent.push(t);
        normal.push(t.rot90());
    }
    Ok(Frames { tangent, normal })
}

/// Scalar curvature k = ⟨k_vec, ν⟩ and the curvature vector
/// k_vec = (γ_xx |γ_x|² − γ_x ⟨γ_xx, γ_x⟩) / |γ_x|⁴ per node.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    pub scalar: Vec<f64>,
    pub vector: Vec<Vec2>,
}

pub fn curvature(curve: &DiscreteCurve) -> Result<CurvatureData, GeometryError> {
    if !curve.closed && curve.segment_count() < 3 {
        return Err(GeometryError::TooFewSamples {
            id: curve.id.clone(),
            needed: 4,
            got: curve.points.len(),
        });
    }
    let first = curve.parameter_derivative();
    let second = curve.second_parameter_derivative();
    let mut scalar = Vec::with_capacity(first.len());
    let mut vector = Vec::with_capacity(first.len());
    for (gx, gxx) in first.iter().zip(second.iter()) {
        let m = gx.norm_sq();
        if m == 0.0 || !m.is_finite() {
            return Err(GeometryError::DegenerateCurve {
                id: curve.id.clone(),
                detail: "zero finite-difference tangent".to_string(),
            });
        }
        let kv = (*gxx * m - *gx * gxx.dot(*gx)) / (m * m);
        vector.push(kv);
        scalar.push(gx.cross(*gxx) / (m * m.sqrt()));
    }
    Ok(CurvatureData { scalar, vector })
}

/// Tangential velocity λ = ⟨γ_xx, τ⟩ / |γ_x|² of the special flow, per node.
pub fn tangential_velocity(curve: &DiscreteCurve) -> Result<Vec<f64>, GeometryError> {
    let first = curve.parameter_derivative();
    let second = curve.second_parameter_derivative();
    first
        .iter()
        .zip(second.iter())
        .map(|(gx, gxx)| {
            let m = gx.norm_sq();
            if m == 0.0 || !m.is_finite() {
                Err(GeometryError::DegenerateCurve {
                    id: curve.id.clone(),
                    detail: "zero finite-difference tangent".to_string(),
                })
            } else {
                Ok(gxx.dot(*gx) / (m * m.sqrt()))
            }
        })
        .collect()
}

/// All per-node quantities of a curve in one pass.
#[derive(Clone, Debug)]
pub struct GeometricQuantities {
    pub tangent: Vec<Vec2>,
    pub normal: Vec<Vec2>,
    pub curvature: Vec<f64>,
    pub curvature_vector: Vec<Vec2>,
    pub tangential_velocity: Vec<f64>,
    pub arclength: Vec<f64>,
}

pub fn quantities(curve: &DiscreteCurve) -> Result<GeometricQuantities, GeometryError> {
    let Frames { tangent, normal } = frames(curve)?;
    let CurvatureData { scalar, vector } = curvature(curve)?;
    let lambda = tangential_velocity(curve)?;
    Ok(GeometricQuantities {
        tangent,
        normal,
        curvature: scalar,
        curvature_vector: vector,
        tangential_velocity: lambda,
        arclength: curve.arclength_table(),
    })
}

/// Geometric data of one curve end, oriented away from the end into the curve.
#[derive(Clone, Copy, Debug)]
pub struct EndQuantities {
    pub position: Vec2,
    /// Unit tangent pointing from the end into the curve.
    pub tangent_out: Vec2,
    /// Scalar curvature in the outward orientation.
    pub curvature_out: f64,
    /// Tangential velocity of the special flow in the outward orientation.
    pub velocity_out: f64,
    /// |γ_x| at the end (orientation invariant).
    pub metric: f64,
    /// γ_xx at the end in the curve's own orientation.
    pub accel: Vec2,
    /// Flow velocity γ_xx/|γ_x|² at the end (orientation invariant).
    pub flow_velocity: Vec2,
}

pub fn end_quantities(
    curve: &DiscreteCurve,
    end: super::End,
) -> Result<EndQuantities, GeometryError> {
    let first = curve.parameter_derivative();
    let second = curve.second_parameter_derivative();
    let idx = match end {
        super::End::Start => 0,
        super::End::Finish => curve.points.len() - 1,
    };
    let gx = first[idx];
    let gxx = second[idx];
    let m2 = gx.norm_sq();
    if m2 == 0.0 || !m2.is_finite() {
        return Err(GeometryError::DegenerateCurve {
            id: curve.id.clone(),
            detail: "zero finite-difference tangent at end".to_string(),
        });
    }
    let m = m2.sqrt();
    let k = gx.cross(gxx) / (m2 * m);
    let lambda = gxx.dot(gx) / (m2 * m);
    // Reversal flips τ, hence flips both scalar curvature and λ.
    let sign = match end {
        super::End::Start => 1.0,
        super::End::Finish => -1.0,
    };
    Ok(EndQuantities {
        position: curve.points[idx],
        tangent_out: gx / m * sign,
        curvature_out: sign * k,
        velocity_out: sign * lambda,
        metric: m,
        accel: gxx,
        flow_velocity: gxx / m2,
    })
}

/// Resample to `n` segments at equal arclength spacing by linear
/// interpolation of the cumulative-arclength table. Endpoints (and the
/// closure point of a closed curve) are preserved exactly.
pub fn resample_arclength(curve: &DiscreteCurve, n: usize) -> Result<DiscreteCurve, GeometryError> {
    let min = if curve.closed { 3 } else { 2 };
    if n < min {
        return Err(GeometryError::TooFewSamples {
            id: curve.id.clone(),
            needed: min + 1,
            got: n + 1,
        });
    }
    let table = curve.arclength_table();
    let total = *table.last().unwrap();
    if !(total > 0.0) {
        return Err(GeometryError::DegenerateCurve {
            id: curve.id.clone(),
            detail: "zero total length".to_string(),
        });
    }
    let mut points = Vec::with_capacity(n + 1);
    points.push(curve.points[0]);
    let mut seg = 0usize;
    for j in 1..n {
        let target = total * j as f64 / n as f64;
        while seg + 1 < table.len() - 1 && table[seg + 1] < target {
            seg += 1;
        }
        let span = table[seg + 1] - table[seg];
        let t = if span > 0.0 {
            (target - table[seg]) / span
        } else {
            0.0
        };
        points.push(curve.points[seg].lerp(curve.points[seg + 1], t));
    }
    points.push(if curve.closed {
        curve.points[0]
    } else {
        *curve.points.last().unwrap()
    });
    let out = DiscreteCurve {
        id: curve.id.clone(),
        points,
        closed: curve.closed,
    };
    out.validate()?;
    Ok(out)
}
