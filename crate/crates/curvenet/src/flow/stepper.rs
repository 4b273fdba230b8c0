use super::{
    DiagnosticSeries, FlowError, FlowState, Snapshot, SolverConfig, StopReason, Termination,
    Trajectory,
};
use crate::geometry::{
    curvature, enclosed_area, find_loops, resample_arclength, total_length, DiscreteCurve, End,
    Network, Tolerances,
};
use crate::numerics::{solve_cyclic_tridiagonal, solve_dense, solve_tridiagonal};
use crate::Vec2;

/// Lagged metric |γ_x|² at the interior nodes, approximated by the product
/// of adjacent chord lengths over h². Second-order consistent, and exact for
/// the shrink rate of a uniformly sampled circle.
fn lagged_metric(curve: &DiscreteCurve) -> Result<Vec<f64>, FlowError> {
    let p = &curve.points;
    let n = curve.segment_count();
    let h2 = curve.grid_step() * curve.grid_step();
    let m: Vec<f64> = if curve.closed {
        (0..n)
            .map(|j| {
                let prev = p[(j + n - 1) % n];
                let next = p[(j + 1) % n];
                p[j].dist(prev) * p[j].dist(next) / h2
            })
            .collect()
    } else {
        (1..n)
            .map(|j| p[j].dist(p[j - 1]) * p[j].dist(p[j + 1]) / h2)
            .collect()
    };
    if m.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(FlowError::Geometry(
            crate::geometry::GeometryError::DegenerateCurve {
                id: curve.id.clone(),
                detail: "vanishing lagged metric".to_string(),
            },
        ));
    }
    Ok(m)
}

/// Implicit-diffusion solve data for one open curve: the interior solution is
/// affine in the two boundary values, X_j = P_j + ga_j·a + gb_j·b.
struct OpenSolve {
    particular: Vec<Vec2>,
    green_a: Vec<f64>,
    green_b: Vec<f64>,
}

impl OpenSolve {
    fn node(&self, j: usize, a: Vec2, b: Vec2) -> Vec2 {
        self.particular[j] + a * self.green_a[j] + b * self.green_b[j]
    }
}

fn solve_open(curve: &DiscreteCurve, metric: &[f64], dt: f64) -> Result<OpenSolve, FlowError> {
    let n = curve.segment_count();
    let h2 = curve.grid_step() * curve.grid_step();
    let k = n - 1; // interior unknowns
    let mut lower = vec![0.0; k];
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut alphas = vec![0.0; k];
    for j in 0..k {
        let alpha = dt / (h2 * metric[j]);
        alphas[j] = alpha;
        lower[j] = -alpha;
        diag[j] = 1.0 + 2.0 * alpha;
        upper[j] = -alpha;
    }
    lower[0] = 0.0;
    upper[k - 1] = 0.0;

    let mut px: Vec<f64> = (1..n).map(|j| curve.points[j].x).collect();
    let mut py: Vec<f64> = (1..n).map(|j| curve.points[j].y).collect();
    let mut ga = vec![0.0; k];
    let mut gb = vec![0.0; k];
    ga[0] = alphas[0];
    gb[k - 1] = alphas[k - 1];
    for rhs in [&mut px, &mut py, &mut ga, &mut gb] {
        solve_tridiagonal(&lower, &diag, &upper, rhs).ok_or_else(|| {
            FlowError::BadConfig("singular tridiagonal system in diffusion solve".into())
        })?;
    }
    let particular = px
        .into_iter()
        .zip(py)
        .map(|(x, y)| Vec2::new(x, y))
        .collect();
    Ok(OpenSolve {
        particular,
        green_a: ga,
        green_b: gb,
    })
}

fn solve_closed(curve: &DiscreteCurve, metric: &[f64], dt: f64) -> Result<Vec<Vec2>, FlowError> {
    let n = curve.segment_count();
    let h2 = curve.grid_step() * curve.grid_step();
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for j in 0..n {
        let alpha = dt / (h2 * metric[j]);
        lower[j] = -alpha;
        diag[j] = 1.0 + 2.0 * alpha;
        upper[j] = -alpha;
    }
    let mut x: Vec<f64> = (0..n).map(|j| curve.points[j].x).collect();
    let mut y: Vec<f64> = (0..n).map(|j| curve.points[j].y).collect();
    for rhs in [&mut x, &mut y] {
        solve_cyclic_tridiagonal(&lower, &diag, &upper, rhs).ok_or_else(|| {
            FlowError::BadConfig("singular cyclic system in diffusion solve".into())
        })?;
    }
    let mut points: Vec<Vec2> = x.into_iter().zip(y).map(|(x, y)| Vec2::new(x, y)).collect();
    points.push(points[0]);
    Ok(points)
}

/// Boundary value source for an open curve end.
#[derive(Clone, Copy)]
enum BoundarySource {
    Junction(usize),
    Fixed(Vec2),
}

/// Advance the flow by one step of size `config.dt`.
///
/// Interior nodes take an implicit diffusion step with lagged metric; the
/// junction positions are solved by Newton iteration so that the three
/// exterior unit tangents of the updated curves sum to zero, while
/// concurrency holds exactly (the junction position is a single unknown)
/// and Dirichlet endpoints are copied bit-identically.
pub fn step(state: &FlowState, config: &SolverConfig) -> Result<FlowState, FlowError> {
    config.validate()?;
    let network = &state.network;
    let dt = config.dt;
    let n_curves = network.curves.len();

    let mut metrics = Vec::with_capacity(n_curves);
    for c in &network.curves {
        metrics.push(lagged_metric(c)?);
    }

    // Boundary sources per open curve.
    let mut sources: Vec<Option<(BoundarySource, BoundarySource)>> = vec![None; n_curves];
    {
        let mut starts: Vec<Option<BoundarySource>> = vec![None; n_curves];
        let mut finishes: Vec<Option<BoundarySource>> = vec![None; n_curves];
        for (ji, junction) in network.topology.junctions.iter().enumerate() {
            for e in junction.ends {
                match e.end {
                    End::Start => starts[e.curve] = Some(BoundarySource::Junction(ji)),
                    End::Finish => finishes[e.curve] = Some(BoundarySource::Junction(ji)),
                }
            }
        }
        for p in &network.topology.endpoints {
            match p.at.end {
                End::Start => starts[p.at.curve] = Some(BoundarySource::Fixed(p.position)),
                End::Finish => finishes[p.at.curve] = Some(BoundarySource::Fixed(p.position)),
            }
        }
        for (i, c) in network.curves.iter().enumerate() {
            if !c.closed {
                sources[i] = Some((starts[i].unwrap(), finishes[i].unwrap()));
            }
        }
    }

    let mut solves: Vec<Option<OpenSolve>> = Vec::with_capacity(n_curves);
    let mut closed_points: Vec<Option<Vec<Vec2>>> = Vec::with_capacity(n_curves);
    for (i, c) in network.curves.iter().enumerate() {
        if c.closed {
            solves.push(None);
            closed_points.push(Some(solve_closed(c, &metrics[i], dt)?));
        } else {
            solves.push(Some(solve_open(c, &metrics[i], dt)?));
            closed_points.push(None);
        }
    }

    // Junction unknowns, initialized at the current positions.
    let n_junctions = network.topology.junctions.len();
    let mut u: Vec<Vec2> = network
        .topology
        .junctions
        .iter()
        .map(|j| network.end_position(j.ends[0]))
        .collect();

    let boundary_value = |src: BoundarySource, u: &[Vec2]| -> Vec2 {
        match src {
            BoundarySource::Junction(j) => u[j],
            BoundarySource::Fixed(p) => p,
        }
    };

    // Outward unit tangent at a junction end of an updated curve.
    let end_tangent = |ci: usize, end: End, u: &[Vec2]| -> Option<Vec2> {
        let curve = &network.curves[ci];
        let (a_src, b_src) = sources[ci].expect("junction end on open curve");
        let (a, b) = (boundary_value(a_src, u), boundary_value(b_src, u));
        let solve = solves[ci].as_ref().expect("open solve");
        let h = curve.grid_step();
        let k = curve.segment_count() - 1;
        let d = match end {
            End::Start => {
                let x1 = solve.node(0, a, b);
                let x2 = if k >= 2 { solve.node(1, a, b) } else { b };
                (a * -3.0 + x1 * 4.0 - x2) / (2.0 * h)
            }
            End::Finish => {
                let xn1 = solve.node(k - 1, a, b);
                let xn2 = if k >= 2 { solve.node(k - 2, a, b) } else { a };
                (b * 3.0 - xn1 * 4.0 + xn2) / (2.0 * h)
            }
        };
        let t = d.normalized()?;
        Some(match end {
            End::Start => t,
            End::Finish => -t,
        })
    };

    let residual = |u: &[Vec2]| -> Option<Vec<f64>> {
        let mut r = Vec::with_capacity(2 * n_junctions);
        for junction in &network.topology.junctions {
            let mut sum = Vec2::ZERO;
            for e in junction.ends {
                sum += end_tangent(e.curve, e.end, u)?;
            }
            r.push(sum.x);
            r.push(sum.y);
        }
        Some(r)
    };

    if n_junctions > 0 {
        let mut r = residual(&u).ok_or(FlowError::NewtonDivergence {
            residual: f64::NAN,
            iters: 0,
        })?;
        let mut iters = 0usize;
        loop {
            let r_norm = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if r_norm < config.newton_tol {
                break;
            }
            if iters >= config.max_newton_iters {
                return Err(FlowError::NewtonDivergence {
                    residual: r_norm,
                    iters,
                });
            }
            // Finite-difference Jacobian over the 2m junction coordinates.
            let dim = 2 * n_junctions;
            let scale = 1.0 + u.iter().map(|p| p.norm()).fold(0.0, f64::max);
            let eps = 1e-7 * scale;
            let mut jac = vec![0.0; dim * dim];
            for col in 0..dim {
                let mut u_pert = u.clone();
                if col % 2 == 0 {
                    u_pert[col / 2].x += eps;
                } else {
                    u_pert[col / 2].y += eps;
                }
                let r_pert = residual(&u_pert).ok_or(FlowError::NewtonDivergence {
                    residual: f64::NAN,
                    iters,
                })?;
                for row in 0..dim {
                    jac[row * dim + col] = (r_pert[row] - r[row]) / eps;
                }
            }
            let mut delta: Vec<f64> = r.iter().map(|v| -v).collect();
            solve_dense(&mut jac, &mut delta).ok_or(FlowError::NewtonDivergence {
                residual: r_norm,
                iters,
            })?;
            for (j, uj) in u.iter_mut().enumerate() {
                uj.x += delta[2 * j];
                uj.y += delta[2 * j + 1];
            }
            r = residual(&u).ok_or(FlowError::NewtonDivergence {
                residual: f64::NAN,
                iters,
            })?;
            iters += 1;
        }
    }

    // Assemble the updated network.
    let mut curves = Vec::with_capacity(n_curves);
    for (i, c) in network.curves.iter().enumerate() {
        let points = if c.closed {
            closed_points[i].take().expect("closed solve")
        } else {
            let (a_src, b_src) = sources[i].expect("open curve sources");
            let (a, b) = (boundary_value(a_src, &u), boundary_value(b_src, &u));
            let solve = solves[i].as_ref().expect("open solve");
            let mut pts = Vec::with_capacity(c.points.len());
            pts.push(a);
            for j in 0..c.segment_count() - 1 {
                pts.push(solve.node(j, a, b));
            }
            pts.push(b);
            pts
        };
        let updated = DiscreteCurve {
            id: c.id.clone(),
            points,
            closed: c.closed,
        };
        updated.validate()?;
        curves.push(updated);
    }
    let network = Network {
        curves,
        topology: network.topology.clone(),
    };
    Ok(FlowState {
        time: state.time + dt,
        network,
        dt,
        step_count: state.step_count + 1,
    })
}

fn record_row(
    series: &mut DiagnosticSeries,
    state: &FlowState,
    loops: &[crate::geometry::LoopPath],
) {
    let network = &state.network;
    let mut k_sq = 0.0;
    let mut ks_sq = 0.0;
    let mut sup_k = 0.0f64;
    for c in &network.curves {
        let Ok(k) = curvature(c) else {
            k_sq = f64::NAN;
            break;
        };
        let w = c.arclength_weights();
        let s = c.arclength_table();
        let n = c.points.len();
        for j in 0..n {
            k_sq += k.scalar[j] * k.scalar[j] * w[j];
            sup_k = sup_k.max(k.scalar[j].abs());
        }
        // Arclength derivative of k: central differences, one-sided at open
        // ends, periodic wrap on closed curves.
        for j in 0..n {
            let ks = if c.closed {
                let m = n - 1;
                let jp = (j + 1) % m;
                let jm = (j + m - 1) % m;
                let ds_f = c.points[j % m].dist(c.points[jp]);
                let ds_b = c.points[j % m].dist(c.points[jm]);
                (k.scalar[jp] - k.scalar[jm]) / (ds_f + ds_b)
            } else if j == 0 {
                (k.scalar[1] - k.scalar[0]) / (s[1] - s[0])
            } else if j == n - 1 {
                (k.scalar[n - 1] - k.scalar[n - 2]) / (s[n - 1] - s[n - 2])
            } else {
                (k.scalar[j + 1] - k.scalar[j - 1]) / (s[j + 1] - s[j - 1])
            };
            ks_sq += ks * ks * w[j];
        }
    }
    series.time.push(state.time);
    series.total_length.push(total_length(network));
    series.curvature_sq.push(k_sq);
    series.curvature_deriv_sq.push(ks_sq);
    series.min_curve_length.push(network.min_curve_length());
    series.max_curvature.push(sup_k);
    let tol = Tolerances::default();
    for (li, lp) in loops.iter().enumerate() {
        let area = enclosed_area(network, lp, &tol).unwrap_or(f64::NAN);
        series.loop_areas[li].push(area);
    }
}

/// Run the flow until `t_max` or a singularity threshold trips, recording
/// per-step diagnostics, periodic snapshots, and per-loop areas. Curves are
/// re-equidistributed in arclength whenever node spacing degrades past the
/// configured ratio.
pub fn evolve(
    initial: FlowState,
    config: &SolverConfig,
    t_max: f64,
) -> Result<Trajectory, FlowError> {
    config.validate()?;
    if !(t_max > initial.time) {
        return Err(FlowError::BadConfig(
            "t_max must exceed the initial time".into(),
        ));
    }
    let loops = find_loops(&initial.network);
    let mut series = DiagnosticSeries {
        loop_areas: vec![Vec::new(); loops.len()],
        ..Default::default()
    };
    let mut snapshots = Vec::new();
    let mut state = initial;

    record_row(&mut series, &state, &loops);
    snapshots.push(Snapshot {
        time: state.time,
        network: state.network.clone(),
    });

    let mut reason = StopReason::TimeLimit;
    let mut last_snapshot_step = state.step_count;
    while state.time + 0.5 * config.dt < t_max {
        // Node-clustering control.
        let needs_resample: Vec<usize> = state
            .network
            .curves
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                let (lo, hi) = c.spacing_range();
                lo > 0.0 && hi / lo > config.resample_threshold
            })
            .map(|(i, _)| i)
            .collect();
        for i in needs_resample {
            let c = &state.network.curves[i];
            state.network.curves[i] = resample_arclength(c, c.segment_count())?;
        }

        state = step(&state, config)?;
        record_row(&mut series, &state, &loops);
        if state.step_count.is_multiple_of(config.record_every as u64) {
            snapshots.push(Snapshot {
                time: state.time,
                network: state.network.clone(),
            });
            last_snapshot_step = state.step_count;
        }

        let min_len = *series.min_curve_length.last().unwrap();
        let sup_k = *series.max_curvature.last().unwrap();
        let len_hit = min_len < config.min_curve_length;
        let k_hit = !sup_k.is_finite() || sup_k > config.max_curvature;
        if len_hit || k_hit {
            reason = match (len_hit, k_hit) {
                (true, true) => StopReason::LengthCollapseAndCurvatureBlowup,
                (true, false) => StopReason::LengthCollapse,
                _ => StopReason::CurvatureBlowup,
            };
            break;
        }
    }
    if state.step_count != last_snapshot_step {
        snapshots.push(Snapshot {
            time: state.time,
            network: state.network.clone(),
        });
    }

    let estimated_singular_time = if reason.is_singular() {
        crate::diagnostics::estimate_singular_time(&series)
    } else {
        None
    };
    let shortest_curve = state
        .network
        .curves
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.length().partial_cmp(&b.1.length()).unwrap())
        .map(|(i, _)| i);
    let most_curved = state
        .network
        .curves
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            curvature(c)
                .ok()
                .map(|k| (i, k.scalar.iter().fold(0.0f64, |a, v| a.max(v.abs()))))
        })
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(i, _)| i);

    Ok(Trajectory {
        snapshots,
        series,
        loops,
        termination: Termination {
            reason,
            time: state.time,
            estimated_singular_time,
            shortest_curve,
            most_curved,
        },
    })
}
