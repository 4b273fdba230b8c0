//! Cross-module behavior of recorded flows: self-similarity along whole
//! trajectories, boundary terms of the monotonicity formula, junction-flux
//! refinement, and the remaining trajectory-level invariants.

use std::f64::consts::PI;

use curvenet::diagnostics::{curvature_seminorms, singularity_classify, SingularityKind};
use curvenet::flow::{
    evolve, make_admissible, FlowState, MakeAdmissibleOptions, SolverConfig, StopReason,
};
use curvenet::geometry::{
    check_embedded, hausdorff_distance, CurveEnd, DiscreteCurve, End, FixedEndpoint, Network,
    NetworkTopology,
};
use curvenet::monotonicity::{
    huisken_rescale, length_ratio_check, limit_density, monotonicity_audit,
    rescaled_shrinker_residual,
};
use curvenet::selfsimilar::{circle_shrinker, find_brakke_spoon_with};
use curvenet::Vec2;

fn segment_network(a: Vec2, b: Vec2, n: usize) -> Network {
    let points: Vec<Vec2> = (0..=n).map(|j| a.lerp(b, j as f64 / n as f64)).collect();
    let c = DiscreteCurve::new("seg", points).unwrap();
    let topology = NetworkTopology {
        junctions: vec![],
        endpoints: vec![
            FixedEndpoint {
                at: CurveEnd {
                    curve: 0,
                    end: End::Start,
                },
                position: a,
            },
            FixedEndpoint {
                at: CurveEnd {
                    curve: 0,
                    end: End::Finish,
                },
                position: b,
            },
        ],
    };
    Network::new(vec![c], topology).unwrap()
}

fn circle_run() -> curvenet::flow::Trajectory {
    let config = SolverConfig {
        max_curvature: 30.0,
        record_every: 500,
        ..SolverConfig::new(2e-5)
    };
    evolve(FlowState::new(circle_shrinker(200)), &config, 0.6).unwrap()
}

#[test]
fn circle_flow_is_self_similar_along_the_whole_trajectory() {
    // Rescaling any snapshot of the circle flow around (T, centre) gives a
    // unit circle, so the shrinker residual stays small along the run.
    let traj = circle_run();
    let t_hat = traj.singular_time_hint();
    let mut worst = 0.0f64;
    for snap in &traj.snapshots {
        if snap.time > t_hat - 0.05 {
            continue;
        }
        let rescaled = huisken_rescale(&snap.network, snap.time, Vec2::ZERO, t_hat).unwrap();
        let r = rescaled_shrinker_residual(&rescaled).unwrap();
        worst = worst.max(r.sup);
    }
    assert!(worst < 5e-3, "rescaled shrinker residual {worst}");

    // The rescaled density settles on the circle's value √(2π)e^{-1/2}.
    let last_usable = traj
        .snapshots
        .iter()
        .rfind(|s| s.time < t_hat - 0.01)
        .unwrap();
    let rescaled =
        huisken_rescale(&last_usable.network, last_usable.time, Vec2::ZERO, t_hat).unwrap();
    let density = curvenet::monotonicity::rescaled_density(&rescaled);
    let expect = (2.0 * PI).sqrt() * (-0.5f64).exp();
    assert!(
        (density - expect).abs() < 1e-3,
        "rescaled density {density}"
    );

    // The classification of the circle collapse sees both halves of the
    // singularity dichotomy.
    let class = singularity_classify(&traj);
    assert_eq!(class.kind, SingularityKind::Both);
    assert_eq!(traj.termination.reason, StopReason::CurvatureBlowup);
}

#[test]
fn rescaled_circle_flow_has_bounded_length_ratio() {
    let traj = circle_run();
    let t_hat = traj.singular_time_hint();
    let probes = [
        (Vec2::ZERO, 0.5),
        (Vec2::ZERO, 1.0),
        (Vec2::new(1.0, 0.0), 0.7),
        (Vec2::new(-0.4, 0.8), 1.5),
    ];
    let mut worst = 0.0f64;
    for snap in &traj.snapshots {
        if snap.time >= t_hat {
            continue;
        }
        let rescaled = huisken_rescale(&snap.network, snap.time, Vec2::ZERO, t_hat).unwrap();
        worst = worst.max(length_ratio_check(&rescaled, &probes));
    }
    // The rescaled circles have radius ≈ 1; any chord in a ball of radius R
    // has length ≤ 2πR against our probes, comfortably below 2π + 1.
    assert!(worst < 2.0 * PI + 1.0, "length ratio {worst}");
    assert!(worst > 0.5);
}

#[test]
fn spoon_flow_follows_the_exact_homothety() {
    let entry = find_brakke_spoon_with(300).unwrap();
    let net = make_admissible(&entry.network, &MakeAdmissibleOptions::default()).unwrap();
    let delta = 1e-3;
    let config = SolverConfig {
        record_every: 1000,
        ..SolverConfig::new(1e-6)
    };
    let traj = evolve(FlowState::new(net.clone()), &config, delta).unwrap();
    let final_net = &traj.snapshots.last().unwrap().network;
    // The loop of the unit-scale spoon contracts by exactly √(1 − 2δ); the
    // truncated tail stays on the axis and is excluded (its far end is
    // pinned rather than shrinking).
    let scale = (1.0 - 2.0 * delta).sqrt();
    let exact: Vec<Vec2> = net.curves[0].points.iter().map(|p| *p * scale).collect();
    let d = hausdorff_distance(&final_net.curves[0].points, &exact);
    assert!(d < 1e-4, "homothety deviation {d}");
}

#[test]
fn total_length_is_non_increasing_with_fixed_endpoints() {
    let entry = find_brakke_spoon_with(300).unwrap();
    let net = make_admissible(&entry.network, &MakeAdmissibleOptions::default()).unwrap();
    let config = SolverConfig {
        max_curvature: 30.0,
        record_every: 400,
        ..SolverConfig::new(5e-5)
    };
    let traj = evolve(FlowState::new(net), &config, 0.3).unwrap();
    for w in traj.series.total_length.windows(2) {
        assert!(
            w[1] <= w[0] + 1e-9,
            "length increased: {} -> {}",
            w[0],
            w[1]
        );
    }
    // Accepted states keep the junction conditions to solver tolerance:
    // exact concurrency and tangent sum below the Newton tolerance.
    for snap in traj.snapshots.iter().skip(1) {
        let reg = curvenet::geometry::check_regular(
            &snap.network,
            &curvenet::geometry::Tolerances::default(),
        );
        assert_eq!(reg.max_concurrency_gap, 0.0);
        assert!(
            reg.max_tangent_sum < config.newton_tol,
            "|Στ| {}",
            reg.max_tangent_sum
        );
    }
}

#[test]
fn quiet_runs_report_no_blowup_and_no_singularity() {
    let net = segment_network(Vec2::ZERO, Vec2::new(1.0, 0.0), 32);
    let config = SolverConfig {
        record_every: 100,
        ..SolverConfig::new(1e-3)
    };
    let traj = evolve(FlowState::new(net), &config, 0.5).unwrap();
    assert_eq!(traj.termination.reason, StopReason::TimeLimit);
    assert!(matches!(
        curvenet::diagnostics::blowup_fit(&traj, None),
        Err(curvenet::diagnostics::DiagnosticsError::NoBlowup)
    ));
    let class = singularity_classify(&traj);
    assert_eq!(class.kind, SingularityKind::None);
    // Both sides of the length law vanish on a static segment.
    let audit = curvenet::diagnostics::length_law_audit(&traj).unwrap();
    for s in &audit {
        assert!(s.length_rate.abs() < 1e-9 && s.curvature_sq < 1e-12);
    }
}

#[test]
fn monotonicity_audit_with_endpoint_boundary_terms() {
    // A static segment whose supporting line misses the probe: dissipation
    // is strictly positive and dΘ/dt ≤ boundary terms.
    let net = segment_network(Vec2::new(-1.0, 0.4), Vec2::new(1.0, 0.4), 64);
    let config = SolverConfig {
        record_every: 20,
        ..SolverConfig::new(1e-4)
    };
    let traj = evolve(FlowState::new(net), &config, 0.2).unwrap();
    let samples = monotonicity_audit(&traj, 0.35, Vec2::ZERO).unwrap();
    assert!(samples.len() > 5);
    for s in &samples {
        assert!(s.dissipation > 0.0);
        if let (Some(rate), Some(resid)) = (s.density_rate, s.identity_residual) {
            assert!(
                rate <= s.boundary_term + 2e-3,
                "rate {rate} vs boundary {}",
                s.boundary_term
            );
            assert!(resid.abs() < 2e-3, "identity residual {resid}");
        }
    }
}

#[test]
fn limit_density_of_segment_and_far_probe() {
    // Stationary segment: the density at an interior point tends to 1, and
    // far from the network it tends to 0.
    let net = segment_network(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0), 400);
    let config = SolverConfig {
        record_every: 25,
        ..SolverConfig::new(1e-4)
    };
    let traj = evolve(FlowState::new(net), &config, 0.25).unwrap();
    let on = limit_density(&traj, Vec2::new(0.2, 0.0)).unwrap();
    assert!(
        (on.value - 1.0).abs() < 1e-2,
        "interior limit density {}",
        on.value
    );
    let off = limit_density(&traj, Vec2::new(0.0, 3.0)).unwrap();
    assert!(off.value.abs() < 1e-6, "far limit density {}", off.value);
}

#[test]
fn junction_flux_and_length_law_residual_vanish_under_refinement() {
    // Σ k k_s + λ k² at the junction of a flowed curved triod decreases
    // with the grid, and so does the length-law residual of this
    // fixed-endpoint flow.
    let mut fluxes = Vec::new();
    let mut law_residuals = Vec::new();
    for n in [40usize, 80, 160] {
        let mut net = curvenet::selfsimilar::standard_triod(1.0, n);
        for (ci, c) in net.curves.iter_mut().enumerate() {
            let dir = (c.points[n] - c.points[0]).normalized().unwrap();
            let normal = dir.rot90();
            let amp = 0.12 * (1.0 + 0.3 * ci as f64);
            for (j, p) in c.points.iter_mut().enumerate() {
                let x = j as f64 / n as f64;
                *p = dir * x + normal * (amp * x.powi(3) * (1.0 - x).powi(3));
            }
        }
        let dt = 2e-4 * (40.0 / n as f64).powi(2);
        let config = SolverConfig {
            record_every: 1_000_000,
            ..SolverConfig::new(dt)
        };
        let traj = evolve(FlowState::new(net), &config, 0.02).unwrap();
        let sem = curvature_seminorms(&traj.snapshots.last().unwrap().network).unwrap();
        fluxes.push(sem.junction_flux[0].abs());
        let audit = curvenet::diagnostics::length_law_audit(&traj).unwrap();
        let worst = audit
            .iter()
            .skip(1)
            .take(audit.len().saturating_sub(2))
            .map(|s| (s.length_rate + s.curvature_sq).abs())
            .fold(0.0f64, f64::max);
        law_residuals.push(worst);
    }
    assert!(
        law_residuals[2] < law_residuals[1] && law_residuals[1] < law_residuals[0],
        "length-law residual not decreasing: {law_residuals:?}"
    );
    assert!(
        fluxes[2] < fluxes[1] && fluxes[1] < fluxes[0],
        "junction flux not decreasing: {fluxes:?}"
    );
    let order = (fluxes[0] / fluxes[2]).log2() / 2.0;
    assert!(order > 0.8, "junction flux order {order} ({fluxes:?})");
}

#[test]
fn evolve_applies_arclength_resampling() {
    // A segment parametrized with mild clustering: the special flow expands
    // the spacing ratio as the parametrization relaxes, and a tight
    // threshold forces at least one re-equidistribution without disturbing
    // the endpoints.
    let n = 64;
    let points: Vec<Vec2> = (0..=n)
        .map(|j| {
            let x = j as f64 / n as f64;
            Vec2::new(x * (1.35 - 0.35 * x), 0.0)
        })
        .collect();
    let c = DiscreteCurve::new("seg", points).unwrap();
    let topology = NetworkTopology {
        junctions: vec![],
        endpoints: vec![
            FixedEndpoint {
                at: CurveEnd {
                    curve: 0,
                    end: End::Start,
                },
                position: Vec2::ZERO,
            },
            FixedEndpoint {
                at: CurveEnd {
                    curve: 0,
                    end: End::Finish,
                },
                position: Vec2::new(1.0, 0.0),
            },
        ],
    };
    let net = Network::new(vec![c], topology).unwrap();
    let config = SolverConfig {
        resample_threshold: 1.05,
        record_every: 50,
        ..SolverConfig::new(1e-4)
    };
    let traj = evolve(FlowState::new(net), &config, 0.05).unwrap();
    let fin = &traj.snapshots.last().unwrap().network.curves[0];
    let (lo, hi) = fin.spacing_range();
    assert!(hi / lo < 1.1, "spacing ratio {} not controlled", hi / lo);
    assert_eq!(fin.points[0], Vec2::ZERO);
    assert_eq!(*fin.points.last().unwrap(), Vec2::new(1.0, 0.0));
    assert!(check_embedded(&traj.snapshots.last().unwrap().network).is_empty());
}
