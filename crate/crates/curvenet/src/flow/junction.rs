use super::admissible::anticlockwise_order;
use crate::geometry::{end_quantities, Network};
use crate::Vec2;

/// Residuals of the exact junction identities of the flow. With the three
/// concurring curves oriented away from the junction and labelled
/// anticlockwise, a common junction velocity forces
/// Σk = Σλ = 0, λⁱ = (k^{i−1} − k^{i+1})/√3, Σk² = Σλ² and Σkλ = 0.
#[derive(Clone, Debug)]
pub struct JunctionIdentityResidual {
    pub concurrency_gap: f64,
    /// |Σ τ| over the exterior unit tangents.
    pub tangent_sum: f64,
    /// |Σ kⁱ|.
    pub curvature_sum: f64,
    /// |Σ λⁱ|.
    pub velocity_sum: f64,
    /// |λⁱ − (k^{i−1} − k^{i+1})/√3| per curve, in anticlockwise order.
    pub lambda_formula: [f64; 3],
    /// |Σ (kⁱ)² − Σ (λⁱ)²|.
    pub square_sum_gap: f64,
    /// |Σ kⁱ λⁱ|.
    pub cross_sum: f64,
}

impl JunctionIdentityResidual {
    pub fn max_lambda_formula(&self) -> f64 {
        self.lambda_formula.iter().fold(0.0f64, |a, v| a.max(*v))
    }
}

/// Evaluate the junction identities for exterior-oriented end data
/// (tangent, curvature, tangential velocity). Ends are sorted anticlockwise
/// by tangent angle internally.
pub fn junction_identities(ends: &[(Vec2, f64, f64); 3]) -> JunctionIdentityResidual {
    let tangents = [ends[0].0, ends[1].0, ends[2].0];
    let order = anticlockwise_order(&tangents);
    let k: Vec<f64> = order.iter().map(|i| ends[*i].1).collect();
    let lambda: Vec<f64> = order.iter().map(|i| ends[*i].2).collect();
    let tangent_sum = (ends[0].0 + ends[1].0 + ends[2].0).norm();
    let curvature_sum = (k[0] + k[1] + k[2]).abs();
    let velocity_sum = (lambda[0] + lambda[1] + lambda[2]).abs();
    let mut lambda_formula = [0.0; 3];
    for i in 0..3 {
        let expect = (k[(i + 2) % 3] - k[(i + 1) % 3]) / 3f64.sqrt();
        lambda_formula[i] = (lambda[i] - expect).abs();
    }
    let square_sum_gap = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2])
        - (lambda[0] * lambda[0] + lambda[1] * lambda[1] + lambda[2] * lambda[2]))
        .abs();
    let cross_sum = (k[0] * lambda[0] + k[1] * lambda[1] + k[2] * lambda[2]).abs();
    JunctionIdentityResidual {
        concurrency_gap: 0.0,
        tangent_sum,
        curvature_sum,
        velocity_sum,
        lambda_formula,
        square_sum_gap,
        cross_sum,
    }
}

/// Junction identity residuals of every junction of a network, from
/// one-sided discrete end quantities.
pub fn junction_residuals(network: &Network) -> Vec<JunctionIdentityResidual> {
    network
        .topology
        .junctions
        .iter()
        .map(|junction| {
            let mut data = [(Vec2::ZERO, 0.0, 0.0); 3];
            let mut positions = [Vec2::ZERO; 3];
            for (slot, e) in junction.ends.iter().enumerate() {
                match end_quantities(&network.curves[e.curve], e.end) {
                    Ok(q) => {
                        data[slot] = (q.tangent_out, q.curvature_out, q.velocity_out);
                        positions[slot] = q.position;
                    }
                    Err(_) => data[slot] = (Vec2::ZERO, f64::NAN, f64::NAN),
                }
            }
            let mut r = junction_identities(&data);
            r.concurrency_gap = positions[0]
                .dist(positions[1])
                .max(positions[0].dist(positions[2]))
                .max(positions[1].dist(positions[2]));
            r
        })
        .collect()
}
