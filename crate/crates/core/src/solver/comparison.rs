//! Comparison with the A-harmonic map sharing a solution's boundary values
//! on a smaller ball.

use std::sync::Arc;

use super::minimize::{solve_dirichlet, SolveConfig, StageReport};
use super::{Mesh2D, VectorField2D};
use crate::error::Result;
use crate::field::OperatorSpec;
use crate::measure::MeasureData;
use crate::verify::BallQuadrature;

#[derive(Debug, Clone)]
pub struct Comparison {
    /// A-harmonic map on the triangles with centroid in `B_{r/2}(x0)`.
    pub v: VectorField2D,
    /// Parent index of every vertex of `v`'s mesh.
    pub parent_vertex: Vec<usize>,
    /// `⨍_{B_{r/2}} |Du - Dv|`.
    pub lhs: f64,
    /// `E(u; B_r) / r`.
    pub excess_term: f64,
    /// `g⁻¹(|μ|(B_r) / r^{n-1})`.
    pub mass_term: f64,
    pub stages: Vec<StageReport>,
}

/// Solves `div A(x, Dv) = 0` in `B_{r/2}(x0)` with `v = u` on the boundary
/// and returns both sides of the comparison estimate.
pub fn aharmonic_comparison(
    spec: &OperatorSpec,
    u: &VectorField2D,
    load: &MeasureData,
    x0: [f64; 2],
    r: f64,
    cfg: &SolveConfig,
) -> Result<Comparison> {
    let mesh = u.mesh();
    let ball = BallQuadrature::new(mesh, x0, r)?;
    let excess_term = ball.excess(u) / r;
    let mass_term = spec
        .young
        .invert_g(load.ball_mass(&x0, r) / r.powi(spec.n as i32 - 1))?;
    let half = 0.5 * r;
    let sub = mesh.submesh(|t| {
        let c = mesh.centroid(t);
        (c[0] - x0[0]).hypot(c[1] - x0[1]) <= half
    })?;
    let m = u.m();
    let sub_mesh: Arc<Mesh2D> = Arc::new(sub.mesh);
    let data: Vec<f64> = sub.parent_vertex.iter().flat_map(|&v| u.at(v).to_vec()).collect();
    let start = VectorField2D::from_values(sub_mesh.clone(), m, data)?;
    let sol = solve_dirichlet(spec, &MeasureData::zero(m), &start, cfg)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, &pt) in sub.parent_triangle.iter().enumerate() {
        let du = u.gradient(pt);
        let dv = sol.field.gradient(t);
        let d: f64 = du.iter().zip(&dv).map(|(a, b)| (a - b) * (a - b)).sum();
        num += sub_mesh.area(t) * d.sqrt();
        den += sub_mesh.area(t);
    }
    Ok(Comparison {
        v: sol.field,
        parent_vertex: sub.parent_vertex,
        lhs: num / den,
        excess_term,
        mass_term,
        stages: sol.stages,
    })
}
