//! Approximating solutions from mollified data.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::minimize::{solve_dirichlet, SolveConfig};
use super::{Mesh2D, VectorField2D};
use crate::error::{Error, Result};
use crate::field::OperatorSpec;
use crate::measure::{mollify, Grid, MeasureData};

#[derive(Debug, Clone)]
pub struct SolaRun {
    pub widths: Vec<f64>,
    pub iterates: Vec<VectorField2D>,
    pub profile: CauchyProfile,
}

/// `Σ_T |T| |Du_k - Du_{k+1}|` between consecutive iterates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyProfile {
    pub distances: Vec<f64>,
    /// Whether the distances are nonincreasing.
    pub decreasing: bool,
}

/// Solves with `mu` mollified at each width (decreasing) on `grid`, each
/// solve starting from the previous iterate.
pub fn sola_loop(
    spec: &OperatorSpec,
    mesh: Arc<Mesh2D>,
    mu: &MeasureData,
    widths: &[f64],
    grid: &Grid,
    cfg: &SolveConfig,
) -> Result<SolaRun> {
    if widths.is_empty() || widths.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Validation("mollification widths must be nonempty and strictly decreasing".into()));
    }
    let mut iterates: Vec<VectorField2D> = Vec::new();
    for &w in widths {
        let load = mollify(mu, w, grid)?;
        let start = match iterates.last() {
            Some(prev) => prev.clone(),
            None => VectorField2D::zeros(mesh.clone(), mu.m()),
        };
        iterates.push(solve_dirichlet(spec, &load, &start, cfg)?.field);
    }
    let distances: Vec<f64> = iterates.windows(2).map(|p| p[0].w11_distance(&p[1])).collect();
    let decreasing = distances.windows(2).all(|d| d[1] <= d[0]);
    Ok(SolaRun {
        widths: widths.to_vec(),
        iterates,
        profile: CauchyProfile { distances, decreasing },
    })
}
