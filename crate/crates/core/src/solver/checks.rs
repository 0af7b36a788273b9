//! Energy inequalities evaluated on discrete fields: Caccioppoli,
//! modular Sobolev–Poincaré, oscillation decay of A-harmonic maps, and
//! component proportionality.

use super::mesh::subtriangle_points;
use super::VectorField2D;
use crate::error::{Error, Result};
use crate::field::OperatorSpec;
use crate::verify::{BallQuadrature, EstimateReport, EstimateSample};

/// `⨍_{B_{σ'r}} G(|Dv|)` against
/// `(σ - σ')^{-s_G} ⨍_{B_{σr}} G(|v - (v)_{B_{σr}}| / r)`.
pub fn caccioppoli_sample(
    spec: &OperatorSpec,
    v: &VectorField2D,
    x0: [f64; 2],
    r: f64,
    sigma: f64,
    sigma_inner: f64,
) -> Result<EstimateSample> {
    if !(0.0 < sigma_inner && sigma_inner < sigma && sigma <= 1.0) {
        return Err(Error::Validation(format!(
            "need 0 < sigma' < sigma <= 1, got {sigma_inner}, {sigma}"
        )));
    }
    let g = &spec.young;
    let inner = BallQuadrature::new(v.mesh(), x0, sigma_inner * r)?;
    let outer = BallQuadrature::new(v.mesh(), x0, sigma * r)?;
    let lhs = inner.average_gradient(v, |d| g.value(d.iter().map(|x| x * x).sum::<f64>().sqrt()));
    let mean = outer.mean(v);
    let avg = outer.average(v, |x| {
        let d: f64 = x.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum();
        g.value(d.sqrt() / r)
    });
    Ok(EstimateSample::new(lhs, avg / (sigma - sigma_inner).powf(g.indices().upper)))
}

/// `∫ G(|u|)^{n'}` against `(∫ G(|Du|))^{n'}`, `n' = n/(n-1) = 2`, for a
/// field vanishing on the boundary.
pub fn sobolev_poincare_sample(spec: &OperatorSpec, u: &VectorField2D) -> EstimateSample {
    let mesh = u.mesh();
    let g = &spec.young;
    let quad = subtriangle_points(4);
    let w = 1.0 / quad.len() as f64;
    let (mut lhs, mut energy) = (0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        for l in &quad {
            let val = u.eval_bary(t, *l);
            let gv = g.value(val.iter().map(|x| x * x).sum::<f64>().sqrt());
            lhs += mesh.area(t) * w * gv * gv;
        }
        let du = u.gradient(t);
        energy += mesh.area(t) * g.value(du.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    EstimateSample::new(lhs, energy * energy)
}

/// Decay exponent `1 + (ς - 1)/s_G` of the excess of A-harmonic maps.
pub fn oscillation_exponent(spec: &OperatorSpec, varsigma: f64) -> f64 {
    1.0 + (varsigma - 1.0) / spec.young.indices().upper
}

/// `E(v; B_{δR})` against `δ^{1+(ς-1)/s_G} E(v; B_R)` for each `δ`.
pub fn oscillation_decay(
    spec: &OperatorSpec,
    v: &VectorField2D,
    x0: [f64; 2],
    radius: f64,
    deltas: &[f64],
    varsigma: f64,
) -> Result<EstimateReport> {
    if !(varsigma > 0.0 && varsigma < 1.0) {
        return Err(Error::Validation(format!("varsigma must lie in (0, 1), got {varsigma}")));
    }
    if deltas.iter().any(|d| !(*d > 0.0 && *d <= 0.25)) {
        return Err(Error::Validation("deltas must lie in (0, 1/4]".into()));
    }
    let kappa = oscillation_exponent(spec, varsigma);
    let base = BallQuadrature::new(v.mesh(), x0, radius)?.excess(v);
    let samples = deltas
        .iter()
        .map(|&d| {
            let e = BallQuadrature::new(v.mesh(), x0, d * radius)?.excess(v);
            Ok(EstimateSample::new(e, d.powf(kappa) * base))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimateReport::new(samples)
        .with_meta("exponent", kappa)
        .with_meta("varsigma", varsigma))
}

/// Largest distance of a nodal value from the line spanned by `direction`,
/// relative to the largest nodal norm.
pub fn component_deviation(u: &VectorField2D, direction: &[f64]) -> f64 {
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    let d: Vec<f64> = direction.iter().map(|x| x / norm).collect();
    let mut worst: f64 = 0.0;
    let mut top: f64 = 0.0;
    for v in 0..u.mesh().num_vertices() {
        let x = u.at(v);
        let along: f64 = x.iter().zip(&d).map(|(a, b)| a * b).sum();
        let off: f64 = x.iter().zip(&d).map(|(a, b)| (a - along * b).powi(2)).sum();
        worst = worst.max(off.sqrt());
        top = top.max(x.iter().map(|a| a * a).sum::<f64>().sqrt());
    }
    if top > 0.0 {
        worst / top
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{mollify, Grid, MeasureData};
    use crate::solver::{solve_dirichlet, solve_zero_dirichlet, Mesh2D, SolveConfig};
    use crate::young::YoungFunction;
    use std::sync::Arc;

    #[test]
    fn vector_radial_data_stays_proportional() {
        let mesh = Arc::new(Mesh2D::disk([0.0, 0.0], 1.0, 1.0 / 16.0).unwrap());
        let spec = OperatorSpec::new(YoungFunction::power_law(3.0).unwrap(), Default::default(), 2, 2).unwrap();
        let grid = Grid::square(32, 0.5).unwrap();
        let mu = crate::measure::MeasureData::atoms(
            vec![crate::measure::Atom {
                point: [0.0, 0.0],
                weight: vec![0.6, 0.8],
            }],
            2,
        )
        .unwrap();
        let load = mollify(&mu, 0.25, &grid).unwrap();
        let u = solve_zero_dirichlet(&spec, mesh, &load, &SolveConfig::default()).unwrap().field;
        assert!(component_deviation(&u, &[0.6, 0.8]) < 1e-6);
    }

    #[test]
    fn harmonic_map_checks() {
        let mesh = Arc::new(Mesh2D::disk([0.0, 0.0], 1.0, 1.0 / 24.0).unwrap());
        let spec = OperatorSpec::scalar(YoungFunction::power_law(3.0).unwrap());
        let boundary = VectorField2D::from_fn(mesh.clone(), 1, |p| vec![p[0] + 0.5 * (3.0 * p[1]).sin()]);
        let v = solve_dirichlet(&spec, &MeasureData::zero(1), &boundary, &SolveConfig::default())
            .unwrap()
            .field;
        let cacc = caccioppoli_sample(&spec, &v, [0.0, 0.0], 0.8, 1.0, 0.5).unwrap();
        assert!(cacc.ratio.unwrap() < 10.0, "{cacc:?}");
        let osc = oscillation_decay(&spec, &v, [0.0, 0.0], 0.8, &[0.25, 0.125], 0.5).unwrap();
        assert!(osc.fitted_constant < 4.0, "{osc:?}");
        let sp = sobolev_poincare_sample(&spec, &solve_zero_dirichlet(&spec, mesh, &MeasureData::dirac([0.1, 0.0], 1.0), &SolveConfig::default()).unwrap().field);
        assert!(sp.ratio.unwrap() > 0.0 && sp.ratio.unwrap() < 10.0, "{sp:?}");
    }
}
