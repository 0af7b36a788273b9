//! Ball averages of piecewise-linear fields and the excess functional
//! `E(u; B) = ⨍_B |u - (u)_B|`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::report::{EstimateReport, EstimateSample};
use crate::error::{Error, Result};
use crate::field::OperatorSpec;
use crate::measure::MeasureData;
use crate::quad::least_squares;
use crate::solver::{subtriangle_points, Mesh2D, VectorField2D};

/// Fraction of `|B_r|` the quadrature must cover for a ball to count as
/// contained in the mesh.
pub const AREA_TOLERANCE: f64 = 0.05;

/// Quadrature restricted to `B_r(x0)`: centroids of a uniform refinement
/// of every triangle, kept when they fall inside the closed ball.
#[derive(Debug, Clone)]
pub struct BallQuadrature {
    center: [f64; 2],
    radius: f64,
    /// `(triangle, barycentric coordinates, weight)`.
    points: Vec<(usize, [f64; 3], f64)>,
    /// `(triangle, weight inside the ball)`.
    triangles: Vec<(usize, f64)>,
    area: f64,
    /// Vertex whose value is subtracted before averaging.
    anchor: usize,
}

impl BallQuadrature {
    pub fn new(mesh: &Mesh2D, center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Validation(format!("ball radius must be positive, got {radius}")));
        }
        if mesh.locate(center).is_none() {
            return Err(Error::Validation(format!("ball center {center:?} lies outside the mesh")));
        }
        let mut points = Vec::new();
        let mut triangles = Vec::new();
        let mut rules: Vec<(usize, Vec<[f64; 3]>)> = Vec::new();
        for t in 0..mesh.num_triangles() {
            let c = mesh.centroid(t);
            let diam = mesh.diameter(t);
            if (c[0] - center[0]).hypot(c[1] - center[1]) > radius + diam {
                continue;
            }
            // sub-triangles at most a quarter of the radius across
            let k = ((4.0 * diam / radius).ceil() as usize).clamp(4, 64);
            let rule = match rules.iter().find(|r| r.0 == k) {
                Some(r) => &r.1,
                None => {
                    rules.push((k, subtriangle_points(k)));
                    &rules.last().unwrap().1
                }
            };
            let w = mesh.area(t) / rule.len() as f64;
            let p = mesh.triangles()[t].map(|v| mesh.vertices()[v]);
            let mut inside = 0.0;
            for l in rule {
                let x = l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0];
                let y = l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1];
                if (x - center[0]).hypot(y - center[1]) <= radius {
                    points.push((t, *l, w));
                    inside += w;
                }
            }
            if inside > 0.0 {
                triangles.push((t, inside));
            }
        }
        let area: f64 = triangles.iter().map(|x| x.1).sum();
        if area < (1.0 - AREA_TOLERANCE) * PI * radius * radius {
            return Err(Error::Validation(format!(
                "ball B_{radius}({center:?}) is not contained in the mesh (covered area {area:.4e})"
            )));
        }
        let anchor = mesh.triangles()[points[0].0][0];
        Ok(Self {
            center,
            radius,
            points,
            triangles,
            area,
            anchor,
        })
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Measure of the ball as seen by the quadrature.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Values at the quadrature points relative to the anchor vertex.
    fn relative_values(&self, u: &VectorField2D) -> Vec<f64> {
        let m = u.m();
        let tris = u.mesh().triangles();
        let base = u.at(self.anchor);
        let mut out = Vec::with_capacity(self.points.len() * m);
        for &(t, l, _) in &self.points {
            let tri = tris[t];
            for (c, b) in base.iter().enumerate() {
                out.push((0..3).map(|k| l[k] * (u.at(tri[k])[c] - b)).sum());
            }
        }
        out
    }

    /// `(u)_B`.
    pub fn mean(&self, u: &VectorField2D) -> Vec<f64> {
        let m = u.m();
        let rel = self.relative_values(u);
        let base = u.at(self.anchor);
        (0..m)
            .map(|c| base[c] + self.weighted_mean(&rel, m, c))
            .collect()
    }

    fn weighted_mean(&self, rel: &[f64], m: usize, c: usize) -> f64 {
        self.points.iter().enumerate().map(|(q, p)| p.2 * rel[q * m + c]).sum::<f64>() / self.area
    }

    /// `⨍_B |u - (u)_B|`. Values are taken relative to a fixed vertex
    /// first, so adding a representable constant to `u` changes nothing.
    pub fn excess(&self, u: &VectorField2D) -> f64 {
        let m = u.m();
        let rel = self.relative_values(u);
        let mean: Vec<f64> = (0..m).map(|c| self.weighted_mean(&rel, m, c)).collect();
        self.points
            .iter()
            .enumerate()
            .map(|(q, p)| {
                let d: f64 = (0..m).map(|c| (rel[q * m + c] - mean[c]).powi(2)).sum();
                p.2 * d.sqrt()
            })
            .sum::<f64>()
            / self.area
    }

    /// `⨍_B f(u)`.
    pub fn average<F: Fn(&[f64]) -> f64>(&self, u: &VectorField2D, f: F) -> f64 {
        let mut buf = vec![0.0; u.m()];
        let tris = u.mesh().triangles();
        self.points
            .iter()
            .map(|&(t, l, w)| {
                let tri = tris[t];
                for (c, b) in buf.iter_mut().enumerate() {
                    *b = (0..3).map(|k| l[k] * u.at(tri[k])[c]).sum();
                }
                w * f(&buf)
            })
            .sum::<f64>()
            / self.area
    }

    /// `⨍_B f(Du)`; gradients are constant on each triangle.
    pub fn average_gradient<F: Fn(&[f64]) -> f64>(&self, u: &VectorField2D, f: F) -> f64 {
        self.triangles.iter().map(|&(t, w)| w * f(&u.gradient(t))).sum::<f64>() / self.area
    }

    /// `⨍_B |u|`.
    pub fn mean_norm(&self, u: &VectorField2D) -> f64 {
        self.average(u, |x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

/// `E(u; B_r(x0))`.
pub fn excess(u: &VectorField2D, x0: [f64; 2], r: f64) -> Result<f64> {
    Ok(BallQuadrature::new(u.mesh(), x0, r)?.excess(u))
}

/// Largest triangle diameter among triangles meeting `B_r(x0)`.
pub fn local_mesh_size(mesh: &Mesh2D, x0: [f64; 2], r: f64) -> f64 {
    (0..mesh.num_triangles())
        .filter(|&t| {
            let c = mesh.centroid(t);
            (c[0] - x0[0]).hypot(c[1] - x0[1]) <= r
        })
        .map(|t| mesh.diameter(t))
        .fold(0.0, f64::max)
}

/// Whether `B_r(x0)` is at least `10` triangles across.
pub fn resolvable(mesh: &Mesh2D, x0: [f64; 2], r: f64) -> bool {
    let h = local_mesh_size(mesh, x0, r);
    h > 0.0 && 2.0 * r >= 10.0 * h
}

/// Excess on the balls `B^j = B_{r_j}(x0)`, `r_j = σ^{j+1} r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessSequence {
    pub center: [f64; 2],
    pub base_radius: f64,
    pub sigma: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl ExcessSequence {
    /// Least-squares slope of `log E_j` against `log r_j`; `None` when
    /// fewer than two values are positive.
    pub fn decay_exponent(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .radii
            .iter()
            .zip(&self.values)
            .filter(|(_, e)| **e > 0.0)
            .map(|(r, e)| (r.ln(), e.ln()))
            .collect();
        (pts.len() >= 2).then(|| least_squares(&pts).0)
    }
}

/// Default exponents of the excess-decay step.
pub const ALPHA_V: f64 = 0.5;
pub const ALPHA_D: f64 = 0.5 * (ALPHA_V + 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessDecay {
    pub sequence: ExcessSequence,
    /// Samples `E_{j+1}` against `σ^{α_D} E_j + r_j g⁻¹(|μ|(B^j)/r_j^{n-1})`;
    /// the fitted constant bounds `c_D` and `c_E` jointly.
    pub report: EstimateReport,
    /// Separate constants minimizing `c_D + c_E`.
    pub c_d: f64,
    pub c_e: f64,
    pub exponent: Option<f64>,
    /// Levels dropped because their balls were under-resolved.
    pub truncated: usize,
}

/// Excess decay along concentric balls, tested against
/// `E_{j+1} <= c_D σ^{α_D} E_j + c_E r_j g⁻¹(|μ|(B^j)/r_j^{n-1})`.
#[allow(clippy::too_many_arguments)]
pub fn excess_decay_run(
    spec: &OperatorSpec,
    u: &VectorField2D,
    load: &MeasureData,
    x0: [f64; 2],
    r: f64,
    sigma: f64,
    levels: usize,
    alpha_d: f64,
) -> Result<ExcessDecay> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Validation(format!("sigma must lie in (0, 1), got {sigma}")));
    }
    if levels == 0 {
        return Err(Error::Validation("need at least one level".into()));
    }
    let mesh = u.mesh();
    let mut radii = Vec::new();
    for j in 0..=levels {
        let rj = r * sigma.powi(j as i32 + 1);
        if !resolvable(mesh, x0, rj) {
            break;
        }
        radii.push(rj);
    }
    let truncated = levels + 1 - radii.len();
    if truncated > 0 {
        log::warn!("excess decay at {x0:?}: {truncated} under-resolved levels dropped");
    }
    let values = radii
        .iter()
        .map(|&rj| excess(u, x0, rj))
        .collect::<Result<Vec<_>>>()?;
    let decay = sigma.powf(alpha_d);
    let mut terms = Vec::new();
    for j in 0..values.len().saturating_sub(1) {
        let rj = radii[j];
        let mass = load.ball_mass(&x0, rj);
        let mass_term = rj * spec.young.invert_g(mass / rj.powi(spec.n as i32 - 1))?;
        terms.push((values[j + 1], decay * values[j], mass_term));
    }
    let (c_d, c_e) = fit_two_constants(&terms);
    let report = EstimateReport::new(terms.iter().map(|&(l, a, b)| EstimateSample::new(l, a + b)).collect())
        .with_meta("sigma", sigma)
        .with_meta("alpha_d", alpha_d)
        .with_meta("c_d", c_d)
        .with_meta("c_e", c_e)
        .with_meta("truncated_levels", truncated);
    let sequence = ExcessSequence {
        center: x0,
        base_radius: r,
        sigma,
        radii,
        values,
    };
    Ok(ExcessDecay {
        exponent: sequence.decay_exponent(),
        sequence,
        report,
        c_d,
        c_e,
        truncated,
    })
}

/// Smallest `c_D + c_E` with `y <= c_D a + c_E b` for every `(y, a, b)`.
/// The optimum of this two-variable linear program sits at a vertex of the
/// feasible region, so candidate vertices are enumerated.
fn fit_two_constants(terms: &[(f64, f64, f64)]) -> (f64, f64) {
    let needed: Vec<_> = terms.iter().copied().filter(|t| t.0 > 0.0).collect();
    if needed.is_empty() {
        return (0.0, 0.0);
    }
    let feasible = |cd: f64, ce: f64| {
        cd >= 0.0 && ce >= 0.0 && needed.iter().all(|&(y, a, b)| y <= (cd * a + ce * b) * (1.0 + 1e-12))
    };
    let mut cands = Vec::new();
    let max_d = needed.iter().map(|&(y, a, _)| if a > 0.0 { y / a } else { f64::INFINITY }).fold(0.0, f64::max);
    let max_e = needed.iter().map(|&(y, _, b)| if b > 0.0 { y / b } else { f64::INFINITY }).fold(0.0, f64::max);
    cands.push((max_d, 0.0));
    cands.push((0.0, max_e));
    for (i, &(y1, a1, b1)) in needed.iter().enumerate() {
        if a1 > 0.0 {
            // on the line of constraint i, with the other constant at zero
            let cd = y1 / a1;
            let ce = needed.iter().map(|&(y, a, b)| if b > 0.0 { (y - cd * a) / b } else { 0.0 }).fold(0.0, f64::max);
            cands.push((cd, ce));
        }
        for &(y2, a2, b2) in &needed[i + 1..] {
            let det = a1 * b2 - a2 * b1;
            if det.abs() > 1e-300 {
                cands.push(((y1 * b2 - y2 * b1) / det, (a1 * y2 - a2 * y1) / det));
            }
        }
    }
    cands
        .into_iter()
        .filter(|&(d, e)| d.is_finite() && e.is_finite() && feasible(d, e))
        .min_by(|x, y| (x.0 + x.1).total_cmp(&(y.0 + y.1)))
        .unwrap_or((f64::INFINITY, f64::INFINITY))
}
