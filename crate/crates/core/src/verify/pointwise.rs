//! Pointwise potential bounds: `|u(x0)| <= C (W(x0, r) + ⨍_{B_r} |u|)` and
//! its oscillation form `|u(x0) - (u)_{B_r}| <= C (W(x0, r) + E(u; B_r))`.

use serde::{Deserialize, Serialize};

use super::excess::BallQuadrature;
use super::report::{EstimateReport, EstimateSample};
use crate::error::{Error, Result};
use crate::field::OperatorSpec;
use crate::measure::MeasureData;
use crate::quad::Integral;
use crate::solver::VectorField2D;
use crate::wolff::{wolff_potential, WolffQuery};

/// One radius of a pointwise check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseSample {
    pub radius: f64,
    pub potential: Integral,
    /// `⨍_{B_r} |u|`.
    pub mean_norm: f64,
    /// `E(u; B_r)`.
    pub excess: f64,
    /// `|u(x0) - (u)_{B_r}|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseCheck {
    pub center: [f64; 2],
    /// `|u(x0)|`, the nodal interpolant at the center.
    pub value: f64,
    pub samples: Vec<PointwiseSample>,
    pub pointwise: EstimateReport,
    pub oscillation: EstimateReport,
}

/// Evaluates both forms of the pointwise bound over `radii` (largest
/// first). A divergent potential makes the right-hand side infinite, so the
/// bound holds trivially at that radius.
pub fn pointwise_wolff_check(
    spec: &OperatorSpec,
    u: &VectorField2D,
    mu: &MeasureData,
    x0: [f64; 2],
    radii: &[f64],
) -> Result<PointwiseCheck> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Validation("radii must be nonempty and strictly decreasing".into()));
    }
    let at = u
        .interpolate(x0)
        .ok_or_else(|| Error::Validation(format!("point {x0:?} lies outside the mesh")))?;
    let value = at.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut samples = Vec::new();
    for &r in radii {
        let ball = BallQuadrature::new(u.mesh(), x0, r)?;
        let potential = wolff_potential(&WolffQuery::new(&spec.young, mu, &x0, r))?.integral;
        let mean = ball.mean(u);
        samples.push(PointwiseSample {
            radius: r,
            potential,
            mean_norm: ball.mean_norm(u),
            excess: ball.excess(u),
            deviation: at.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
        });
    }
    let pointwise = EstimateReport::new(
        samples
            .iter()
            .map(|s| EstimateSample::new(value, s.potential.value() + s.mean_norm))
            .collect(),
    );
    let oscillation = EstimateReport::new(
        samples
            .iter()
            .map(|s| EstimateSample::new(s.deviation, s.potential.value() + s.excess))
            .collect(),
    );
    Ok(PointwiseCheck {
        center: x0,
        value,
        samples,
        pointwise,
        oscillation,
    })
}
