//! Mean-oscillation profiles at a point: vanishing mean oscillation and
//! Campanato-type power fits.

use serde::{Deserialize, Serialize};

use super::excess::excess;
use crate::error::{Error, Result};
use crate::quad::least_squares;
use crate::solver::VectorField2D;

/// Default relative drop required for a profile to count as vanishing.
pub const VMO_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmoProfile {
    pub radii: Vec<f64>,
    pub oscillations: Vec<f64>,
    /// The profile falls below `threshold` times its first value.
    pub vanishing: bool,
}

fn check_decreasing(radii: &[f64]) -> Result<()> {
    if radii.windows(2).any(|w| !(w[1] < w[0])) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Validation("radii must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// Excess of `u` on `B_ϱ(x0)` for each `ϱ` in `radii` (decreasing).
pub fn vmo_profile(u: &VectorField2D, x0: [f64; 2], radii: &[f64], threshold: f64) -> Result<VmoProfile> {
    check_decreasing(radii)?;
    if radii.len() < 2 {
        return Err(Error::Validation("a profile needs at least two radii".into()));
    }
    let oscillations = radii.iter().map(|&r| excess(u, x0, r)).collect::<Result<Vec<_>>>()?;
    let first = oscillations[0];
    let last = *oscillations.last().unwrap();
    Ok(VmoProfile {
        radii: radii.to_vec(),
        vanishing: first == 0.0 || last <= threshold * first,
        oscillations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampanatoFit {
    /// Fitted exponent in `E(u; B_ϱ) ≈ c ϱ^θ`; `None` for a vanishing profile.
    pub theta_hat: Option<f64>,
    pub c_hat: Option<f64>,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    /// All excesses vanish; every exponent fits.
    pub exact: bool,
}

/// Least-squares slope of `log E(u; B_ϱ(x0))` against `log ϱ`.
pub fn campanato_fit(u: &VectorField2D, x0: [f64; 2], radii: &[f64]) -> Result<CampanatoFit> {
    check_decreasing(radii)?;
    if radii.len() < 4 || radii[0] < 4.0 * radii[radii.len() - 1] {
        return Err(Error::Validation(
            "a Campanato fit needs at least 4 radii spanning two octaves".into(),
        ));
    }
    let values = radii.iter().map(|&r| excess(u, x0, r)).collect::<Result<Vec<_>>>()?;
    if values.iter().all(|&e| e == 0.0) {
        return Ok(CampanatoFit {
            theta_hat: None,
            c_hat: None,
            residual: 0.0,
            exact: true,
        });
    }
    if values.contains(&0.0) {
        return Err(Error::Validation("excess vanishes on part of the profile".into()));
    }
    let pts: Vec<(f64, f64)> = radii.iter().zip(&values).map(|(r, e)| (r.ln(), e.ln())).collect();
    let (slope, intercept, residual) = least_squares(&pts);
    Ok(CampanatoFit {
        theta_hat: Some(slope),
        c_hat: Some(intercept.exp()),
        residual,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Mesh2D;
    use std::sync::Arc;

    fn mesh() -> Arc<Mesh2D> {
        Arc::new(Mesh2D::graded_square([0.0, 0.0], 1.0, 8, 32, 8).unwrap())
    }

    #[test]
    fn cone_is_lipschitz() {
        let u = VectorField2D::from_fn(mesh(), 1, |p| vec![p[0].hypot(p[1])]);
        let fit = campanato_fit(&u, [0.0, 0.0], &[0.5, 0.25, 0.125, 0.0625]).unwrap();
        assert!((fit.theta_hat.unwrap() - 1.0).abs() < 0.02, "{fit:?}");
    }

    #[test]
    fn constant_is_an_exact_fit() {
        let u = VectorField2D::from_fn(mesh(), 1, |_| vec![2.0]);
        let fit = campanato_fit(&u, [0.0, 0.0], &[0.5, 0.25, 0.125, 0.0625]).unwrap();
        assert!(fit.exact && fit.theta_hat.is_none());
        assert!(campanato_fit(&u, [0.0, 0.0], &[0.5, 0.4, 0.3, 0.2]).is_err());
    }

    #[test]
    fn continuous_versus_jump() {
        let radii = [0.4, 0.2, 0.1, 0.05];
        let smooth = VectorField2D::from_fn(mesh(), 1, |p| vec![(p[0] + 2.0 * p[1]).sin()]);
        assert!(vmo_profile(&smooth, [0.0, 0.0], &radii, VMO_THRESHOLD).unwrap().vanishing);
        // a jump across x = 0, resolved at the mesh scale
        let jump = VectorField2D::from_fn(mesh(), 1, |p| vec![(p[0] / 1e-5).tanh()]);
        let prof = vmo_profile(&jump, [0.0, 0.0], &radii, VMO_THRESHOLD).unwrap();
        assert!(!prof.vanishing, "{prof:?}");
    }
}
