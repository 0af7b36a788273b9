//! Layer-cake identity for weighted distribution functions:
//! `∫₀^∞ ν({|f| < t}) (1+t)^{-2-γ} dt = (1+γ)⁻¹ ∫ ω (1+|f|)^{-1-γ}` with
//! `ν = ω dx`.

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavalieriCheck {
    /// Left side, integrated over the level parameter.
    pub layers: f64,
    /// Right side, integrated cell by cell.
    pub direct: f64,
}

impl CavalieriCheck {
    pub fn relative_error(&self) -> f64 {
        (self.layers - self.direct).abs() / self.direct.abs().max(f64::MIN_POSITIVE)
    }
}

/// Both sides of the identity for cellwise-constant `ω >= 0` and `f`.
///
/// The level integral is taken in `u = 1/(1+t)`, where it reads
/// `∫₀¹ ν({|f| < 1/u - 1}) u^γ du`; the distribution function is a step
/// function of `u` and each step is integrated by Gauss–Legendre.
pub fn cavalieri_identity(omega: &[f64], f: &[f64], cell_area: f64, gamma: f64) -> Result<CavalieriCheck> {
    if omega.len() != f.len() || omega.iter().any(|w| !(*w >= 0.0)) || !(gamma > -1.0) || !(cell_area > 0.0) {
        return Err(Error::Validation(
            "need matching grids, omega >= 0, gamma > -1 and a positive cell area".into(),
        ));
    }
    let direct = omega
        .iter()
        .zip(f)
        .map(|(w, v)| w * cell_area * (1.0 + v.abs()).powf(-1.0 - gamma))
        .sum::<f64>()
        / (1.0 + gamma);
    // cell i joins the level set once u < u_i = 1/(1+|f_i|)
    let mut jumps: Vec<(f64, f64)> = omega
        .iter()
        .zip(f)
        .map(|(w, v)| (1.0 / (1.0 + v.abs()), w * cell_area))
        .collect();
    jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rule = GaussLegendre::new(16);
    let total: f64 = jumps.iter().map(|j| j.1).sum();
    let mut mass = total;
    let mut lo = 0.0;
    let mut layers = 0.0;
    for (u, w) in jumps {
        if u > lo {
            layers += mass * if lo == 0.0 {
                rule.geometric(|s| s.powf(gamma), u * 1e-14, u, 2.0) + (u * 1e-14).powf(gamma + 1.0) / (gamma + 1.0)
            } else {
                rule.integrate(|s| s.powf(gamma), lo, u)
            };
            lo = u;
        }
        mass -= w;
    }
    Ok(CavalieriCheck { layers, direct })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_on_a_random_grid() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 400;
        let omega: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        for gamma in [-0.5, 0.0, 0.5, 2.0] {
            let chk = cavalieri_identity(&omega, &f, 0.01, gamma).unwrap();
            assert!(chk.relative_error() < 1e-10, "{gamma}: {chk:?}");
        }
    }

    #[test]
    fn rejects_negative_weights() {
        assert!(cavalieri_identity(&[-1.0], &[0.0], 1.0, 0.0).is_err());
    }
}
