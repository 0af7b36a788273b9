//! Numerical companions of the two iteration lemmas: absorption of a
//! fraction of the left-hand side across shrinking radii, and geometric
//! iteration of a decay inequality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of [`iterate_absorb`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbCheck {
    /// Constant produced by the interpolation argument.
    pub c: f64,
    /// `φ(R/2)`.
    pub lhs: f64,
    /// `c (A + B / R^β)`.
    pub rhs: f64,
    pub holds: bool,
}

/// Constant of the absorption argument: with radii
/// `r_{i+1} = r_i + (1 - λ) λ^i R/4`, `λ^β = 2/3`, iterating the
/// hypothesis gives `φ(R/2) <= 2A + 4 (4/((1-λ)R))^β B`.
pub fn absorb_constant(beta: f64) -> f64 {
    let lambda = (2.0f64 / 3.0).powf(1.0 / beta);
    (4.0 * 4f64.powf(beta) / (1.0 - lambda).powf(beta)).max(2.0)
}

/// Checks `φ(r₁) <= φ(r₂)/2 + A + B/(r₂ - r₁)^β` for all sampled pairs
/// `R/2 <= r₁ < r₂ <= 3R/4`, then asserts `φ(R/2) <= c (A + B/R^β)`.
pub fn iterate_absorb<F: Fn(f64) -> f64>(phi: F, radius: f64, a: f64, b: f64, beta: f64, samples: usize) -> Result<AbsorbCheck> {
    if !(radius > 0.0 && a >= 0.0 && b >= 0.0 && beta > 0.0) || samples < 2 {
        return Err(Error::Validation(format!(
            "need R > 0, A, B >= 0, beta > 0 and two samples; got R = {radius}, A = {a}, B = {b}, beta = {beta}"
        )));
    }
    let grid: Vec<f64> = (0..samples)
        .map(|i| radius * (0.5 + 0.25 * i as f64 / (samples - 1) as f64))
        .collect();
    let values: Vec<f64> = grid.iter().map(|&r| phi(r)).collect();
    if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Validation(format!("phi must be finite and >= 0, got {} at {}", values[i], grid[i])));
    }
    for i in 0..samples {
        for j in i + 1..samples {
            let bound = 0.5 * values[j] + a + b / (grid[j] - grid[i]).powf(beta);
            if values[i] > bound * (1.0 + 1e-12) {
                return Err(Error::Hypothesis {
                    first: grid[i],
                    second: grid[j],
                    detail: format!("phi(r1) = {} exceeds phi(r2)/2 + A + B/(r2-r1)^beta = {bound}", values[i]),
                });
            }
        }
    }
    let c = absorb_constant(beta);
    let lhs = values[0];
    let rhs = c * (a + b / radius.powf(beta));
    Ok(AbsorbCheck {
        c,
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

/// Parameters of the geometric iteration
/// `φ(ρ) <= A [(ρ/r)^α + ε] φ(r) + B r^β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricHypothesis {
    pub radius: f64,
    pub a: f64,
    pub eps: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricCheck {
    /// Largest admissible `ε`.
    pub eps0: f64,
    pub eps0_ok: bool,
    /// Constant of the conclusion `φ(ρ) <= c [(ρ/r)^γ φ(r) + B ρ^β]`.
    pub c: f64,
    /// Whether the conclusion holds on every sampled pair; `None` when
    /// `ε >= ε₀` and no assertion is made.
    pub holds: Option<bool>,
    /// Largest `φ(ρ) / [(ρ/r)^γ φ(r) + B ρ^β]` over the samples.
    pub worst_ratio: f64,
}

impl GeometricHypothesis {
    /// `(τ, ε₀, c)`: `τ` solves `2Aτ^α <= τ^γ`, `ε₀ = τ^α`, and iterating
    /// `φ(τr) <= τ^γ φ(r) + B r^β` yields
    /// `c = max(τ^{-γ}, τ^{-2β} / (1 - τ^{γ-β}))`.
    pub fn constants(&self) -> (f64, f64, f64) {
        let tau = (2.0 * self.a).powf(-1.0 / (self.alpha - self.gamma)).min(0.5);
        let eps0 = tau.powf(self.alpha);
        let c = tau
            .powf(-self.gamma)
            .max(tau.powf(-2.0 * self.beta) / (1.0 - tau.powf(self.gamma - self.beta)));
        (tau, eps0, c)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.radius > 0.0
            && self.a > 0.0
            && self.eps >= 0.0
            && self.b >= 0.0
            && self.beta >= 0.0
            && self.beta < self.gamma
            && self.gamma < self.alpha;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "geometric iteration needs R, A > 0, eps, B >= 0 and 0 <= beta < gamma < alpha; got {self:?}"
            )))
        }
    }
}

/// Checks the hypothesis on log-spaced pairs `0 < ρ <= r <= R` and, when
/// `ε < ε₀`, asserts the conclusion on the same pairs.
pub fn iterate_geometric<F: Fn(f64) -> f64>(phi: F, hyp: &GeometricHypothesis, samples: usize) -> Result<GeometricCheck> {
    hyp.validate()?;
    if samples < 2 {
        return Err(Error::Validation("need at least two samples".into()));
    }
    let grid: Vec<f64> = (0..samples)
        .map(|i| hyp.radius * 1e-6f64.powf(1.0 - i as f64 / (samples - 1) as f64))
        .collect();
    let values: Vec<f64> = grid.iter().map(|&r| phi(r)).collect();
    for i in 0..samples {
        if !(values[i].is_finite() && values[i] >= 0.0) || (i > 0 && values[i] < values[i - 1]) {
            return Err(Error::Validation(format!("phi must be nonnegative and nondecreasing; fails at {}", grid[i])));
        }
    }
    for i in 0..samples {
        for j in i..samples {
            let (rho, r) = (grid[i], grid[j]);
            let bound = hyp.a * ((rho / r).powf(hyp.alpha) + hyp.eps) * values[j] + hyp.b * r.powf(hyp.beta);
            if values[i] > bound * (1.0 + 1e-12) {
                return Err(Error::Hypothesis {
                    first: rho,
                    second: r,
                    detail: format!("phi(rho) = {} exceeds A[(rho/r)^alpha + eps] phi(r) + B r^beta = {bound}", values[i]),
                });
            }
        }
    }
    let (_, eps0, c) = hyp.constants();
    let eps0_ok = hyp.eps < eps0;
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        for j in i..samples {
            let (rho, r) = (grid[i], grid[j]);
            let rhs = (rho / r).powf(hyp.gamma) * values[j] + hyp.b * rho.powf(hyp.beta);
            if values[i] > 0.0 {
                worst = worst.max(values[i] / rhs);
            }
        }
    }
    Ok(GeometricCheck {
        eps0,
        eps0_ok,
        c,
        holds: eps0_ok.then_some(worst <= c),
        worst_ratio: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_phi_is_absorbed() {
        let chk = iterate_absorb(|_| 3.0, 1.0, 3.0, 0.0, 2.0, 40).unwrap();
        assert!(chk.c >= 2.0 && chk.holds);
    }

    #[test]
    fn blow_up_family() {
        for beta in [0.5, 1.0, 2.0, 3.0] {
            for r in [0.5, 1.0, 4.0] {
                let b = 1.7;
                let phi = |s: f64| b / (0.75 * r - s + r / 8.0).powf(beta);
                let chk = iterate_absorb(phi, r, 0.0, b, beta, 60).unwrap();
                assert!(chk.holds, "beta {beta} R {r}: {chk:?}");
            }
        }
    }

    #[test]
    fn violation_has_a_witness() {
        match iterate_absorb(|r| (20.0 * r).exp(), 1.0, 0.0, 1e-3, 1.0, 20) {
            Err(Error::Hypothesis { first, second, .. }) => assert!(first < second),
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn pure_powers() {
        let hyp = GeometricHypothesis {
            radius: 1.0,
            a: 1.0,
            eps: 0.0,
            alpha: 2.0,
            b: 0.0,
            beta: 0.0,
            gamma: 1.5,
        };
        let chk = iterate_geometric(|r| r * r, &hyp, 50).unwrap();
        assert!(chk.eps0_ok && chk.holds == Some(true));
        let hyp = GeometricHypothesis {
            b: 1.0,
            beta: 0.5,
            ..hyp
        };
        let chk = iterate_geometric(|r| r.sqrt(), &hyp, 50).unwrap();
        assert_eq!(chk.holds, Some(true));
    }

    #[test]
    fn large_eps_makes_no_claim() {
        let hyp = GeometricHypothesis {
            radius: 1.0,
            a: 1.0,
            eps: 0.5,
            alpha: 2.0,
            b: 0.0,
            beta: 0.0,
            gamma: 1.0,
        };
        let chk = iterate_geometric(|r| r * r, &hyp, 20).unwrap();
        assert!(!chk.eps0_ok);
        assert_eq!(chk.holds, None);
    }
}
