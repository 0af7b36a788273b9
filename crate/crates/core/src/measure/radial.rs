//! Radially symmetric measures described by their centered mass function
//! `M(r) = |mu|(B_r(center))`.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::young::YoungFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialMass {
    /// `M(r) = coef * min(r, radius)^exponent`.
    Power { coef: f64, exponent: f64, radius: f64 },
    /// `M(r) = scale * r^{n-theta} G(r^{theta-1})` for `r <= radius`, the
    /// extremal profile of the Orlicz–Morrey density condition.
    Morrey {
        young: YoungFunction,
        theta: f64,
        scale: f64,
        radius: f64,
    },
}

/// Area of the unit sphere `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    let n = n as f64;
    2.0 * std::f64::consts::PI.powf(n / 2.0) / statrs::function::gamma::gamma(n / 2.0)
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

impl RadialMass {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            RadialMass::Power {
                coef,
                exponent,
                radius,
            } => {
                if !(*coef >= 0.0 && *exponent > 0.0 && *radius > 0.0) {
                    return Err(Error::Validation(format!(
                        "power mass profile needs coef >= 0, exponent > 0, radius > 0; got {coef}, {exponent}, {radius}"
                    )));
                }
            }
            RadialMass::Morrey {
                theta,
                scale,
                radius,
                ..
            } => {
                if !(*theta > 0.0 && *theta < 1.0 && *scale >= 0.0 && *radius > 0.0) {
                    return Err(Error::Validation(format!(
                        "Morrey mass profile needs theta in (0,1), scale >= 0, radius > 0; got {theta}, {scale}, {radius}"
                    )));
                }
                // nondecreasing and vanishing at the center
                let samples: Vec<f64> = (0..=64)
                    .map(|k| self.mass(radius * 10f64.powf(-12.0 * k as f64 / 64.0), n))
                    .collect();
                if samples.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12)) {
                    return Err(Error::Validation(format!(
                        "Morrey mass profile with theta = {theta} is not increasing in r"
                    )));
                }
                if *scale > 0.0 && samples[64] > 0.05 * samples[0] {
                    return Err(Error::Validation(format!(
                        "Morrey mass profile with theta = {theta} concentrates at the center"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        match self {
            RadialMass::Power { radius, .. } | RadialMass::Morrey { radius, .. } => *radius,
        }
    }

    /// `M(r)`, constant beyond the support radius.
    pub fn mass(&self, r: f64, n: usize) -> f64 {
        let r = r.min(self.radius());
        if r <= 0.0 {
            return 0.0;
        }
        match self {
            RadialMass::Power { coef, exponent, .. } => coef * r.powf(*exponent),
            RadialMass::Morrey {
                young,
                theta,
                scale,
                ..
            } => scale * r.powf(n as f64 - theta) * young.value(r.powf(theta - 1.0)),
        }
    }

    pub fn total(&self, n: usize) -> f64 {
        self.mass(self.radius(), n)
    }

    /// `M'(s)`, zero beyond the support radius.
    pub fn mass_density(&self, s: f64, n: usize) -> f64 {
        if s <= 0.0 || s > self.radius() {
            return 0.0;
        }
        match self {
            RadialMass::Power { coef, exponent, .. } => coef * exponent * s.powf(exponent - 1.0),
            RadialMass::Morrey {
                young,
                theta,
                scale,
                ..
            } => {
                let nf = n as f64;
                let t = s.powf(theta - 1.0);
                scale
                    * ((nf - theta) * s.powf(nf - theta - 1.0) * young.value(t)
                        + s.powf(nf - theta) * young.deriv(t) * (theta - 1.0) * s.powf(theta - 2.0))
            }
        }
    }

    /// Volume density at distance `s` from the center.
    pub fn volume_density(&self, s: f64, n: usize) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.mass_density(s, n) / (sphere_area(n) * s.powi(n as i32 - 1))
    }

    /// `|mu|(closed B_r(x0))` for a ball whose center lies at distance `d`
    /// from the center of symmetry.
    pub fn ball_mass(&self, d: f64, r: f64, n: usize) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        if d <= 1e-14 * r.max(self.radius()) {
            return self.mass(r, n);
        }
        // spheres with s <= r - d lie entirely inside the ball
        let inner = (r - d).max(0.0);
        let mut total = self.mass(inner, n);
        let lo = (d - r).abs();
        let hi = (d + r).min(self.radius());
        if hi <= lo {
            return total;
        }
        let rule = GaussLegendre::new(16);
        let panels = 16;
        // s = lo + (hi - lo)(1 - cos φ)/2 removes the square-root behavior of
        // the cap fraction at both ends
        let f = |phi: f64| {
            let s = lo + 0.5 * (hi - lo) * (1.0 - phi.cos());
            let ds = 0.5 * (hi - lo) * phi.sin();
            self.mass_density(s, n) * cap_fraction(s, d, r, n) * ds
        };
        total += rule.composite(f, 0.0, std::f64::consts::PI, panels);
        total
    }
}

/// Fraction of the sphere `|y - c| = s` inside the closed ball
/// `B_r(x0)` with `|x0 - c| = d`.
pub fn cap_fraction(s: f64, d: f64, r: f64, n: usize) -> f64 {
    if s + d <= r {
        return 1.0;
    }
    if s >= d + r || s <= d - r {
        return 0.0;
    }
    let c = ((s * s + d * d - r * r) / (2.0 * s * d)).clamp(-1.0, 1.0);
    if n == 2 {
        return c.acos() / std::f64::consts::PI;
    }
    let half = 0.5 * beta_reg((n as f64 - 1.0) / 2.0, 0.5, 1.0 - c * c);
    if c >= 0.0 {
        half
    } else {
        1.0 - half
    }
}
