//! Radial solutions on a ball, the extremal configurations for the
//! pointwise potential bound.
//!
//! For a radial load with centered mass function `M`, the flux balance
//! `|S^{n-1}| s^{n-1} g(|u'(s)|) = M(s)` with `u(R) = 0` gives
//! `u(r) = ∫_r^R g⁻¹(M(s) / (|S^{n-1}| s^{n-1})) ds`.

use crate::error::{Error, Result};
use crate::measure::{sphere_area, RadialMass};
use crate::quad::{dyadic_to_zero, GaussLegendre, Integral};
use crate::young::YoungFunction;

/// Source of a radial solution.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialSource {
    /// Point mass at the center.
    Point(f64),
    /// Diffuse radial mass.
    Profile(Box<RadialMass>),
}

#[derive(Debug, Clone)]
pub struct RadialReference {
    young: YoungFunction,
    source: RadialSource,
    n: usize,
    radius: f64,
    rule: GaussLegendre,
    center: Integral,
}

/// Radial solution for a point mass at the center of `B_R`.
pub fn radial_reference(young: &YoungFunction, mass: f64, n: usize, radius: f64) -> Result<RadialReference> {
    RadialReference::new(young, RadialSource::Point(mass), n, radius)
}

impl RadialReference {
    pub fn new(young: &YoungFunction, source: RadialSource, n: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || n < 2 {
            return Err(Error::Validation(format!("need R > 0 and n >= 2, got R = {radius}, n = {n}")));
        }
        match &source {
            RadialSource::Point(m) if !(*m >= 0.0 && m.is_finite()) => {
                return Err(Error::Validation(format!("point mass must be >= 0, got {m}")));
            }
            RadialSource::Profile(p) => p.validate(n)?,
            _ => {}
        }
        let mut reference = Self {
            young: young.clone(),
            source,
            n,
            radius,
            rule: GaussLegendre::new(16),
            center: Integral::Finite { value: 0.0 },
        };
        // probe the slope over the whole range so range errors surface here
        reference.slope(radius)?;
        let probe = |s: f64| reference.slope(s).unwrap_or(f64::INFINITY);
        let d = dyadic_to_zero(&reference.rule, probe, radius, 60);
        reference.center = if d.shells.iter().any(|c| !c.is_finite()) {
            Integral::Divergent {
                partial: d.shells.iter().filter(|c| c.is_finite()).sum(),
            }
        } else {
            d.integral()
        };
        Ok(reference)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn mass_within(&self, s: f64) -> f64 {
        match &self.source {
            RadialSource::Point(m) => *m,
            RadialSource::Profile(p) => p.mass(s, self.n),
        }
    }

    /// `|u'(s)|`.
    pub fn slope(&self, s: f64) -> Result<f64> {
        let flux = self.mass_within(s) / (sphere_area(self.n) * s.powi(self.n as i32 - 1));
        self.young.invert_g(flux)
    }

    /// Central value; divergent exactly when the Wolff potential of the
    /// load at the center is.
    pub fn center(&self) -> Integral {
        self.center
    }

    /// `u(r)`; the central value may be infinite.
    pub fn value(&self, r: f64) -> f64 {
        if r >= self.radius {
            return 0.0;
        }
        if r <= 0.0 {
            return self.center.value();
        }
        let f = |s: f64| self.slope(s).unwrap_or(f64::NAN);
        // split at the edge of a diffuse support, where M has a kink
        let mut cuts = vec![r];
        if let RadialSource::Profile(p) = &self.source {
            if p.radius() > r && p.radius() < self.radius {
                cuts.push(p.radius());
            }
        }
        cuts.push(self.radius);
        cuts.windows(2).map(|w| self.rule.geometric(f, w[0], w[1], 1.5)).sum()
    }
}
