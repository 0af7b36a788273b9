//! The auxiliary scale `H_s(t) = ∫_0^t g(r)^{1-s} G(r)^s dr / r`.

use super::YoungFunction;
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

#[derive(Debug, Clone)]
pub struct HsScale {
    parent: YoungFunction,
    s: f64,
    n: usize,
    gamma: f64,
}

impl HsScale {
    /// Builds the scale for dimension 2 with the default `gamma`.
    pub fn new(parent: YoungFunction, s: f64) -> Result<Self> {
        Self::with_dimension(parent, s, 2, None)
    }

    /// `gamma` defaults to `1/(2 s_G n)`, the midpoint of `(0, 1/(s_G n))`.
    pub fn with_dimension(parent: YoungFunction, s: f64, n: usize, gamma: Option<f64>) -> Result<Self> {
        let idx = parent.indices();
        let gamma = gamma.unwrap_or(1.0 / (2.0 * idx.upper * n as f64));
        if !(gamma > 0.0 && gamma < 1.0 / (idx.upper * n as f64)) {
            return Err(Error::Parameter(format!(
                "gamma = {gamma} outside (0, 1/(s_G n))"
            )));
        }
        let (lo, hi) = admissible_range(&parent, n, gamma);
        if !(s > lo && s < hi) {
            return Err(Error::Parameter(format!(
                "s = {s} outside the admissible range max{{2 - i_G, 0}} < s < s_m = ({lo}, {hi})"
            )));
        }
        Ok(Self { parent, s, n, gamma })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn parent(&self) -> &YoungFunction {
        &self.parent
    }

    /// `g(t)^{1-s} G(t)^s`.
    pub fn profile(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.parent.deriv(t).powf(1.0 - self.s) * self.parent.value(t).powf(self.s)
    }

    /// `H_s'(t) = g^{1-s} G^s / t`.
    pub fn deriv(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.profile(t) / t
    }

    /// Quadrature in `u = ln(t/r)`, i.e. log-spaced nodes accumulating at 0.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("H_s needs finite t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let rule = GaussLegendre::new(16);
        let mut total = 0.0;
        for k in 0..400 {
            let part = rule.integrate(|u| self.profile(t * (-u).exp()), k as f64, k as f64 + 1.0);
            total += part;
            if part <= 1e-17 * total {
                break;
            }
        }
        Ok(total)
    }

    /// `(c1, c2)` with `c1 g^{1-s} G^s <= H_s <= c2 g^{1-s} G^s`, from the
    /// index bounds on `t (g^{1-s} G^s)' / (g^{1-s} G^s)`.
    pub fn comparison_constants(&self) -> (f64, f64) {
        let idx = self.parent.indices();
        (1.0 / (self.s + idx.upper - 1.0), 1.0 / (self.s + idx.lower - 1.0))
    }

    /// `[s + i_G - 2, s + s_G - 2]`, the band of `t H_s''/H_s'`.
    pub fn elasticity_band(&self) -> (f64, f64) {
        let idx = self.parent.indices();
        (self.s + idx.lower - 2.0, self.s + idx.upper - 2.0)
    }
}

/// `(max{2 - i_G, 0}, s_m)` with `s_m = (i_G - gamma s_G n)/(i_G + s_G n)`.
pub fn admissible_range(parent: &YoungFunction, n: usize, gamma: f64) -> (f64, f64) {
    let idx = parent.indices();
    let nn = n as f64;
    let lo = (2.0 - idx.lower).max(0.0);
    let hi = (idx.lower - gamma * idx.upper * nn) / (idx.lower + idx.upper * nn);
    (lo, hi)
}
