//! Tabulated derivative `g` on a logarithmic grid.
//!
//! `ln g` is interpolated in `ln t` by a monotone piecewise-cubic Hermite
//! (Fritsch–Carlson) scheme, so strictly increasing samples give a strictly
//! increasing `g`. Below the first node `g` continues as the power law of the
//! first interval; `G` is accumulated node by node with Gauss–Legendre.

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

#[derive(Debug, Clone)]
pub struct Table {
    pub(crate) t_min: f64,
    pub(crate) t_max: f64,
    pub(crate) samples: Vec<f64>,
    log_t: Vec<f64>,
    log_g: Vec<f64>,
    slopes: Vec<f64>,
    cumulative: Vec<f64>,
    head_exponent: f64,
}

impl Table {
    pub fn new(t_min: f64, t_max: f64, samples: Vec<f64>) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(Error::Validation(format!(
                "tabulated range must satisfy 0 < t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if samples.len() < 4 {
            return Err(Error::Validation(
                "tabulated g needs at least 4 samples".into(),
            ));
        }
        if samples.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::Validation(
                "tabulated g samples must be positive and finite".into(),
            ));
        }
        if samples.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation(
                "tabulated g must be strictly increasing".into(),
            ));
        }
        let n = samples.len();
        let step = (t_max / t_min).ln() / (n - 1) as f64;
        let log_t: Vec<f64> = (0..n).map(|i| t_min.ln() + step * i as f64).collect();
        let log_g: Vec<f64> = samples.iter().map(|g| g.ln()).collect();
        let slopes = pchip_slopes(&log_t, &log_g);
        let head_exponent = (log_g[1] - log_g[0]) / step;
        let mut table = Self {
            t_min,
            t_max,
            samples,
            log_t,
            log_g,
            slopes,
            cumulative: Vec::with_capacity(n),
            head_exponent,
        };
        let rule = GaussLegendre::new(8);
        let mut acc = t_min * table.samples[0] / (head_exponent + 1.0);
        table.cumulative.push(acc);
        for i in 0..n - 1 {
            let a = table.log_t[i].exp();
            let b = table.log_t[i + 1].exp();
            acc += rule.integrate(|t| table.g(t), a, b);
            table.cumulative.push(acc);
        }
        Ok(table)
    }

    fn interval(&self, t: f64) -> usize {
        let step = self.log_t[1] - self.log_t[0];
        let k = ((t.ln() - self.log_t[0]) / step).floor();
        (k.max(0.0) as usize).min(self.log_t.len() - 2)
    }

    /// `(ln g, d ln g / d ln t)` at `t`.
    fn log_eval(&self, t: f64) -> (f64, f64) {
        if t <= self.t_min {
            let lg = self.log_g[0] + self.head_exponent * (t.ln() - self.log_t[0]);
            return (lg, self.head_exponent);
        }
        let last = self.log_t.len() - 1;
        if t >= self.t_max {
            let e = self.slopes[last];
            return (self.log_g[last] + e * (t.ln() - self.log_t[last]), e);
        }
        let i = self.interval(t);
        let h = self.log_t[i + 1] - self.log_t[i];
        let s = (t.ln() - self.log_t[i]) / h;
        let (y0, y1) = (self.log_g[i], self.log_g[i + 1]);
        let (d0, d1) = (self.slopes[i], self.slopes[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let y = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        let dy = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * h * d0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * h * d1)
            / h;
        (y, dy)
    }

    pub fn g(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.log_eval(t).0.exp()
    }

    pub fn dg(&self, t: f64) -> f64 {
        if t <= 0.0 {
            // g ~ c t^k near zero
            return if self.head_exponent > 1.0 {
                0.0
            } else {
                self.samples[0] / self.t_min
            };
        }
        let (lg, e) = self.log_eval(t);
        lg.exp() * e / t
    }

    pub fn big_g(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t <= self.t_min {
            return t * self.g(t) / (self.head_exponent + 1.0);
        }
        let rule = GaussLegendre::new(8);
        let last = self.log_t.len() - 1;
        let i = if t >= self.t_max { last } else { self.interval(t) };
        let a = self.log_t[i].exp();
        self.cumulative[i] + rule.integrate(|r| self.g(r), a, t)
    }
}

/// Fritsch–Carlson derivative estimates (harmonic mean of secants, zero at
/// extrema), which keep the interpolant monotone.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1)
        .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
        .collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        if a * b > 0.0 {
            let w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
            let w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
            d[i] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    d
}
