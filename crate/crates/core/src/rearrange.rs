//! Decreasing rearrangements `f*`, maximal rearrangements `f**`, and the
//! Lorentz and Marcinkiewicz functionals built on them.
//!
//! Profiles are exact step functions: sorting cell values in decreasing order
//! and accumulating cell volumes gives `f*` with no sampling error, and `f**`
//! is then piecewise of the form `c_k + d_k / t`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
pub use crate::quad::Integral;
use crate::quad::{least_squares_slope, GaussLegendre};

/// Right-continuous nonincreasing step function on `[0, total_measure)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementProfile {
    /// Right ends `t_1 < t_2 < ... < t_K = total_measure` of the steps.
    breakpoints: Vec<f64>,
    /// Height of `f*` on `[t_{k-1}, t_k)`.
    values: Vec<f64>,
    /// `∫_0^{t_k} f*`.
    integrals: Vec<f64>,
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Decreasing rearrangement of a nonnegative cellwise-constant function.
pub fn decreasing_rearrangement(values: &[f64], volumes: &[f64]) -> Result<RearrangementProfile> {
    if values.len() != volumes.len() {
        return Err(Error::Validation(format!(
            "{} values but {} cell volumes",
            values.len(),
            volumes.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Validation(format!(
            "rearrangement input must be finite and nonnegative, found {v}"
        )));
    }
    if let Some(v) = volumes.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Validation(format!("cell volume {v} is not a valid measure")));
    }
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| volumes[i] > 0.0).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let mut breakpoints: Vec<f64> = Vec::new();
    let mut heights: Vec<f64> = Vec::new();
    let mut integrals = Vec::new();
    let mut measure = Compensated::default();
    let mut mass = Compensated::default();
    for i in order {
        measure.add(volumes[i]);
        mass.add(values[i] * volumes[i]);
        if heights.last() == Some(&values[i]) {
            *breakpoints.last_mut().unwrap() = measure.value();
            *integrals.last_mut().unwrap() = mass.value();
        } else {
            heights.push(values[i]);
            breakpoints.push(measure.value());
            integrals.push(mass.value());
        }
    }
    Ok(RearrangementProfile {
        breakpoints,
        values: heights,
        integrals,
    })
}

impl RearrangementProfile {
    /// Builds a profile from explicit steps `(width, height)`; heights are
    /// sorted into decreasing order first.
    pub fn from_steps(steps: &[(f64, f64)]) -> Result<Self> {
        let (w, v): (Vec<f64>, Vec<f64>) = steps.iter().copied().unzip();
        decreasing_rearrangement(&v, &w)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total_measure(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }

    /// `∫ f*`, equal to `Σ value·volume` of the source.
    pub fn integral(&self) -> f64 {
        self.integrals.last().copied().unwrap_or(0.0)
    }

    fn step(&self, t: f64) -> Option<usize> {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        (k < self.breakpoints.len()).then_some(k)
    }

    pub fn decreasing(&self, t: f64) -> f64 {
        self.step(t).map_or(0.0, |k| self.values[k])
    }

    /// `∫_0^t f*`.
    pub fn cumulative(&self, t: f64) -> f64 {
        match self.step(t) {
            None => self.integral(),
            Some(k) => {
                let (start, before) = if k == 0 {
                    (0.0, 0.0)
                } else {
                    (self.breakpoints[k - 1], self.integrals[k - 1])
                };
                before + self.values[k] * (t - start)
            }
        }
    }

    /// `f**(t) = (1/t) ∫_0^t f*`, with `f**(0) = f*(0)`.
    pub fn maximal(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.decreasing(0.0);
        }
        self.cumulative(t) / t
    }

    /// `|{f* > s}|`.
    pub fn distribution(&self, s: f64) -> f64 {
        let k = self.values.partition_point(|&v| v > s);
        if k == 0 {
            0.0
        } else {
            self.breakpoints[k - 1]
        }
    }

    /// CSV with columns `t, f_star, f_star_star` at each step start and at
    /// the total measure.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,f_star,f_star_star\n");
        let mut start = 0.0;
        for (k, &end) in self.breakpoints.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{}",
                crate::scenario::csv::fmt_e(start),
                crate::scenario::csv::fmt_e(self.values[k]),
                crate::scenario::csv::fmt_e(self.maximal(start))
            );
            start = end;
        }
        let _ = writeln!(
            out,
            "{},{},{}",
            crate::scenario::csv::fmt_e(start),
            crate::scenario::csv::fmt_e(0.0),
            crate::scenario::csv::fmt_e(self.maximal(start))
        );
        out
    }
}

/// Lorentz exponents `(alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzSpec {
    alpha: f64,
    beta: f64,
}

impl LorentzSpec {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Parameter(format!(
                "Lorentz exponents must be positive, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Steps used to read off the local power law of `f**` near `0`.  Steps
/// below `HEAD_OFFSET` times the first breakpoint are resolution-limited and
/// left out of the fit.
const HEAD_STEPS: usize = 32;
const HEAD_OFFSET: f64 = 64.0;

/// `∫_0^∞ (t^{1/α} f**(t))^β dt/t`.
///
/// Beyond the total measure `f** = ‖f‖_1 / t`, integrated in closed form.
/// Near `0` the local power law of `f**` over the first steps decides
/// divergence when those steps resolve a power profile.
pub fn lorentz_integral(p: &RearrangementProfile, spec: LorentzSpec) -> Integral {
    let (alpha, beta) = (spec.alpha, spec.beta);
    if p.integral() == 0.0 {
        return Integral::Finite { value: 0.0 };
    }
    let rule = GaussLegendre::new(8);
    let integrand = |t: f64| (t.powf(1.0 / alpha) * p.maximal(t)).powf(beta) / t;

    let mut total = 0.0;
    let mut start = 0.0;
    for (k, &end) in p.breakpoints.iter().enumerate() {
        if k == 0 {
            // f** is constant on the first step
            total += p.values[0].powf(beta) * end.powf(beta / alpha) * alpha / beta;
        } else {
            total += rule.geometric(integrand, start, end, 2.0);
        }
        start = end;
    }
    let big_t = p.total_measure();
    let exponent = beta * (1.0 / alpha - 1.0);
    if exponent >= 0.0 {
        return Integral::Divergent { partial: total };
    }
    total += p.integral().powf(beta) * big_t.powf(exponent) / (-exponent);

    if let Some(local) = head_power(p) {
        // integrand ~ t^{β(1/α - a) - 1}
        if beta * (1.0 / alpha - local) - 1.0 <= -1.0 + 1e-2 {
            return Integral::Divergent { partial: total };
        }
    }
    Integral::Finite { value: total }
}

/// Exponent `a` of `f** ~ t^{-a}` over the first steps, when they span at
/// least four octaves.
fn head_power(p: &RearrangementProfile) -> Option<f64> {
    let k = p.breakpoints.len().min(HEAD_STEPS);
    let floor = HEAD_OFFSET * p.breakpoints[0];
    let pts: Vec<(f64, f64)> = p.breakpoints[..k]
        .iter()
        .filter(|&&t| t >= floor)
        .map(|&t| (t.ln(), p.maximal(t).ln()))
        .collect();
    if pts.len() < 4 || pts[pts.len() - 1].0 - pts[0].0 < 16f64.ln() {
        return None;
    }
    Some(-least_squares_slope(&pts))
}

/// Result of a Marcinkiewicz-type gauge check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeRatio {
    pub sup: f64,
    pub at: f64,
}

/// `sup_s f**(s) / gauge(s)` over the breakpoints, where `gauge(s)` stands for
/// `ψ^{-1}(1/s)`.
pub fn marcinkiewicz_gauge<F: Fn(f64) -> f64>(p: &RearrangementProfile, gauge: F) -> GaugeRatio {
    p.breakpoints
        .iter()
        .map(|&s| (p.maximal(s) / gauge(s), s))
        .fold(GaugeRatio { sup: 0.0, at: 0.0 }, |acc, (r, s)| {
            if r > acc.sup {
                GaugeRatio { sup: r, at: s }
            } else {
                acc
            }
        })
}

/// `ψ^{-1}(1/λ) = λ^{-1/n} g(λ^{(θ-1)/n})`, the gauge matching the
/// Orlicz–Morrey density condition.
pub fn orlicz_morrey_gauge(
    young: &crate::young::YoungFunction,
    n: usize,
    theta: f64,
) -> impl Fn(f64) -> f64 + '_ {
    let n = n as f64;
    move |lambda: f64| lambda.powf(-1.0 / n) * young.deriv(lambda.powf((theta - 1.0) / n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cells() -> RearrangementProfile {
        decreasing_rearrangement(&[2.0, 5.0], &[1.0, 2.0]).unwrap()
    }

    #[test]
    fn indicator_profile() {
        let p = decreasing_rearrangement(&[3.0, 0.0], &[1.0, 4.0]).unwrap();
        assert_eq!(p.decreasing(0.5), 3.0);
        assert_eq!(p.decreasing(1.0), 0.0);
        assert_eq!(p.maximal(2.0), 1.5);
        assert_eq!(p.maximal(0.0), 3.0);
        assert_eq!(p.total_measure(), 5.0);
    }

    #[test]
    fn constant_profile() {
        let p = decreasing_rearrangement(&[4.0, 4.0, 4.0], &[0.5, 1.0, 1.5]).unwrap();
        assert_eq!(p.values(), &[4.0]);
        assert_eq!(p.decreasing(2.9), 4.0);
        assert_eq!(p.maximal(1.7), 4.0);
    }

    #[test]
    fn two_cell_steps() {
        let p = two_cells();
        assert_eq!(p.breakpoints(), &[2.0, 3.0]);
        assert_eq!(p.values(), &[5.0, 2.0]);
        assert_eq!(p.maximal(3.0), 4.0);
    }

    #[test]
    fn rejects_negative_values() {
        assert!(decreasing_rearrangement(&[1.0, -1.0], &[1.0, 1.0]).is_err());
        assert!(decreasing_rearrangement(&[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn lorentz_zero_and_indicator() {
        let zero = decreasing_rearrangement(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let spec = LorentzSpec::new(2.0, 1.0).unwrap();
        assert_eq!(lorentz_integral(&zero, spec), Integral::Finite { value: 0.0 });
        let ind = decreasing_rearrangement(&[1.0], &[1.0]).unwrap();
        let v = lorentz_integral(&ind, spec).value();
        assert!((v - 4.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn lorentz_general_beta_matches_closed_form() {
        // indicator, alpha = 2, beta = 2:
        // ∫_0^1 t dt/t + ∫_1^∞ t^{-1} dt/t = 1 + 1
        let ind = decreasing_rearrangement(&[1.0], &[1.0]).unwrap();
        let v = lorentz_integral(&ind, LorentzSpec::new(2.0, 2.0).unwrap()).value();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
        // two cells, beta = 1: piecewise closed form
        let p = two_cells();
        let v = lorentz_integral(&p, LorentzSpec::new(2.0, 1.0).unwrap()).value();
        // ∫_0^2 5 t^{-1/2} + ∫_2^3 (2 + 6/t) t^{-1/2} + ∫_3^∞ 12 t^{-3/2}
        let exact = 10.0 * 2f64.sqrt()
            + 4.0 * (3f64.sqrt() - 2f64.sqrt())
            + 12.0 * (2f64.powf(-0.5) - 3f64.powf(-0.5))
            + 24.0 / 3f64.sqrt();
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
    }

    #[test]
    fn lorentz_flags_inverse_square_root() {
        // f*(t) = t^{-1/2} on [0, 1], resolved on dyadic steps
        let steps: Vec<(f64, f64)> = (0..48)
            .map(|k| {
                let hi = 0.5f64.powi(k);
                let lo = 0.5 * hi;
                // exact cell average of t^{-1/2}
                (hi - lo, 2.0 * (hi.sqrt() - lo.sqrt()) / (hi - lo))
            })
            .collect();
        let p = RearrangementProfile::from_steps(&steps).unwrap();
        let spec = LorentzSpec::new(2.0, 1.0).unwrap();
        assert!(lorentz_integral(&p, spec).is_divergent());
        // integrand ~ t^{-5/6} for alpha = 3/2
        assert!(!lorentz_integral(&p, LorentzSpec::new(1.5, 1.0).unwrap()).is_divergent());
    }

    #[test]
    fn lorentz_tail_divergence_for_small_alpha() {
        let ind = decreasing_rearrangement(&[1.0], &[1.0]).unwrap();
        assert!(lorentz_integral(&ind, LorentzSpec::new(1.0, 1.0).unwrap()).is_divergent());
    }

    #[test]
    fn gauge_examples() {
        let zero = decreasing_rearrangement(&[0.0], &[1.0]).unwrap();
        assert_eq!(marcinkiewicz_gauge(&zero, |s| s.powf(-0.5)).sup, 0.0);
        let p = two_cells();
        let r = marcinkiewicz_gauge(&p, |s| s.powf(-0.5));
        let expected = (5.0 * 2f64.sqrt()).max(4.0 * 3f64.sqrt());
        assert!((r.sup - expected).abs() < 1e-12);
        assert_eq!(r.at, 2.0);
        let exact = marcinkiewicz_gauge(&p, |s| p.maximal(s));
        assert!((exact.sup - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let csv = two_cells().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,f_star,f_star_star");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0.000000000000e+00,5.000000000000e+00"));
    }
}
