//! Young (N-)function algebra.
//!
//! A [`YoungFunction`] bundles `G`, its derivative `g = G'`, the growth
//! indices `i_G <= s_G` and the Legendre conjugate. All growth arithmetic in
//! the crate goes through this type.

mod descriptor;
mod hs;
mod table;

pub use descriptor::YoungDescriptor;
pub use hs::HsScale;

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use table::Table;

/// Lower end of the index sampling grid.
pub const INDEX_T_MIN: f64 = 1e-8;
/// Upper end of the index sampling grid.
pub const INDEX_T_MAX: f64 = 1e8;
/// Number of log-spaced points used to sample `t g(t) / G(t)`.
pub const INDEX_GRID_POINTS: usize = 16_001;
/// Ceiling on `s_G`; larger values are treated as non-doubling.
pub const MAX_UPPER_INDEX: f64 = 64.0;

#[derive(Debug, Clone)]
pub enum Family {
    PowerLaw { p: f64 },
    /// `G(t) = t^p log^alpha(e + t)`.
    Zygmund { p: f64, alpha: f64 },
    Scaled { base: Box<YoungFunction>, factor: f64 },
    Tabulated(Table),
}

/// Sampled growth indices with the grid they were computed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indices {
    pub lower: f64,
    pub upper: f64,
    /// Number of sample points; 0 when a closed form was used.
    pub grid_points: usize,
    pub t_min: f64,
    pub t_max: f64,
    /// Spacing of the grid in `log10 t`.
    pub log10_step: f64,
}

/// `t g(t)/G(t)` and `G~(g(t))/G(t)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalences {
    pub ratio_tg_g: f64,
    pub ratio_conj: f64,
}

impl Equivalences {
    /// Whether both ratios lie in their index bands, with relative slack `tol`.
    pub fn within(&self, idx: &Indices, tol: f64) -> bool {
        let band = |v: f64, lo: f64, hi: f64| v >= lo * (1.0 - tol) && v <= hi * (1.0 + tol);
        band(self.ratio_tg_g, idx.lower, idx.upper)
            && band(self.ratio_conj, idx.lower - 1.0, idx.upper - 1.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "YoungDescriptor", into = "YoungDescriptor")]
pub struct YoungFunction {
    family: Family,
    indices: Indices,
}

impl YoungFunction {
    pub fn power_law(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 2.0) {
            return Err(Error::Parameter(format!(
                "power-law exponent must be >= 2, got {p}"
            )));
        }
        let indices = Indices {
            lower: p,
            upper: p,
            grid_points: 0,
            t_min: 0.0,
            t_max: f64::INFINITY,
            log10_step: 0.0,
        };
        Ok(Self {
            family: Family::PowerLaw { p },
            indices,
        })
    }

    pub fn zygmund(p: f64, alpha: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 2.0 && alpha.is_finite()) {
            return Err(Error::Parameter(format!(
                "Zygmund parameters need p >= 2 and finite alpha, got p={p}, alpha={alpha}"
            )));
        }
        Self::with_sampled_indices(Family::Zygmund { p, alpha }, INDEX_T_MIN, INDEX_T_MAX)
    }

    pub fn scaled(base: YoungFunction, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::Parameter(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        let indices = base.indices;
        Ok(Self {
            family: Family::Scaled {
                base: Box::new(base),
                factor,
            },
            indices,
        })
    }

    /// Samples `g` at `samples.len()` log-spaced points of `[t_min, t_max]`.
    pub fn tabulated(t_min: f64, t_max: f64, samples: Vec<f64>) -> Result<Self> {
        let table = Table::new(t_min, t_max, samples)?;
        Self::with_sampled_indices(Family::Tabulated(table), t_min, t_max)
    }

    fn with_sampled_indices(family: Family, lo: f64, hi: f64) -> Result<Self> {
        let mut f = Self {
            family,
            indices: Indices {
                lower: 0.0,
                upper: 0.0,
                grid_points: 0,
                t_min: lo,
                t_max: hi,
                log10_step: 0.0,
            },
        };
        f.indices = sample_indices(&f, lo, hi, INDEX_GRID_POINTS);
        validate_indices(&f.indices, 2)?;
        Ok(f)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn indices(&self) -> Indices {
        self.indices
    }

    /// `G(t)`. Tabulated functions continue past their table by power laws;
    /// use [`Self::eval_big_g`] for the domain-checked variant.
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::PowerLaw { p } => pow(t, *p),
            Family::Zygmund { p, alpha } => pow(t, *p) * pow((E + t).ln(), *alpha),
            Family::Scaled { base, factor } => factor * base.value(t),
            Family::Tabulated(tab) => tab.big_g(t),
        }
    }

    /// `g(t) = G'(t)`.
    pub fn deriv(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::PowerLaw { p } => p * pow(t, p - 1.0),
            Family::Zygmund { p, alpha } => {
                let l = (E + t).ln();
                pow(t, p - 1.0) * pow(l, alpha - 1.0) * (p * l + alpha * t / (E + t))
            }
            Family::Scaled { base, factor } => factor * base.deriv(t),
            Family::Tabulated(tab) => tab.g(t),
        }
    }

    /// `g'(t)`.
    pub fn deriv2(&self, t: f64) -> f64 {
        if t <= 0.0 {
            // limit of g(t)/t, which is finite for i_G >= 2
            return match &self.family {
                Family::PowerLaw { p } | Family::Zygmund { p, .. } if *p == 2.0 => 2.0,
                Family::Scaled { base, factor } => factor * base.deriv2(t),
                Family::Tabulated(tab) => tab.dg(0.0),
                _ => 0.0,
            };
        }
        match &self.family {
            Family::PowerLaw { p } => p * (p - 1.0) * pow(t, p - 2.0),
            Family::Zygmund { p, alpha } => {
                let l = (E + t).ln();
                let phi = p / t + alpha / (l * (E + t));
                let dphi = -p / (t * t) - alpha * (l + 1.0) / ((E + t) * l).powi(2);
                self.value(t) * (phi * phi + dphi)
            }
            Family::Scaled { base, factor } => factor * base.deriv2(t),
            Family::Tabulated(tab) => tab.dg(t),
        }
    }

    /// `g(t)/t`, continuously extended to `t = 0`.
    pub fn deriv_over_t(&self, t: f64) -> f64 {
        if t > 0.0 {
            self.deriv(t) / t
        } else {
            self.deriv2(0.0)
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("argument must be finite and >= 0, got {t}")));
        }
        if let Some(tab) = self.table() {
            if t > tab.t_max {
                return Err(Error::Domain(format!(
                    "t = {t} beyond tabulated range [0, {}]",
                    tab.t_max
                )));
            }
        }
        Ok(())
    }

    fn table(&self) -> Option<&Table> {
        match &self.family {
            Family::Tabulated(t) => Some(t),
            Family::Scaled { base, .. } => base.table(),
            _ => None,
        }
    }

    /// Domain-checked `G(t)`.
    pub fn eval_big_g(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.value(t))
    }

    /// Domain-checked `g(t)`.
    pub fn eval_g(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.deriv(t))
    }

    /// `g^{-1}(y)`: closed form for power laws, bracketing bisection with a
    /// Newton polish otherwise.
    pub fn invert_g(&self, y: f64) -> Result<f64> {
        if !(y.is_finite() && y >= 0.0) {
            return Err(Error::Range(format!("g^-1 needs finite y >= 0, got {y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        match &self.family {
            Family::PowerLaw { p } => Ok((y / p).powf(1.0 / (p - 1.0))),
            Family::Scaled { base, factor } => base.invert_g(y / factor),
            _ => self.invert_g_bisect(y),
        }
    }

    /// Numerical inversion used for families without a closed-form inverse.
    pub fn invert_g_bisect(&self, y: f64) -> Result<f64> {
        if y == 0.0 {
            return Ok(0.0);
        }
        if let Some(tab) = self.table() {
            let top = self.deriv(tab.t_max);
            if y > top {
                return Err(Error::Range(format!(
                    "y = {y} exceeds g(t_max) = {top}; not bracketable in the table"
                )));
            }
        }
        let g1 = self.deriv(1.0);
        let mid = 0.5 * (self.indices.lower + self.indices.upper);
        let guess = (y / g1).powf(1.0 / (mid - 1.0).max(0.25));
        let (mut lo, mut hi) = (guess, guess);
        let mut guard = 0;
        while self.deriv(lo) > y {
            lo *= 0.5;
            guard += 1;
            if guard > 4000 || lo == 0.0 {
                return Err(Error::Range(format!("cannot bracket g^-1({y}) from below")));
            }
        }
        while self.deriv(hi) < y {
            hi *= 2.0;
            guard += 1;
            if guard > 4000 || !hi.is_finite() {
                return Err(Error::Range(format!("cannot bracket g^-1({y}) from above")));
            }
        }
        if let Some(tab) = self.table() {
            hi = hi.min(tab.t_max);
        }
        while hi - lo > 1e-12 * hi {
            let m = 0.5 * (lo + hi);
            if self.deriv(m) < y {
                lo = m;
            } else {
                hi = m;
            }
        }
        let t = 0.5 * (lo + hi);
        let slope = self.deriv2(t);
        if slope > 0.0 {
            let polished = t - (self.deriv(t) - y) / slope;
            if polished >= lo && polished <= hi {
                return Ok(polished);
            }
        }
        Ok(t)
    }

    /// Young conjugate `G~(s) = s g^{-1}(s) - G(g^{-1}(s))`.
    pub fn conjugate(&self, s: f64) -> Result<f64> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Range(format!("conjugate needs finite s >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let t = self.invert_g(s)?;
        Ok(s * t - self.value(t))
    }

    /// Conjugate of the conjugate: `sup_s (t s - G~(s))`, attained at `s = g(t)`.
    pub fn biconjugate(&self, t: f64) -> Result<f64> {
        let s = self.eval_g(t)?;
        Ok(t * s - self.conjugate(s)?)
    }

    /// `G(t) + G~(s) - t s`, nonnegative by Young's inequality.
    pub fn check_young_inequality(&self, t: f64, s: f64) -> Result<f64> {
        Ok(self.eval_big_g(t)? + self.conjugate(s)? - t * s)
    }

    pub fn check_equivalences(&self, t: f64) -> Result<Equivalences> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("equivalence ratios need t > 0, got {t}")));
        }
        let big = self.eval_big_g(t)?;
        let g = self.deriv(t);
        Ok(Equivalences {
            ratio_tg_g: t * g / big,
            ratio_conj: self.conjugate(g)? / big,
        })
    }

    /// `H_s` built on this function with the default dimension `n = 2`.
    pub fn hs(&self, s: f64) -> Result<HsScale> {
        HsScale::new(self.clone(), s)
    }

    /// `t g(t) / G(t)`.
    pub fn index_ratio(&self, t: f64) -> f64 {
        t * self.deriv(t) / self.value(t)
    }

    pub fn descriptor(&self) -> YoungDescriptor {
        YoungDescriptor::from(self.clone())
    }
}

impl PartialEq for YoungFunction {
    fn eq(&self, other: &Self) -> bool {
        self.descriptor() == other.descriptor()
    }
}

/// Index bounds from Assumption-type constraints: `i_G >= 2`, or the
/// relaxation `2 - i_G < (i_G - 1)/(i_G + s_G n)`.
/// `t^p`, with repeated multiplication for small integer exponents; the
/// solver evaluates these in its innermost loops.
#[inline]
fn pow(t: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= 8.0 {
        t.powi(p as i32)
    } else {
        t.powf(p)
    }
}

pub fn validate_indices(idx: &Indices, n: usize) -> Result<()> {
    let (i, s) = (idx.lower, idx.upper);
    if !(i > 1.0 && s.is_finite() && s <= MAX_UPPER_INDEX) {
        return Err(Error::Parameter(format!(
            "growth indices ({i}, {s}) violate 1 < i_G <= s_G <= {MAX_UPPER_INDEX}"
        )));
    }
    if i < 2.0 && 2.0 - i >= (i - 1.0) / (i + s * n as f64) {
        return Err(Error::Parameter(format!(
            "lower index {i} is below 2 and outside the relaxed range"
        )));
    }
    Ok(())
}

/// Inf and sup of `t g(t)/G(t)` over a log grid, refined by golden-section
/// search around the extreme samples.
fn sample_indices(f: &YoungFunction, lo: f64, hi: f64, points: usize) -> Indices {
    let step = (hi / lo).ln() / (points - 1) as f64;
    let at = |k: f64| f.index_ratio(lo * (step * k).exp());
    let mut min = (f64::INFINITY, 0usize);
    let mut max = (f64::NEG_INFINITY, 0usize);
    for k in 0..points {
        let v = at(k as f64);
        if v < min.0 {
            min = (v, k);
        }
        if v > max.0 {
            max = (v, k);
        }
    }
    let last = (points - 1) as f64;
    let refine = |k: usize, sign: f64| {
        let a = (k as f64 - 1.0).max(0.0);
        let b = (k as f64 + 1.0).min(last);
        let x = golden_section(|x| sign * at(x), a, b, 60);
        sign * (sign * at(x)).min(sign * at(k as f64))
    };
    Indices {
        lower: refine(min.1, 1.0),
        upper: refine(max.1, -1.0),
        grid_points: points,
        t_min: lo,
        t_max: hi,
        log10_step: step / std::f64::consts::LN_10,
    }
}

/// Minimizer of `f` on `[a, b]`.
pub(crate) fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn power_law_values() {
        let f = YoungFunction::power_law(3.0).unwrap();
        assert_eq!(f.eval_big_g(2.0).unwrap(), 8.0);
        assert_eq!(f.eval_big_g(0.0).unwrap(), 0.0);
        assert_eq!(f.eval_g(2.0).unwrap(), 12.0);
        assert!(close(f.invert_g(12.0).unwrap(), 2.0, 1e-14));
        assert_eq!(f.invert_g(0.0).unwrap(), 0.0);
        let idx = f.indices();
        assert_eq!((idx.lower, idx.upper), (3.0, 3.0));
    }

    #[test]
    fn zygmund_value_at_one() {
        let f = YoungFunction::zygmund(2.0, 1.0).unwrap();
        let expected = (E + 1.0).ln();
        assert!(close(f.eval_big_g(1.0).unwrap(), expected, 1e-14));
        assert!((expected - 1.31326).abs() < 1e-5);
    }

    #[test]
    fn zygmund_inverse_round_trip() {
        let f = YoungFunction::zygmund(2.0, 1.0).unwrap();
        let t = f.invert_g(f.deriv(5.0)).unwrap();
        assert!((t - 5.0).abs() < 1e-9);
    }

    #[test]
    fn zygmund_indices() {
        let f = YoungFunction::zygmund(2.0, 1.0).unwrap();
        let idx = f.indices();
        assert!((idx.lower - 2.0).abs() < 1e-6, "{idx:?}");
        assert!(idx.upper > 2.0 && idx.upper <= 2.4, "{idx:?}");
        // dense independent sampling never exceeds the reported sup
        let dense = (0..200_000)
            .map(|k| f.index_ratio(1e-3 * 1e7f64.powf(k as f64 / 199_999.0)))
            .fold(0.0, f64::max);
        assert!(dense <= idx.upper + 1e-9);
        assert!(dense >= idx.upper - 1e-6);
    }

    #[test]
    fn scaled_keeps_indices() {
        let f = YoungFunction::scaled(YoungFunction::power_law(2.0).unwrap(), 7.0).unwrap();
        let idx = f.indices();
        assert_eq!((idx.lower, idx.upper), (2.0, 2.0));
        assert_eq!(f.value(3.0), 63.0);
    }

    #[test]
    fn conjugate_examples() {
        let sq = YoungFunction::power_law(2.0).unwrap();
        assert!(close(sq.conjugate(2.0).unwrap(), 1.0, 1e-14));
        assert_eq!(sq.conjugate(0.0).unwrap(), 0.0);
        let cube = YoungFunction::power_law(3.0).unwrap();
        let c = cube.conjugate(3.0).unwrap();
        // grid-search Legendre transform as an independent oracle
        let sup = (0..=200_000)
            .map(|k| {
                let t = 5.0 * k as f64 / 200_000.0;
                3.0 * t - t.powi(3)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((c - 2.0).abs() < 1e-12);
        assert!((c - sup).abs() < 1e-8);
    }

    #[test]
    fn young_inequality_examples() {
        let sq = YoungFunction::power_law(2.0).unwrap();
        assert!(close(sq.check_young_inequality(3.0, 2.0).unwrap(), 4.0, 1e-14));
        assert_eq!(sq.check_young_inequality(0.0, 0.0).unwrap(), 0.0);
        let z = YoungFunction::zygmund(2.0, 1.0).unwrap();
        let r = z.check_young_inequality(1.0, z.deriv(1.0)).unwrap();
        assert!(r.abs() < 1e-9);
    }

    #[test]
    fn equivalence_ratios() {
        let cube = YoungFunction::power_law(3.0).unwrap();
        for t in [0.01, 1.0, 40.0] {
            let e = cube.check_equivalences(t).unwrap();
            assert!(close(e.ratio_tg_g, 3.0, 1e-12));
            assert!(close(e.ratio_conj, 2.0, 1e-9));
        }
        let z = YoungFunction::zygmund(2.0, 1.0).unwrap();
        let e = z.check_equivalences(10.0).unwrap();
        assert!(e.within(&z.indices(), 1e-9), "{e:?}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(YoungFunction::power_law(1.5).is_err());
        assert!(YoungFunction::power_law(f64::NAN).is_err());
        assert!(YoungFunction::zygmund(1.9, 1.0).is_err());
        assert!(YoungFunction::scaled(YoungFunction::power_law(2.0).unwrap(), 0.0).is_err());
        // strongly negative log power pushes i_G below the relaxed range
        assert!(YoungFunction::zygmund(2.0, -3.0).is_err());
        // slightly sub-quadratic growth is admitted by the relaxation
        assert!(YoungFunction::zygmund(2.0, -0.1).is_ok());
    }

    #[test]
    fn tabulated_matches_closed_form_and_checks_domain() {
        let n = 81;
        let samples = (0..n)
            .map(|i| {
                let t = 1e-3 * 1e6f64.powf(i as f64 / (n - 1) as f64);
                3.0 * t * t
            })
            .collect();
        let f = YoungFunction::tabulated(1e-3, 1e3, samples).unwrap();
        let idx = f.indices();
        assert!((idx.lower - 3.0).abs() < 1e-6 && (idx.upper - 3.0).abs() < 1e-6);
        assert!(close(f.eval_big_g(2.0).unwrap(), 8.0, 1e-9));
        assert!(matches!(f.eval_big_g(2e3), Err(Error::Domain(_))));
        assert!(matches!(f.invert_g(1e9), Err(Error::Range(_))));
        assert!((f.invert_g(12.0).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn bisection_agrees_with_closed_form() {
        let f = YoungFunction::power_law(2.5).unwrap();
        for y in [1e-9, 0.3, 1.0, 7.0, 1e6] {
            let a = f.invert_g(y).unwrap();
            let b = f.invert_g_bisect(y).unwrap();
            assert!(close(a, b, 1e-11), "{y}: {a} vs {b}");
        }
    }

    #[test]
    fn biconjugate_of_power_law() {
        let f = YoungFunction::power_law(2.5).unwrap();
        for t in [1e-3, 0.4, 1.0, 30.0, 1e3] {
            assert!(close(f.biconjugate(t).unwrap(), f.value(t), 1e-10));
        }
    }
}
