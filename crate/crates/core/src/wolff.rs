//! Generalized Wolff potentials
//! `W(x0, R) = ∫_0^R g^{-1}(|mu|(B_r(x0)) / r^{n-1}) dr`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::measure::{ball_volume, MeasureData, MeasureKind};
use crate::quad::{dyadic_to_zero, summarize_shells, GaussLegendre, Integral};
use crate::rearrange::{decreasing_rearrangement, RearrangementProfile};
use crate::young::YoungFunction;

/// Minimum number of dyadic levels.
pub const MIN_LEVELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    /// Gauss–Legendre nodes per dyadic shell.
    pub nodes: usize,
    /// Number of shells `[2^{-k-1} R, 2^{-k} R]`.
    pub levels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { nodes: 8, levels: 40 }
    }
}

#[derive(Debug, Clone)]
pub struct WolffQuery<'a> {
    pub young: &'a YoungFunction,
    pub measure: &'a MeasureData,
    pub x0: Vec<f64>,
    pub radius: f64,
    pub quadrature: Quadrature,
    pub exec: Exec,
}

impl<'a> WolffQuery<'a> {
    pub fn new(young: &'a YoungFunction, measure: &'a MeasureData, x0: &[f64], radius: f64) -> Self {
        Self {
            young,
            measure,
            x0: x0.to_vec(),
            radius,
            quadrature: Quadrature::default(),
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Parameter(format!("Wolff radius must be positive, got {}", self.radius)));
        }
        if self.quadrature.levels < MIN_LEVELS || self.quadrature.nodes == 0 {
            return Err(Error::Parameter(format!(
                "Wolff quadrature needs at least {MIN_LEVELS} levels and one node, got {:?}",
                self.quadrature
            )));
        }
        if self.x0.len() != self.measure.dimension() {
            return Err(Error::Parameter(format!(
                "point {:?} does not live in dimension {}",
                self.x0,
                self.measure.dimension()
            )));
        }
        Ok(())
    }

    fn n(&self) -> f64 {
        self.measure.dimension() as f64
    }

    /// `g^{-1}(|mu|(B_r(x0)) / r^{n-1})`.
    pub fn integrand(&self, r: f64) -> Result<f64> {
        let mass = self.measure.ball_mass(&self.x0, r);
        if mass == 0.0 {
            return Ok(0.0);
        }
        self.young.invert_g(mass / r.powf(self.n() - 1.0))
    }

    /// `ϱ g^{-1}(|mu|(B_ϱ) / ϱ^{n-1})`, which must vanish as `ϱ -> 0` for
    /// the density conditions behind Hölder continuity.
    pub fn shell_quantity(&self, rho: f64) -> Result<f64> {
        Ok(rho * self.integrand(rho)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WolffResult {
    pub integral: Integral,
    /// Per-shell contributions, outermost first.
    pub shells: Vec<f64>,
    pub decay_ratio: f64,
}

impl WolffResult {
    pub fn value(&self) -> f64 {
        self.integral.value()
    }

    pub fn is_divergent(&self) -> bool {
        self.integral.is_divergent()
    }
}

/// Mass carried by atoms sitting exactly at `x0`.
fn atomic_mass_at(mu: &MeasureData, x0: &[f64]) -> f64 {
    match mu.kind() {
        MeasureKind::Atoms(atoms) => atoms
            .iter()
            .filter(|a| a.point[0] == x0[0] && a.point[1] == x0[1])
            .map(|a| a.weight.iter().map(|w| w * w).sum::<f64>().sqrt())
            .sum(),
        _ => 0.0,
    }
}

/// Dyadic-shell quadrature with geometric tail extrapolation.
///
/// Divergence is decided by the decay of the trailing shell contributions;
/// for an atom at `x0` the growth bounds of `g^{-1}` settle it directly:
/// the potential is infinite iff `s_G <= n`.
pub fn wolff_potential(q: &WolffQuery) -> Result<WolffResult> {
    q.validate()?;
    let rule = GaussLegendre::new(q.quadrature.nodes);
    let levels = q.quadrature.levels;
    let shells: Vec<Result<f64>> = q.exec.map(levels, |k| {
        let hi = q.radius * 0.5f64.powi(k as i32);
        rule.points(0.5 * hi, hi)
            .map(|(r, w)| q.integrand(r).map(|v| w * v))
            .sum()
    });
    let shells = shells.into_iter().collect::<Result<Vec<f64>>>()?;
    let summary = summarize_shells(shells);
    let mut integral = summary.integral();
    if atomic_mass_at(q.measure, &q.x0) > 0.0 {
        let idx = q.young.indices();
        let n = q.n();
        if idx.upper <= n {
            integral = Integral::Divergent {
                partial: summary.partial(),
            };
        } else if idx.lower > n {
            integral = Integral::Finite {
                value: summary.partial() + summary.tail,
            };
        }
    }
    Ok(WolffResult {
        integral,
        decay_ratio: summary.decay_ratio,
        shells: summary.shells,
    })
}

/// `Σ_{k=1}^{levels} R_k g^{-1}(|mu|(B_{R_k}) / R_k^{n-1})` with
/// `R_k = 2^{1-k} R`; comparable to the potential up to constants depending
/// on the doubling of `g^{-1}`.
pub fn wolff_dyadic_sum(q: &WolffQuery) -> Result<f64> {
    q.validate()?;
    let terms: Vec<Result<f64>> = q.exec.map(q.quadrature.levels, |j| {
        let rk = q.radius * 0.5f64.powi(j as i32);
        q.shell_quantity(rk)
    });
    terms.into_iter().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangementBound {
    pub lhs: Integral,
    pub rhs: Integral,
    /// `lhs / rhs`; `None` when both vanish or either side diverges.
    pub ratio: Option<f64>,
    /// Divergent potential against a finite rearrangement integral.
    pub inconsistent: bool,
}

/// `∫_0^{|B_R|} t^{1/n} g^{-1}(t^{1/n} f**(t)) dt/t`, computed after the
/// substitution `t = τ^n` as `n ∫_0^{|B_R|^{1/n}} g^{-1}(τ f**(τ^n)) dτ`.
pub fn rearrangement_integral(young: &YoungFunction, profile: &RearrangementProfile, n: usize, radius: f64) -> Result<Integral> {
    let nf = n as f64;
    let upper = (ball_volume(n) * radius.powf(nf)).powf(1.0 / nf);
    let f = |tau: f64| {
        let y = tau * profile.maximal(tau.powf(nf));
        if y == 0.0 {
            Ok(0.0)
        } else {
            young.invert_g(y)
        }
    };
    // surface inversion errors before integrating
    f(upper)?;
    let rule = GaussLegendre::new(16);
    let dyadic = dyadic_to_zero(&rule, |t| f(t).unwrap_or(f64::NAN), upper, 64);
    if dyadic.shells.iter().any(|s| s.is_nan()) {
        return Err(Error::Range("rearrangement integrand left the range of g".into()));
    }
    Ok(match dyadic.integral() {
        Integral::Finite { value } => Integral::Finite { value: nf * value },
        Integral::Divergent { partial } => Integral::Divergent { partial: nf * partial },
    })
}

/// Compares the Wolff potential of a density `F` with the rearrangement
/// integral of `|F|`.
pub fn rearrangement_bound(young: &YoungFunction, density: &MeasureData, x: [f64; 2], radius: f64) -> Result<RearrangementBound> {
    let (grid, values) = density
        .grid()
        .ok_or_else(|| Error::Validation("rearrangement bound needs a grid density".into()))?;
    let m = density.m();
    let magnitudes: Vec<f64> = values
        .chunks(m)
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let profile = decreasing_rearrangement(&magnitudes, &vec![grid.cell_area(); grid.len()])?;
    let lhs = wolff_potential(&WolffQuery::new(young, density, &x, radius))?.integral;
    let rhs = rearrangement_integral(young, &profile, 2, radius)?;
    let ratio = match (lhs, rhs) {
        (Integral::Finite { value: l }, Integral::Finite { value: r }) if r > 0.0 => Some(l / r),
        _ => None,
    };
    Ok(RearrangementBound {
        lhs,
        rhs,
        ratio,
        inconsistent: lhs.is_divergent() && !rhs.is_divergent(),
    })
}
