//! The Uhlenbeck vector field `A(x, ξ) = a(x) g(|ξ|)/|ξ| ξ`, the map
//! `V(ξ) = (g(|ξ|)/|ξ|)^{1/2} ξ` and the truncation `T_k`.
//!
//! Gradients `ξ ∈ R^{n×m}` are flat slices; all contractions are Frobenius
//! products.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::measure::CoefficientField;
use crate::young::YoungFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub young: YoungFunction,
    #[serde(default)]
    pub coefficient: CoefficientField,
    #[serde(default = "two")]
    pub n: usize,
    #[serde(default = "one")]
    pub m: usize,
}

fn two() -> usize {
    2
}

fn one() -> usize {
    1
}

pub fn frobenius(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    frobenius(a, a).sqrt()
}

impl OperatorSpec {
    /// Requires `i_G >= 2`, which makes `g(t)/t` bounded near `0` and the
    /// field continuous at `ξ = 0`.
    pub fn new(young: YoungFunction, coefficient: CoefficientField, n: usize, m: usize) -> Result<Self> {
        let spec = Self {
            young,
            coefficient,
            n,
            m,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn scalar(young: YoungFunction) -> Self {
        Self {
            young,
            coefficient: CoefficientField::default(),
            n: 2,
            m: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Parameter("dimensions n and m must be positive".into()));
        }
        let lower = self.young.indices().lower;
        if lower < 2.0 - 1e-6 {
            return Err(Error::Parameter(format!(
                "the vector field needs a lower growth index >= 2, got {lower}"
            )));
        }
        self.coefficient.validate()
    }

    pub fn dof(&self) -> usize {
        self.n * self.m
    }

    /// `A(x, ξ)` written into `out`.
    pub fn apply_a_into(&self, x: [f64; 2], xi: &[f64], out: &mut [f64]) {
        let k = self.coefficient.eval(x) * self.young.deriv_over_t(norm(xi));
        for (o, v) in out.iter_mut().zip(xi) {
            *o = k * v;
        }
    }

    pub fn apply_a(&self, x: [f64; 2], xi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; xi.len()];
        self.apply_a_into(x, xi, &mut out);
        out
    }

    pub fn apply_v(&self, xi: &[f64]) -> Vec<f64> {
        let k = self.young.deriv_over_t(norm(xi)).sqrt();
        xi.iter().map(|v| k * v).collect()
    }

    pub fn monotonicity_gap(&self, x: [f64; 2], xi: &[f64], eta: &[f64]) -> MonotonicityGap {
        let diff: Vec<f64> = xi.iter().zip(eta).map(|(a, b)| a - b).collect();
        let a_diff: Vec<f64> = self
            .apply_a(x, xi)
            .iter()
            .zip(self.apply_a(x, eta))
            .map(|(a, b)| a - b)
            .collect();
        let s = norm(xi) + norm(eta);
        let d2 = frobenius(&diff, &diff);
        let v_diff: Vec<f64> = self
            .apply_v(xi)
            .iter()
            .zip(self.apply_v(eta))
            .map(|(a, b)| a - b)
            .collect();
        MonotonicityGap {
            lhs: frobenius(&a_diff, &diff),
            coercive: self.young.deriv_over_t(s) * d2,
            v_gap: frobenius(&v_diff, &v_diff),
        }
    }

    /// `(g(|ξ|+|η|) |ξ-η|, G^{1/2}(|ξ|+|η|) |V(ξ)-V(η)|)`.
    pub fn g_v_relation(&self, xi: &[f64], eta: &[f64]) -> (f64, f64) {
        let s = norm(xi) + norm(eta);
        let diff: Vec<f64> = xi.iter().zip(eta).map(|(a, b)| a - b).collect();
        let v_diff: Vec<f64> = self
            .apply_v(xi)
            .iter()
            .zip(self.apply_v(eta))
            .map(|(a, b)| a - b)
            .collect();
        (
            self.young.deriv(s) * norm(&diff),
            self.young.value(s).sqrt() * norm(&v_diff),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityGap {
    /// `(A(x,ξ) - A(x,η)) : (ξ - η)`.
    pub lhs: f64,
    /// `g(|ξ|+|η|)/(|ξ|+|η|) |ξ - η|²`.
    pub coercive: f64,
    /// `|V(ξ) - V(η)|²`.
    pub v_gap: f64,
}

/// `min{1, k/|ξ|} ξ`.
pub fn truncate(xi: &[f64], k: f64) -> Vec<f64> {
    let r = norm(xi);
    let f = if r <= k { 1.0 } else { k / r };
    xi.iter().map(|v| f * v).collect()
}

/// `Id` for `|ξ| <= k`, otherwise `(k/|ξ|)(Id - ξ⊗ξ/|ξ|²)`.
pub fn truncate_jacobian(xi: &[f64], k: f64) -> DMatrix<f64> {
    let m = xi.len();
    let r = norm(xi);
    if r <= k {
        return DMatrix::identity(m, m);
    }
    let v = nalgebra::DVector::from_column_slice(xi);
    (DMatrix::identity(m, m) - &v * v.transpose() / (r * r)) * (k / r)
}

/// Observed range `[min, max]` of a ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub min: f64,
    pub max: f64,
}

impl Band {
    fn empty() -> Self {
        Self {
            min: f64::INFINITY,
            max: 0.0,
        }
    }

    fn add(&mut self, r: f64) {
        self.min = self.min.min(r);
        self.max = self.max.max(r);
    }

    fn merge(self, o: Band) -> Band {
        Band {
            min: self.min.min(o.min),
            max: self.max.max(o.max),
        }
    }

    /// `max / min`.
    pub fn width(&self) -> f64 {
        self.max / self.min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityBands {
    pub samples: usize,
    /// Smallest `lhs` seen; nonnegative for a monotone field.
    pub min_lhs: f64,
    pub lhs_over_coercive: Band,
    pub lhs_over_v_gap: Band,
    pub v_gap_over_coercive: Band,
    /// `g(|ξ|+|η|)|ξ-η| / (G^{1/2}(|ξ|+|η|)|V(ξ)-V(η)|)`.
    pub g_v_relation: Band,
}

/// Random gradient of log-uniform magnitude in `[10^-3, 10^3]`.
fn random_gradient(rng: &mut ChaCha8Rng, dof: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.random_range(-3.0..3.0));
    let v: Vec<f64> = (0..dof).map(|_| rng.random_range(-1.0..1.0)).collect();
    let r = norm(&v).max(1e-300);
    v.iter().map(|x| scale * x / r).collect()
}

/// Samples `(ξ, η)` pairs (half of them close to each other, at random
/// relative distances) and records the ratio bands.
pub fn monotonicity_bands(spec: &OperatorSpec, samples: usize, seed: u64, exec: Exec) -> MonotonicityBands {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dof = spec.dof();
    let pairs: Vec<([f64; 2], Vec<f64>, Vec<f64>)> = (0..samples)
        .map(|i| {
            let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let xi = random_gradient(&mut rng, dof);
            let eta = if i % 2 == 0 {
                random_gradient(&mut rng, dof)
            } else {
                let rel = 10f64.powf(rng.random_range(-4.0..0.0)) * norm(&xi);
                let dir = random_gradient(&mut rng, dof);
                let d = norm(&dir);
                xi.iter().zip(&dir).map(|(a, b)| a + rel * b / d).collect()
            };
            (x, xi, eta)
        })
        .collect();
    let per_sample = exec.map(samples, |i| {
        let (x, xi, eta) = &pairs[i];
        let gap = spec.monotonicity_gap(*x, xi, eta);
        let (gl, gr) = spec.g_v_relation(xi, eta);
        (gap, gl / gr)
    });
    let mut out = MonotonicityBands {
        samples,
        min_lhs: f64::INFINITY,
        lhs_over_coercive: Band::empty(),
        lhs_over_v_gap: Band::empty(),
        v_gap_over_coercive: Band::empty(),
        g_v_relation: Band::empty(),
    };
    for (gap, rel) in per_sample {
        out.min_lhs = out.min_lhs.min(gap.lhs);
        if gap.coercive > 0.0 && gap.v_gap > 0.0 {
            out.lhs_over_coercive.add(gap.lhs / gap.coercive);
            out.lhs_over_v_gap.add(gap.lhs / gap.v_gap);
            out.v_gap_over_coercive.add(gap.v_gap / gap.coercive);
            out.g_v_relation.add(rel);
        }
    }
    out
}

impl MonotonicityBands {
    pub fn merge(self, o: Self) -> Self {
        Self {
            samples: self.samples + o.samples,
            min_lhs: self.min_lhs.min(o.min_lhs),
            lhs_over_coercive: self.lhs_over_coercive.merge(o.lhs_over_coercive),
            lhs_over_v_gap: self.lhs_over_v_gap.merge(o.lhs_over_v_gap),
            v_gap_over_coercive: self.v_gap_over_coercive.merge(o.v_gap_over_coercive),
            g_v_relation: self.g_v_relation.merge(o.g_v_relation),
        }
    }
}
