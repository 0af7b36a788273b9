//! Gauss–Legendre rules and the composite schemes built on them.

use std::f64::consts::PI;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes mapped to `[a, b]` paired with scaled weights.
    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.points(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal panels.
    pub fn composite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(&mut f, lo, lo + h)
            })
            .sum()
    }

    /// Composite rule over geometric panels `[a q^k, a q^{k+1}]` covering
    /// `[a, b]`; suited to integrands with power-type behavior at `a -> 0`.
    pub fn geometric<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, ratio: f64) -> f64 {
        debug_assert!(a > 0.0 && ratio > 1.0);
        let mut lo = a;
        let mut total = 0.0;
        while lo < b {
            let hi = (lo * ratio).min(b);
            total += self.integrate(&mut f, lo, hi);
            lo = hi;
        }
        total
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Value of a functional that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Integral {
    Finite { value: f64 },
    /// Non-integrable; `partial` is the finite part computed before the
    /// divergence was detected.
    Divergent { partial: f64 },
}

impl Integral {
    pub fn value(&self) -> f64 {
        match self {
            Integral::Finite { value } => *value,
            Integral::Divergent { .. } => f64::INFINITY,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Integral::Divergent { .. })
    }
}

/// Result of integrating down to the singular endpoint `0` over dyadic shells.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicIntegral {
    /// Contribution of each shell `[2^{-k-1} R, 2^{-k} R]`, `k = 0..levels`.
    pub shells: Vec<f64>,
    /// Geometric estimate of the remainder below the last shell.
    pub tail: f64,
    /// Fitted ratio between consecutive shell contributions over the trailing levels.
    pub decay_ratio: f64,
    pub divergent: bool,
}

impl DyadicIntegral {
    pub fn integral(&self) -> Integral {
        if self.divergent {
            Integral::Divergent {
                partial: self.partial(),
            }
        } else {
            Integral::Finite {
                value: self.value(),
            }
        }
    }

    pub fn partial(&self) -> f64 {
        self.shells.iter().sum()
    }

    pub fn value(&self) -> f64 {
        if self.divergent {
            f64::INFINITY
        } else {
            self.partial() + self.tail
        }
    }
}

/// Number of trailing levels used to decide decay.
pub const TRAILING_LEVELS: usize = 8;
/// Decay ratios at or above this value are treated as non-summable.
pub const DIVERGENCE_RATIO: f64 = 0.999;

/// Integrates a nonnegative `f` over `(0, upper]` shell by shell.
///
/// Shell contributions `c_k` are fitted by `log c_k ~ a + k log q` over the
/// last [`TRAILING_LEVELS`] nonzero shells. `q >= DIVERGENCE_RATIO` flags the
/// integral as divergent; otherwise the remainder is `c_last q / (1 - q)`,
/// which is exact for pure power laws.
pub fn dyadic_to_zero<F>(rule: &GaussLegendre, f: F, upper: f64, levels: usize) -> DyadicIntegral
where
    F: Fn(f64) -> f64,
{
    let shells: Vec<f64> = (0..levels)
        .map(|k| {
            let hi = upper * 0.5f64.powi(k as i32);
            rule.integrate(&f, 0.5 * hi, hi)
        })
        .collect();
    summarize_shells(shells)
}

/// Applies the trailing-decay analysis of [`dyadic_to_zero`] to precomputed shells.
pub fn summarize_shells(shells: Vec<f64>) -> DyadicIntegral {
    let n = shells.len();
    let start = n.saturating_sub(TRAILING_LEVELS);
    let trailing: Vec<(f64, f64)> = shells[start..]
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0.0)
        .map(|(i, c)| (i as f64, c.ln()))
        .collect();
    if trailing.len() < 2 {
        return DyadicIntegral {
            shells,
            tail: 0.0,
            decay_ratio: 0.0,
            divergent: false,
        };
    }
    let slope = least_squares_slope(&trailing);
    let ratio = slope.exp();
    let last = *shells.last().unwrap_or(&0.0);
    let divergent = ratio >= DIVERGENCE_RATIO && last > 0.0;
    let tail = if divergent || last <= 0.0 {
        0.0
    } else {
        last * ratio / (1.0 - ratio)
    };
    DyadicIntegral {
        shells,
        tail,
        decay_ratio: ratio,
        divergent,
    }
}

/// Slope of the least-squares line through `(x, y)` points.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    least_squares(points).0
}

/// `(slope, intercept, rms residual)` of the least-squares line.
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // degree 15 is the exactness limit of the 8-point rule
        let v = rule.integrate(|x| x.powi(15) + x.powi(14), -1.0, 1.0);
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
        let w: f64 = rule.points(0.0, 3.0).map(|p| p.1).sum();
        assert!((w - 3.0).abs() < 1e-14);
    }

    #[test]
    fn dyadic_power_law_tail_is_exact() {
        let rule = GaussLegendre::new(8);
        let res = dyadic_to_zero(&rule, |r| r.powf(-0.5), 1.0, 20);
        assert!(!res.divergent);
        assert!((res.value() - 2.0).abs() < 1e-12, "{}", res.value());
    }

    #[test]
    fn dyadic_flags_reciprocal() {
        let rule = GaussLegendre::new(8);
        let res = dyadic_to_zero(&rule, |r| 1.0 / r, 1.0, 20);
        assert!(res.divergent);
        assert_eq!(res.value(), f64::INFINITY);
    }

    #[test]
    fn geometric_panels_handle_endpoint_power() {
        let rule = GaussLegendre::new(16);
        let v = rule.geometric(|r| r.powf(-0.5), 1e-6, 1.0, 2.0);
        assert!((v - 2.0 * (1.0 - 1e-3)).abs() < 1e-12);
    }
}
