//! Energy minimization with Dirichlet data.
//!
//! The regularized energy is minimized first with `ε = h`, then polished
//! with `ε = 0`. A step is accepted only if the energy change along it,
//! summed triangle by triangle as `Σ w_T (G(ρ_new) - G(ρ_old)) - α<b, d>`,
//! is nonpositive. Summing differences instead of subtracting two totals
//! keeps the test meaningful down to the last few digits, where a direct
//! comparison of recomputed totals is dominated by rounding.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::energy::{load_vector, Functional, LineTerms};
use super::{Mesh2D, VectorField2D};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::OperatorSpec;
use crate::measure::MeasureData;

/// Search direction and step-length policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepRule {
    /// Preconditioned gradient steps of fixed length, halved on energy increase.
    Fixed { step: f64 },
    /// Two-point (Barzilai–Borwein) step estimate with backtracking.
    AdaptiveCurvature,
    /// Preconditioned Polak–Ribière nonlinear conjugate gradients with an
    /// exact line search.
    ConjugateGradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Regularization of the first stage; `None` ties it to the mesh size.
    pub epsilon: Option<f64>,
    pub max_iterations: usize,
    /// Stationarity threshold, relative to `1 + |load|`.
    pub tolerance: f64,
    pub step_rule: StepRule,
    /// Run the un-regularized second stage.
    pub polish: bool,
    /// Start from random interior values instead of the supplied field.
    pub random_start: bool,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            epsilon: None,
            max_iterations: 20_000,
            tolerance: 1e-9,
            step_rule: StepRule::ConjugateGradient,
            polish: true,
            random_start: false,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Validation("tolerance must be positive".into()));
        }
        if let Some(e) = self.epsilon {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::Validation("epsilon must be >= 0".into()));
            }
        }
        if let StepRule::Fixed { step } = self.step_rule {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::Validation("fixed step must be positive".into()));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::Validation("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Diagnostics of one minimization stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub epsilon: f64,
    pub iterations: usize,
    /// Max-norm of the energy gradient over free degrees of freedom.
    pub residual: f64,
    /// Threshold the residual was held to.
    pub threshold: f64,
    /// Energy after each accepted iteration (starting value first),
    /// accumulated from the per-step changes.
    pub energy_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub field: VectorField2D,
    pub stages: Vec<StageReport>,
}

impl Solution {
    pub fn final_stage(&self) -> &StageReport {
        self.stages.last().expect("a solve has at least one stage")
    }
}

/// Minimizes the energy with `u = boundary` on the mesh boundary.
///
/// Interior values of `boundary` are the starting guess unless
/// `cfg.random_start` is set.
pub fn solve_dirichlet(
    spec: &OperatorSpec,
    load: &MeasureData,
    boundary: &VectorField2D,
    cfg: &SolveConfig,
) -> Result<Solution> {
    cfg.validate()?;
    spec.validate()?;
    let mesh = boundary.mesh().clone();
    let m = boundary.m();
    if spec.m != m || load.m() != m {
        return Err(Error::Validation(format!(
            "component mismatch: operator m = {}, load m = {}, boundary m = {m}",
            spec.m,
            load.m()
        )));
    }
    let b = load_vector(&mesh, load)?;
    let mut u = boundary.values().to_vec();
    if cfg.random_start {
        let scale = 1e-2 * (1.0 + boundary.max_abs());
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for v in 0..mesh.num_vertices() {
            if !mesh.is_boundary(v) {
                for c in 0..m {
                    u[v * m + c] = scale * rng.random_range(-1.0..1.0);
                }
            }
        }
    }
    let free: Vec<bool> = (0..mesh.num_vertices())
        .flat_map(|v| std::iter::repeat_n(!mesh.is_boundary(v), m))
        .collect();
    let load_norm: f64 = b.iter().map(|x| x.abs()).sum();
    let threshold = cfg.tolerance * (1.0 + load_norm);

    let eps0 = cfg.epsilon.unwrap_or(mesh.h());
    let mut epsilons = vec![eps0];
    if cfg.polish && eps0 > 0.0 {
        epsilons.push(0.0);
    }
    let mut functional = Functional::new(spec, &mesh, b, eps0, cfg.exec);
    let mut stages = Vec::new();
    for (k, &eps) in epsilons.iter().enumerate() {
        functional.set_epsilon(eps);
        let last = k + 1 == epsilons.len();
        // intermediate stages only need to get close
        let stage_threshold = if last { threshold } else { threshold.max(1e-6 * (1.0 + load_norm)) };
        let report = minimize(&functional, &mut u, &free, stage_threshold, cfg)?;
        stages.push(report);
    }
    Ok(Solution {
        field: VectorField2D::from_values(mesh, m, u)?,
        stages,
    })
}

/// Zero Dirichlet data, zero start.
pub fn solve_zero_dirichlet(
    spec: &OperatorSpec,
    mesh: Arc<Mesh2D>,
    load: &MeasureData,
    cfg: &SolveConfig,
) -> Result<Solution> {
    solve_dirichlet(spec, load, &VectorField2D::zeros(mesh, load.m()), cfg)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn free_max(g: &[f64], free: &[bool]) -> f64 {
    g.iter()
        .zip(free)
        .filter(|(_, &f)| f)
        .fold(0.0, |a, (x, _)| a.max(x.abs()))
}

fn minimize(f: &Functional, u: &mut [f64], free: &[bool], threshold: f64, cfg: &SolveConfig) -> Result<StageReport> {
    let n = u.len();
    let mut grad = vec![0.0; n];
    let mut precond = vec![0.0; n];
    let mut energy = f.energy(u);
    let mut history = vec![energy];
    f.gradient(u, &mut grad);
    let mut residual = free_max(&grad, free);
    let mut z = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut prev_grad = vec![0.0; n];
    let mut prev_z = vec![0.0; n];
    let mut prev_u = u.to_vec();
    let mut have_dir = false;
    let mut bb_step: Option<f64> = None;
    let mut trial = vec![0.0; n];
    let mut iterations = 0;
    let mut failures = 0;

    while residual > threshold {
        if iterations >= cfg.max_iterations {
            return Err(Error::Convergence { iterations, residual });
        }
        iterations += 1;
        f.jacobi(u, &mut precond);
        for i in 0..n {
            z[i] = if free[i] { -grad[i] / precond[i] } else { 0.0 };
        }
        let accepted = match cfg.step_rule {
            StepRule::ConjugateGradient => {
                if have_dir && failures == 0 {
                    // Polak–Ribière+ on the preconditioned residual
                    let num: f64 = (0..n).map(|i| z[i] * (prev_grad[i] - grad[i])).sum();
                    let den: f64 = -dot(&prev_z, &prev_grad);
                    let beta = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
                    for i in 0..n {
                        dir[i] = z[i] + beta * dir[i];
                    }
                    if dot(&dir, &grad) >= 0.0 {
                        dir.copy_from_slice(&z);
                    }
                } else {
                    dir.copy_from_slice(&z);
                }
                have_dir = true;
                let line = Line::new(f, u, &dir);
                let alpha = exact_step(f, &line);
                try_step(f, &line, u, &dir, alpha, &mut trial)
            }
            StepRule::AdaptiveCurvature => {
                let alpha0 = bb_step.unwrap_or(1.0);
                backtrack(f, u, &z, alpha0, &mut trial)
            }
            StepRule::Fixed { step } => backtrack(f, u, &z, step, &mut trial),
        };
        match accepted {
            Some(delta) => {
                failures = 0;
                prev_u.copy_from_slice(u);
                u.copy_from_slice(&trial);
                energy += delta;
                let e = energy;
                history.push(e);
                prev_grad.copy_from_slice(&grad);
                prev_z.copy_from_slice(&z);
                f.gradient(u, &mut grad);
                residual = free_max(&grad, free);
                if cfg.step_rule == StepRule::AdaptiveCurvature {
                    // step for the preconditioned iteration: <s, P s> / <s, y>
                    let mut ss = 0.0;
                    let mut sy = 0.0;
                    for i in 0..n {
                        if free[i] {
                            let s = u[i] - prev_u[i];
                            ss += s * s * precond[i];
                            sy += s * (grad[i] - prev_grad[i]);
                        }
                    }
                    bb_step = (sy > 0.0 && ss > 0.0).then(|| ss / sy);
                }
            }
            None => {
                // restart once along the preconditioned gradient, then give up
                failures += 1;
                have_dir = false;
                bb_step = None;
                if failures >= 2 || cfg.step_rule != StepRule::ConjugateGradient {
                    log::debug!("energy cannot be decreased further at residual {residual:.3e}");
                    return Err(Error::Convergence { iterations, residual });
                }
            }
        }
    }
    Ok(StageReport {
        epsilon: f.epsilon(),
        iterations,
        residual,
        threshold,
        energy_history: history,
    })
}

/// Restriction of the energy to the line `u + α d`.
struct Line {
    terms: Vec<LineTerms>,
    load_d: f64,
}

impl Line {
    fn new(f: &Functional, u: &[f64], d: &[f64]) -> Self {
        Self {
            terms: f.line_terms(u, d),
            load_d: dot(f.load(), d),
        }
    }
}

/// Energy change of the step `u + α d`, if it is a descent step.
fn try_step(f: &Functional, line: &Line, u: &[f64], d: &[f64], alpha: f64, trial: &mut [f64]) -> Option<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return None;
    }
    let delta = f.line_decrease(&line.terms, line.load_d, alpha);
    if !(delta <= 0.0) {
        return None;
    }
    for i in 0..u.len() {
        trial[i] = u[i] + alpha * d[i];
    }
    Some(delta)
}

fn backtrack(f: &Functional, u: &[f64], d: &[f64], alpha0: f64, trial: &mut [f64]) -> Option<f64> {
    let line = Line::new(f, u, d);
    let mut alpha = alpha0;
    for _ in 0..60 {
        if let Some(delta) = try_step(f, &line, u, d, alpha, trial) {
            if delta < 0.0 {
                return Some(delta);
            }
        }
        alpha *= 0.5;
    }
    None
}

/// Minimizer of `α ↦ E(u + α d)` by safeguarded Newton iteration on the
/// derivative. The function is convex, so a sign change brackets the root.
fn exact_step(f: &Functional, line: &Line) -> f64 {
    let (terms, bd) = (&line.terms, line.load_d);
    let (d0, c0) = f.line_derivatives(terms, bd, 0.0);
    if d0 >= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = f64::INFINITY;
    let mut alpha = if c0 > 0.0 { -d0 / c0 } else { 1.0 };
    for _ in 0..200 {
        let (d, c) = f.line_derivatives(terms, bd, alpha);
        if d.abs() <= 1e-12 * d0.abs() {
            break;
        }
        if d < 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        if hi.is_finite() && hi - lo <= 1e-15 * hi {
            break;
        }
        let newton = if c > 0.0 { alpha - d / c } else { f64::NAN };
        alpha = if newton > lo && newton < hi {
            newton
        } else if hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            // no upper bracket yet
            2.0 * alpha
        };
    }
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::CoefficientField;
    use crate::young::YoungFunction;

    fn p_laplace(p: f64) -> OperatorSpec {
        OperatorSpec::scalar(YoungFunction::power_law(p).unwrap())
    }

    #[test]
    fn zero_problem_stays_zero() {
        let mesh = Arc::new(Mesh2D::disk([0.0, 0.0], 1.0, 0.1).unwrap());
        let sol = solve_zero_dirichlet(&p_laplace(3.0), mesh, &MeasureData::zero(1), &SolveConfig::default()).unwrap();
        assert_eq!(sol.field.max_abs(), 0.0);
    }

    #[test]
    fn affine_boundary_data_is_reproduced() {
        // affine maps are exactly A-harmonic for constant coefficients
        let mesh = Arc::new(Mesh2D::rectangle(9, 9, [0.0, 1.0], [0.0, 1.0]).unwrap());
        let spec = OperatorSpec::new(YoungFunction::zygmund(3.0, 1.0).unwrap(), CoefficientField::default(), 2, 2).unwrap();
        let exact = VectorField2D::from_fn(mesh.clone(), 2, |p| vec![1.0 + p[0] - 2.0 * p[1], 0.5 * p[1]]);
        let mut start = exact.clone();
        for v in 0..mesh.num_vertices() {
            if !mesh.is_boundary(v) {
                start.values_mut()[2 * v] = 0.0;
                start.values_mut()[2 * v + 1] = 0.0;
            }
        }
        for rule in [StepRule::ConjugateGradient, StepRule::AdaptiveCurvature] {
            let cfg = SolveConfig {
                step_rule: rule,
                ..Default::default()
            };
            let sol = solve_dirichlet(&spec, &MeasureData::zero(2), &start, &cfg).unwrap();
            assert!(sol.field.max_distance(&exact) < 1e-7, "{rule:?}: {}", sol.field.max_distance(&exact));
            for st in &sol.stages {
                assert!(st.energy_history.windows(2).all(|w| w[1] <= w[0]));
            }
            let direct = crate::solver::energy(&spec, &sol.field, &MeasureData::zero(2), 0.0).unwrap();
            let tracked = *sol.final_stage().energy_history.last().unwrap();
            assert!((direct - tracked).abs() < 1e-12 * direct.abs());
        }
    }

    #[test]
    fn random_start_converges_to_the_same_minimizer() {
        let mesh = Arc::new(Mesh2D::disk([0.0, 0.0], 1.0, 1.0 / 8.0).unwrap());
        let spec = p_laplace(3.0);
        let mu = MeasureData::dirac([0.0, 0.0], 1.0);
        let a = solve_zero_dirichlet(&spec, mesh.clone(), &mu, &SolveConfig::default()).unwrap();
        let cfg = SolveConfig {
            random_start: true,
            seed: 7,
            ..Default::default()
        };
        let b = solve_zero_dirichlet(&spec, mesh, &mu, &cfg).unwrap();
        assert!(a.field.max_distance(&b.field) < 1e-5 * a.field.max_abs());
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = SolveConfig {
            tolerance: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg: std::result::Result<SolveConfig, _> = serde_json::from_str(r#"{"step_rule":{"kind":"fixed","step":-1}}"#);
        assert!(cfg.unwrap().validate().is_err());
    }

    #[test]
    fn iteration_cap_reports_the_residual() {
        let mesh = Arc::new(Mesh2D::disk([0.0, 0.0], 1.0, 1.0 / 16.0).unwrap());
        let cfg = SolveConfig {
            max_iterations: 2,
            ..Default::default()
        };
        match solve_zero_dirichlet(&p_laplace(3.0), mesh, &MeasureData::dirac([0.0, 0.0], 1.0), &cfg) {
            Err(Error::Convergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0);
            }
            other => panic!("expected a convergence failure, got {other:?}"),
        }
    }
}
