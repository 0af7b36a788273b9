//! JSON scenario batches.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "scenarios": [{
//!     "id": "dirac-p3",
//!     "young": {"family": "power_law", "params": {"p": 3}},
//!     "load": {"kind": "measure", "measure": {"kind": "atoms", "atoms": [{"point": [0, 0], "weight": [1]}]}},
//!     "domain": {"kind": "disk", "center": [0, 0], "radius": 1},
//!     "resolutions": [16, 32],
//!     "task": {"kind": "pointwise", "center": [0, 0], "radii": [0.5, 0.25]}
//!   }]
//! }
//! ```

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::OperatorSpec;
use crate::measure::{mollify, CoefficientField, Grid, MeasureData};
use crate::solver::{Mesh2D, SolveConfig, VectorField2D};
use crate::young::YoungFunction;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Batch {
    #[serde(default)]
    pub seed: u64,
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub young: YoungFunction,
    #[serde(default)]
    pub coefficient: CoefficientField,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default)]
    pub load: LoadSpec,
    /// Mollify the load at width `width_factor * h` before solving.
    #[serde(default)]
    pub mollify: Option<Mollification>,
    #[serde(default)]
    pub domain: Domain,
    /// Cells per unit length (`h = 1/k`); for graded squares, segments per
    /// ring side.
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<usize>,
    #[serde(default)]
    pub boundary: BoundaryData,
    pub task: Task,
    #[serde(default)]
    pub solver: SolveConfig,
    /// Overrides the seed derived from the batch seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Output subdirectory; defaults to the id.
    #[serde(default)]
    pub output: Option<String>,
}

fn one() -> usize {
    1
}

fn default_resolutions() -> Vec<usize> {
    vec![16]
}

/// Right-hand side of the equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoadSpec {
    #[default]
    Zero,
    Measure { measure: Box<MeasureData> },
    /// Constant density `value` on `[-half, half]²` (first component).
    Uniform { value: f64, half: f64, cells: usize },
    /// Cellwise density uniform in `[0, max)` on `[-half, half]²`, drawn
    /// from the scenario seed.
    RandomGrid { max: f64, half: f64, cells: usize },
    /// `mass` spread as a Gaussian of standard deviation `width`.
    Gaussian {
        center: [f64; 2],
        mass: f64,
        width: f64,
        half: f64,
        cells: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mollification {
    pub width_factor: f64,
    /// Half-width of the square density grid, centered at the origin.
    pub grid_half: f64,
    /// Grid cells per mesh cell.
    #[serde(default = "two")]
    pub cells_per_h: usize,
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Rectangle {
        x: [f64; 2],
        y: [f64; 2],
    },
    /// Geometrically graded square, fine at its center.
    GradedSquare {
        center: [f64; 2],
        half: f64,
        levels: usize,
        layers: usize,
    },
}

impl Default for Domain {
    fn default() -> Self {
        Domain::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }
}

impl Domain {
    pub fn mesh(&self, resolution: usize) -> Result<Arc<Mesh2D>> {
        let k = resolution as f64;
        let mesh = match *self {
            Domain::Disk { center, radius } => Mesh2D::disk(center, radius, 1.0 / k)?,
            Domain::Rectangle { x, y } => {
                let nx = ((x[1] - x[0]) * k).round().max(1.0) as usize;
                let ny = ((y[1] - y[0]) * k).round().max(1.0) as usize;
                Mesh2D::rectangle(nx, ny, x, y)?
            }
            Domain::GradedSquare {
                center,
                half,
                levels,
                layers,
            } => Mesh2D::graded_square(center, half, levels, resolution, layers)?,
        };
        Ok(Arc::new(mesh))
    }

    /// Nominal mesh size at a resolution.
    pub fn h(&self, resolution: usize) -> f64 {
        match *self {
            Domain::GradedSquare { half, .. } => 2.0 * half / resolution as f64,
            _ => 1.0 / resolution as f64,
        }
    }
}

/// Dirichlet data `u_c(x) = c0 + c1 x + c2 y + Σ a sin(k·x + φ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BoundaryData {
    /// `[c0, c1, c2]` per component.
    #[serde(default)]
    pub affine: Vec<[f64; 3]>,
    #[serde(default)]
    pub waves: Vec<Wave>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wave {
    pub component: usize,
    pub amplitude: f64,
    pub wavevector: [f64; 2],
    #[serde(default)]
    pub phase: f64,
}

impl BoundaryData {
    pub fn is_zero(&self) -> bool {
        self.affine.iter().all(|a| a.iter().all(|&c| c == 0.0)) && self.waves.iter().all(|w| w.amplitude == 0.0)
    }

    pub fn eval(&self, p: [f64; 2], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (c, a) in self.affine.iter().enumerate().take(m) {
            out[c] += a[0] + a[1] * p[0] + a[2] * p[1];
        }
        for w in &self.waves {
            if w.component < m {
                out[w.component] += w.amplitude * (w.wavevector[0] * p[0] + w.wavevector[1] * p[1] + w.phase).sin();
            }
        }
        out
    }

    /// Nodal interpolant, used both as boundary values and starting guess.
    pub fn field(&self, mesh: Arc<Mesh2D>, m: usize) -> VectorField2D {
        VectorField2D::from_fn(mesh, m, |p| self.eval(p, m))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    YoungAudit {
        #[serde(default = "t_min")]
        t_min: f64,
        #[serde(default = "t_max")]
        t_max: f64,
        #[serde(default = "samples")]
        samples: usize,
        #[serde(default = "pairs")]
        pairs: usize,
    },
    Wolff {
        center: [f64; 2],
        radius: f64,
    },
    RearrangementBound {
        center: [f64; 2],
        radius: f64,
    },
    Solve {
        /// Compare with the radial solution about the disk center.
        #[serde(default)]
        radial_comparison: bool,
    },
    /// Mollifies the load at each width on a square grid of
    /// `grid_cells²` cells covering `[-grid_half, grid_half]²`.
    Sola {
        widths: Vec<f64>,
        grid_half: f64,
        grid_cells: usize,
    },
    Comparison {
        center: [f64; 2],
        radii: Vec<f64>,
    },
    ExcessDecay {
        center: [f64; 2],
        radius: f64,
        sigma: f64,
        levels: usize,
        #[serde(default = "alpha_d")]
        alpha_d: f64,
    },
    Pointwise {
        center: [f64; 2],
        radii: Vec<f64>,
        #[serde(default)]
        radial_comparison: bool,
    },
    Vmo {
        center: [f64; 2],
        radii: Vec<f64>,
        #[serde(default = "vmo_threshold")]
        threshold: f64,
        #[serde(default)]
        expect_vanishing: Option<bool>,
    },
    Campanato {
        center: [f64; 2],
        radii: Vec<f64>,
        /// Morrey exponent of the load; asserts `θ̂ >= θ - tolerance`.
        #[serde(default)]
        theta: Option<f64>,
        #[serde(default = "fit_tolerance")]
        tolerance: f64,
    },
}

fn t_min() -> f64 {
    1e-3
}
fn t_max() -> f64 {
    1e3
}
fn samples() -> usize {
    200
}
fn pairs() -> usize {
    10_000
}
fn alpha_d() -> f64 {
    crate::verify::ALPHA_D
}
fn vmo_threshold() -> f64 {
    crate::verify::VMO_THRESHOLD
}
fn fit_tolerance() -> f64 {
    0.1
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::YoungAudit { .. } => "young_audit",
            Task::Wolff { .. } => "wolff",
            Task::RearrangementBound { .. } => "rearrangement_bound",
            Task::Solve { .. } => "solve",
            Task::Sola { .. } => "sola",
            Task::Comparison { .. } => "comparison",
            Task::ExcessDecay { .. } => "excess_decay",
            Task::Pointwise { .. } => "pointwise",
            Task::Vmo { .. } => "vmo",
            Task::Campanato { .. } => "campanato",
        }
    }

    /// Parameter checks that do not require running anything.
    pub fn validate(&self, s: &Scenario) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} must be positive, got {v}")))
            }
        };
        let decreasing = |radii: &[f64]| {
            if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
                Err(Error::Validation("radii must be positive and strictly decreasing".into()))
            } else {
                Ok(())
            }
        };
        let radial = |on: bool| match (on, &s.domain) {
            (true, Domain::Disk { .. }) if s.coefficient.is_constant() => Ok(()),
            (true, _) => Err(Error::Validation(
                "radial comparison needs a disk domain and a constant coefficient".into(),
            )),
            (false, _) => Ok(()),
        };
        match self {
            Task::YoungAudit {
                t_min,
                t_max,
                samples,
                ..
            } => {
                positive("t_min", *t_min)?;
                if !(t_max > t_min && t_max.is_finite()) || *samples < 2 {
                    return Err(Error::Validation("need t_min < t_max and at least two samples".into()));
                }
                Ok(())
            }
            Task::Wolff { radius, .. } | Task::RearrangementBound { radius, .. } => positive("radius", *radius),
            Task::Solve { radial_comparison } => radial(*radial_comparison),
            Task::Sola {
                widths,
                grid_half,
                grid_cells,
            } => {
                positive("grid_half", *grid_half)?;
                if !s.boundary.is_zero() {
                    return Err(Error::Validation("mollification sweeps use zero boundary values".into()));
                }
                if *grid_cells == 0 {
                    return Err(Error::Validation("grid_cells must be positive".into()));
                }
                decreasing(widths)
            }
            Task::Comparison { radii, .. } | Task::Vmo { radii, .. } => decreasing(radii),
            Task::Campanato { radii, tolerance, .. } => {
                positive("tolerance", *tolerance)?;
                decreasing(radii)
            }
            Task::Pointwise {
                radii,
                radial_comparison,
                ..
            } => {
                radial(*radial_comparison)?;
                decreasing(radii)
            }
            Task::ExcessDecay {
                radius, sigma, levels, ..
            } => {
                positive("radius", *radius)?;
                if !(*sigma > 0.0 && *sigma < 1.0) || *levels == 0 {
                    return Err(Error::Validation("need sigma in (0, 1) and at least one level".into()));
                }
                Ok(())
            }
        }
    }

    pub fn needs_solve(&self) -> bool {
        !matches!(
            self,
            Task::YoungAudit { .. } | Task::Wolff { .. } | Task::RearrangementBound { .. }
        )
    }
}

fn schema(path: String, message: impl Into<String>) -> Error {
    Error::Schema {
        path,
        message: message.into(),
    }
}

impl Batch {
    /// Parses and validates; failures carry the JSON path of the offending
    /// field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let batch: Batch = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        batch.validate()?;
        Ok(batch)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        let mut dirs = BTreeSet::new();
        for (i, s) in self.scenarios.iter().enumerate() {
            let at = |f: &str| format!("scenarios[{i}].{f}");
            if s.id.is_empty() || !s.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(schema(at("id"), format!("ids use [A-Za-z0-9_-], got {:?}", s.id)));
            }
            if !ids.insert(s.id.as_str()) {
                return Err(schema(at("id"), format!("duplicate id {:?}", s.id)));
            }
            let dir = s.output_dir();
            if dir.is_empty() || !dir.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(schema(at("output"), format!("output directories use [A-Za-z0-9_-], got {dir:?}")));
            }
            if !dirs.insert(dir) {
                return Err(schema(at("output"), format!("output directory {dir:?} is used twice")));
            }
            s.task.validate(s).map_err(|e| schema(at("task"), e.to_string()))?;
            s.operator().map_err(|e| schema(at("young"), e.to_string()))?;
            s.coefficient.validate().map_err(|e| schema(at("coefficient"), e.to_string()))?;
            s.solver.validate().map_err(|e| schema(at("solver"), e.to_string()))?;
            if s.task.needs_solve() && s.resolutions.is_empty() {
                return Err(schema(at("resolutions"), "solver tasks need at least one resolution"));
            }
            if s.resolutions.iter().any(|&k| k < 2) {
                return Err(schema(at("resolutions"), "resolutions must be >= 2"));
            }
            if let Domain::GradedSquare { .. } = s.domain {
                if s.resolutions.iter().any(|k| k % 2 != 0) {
                    return Err(schema(at("resolutions"), "graded squares need even resolutions"));
                }
            }
            if let Some(mo) = s.mollify {
                if !(mo.width_factor > 0.0 && mo.grid_half > 0.0 && mo.cells_per_h > 0) {
                    return Err(schema(at("mollify"), "mollification needs positive width, extent and cells"));
                }
            }
            let m = s.load_measure(0).map_err(|e| schema(at("load"), e.to_string()))?;
            if m.m() != s.m {
                return Err(schema(at("load"), format!("load has {} components, scenario m = {}", m.m(), s.m)));
            }
        }
        Ok(())
    }
}

impl Scenario {
    pub fn output_dir(&self) -> &str {
        self.output.as_deref().unwrap_or(&self.id)
    }

    pub fn operator(&self) -> Result<OperatorSpec> {
        OperatorSpec::new(self.young.clone(), self.coefficient.clone(), 2, self.m)
    }

    /// Load before mollification.
    pub fn load_measure(&self, seed: u64) -> Result<MeasureData> {
        let m = self.m;
        match &self.load {
            LoadSpec::Zero => Ok(MeasureData::zero(m)),
            LoadSpec::Measure { measure } => Ok((**measure).clone()),
            LoadSpec::Uniform { value, half, cells } => {
                let grid = Grid::square(*cells, *half)?;
                let mut values = vec![0.0; grid.len() * m];
                for i in 0..grid.len() {
                    values[i * m] = *value;
                }
                MeasureData::grid_density(grid, m, values)
            }
            LoadSpec::RandomGrid { max, half, cells } => {
                let grid = Grid::square(*cells, *half)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut values = vec![0.0; grid.len() * m];
                for i in 0..grid.len() {
                    values[i * m] = rng.random_range(0.0..*max);
                }
                MeasureData::grid_density(grid, m, values)
            }
            LoadSpec::Gaussian {
                center,
                mass,
                width,
                half,
                cells,
            } => {
                let grid = Grid::square(*cells, *half)?;
                let mut values = vec![0.0; grid.len() * m];
                let norm = mass / (2.0 * std::f64::consts::PI * width * width);
                for i in 0..grid.len() {
                    let c = grid.cell_center(i);
                    let d2 = (c[0] - center[0]).powi(2) + (c[1] - center[1]).powi(2);
                    values[i * m] = norm * (-0.5 * d2 / (width * width)).exp();
                }
                MeasureData::grid_density(grid, m, values)
            }
        }
    }

    /// Load used by the solver at a resolution: mollified when configured.
    pub fn solver_load(&self, raw: &MeasureData, resolution: usize) -> Result<MeasureData> {
        match self.mollify {
            None => Ok(raw.clone()),
            Some(mo) => {
                let h = self.domain.h(resolution);
                let cells = ((2.0 * mo.grid_half / h) * mo.cells_per_h as f64).ceil() as usize;
                let grid = Grid::square(cells, mo.grid_half)?;
                mollify(raw, mo.width_factor * h, &grid)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"scenarios": [{"id": "a", "young": {"family": "power_law", "params": {"p": 3}},
        "task": {"kind": "wolff", "center": [0, 0], "radius": 1}}]}"#;

    #[test]
    fn minimal_batch_parses() {
        let b = Batch::from_json(MINIMAL).unwrap();
        assert_eq!(b.scenarios[0].resolutions, vec![16]);
        assert_eq!(b.scenarios[0].domain, Domain::default());
        assert!(Batch::from_json(r#"{"scenarios": []}"#).unwrap().scenarios.is_empty());
    }

    #[test]
    fn schema_errors_name_the_field() {
        let bad = MINIMAL.replace("\"p\": 3", "\"q\": 3");
        match Batch::from_json(&bad) {
            Err(Error::Schema { path, .. }) => assert!(path.starts_with("scenarios[0].young"), "{path}"),
            other => panic!("{other:?}"),
        }
        let dup = r#"{"scenarios": [
            {"id": "a", "young": {"family": "power_law", "params": {"p": 3}}, "task": {"kind": "wolff", "center": [0, 0], "radius": 1}},
            {"id": "a", "young": {"family": "power_law", "params": {"p": 3}}, "task": {"kind": "wolff", "center": [0, 0], "radius": 1}}]}"#;
        match Batch::from_json(dup) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "scenarios[1].id"),
            other => panic!("{other:?}"),
        }
        let low = MINIMAL.replace("\"p\": 3", "\"p\": 1.5");
        assert!(matches!(Batch::from_json(&low), Err(Error::Schema { .. })));
    }

    #[test]
    fn boundary_data() {
        let b = BoundaryData {
            affine: vec![[1.0, 2.0, 0.0]],
            waves: vec![Wave {
                component: 0,
                amplitude: 0.5,
                wavevector: [0.0, 3.0],
                phase: 0.0,
            }],
        };
        let v = b.eval([0.5, 0.2], 1);
        assert!((v[0] - (2.0 + 0.5 * 0.6f64.sin())).abs() < 1e-15);
        assert!(BoundaryData::default().is_zero());
    }
}
