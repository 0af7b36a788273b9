//! Vector-valued measure data, ball masses, density conditions and
//! mollification.

mod coefficient;
mod grid;
mod mollify;
mod radial;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use coefficient::{CoefficientField, Modulus};
pub use grid::Grid;
pub use mollify::{bump, bump_normalization, bump_peak, mollify};
pub use radial::{ball_volume, cap_fraction, sphere_area, RadialMass};

use crate::error::{Error, Result};
use crate::scenario::csv::fmt_e;
use crate::verify::{EstimateReport, EstimateSample};
use crate::young::YoungFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub point: [f64; 2],
    pub weight: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    Atoms(Vec<Atom>),
    /// Cellwise-constant density; `values[cell * m + c]` is component `c`.
    GridDensity { grid: Grid, values: Vec<f64> },
    /// `|mu|` radial about `center` with mass function `mass`; the vector
    /// measure is `direction * |mu|` for a unit `direction`.
    Radial {
        center: Vec<f64>,
        mass: RadialMass,
        direction: Vec<f64>,
    },
}

/// Bounded `R^m`-valued Radon measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureDescriptor", into = "MeasureDescriptor")]
pub struct MeasureData {
    kind: MeasureKind,
    m: usize,
}

/// JSON form of [`MeasureData`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureDescriptor {
    Atoms {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        atoms: Vec<Atom>,
    },
    GridDensity {
        grid: Grid,
        m: usize,
        values: Vec<f64>,
    },
    Radial {
        center: Vec<f64>,
        mass: RadialMass,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
    },
}

impl TryFrom<MeasureDescriptor> for MeasureData {
    type Error = Error;

    fn try_from(d: MeasureDescriptor) -> Result<Self> {
        match d {
            MeasureDescriptor::Atoms { m, atoms } => {
                let m = m.or_else(|| atoms.first().map(|a| a.weight.len())).unwrap_or(1);
                Self::atoms(atoms, m)
            }
            MeasureDescriptor::GridDensity { grid, m, values } => Self::grid_density(grid, m, values),
            MeasureDescriptor::Radial {
                center,
                mass,
                direction,
            } => Self::radial(center, mass, direction.unwrap_or_else(|| vec![1.0])),
        }
    }
}

impl From<MeasureData> for MeasureDescriptor {
    fn from(mu: MeasureData) -> Self {
        match mu.kind {
            MeasureKind::Atoms(atoms) => MeasureDescriptor::Atoms {
                m: Some(mu.m),
                atoms,
            },
            MeasureKind::GridDensity { grid, values } => MeasureDescriptor::GridDensity {
                grid,
                m: mu.m,
                values,
            },
            MeasureKind::Radial {
                center,
                mass,
                direction,
            } => MeasureDescriptor::Radial {
                center,
                mass,
                direction: Some(direction),
            },
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl MeasureData {
    pub fn zero(m: usize) -> Self {
        Self {
            kind: MeasureKind::Atoms(Vec::new()),
            m: m.max(1),
        }
    }

    pub fn atoms(atoms: Vec<Atom>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Validation("target dimension m must be >= 1".into()));
        }
        for a in &atoms {
            if a.weight.len() != m || !a.weight.iter().chain(&a.point).all(|v| v.is_finite()) {
                return Err(Error::Validation(format!(
                    "atom at {:?} must carry {m} finite weight components",
                    a.point
                )));
            }
        }
        Ok(Self {
            kind: MeasureKind::Atoms(atoms),
            m,
        })
    }

    /// Scalar point mass.
    pub fn dirac(point: [f64; 2], mass: f64) -> Self {
        Self {
            kind: MeasureKind::Atoms(vec![Atom {
                point,
                weight: vec![mass],
            }]),
            m: 1,
        }
    }

    pub fn grid_density(grid: Grid, m: usize, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if m == 0 || values.len() != grid.len() * m {
            return Err(Error::Validation(format!(
                "grid density needs {} values ({} cells × m = {m}), got {}",
                grid.len() * m,
                grid.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("grid density value {v} is not finite")));
        }
        Ok(Self {
            kind: MeasureKind::GridDensity { grid, values },
            m,
        })
    }

    pub fn radial(center: Vec<f64>, mass: RadialMass, direction: Vec<f64>) -> Result<Self> {
        let n = center.len();
        if n < 2 {
            return Err(Error::Validation("radial measures need a center in R^n, n >= 2".into()));
        }
        mass.validate(n)?;
        let len = norm(&direction);
        if direction.is_empty() || !(len > 0.0 && len.is_finite()) {
            return Err(Error::Validation("radial measure direction must be a nonzero vector".into()));
        }
        let m = direction.len();
        let direction = direction.iter().map(|d| d / len).collect();
        Ok(Self {
            kind: MeasureKind::Radial {
                center,
                mass,
                direction,
            },
            m,
        })
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Ambient dimension `n`.
    pub fn dimension(&self) -> usize {
        match &self.kind {
            MeasureKind::Radial { center, .. } => center.len(),
            _ => 2,
        }
    }

    pub fn grid(&self) -> Option<(&Grid, &[f64])> {
        match &self.kind {
            MeasureKind::GridDensity { grid, values } => Some((grid, values)),
            _ => None,
        }
    }

    /// `λ mu`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let kind = match &self.kind {
            MeasureKind::Atoms(atoms) => MeasureKind::Atoms(
                atoms
                    .iter()
                    .map(|a| Atom {
                        point: a.point,
                        weight: a.weight.iter().map(|w| lambda * w).collect(),
                    })
                    .collect(),
            ),
            MeasureKind::GridDensity { grid, values } => MeasureKind::GridDensity {
                grid: *grid,
                values: values.iter().map(|v| lambda * v).collect(),
            },
            MeasureKind::Radial {
                center,
                mass,
                direction,
            } => {
                let mass = match mass.clone() {
                    RadialMass::Power {
                        coef,
                        exponent,
                        radius,
                    } => RadialMass::Power {
                        coef: coef * lambda.abs(),
                        exponent,
                        radius,
                    },
                    RadialMass::Morrey {
                        young,
                        theta,
                        scale,
                        radius,
                    } => RadialMass::Morrey {
                        young,
                        theta,
                        scale: scale * lambda.abs(),
                        radius,
                    },
                };
                let sign = if lambda < 0.0 { -1.0 } else { 1.0 };
                MeasureKind::Radial {
                    center: center.clone(),
                    mass,
                    direction: direction.iter().map(|d| sign * d).collect(),
                }
            }
        };
        Self { kind, m: self.m }
    }

    /// `|mu|(Omega)`.
    pub fn total_variation(&self) -> f64 {
        match &self.kind {
            MeasureKind::Atoms(atoms) => atoms.iter().map(|a| norm(&a.weight)).sum(),
            MeasureKind::GridDensity { grid, values } => {
                values.chunks(self.m).map(norm).sum::<f64>() * grid.cell_area()
            }
            MeasureKind::Radial { center, mass, .. } => mass.total(center.len()),
        }
    }

    /// `|mu|(closed B_r(x0))`.
    pub fn ball_mass(&self, x0: &[f64], r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        match &self.kind {
            MeasureKind::Atoms(atoms) => {
                let x = [x0[0], x0[1]];
                atoms
                    .iter()
                    .filter(|a| dist2(a.point, x) <= r)
                    .map(|a| norm(&a.weight))
                    .sum()
            }
            MeasureKind::GridDensity { grid, values } => {
                grid_ball_mass(grid, values, self.m, [x0[0], x0[1]], r)
            }
            MeasureKind::Radial { center, mass, .. } => {
                let d = center
                    .iter()
                    .zip(x0)
                    .map(|(c, x)| (c - x) * (c - x))
                    .sum::<f64>()
                    .sqrt();
                mass.ball_mass(d, r, center.len())
            }
        }
    }

    /// Flat row-major CSV: a header line `nx,ny,m,x_min,x_max,y_min,y_max`,
    /// its values, then one line of `m` components per cell.
    pub fn grid_to_csv(&self) -> Result<String> {
        let (grid, values) = self
            .grid()
            .ok_or_else(|| Error::Validation("only grid densities export as grid CSV".into()))?;
        let mut out = String::from("nx,ny,m,x_min,x_max,y_min,y_max\n");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            grid.nx,
            grid.ny,
            self.m,
            fmt_e(grid.x_min),
            fmt_e(grid.x_max),
            fmt_e(grid.y_min),
            fmt_e(grid.y_max)
        );
        for cell in values.chunks(self.m) {
            let row: Vec<String> = cell.iter().map(|&v| fmt_e(v)).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        Ok(out)
    }

    pub fn grid_from_csv(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Validation(format!("grid CSV: {msg}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        lines.next().ok_or_else(|| bad("missing header"))?;
        let meta: Vec<&str> = lines
            .next()
            .ok_or_else(|| bad("missing grid line"))?
            .split(',')
            .collect();
        if meta.len() != 7 {
            return Err(bad("grid line needs 7 fields"));
        }
        let int = |s: &str| s.trim().parse::<usize>().map_err(|_| bad("bad integer"));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("bad number"));
        let grid = Grid::new(
            int(meta[0])?,
            int(meta[1])?,
            [num(meta[3])?, num(meta[4])?],
            [num(meta[5])?, num(meta[6])?],
        )?;
        let m = int(meta[2])?;
        let mut values = Vec::with_capacity(grid.len() * m);
        for line in lines {
            for field in line.split(',') {
                values.push(num(field)?);
            }
        }
        Self::grid_density(grid, m, values)
    }
}

/// Cells fully inside count whole, cells fully outside not at all, and
/// boundary cells are refined twice (4 × 4 sub-cells) with center inclusion.
fn grid_ball_mass(grid: &Grid, values: &[f64], m: usize, x0: [f64; 2], r: f64) -> f64 {
    const SUB: usize = 4;
    let (xs, ys) = grid.cells_near(x0, r);
    let mut total = 0.0;
    for iy in ys {
        for ix in xs.clone() {
            let i = grid.index(ix, iy);
            let density = norm(&values[i * m..(i + 1) * m]);
            if density == 0.0 {
                continue;
            }
            let (bx, by) = grid.cell_bounds(i);
            let far = (bx[0] - x0[0]).abs().max((bx[1] - x0[0]).abs())
                .hypot((by[0] - x0[1]).abs().max((by[1] - x0[1]).abs()));
            let near = (x0[0].clamp(bx[0], bx[1]) - x0[0]).hypot(x0[1].clamp(by[0], by[1]) - x0[1]);
            let fraction = if far <= r {
                1.0
            } else if near > r {
                0.0
            } else {
                let mut inside = 0usize;
                for sy in 0..SUB {
                    for sx in 0..SUB {
                        let p = [
                            bx[0] + (bx[1] - bx[0]) * (sx as f64 + 0.5) / SUB as f64,
                            by[0] + (by[1] - by[0]) * (sy as f64 + 0.5) / SUB as f64,
                        ];
                        if dist2(p, x0) <= r {
                            inside += 1;
                        }
                    }
                }
                inside as f64 / (SUB * SUB) as f64
            };
            total += fraction * density * grid.cell_area();
        }
    }
    total
}

/// Fits `c = max |mu|(B_r(x)) / (r^{n-1} g(r^{theta-1}))`; samples are the
/// worst center per radius, ordered by decreasing radius.
pub fn check_morrey(
    mu: &MeasureData,
    young: &YoungFunction,
    theta: f64,
    radii: &[f64],
    centers: &[Vec<f64>],
) -> Result<EstimateReport> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Parameter(format!("theta must lie in (0,1), got {theta}")));
    }
    let n = mu.dimension() as f64;
    let mut radii: Vec<f64> = radii.iter().copied().filter(|r| *r > 0.0).collect();
    radii.sort_by(|a, b| b.total_cmp(a));
    let samples = radii
        .iter()
        .map(|&r| {
            let rhs = r.powf(n - 1.0) * young.deriv(r.powf(theta - 1.0));
            let lhs = centers
                .iter()
                .map(|x| mu.ball_mass(x, r))
                .fold(0.0, f64::max);
            EstimateSample::new(lhs, rhs)
        })
        .collect();
    Ok(EstimateReport::new(samples).with_meta("theta", theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Verdict;
    use std::f64::consts::PI;

    #[test]
    fn atom_ball_masses() {
        let mu = MeasureData::atoms(
            vec![Atom {
                point: [0.0, 0.0],
                weight: vec![3.0, 4.0],
            }],
            2,
        )
        .unwrap();
        assert_eq!(mu.ball_mass(&[0.0, 0.0], 0.1), 5.0);
        assert_eq!(mu.ball_mass(&[1.0, 0.0], 0.0), 0.0);
        // closed balls
        assert_eq!(mu.ball_mass(&[1.0, 0.0], 1.0), 5.0);
        assert_eq!(mu.total_variation(), 5.0);
    }

    #[test]
    fn uniform_grid_ball() {
        let grid = Grid::new(200, 200, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let mu = MeasureData::grid_density(grid, 1, vec![1.0; grid.len()]).unwrap();
        let v = mu.ball_mass(&[0.5, 0.5], 0.25);
        assert!((v - PI / 16.0).abs() < 2e-4, "{v}");
        assert!((mu.total_variation() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ball_masses_monotone_in_radius() {
        let grid = Grid::square(40, 1.0).unwrap();
        let values: Vec<f64> = (0..grid.len()).map(|i| ((i * 37) % 11) as f64).collect();
        let mu = MeasureData::grid_density(grid, 1, values).unwrap();
        let mut last = 0.0;
        for k in 0..50 {
            let v = mu.ball_mass(&[0.13, -0.2], 0.03 * k as f64);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn morrey_checks() {
        let zero = MeasureData::zero(1);
        let g3 = YoungFunction::power_law(3.0).unwrap();
        let radii: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
        let centers = vec![vec![0.0, 0.0]];
        let r = check_morrey(&zero, &g3, 0.5, &radii, &centers).unwrap();
        assert_eq!(r.fitted_constant, 0.0);

        let dirac = MeasureData::dirac([0.0, 0.0], 1.0);
        let r = check_morrey(&dirac, &g3, 0.5, &radii, &centers).unwrap();
        assert!((r.fitted_constant - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Bounded);

        let g2 = YoungFunction::power_law(2.0).unwrap();
        let r = check_morrey(&dirac, &g2, 0.5, &radii, &centers).unwrap();
        assert_eq!(r.verdict, Verdict::Growing);
    }

    #[test]
    fn descriptor_round_trips() {
        let json = r#"{"kind":"atoms","atoms":[{"point":[0.0,0.5],"weight":[2.0]}]}"#;
        let mu: MeasureData = serde_json::from_str(json).unwrap();
        assert_eq!(mu.m(), 1);
        let back: MeasureData = serde_json::from_str(&serde_json::to_string(&mu).unwrap()).unwrap();
        assert_eq!(mu, back);
        let json = r#"{"kind":"radial","center":[0.0,0.0],
            "mass":{"kind":"power","coef":1.0,"exponent":2.0,"radius":0.5}}"#;
        let mu: MeasureData = serde_json::from_str(json).unwrap();
        assert!((mu.total_variation() - 0.25).abs() < 1e-15);
        assert!(serde_json::from_str::<MeasureData>(r#"{"kind":"atoms","atomz":[]}"#).is_err());
    }

    #[test]
    fn grid_csv_round_trip() {
        let grid = Grid::new(3, 2, [0.0, 3.0], [-1.0, 1.0]).unwrap();
        let mu = MeasureData::grid_density(grid, 2, (0..12).map(|i| i as f64 * 0.5).collect()).unwrap();
        let csv = mu.grid_to_csv().unwrap();
        assert!(csv.starts_with("nx,ny,m,x_min,x_max,y_min,y_max\n3,2,2,"));
        assert_eq!(MeasureData::grid_from_csv(&csv).unwrap(), mu);
    }

    #[test]
    fn scaling_scales_ball_masses() {
        let mu = MeasureData::radial(
            vec![0.0, 0.0],
            RadialMass::Power {
                coef: 1.0,
                exponent: 1.5,
                radius: 1.0,
            },
            vec![1.0],
        )
        .unwrap();
        let a = mu.ball_mass(&[0.2, 0.1], 0.3);
        let b = mu.scaled(-2.5).ball_mass(&[0.2, 0.1], 0.3);
        assert!((b - 2.5 * a).abs() < 1e-12);
    }
}
