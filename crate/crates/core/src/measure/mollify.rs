//! Mollification onto cell grids with a compactly supported smooth bump.

use std::sync::OnceLock;

use super::{Grid, MeasureData, MeasureKind};
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

/// Sub-samples per cell side when discretizing radial densities.
const RADIAL_SUBSAMPLES: usize = 4;

/// Unnormalized bump `exp(-1 / (1 - rho2))` at squared relative radius
/// `rho2 = |x|² / w²`; zero for `rho2 >= 1`.
pub fn bump(rho2: f64) -> f64 {
    if rho2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - rho2)).exp()
    }
}

/// `C` such that `C w^{-2} bump(|x|²/w²)` has unit mass in the plane.
pub fn bump_normalization() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        // ∫_{B_1} bump = π ∫_0^1 exp(-1/v) dv
        let rule = GaussLegendre::new(16);
        let inner = rule.composite(|v: f64| if v > 0.0 { (-1.0 / v).exp() } else { 0.0 }, 0.0, 1.0, 64);
        1.0 / (std::f64::consts::PI * inner)
    })
}

/// Peak of the unit-width normalized bump, `C / e`.
pub fn bump_peak() -> f64 {
    bump_normalization() * (-1.0f64).exp()
}

/// Point masses (position, vector weight) representing `mu` on `grid`.
fn particles(mu: &MeasureData, grid: &Grid) -> Result<Vec<([f64; 2], Vec<f64>)>> {
    match mu.kind() {
        MeasureKind::Atoms(atoms) => atoms
            .iter()
            .map(|a| {
                if grid.contains(a.point) {
                    Ok((a.point, a.weight.clone()))
                } else {
                    Err(Error::Validation(format!("atom at {:?} lies outside the grid", a.point)))
                }
            })
            .collect(),
        MeasureKind::GridDensity { grid: src, values } => {
            let m = mu.m();
            let area = src.cell_area();
            Ok((0..src.len())
                .filter(|&i| values[i * m..(i + 1) * m].iter().any(|v| *v != 0.0))
                .map(|i| (src.cell_center(i), values[i * m..(i + 1) * m].iter().map(|v| v * area).collect()))
                .collect())
        }
        MeasureKind::Radial {
            center,
            mass,
            direction,
        } => {
            if center.len() != 2 {
                return Err(Error::Validation("only planar radial measures can be mollified".into()));
            }
            let c = [center[0], center[1]];
            let (xs, ys) = grid.cells_near(c, mass.radius());
            let k = RADIAL_SUBSAMPLES;
            let sub_area = grid.cell_area() / (k * k) as f64;
            let mut out = Vec::new();
            let mut captured = 0.0;
            for iy in ys {
                for ix in xs.clone() {
                    let i = grid.index(ix, iy);
                    let (bx, by) = grid.cell_bounds(i);
                    let mut cell = 0.0;
                    for sy in 0..k {
                        for sx in 0..k {
                            let x = bx[0] + (bx[1] - bx[0]) * (sx as f64 + 0.5) / k as f64;
                            let y = by[0] + (by[1] - by[0]) * (sy as f64 + 0.5) / k as f64;
                            let s = (x - c[0]).hypot(y - c[1]);
                            cell += mass.volume_density(s, 2) * sub_area;
                        }
                    }
                    if cell > 0.0 {
                        captured += cell;
                        out.push((grid.cell_center(i), cell));
                    }
                }
            }
            // renormalize when the whole support is covered so the singular
            // center does not lose mass to undersampling
            let support_inside = grid.contains([c[0] - mass.radius(), c[1] - mass.radius()])
                && grid.contains([c[0] + mass.radius(), c[1] + mass.radius()]);
            let factor = if support_inside && captured > 0.0 {
                mass.total(2) / captured
            } else {
                1.0
            };
            Ok(out
                .into_iter()
                .map(|(p, w)| (p, direction.iter().map(|d| d * w * factor).collect()))
                .collect())
        }
    }
}

/// Convolution of `mu` with the bump of radius `width`, sampled at the cell
/// centers of `grid` and renormalized per source point so that total mass is
/// preserved. When no cell center falls inside the bump the mass goes to the
/// containing cell.
pub fn mollify(mu: &MeasureData, width: f64, grid: &Grid) -> Result<MeasureData> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::Validation(format!("mollifier width must be positive, got {width}")));
    }
    if width > grid.extent() {
        return Err(Error::Validation(format!(
            "mollifier width {width} exceeds the domain extent {}",
            grid.extent()
        )));
    }
    let m = mu.m();
    let area = grid.cell_area();
    let mut values = vec![0.0; grid.len() * m];
    let mut weights: Vec<(usize, f64)> = Vec::new();
    for (p, w) in particles(mu, grid)? {
        weights.clear();
        let (xs, ys) = grid.cells_near(p, width);
        for iy in ys {
            for ix in xs.clone() {
                let i = grid.index(ix, iy);
                let c = grid.cell_center(i);
                let rho2 = ((c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2)) / (width * width);
                let k = bump(rho2);
                if k > 0.0 {
                    weights.push((i, k));
                }
            }
        }
        let total: f64 = weights.iter().map(|(_, k)| k).sum();
        if total == 0.0 {
            let i = grid
                .cell_of(p)
                .ok_or_else(|| Error::Validation(format!("point {p:?} lies outside the grid")))?;
            weights.push((i, 1.0));
        }
        let total: f64 = weights.iter().map(|(_, k)| k).sum();
        for &(i, k) in &weights {
            for c in 0..m {
                values[i * m + c] += w[c] * k / (total * area);
            }
        }
    }
    MeasureData::grid_density(*grid, m, values)
}
