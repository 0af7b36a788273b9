//! Piecewise-linear `R^m`-valued fields on a mesh.

use std::fmt::Write as _;
use std::sync::Arc;

use super::Mesh2D;
use crate::error::{Error, Result};
use crate::scenario::csv::fmt_e;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2D {
    mesh: Arc<Mesh2D>,
    m: usize,
    /// `values[v * m + c]`.
    values: Vec<f64>,
}

impl VectorField2D {
    pub fn zeros(mesh: Arc<Mesh2D>, m: usize) -> Self {
        let n = mesh.num_vertices() * m;
        Self {
            mesh,
            m,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(mesh: Arc<Mesh2D>, m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 || values.len() != mesh.num_vertices() * m {
            return Err(Error::Validation(format!(
                "field needs {} values, got {}",
                mesh.num_vertices() * m,
                values.len()
            )));
        }
        Ok(Self { mesh, m, values })
    }

    /// Nodal interpolant of `f`.
    pub fn from_fn<F: Fn([f64; 2]) -> Vec<f64>>(mesh: Arc<Mesh2D>, m: usize, f: F) -> Self {
        let mut values = Vec::with_capacity(mesh.num_vertices() * m);
        for &p in mesh.vertices() {
            let v = f(p);
            assert_eq!(v.len(), m, "interpolated function must have {m} components");
            values.extend(v);
        }
        Self { mesh, m, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh2D> {
        &self.mesh
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, v: usize) -> &[f64] {
        &self.values[v * self.m..(v + 1) * self.m]
    }

    /// `Du` on triangle `t`, laid out as `[c * 2 + d]` (row `c`, column `d`).
    pub fn gradient(&self, t: usize) -> Vec<f64> {
        let mut out = vec![0.0; 2 * self.m];
        gradient_into(&self.mesh, &self.values, self.m, t, &mut out);
        out
    }

    /// Value at `p`, or `None` outside the mesh.
    pub fn interpolate(&self, p: [f64; 2]) -> Option<Vec<f64>> {
        let (t, b) = self.mesh.locate(p)?;
        Some(self.eval_bary(t, b))
    }

    /// Interpolant on another mesh; points outside this field's mesh take
    /// the value `outside(p)`.
    pub fn transfer<F: Fn([f64; 2]) -> Vec<f64>>(&self, target: Arc<Mesh2D>, outside: F) -> Self {
        let m = self.m;
        Self::from_fn(target, m, |p| self.interpolate(p).unwrap_or_else(|| outside(p)))
    }

    /// Sets the values on boundary vertices to zero.
    pub fn zero_boundary(&mut self) {
        for v in 0..self.mesh.num_vertices() {
            if self.mesh.is_boundary(v) {
                self.values[v * self.m..(v + 1) * self.m].fill(0.0);
            }
        }
    }

    pub fn eval_bary(&self, t: usize, b: [f64; 3]) -> Vec<f64> {
        let tri = self.mesh.triangles()[t];
        (0..self.m)
            .map(|c| (0..3).map(|k| b[k] * self.values[tri[k] * self.m + c]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Largest nodal `|u(v) - w(v)|` (Euclidean in `R^m`).
    pub fn max_distance(&self, other: &Self) -> f64 {
        self.values
            .chunks(self.m)
            .zip(other.values.chunks(other.m))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// `Σ_T |T| |Du_T - Dw_T|`, the discrete `W^{1,1}` seminorm distance.
    pub fn w11_distance(&self, other: &Self) -> f64 {
        (0..self.mesh.num_triangles())
            .map(|t| {
                let a = self.gradient(t);
                let b = other.gradient(t);
                let d: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
                self.mesh.area(t) * d.sqrt()
            })
            .sum()
    }

    /// CSV with columns `x, y, u1..um`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y");
        for c in 1..=self.m {
            let _ = write!(out, ",u{c}");
        }
        out.push('\n');
        for (v, p) in self.mesh.vertices().iter().enumerate() {
            let _ = write!(out, "{},{}", fmt_e(p[0]), fmt_e(p[1]));
            for x in self.at(v) {
                let _ = write!(out, ",{}", fmt_e(*x));
            }
            out.push('\n');
        }
        out
    }
}

/// `Du` on triangle `t` from raw nodal values.
pub(crate) fn gradient_into(mesh: &Mesh2D, values: &[f64], m: usize, t: usize, out: &mut [f64]) {
    let tri = mesh.triangles()[t];
    let g = mesh.basis_gradients(t);
    for c in 0..m {
        let mut d = [0.0; 2];
        for k in 0..3 {
            let u = values[tri[k] * m + c];
            d[0] += u * g[k][0];
            d[1] += u * g[k][1];
        }
        out[2 * c] = d[0];
        out[2 * c + 1] = d[1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fields_have_exact_gradients() {
        let mesh = Arc::new(Mesh2D::disk([0.0, 0.0], 1.0, 0.2).unwrap());
        let u = VectorField2D::from_fn(mesh.clone(), 2, |p| vec![2.0 * p[0] - p[1] + 1.0, 0.5 * p[1]]);
        for t in 0..mesh.num_triangles() {
            let g = u.gradient(t);
            let expect = [2.0, -1.0, 0.0, 0.5];
            for (a, b) in g.iter().zip(expect) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let v = u.interpolate([0.1, -0.3]).unwrap();
        assert!((v[0] - 1.5).abs() < 1e-12 && (v[1] + 0.15).abs() < 1e-12);
        assert!(u.interpolate([2.0, 0.0]).is_none());
        assert_eq!(u.w11_distance(&u), 0.0);
    }

    #[test]
    fn csv_header() {
        let mesh = Arc::new(Mesh2D::rectangle(1, 1, [0.0, 1.0], [0.0, 1.0]).unwrap());
        let u = VectorField2D::zeros(mesh, 3);
        let csv = u.to_csv();
        assert!(csv.starts_with("x,y,u1,u2,u3\n"));
        assert_eq!(csv.lines().count(), 5);
    }
}
