//! Discrete energy `Σ_T |T| a(x_T) G_ε(|Du_T|) - <u, b>` and its derivatives.

use super::mesh::subtriangle_points;
use super::vfield::{gradient_into, VectorField2D};
use super::Mesh2D;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::OperatorSpec;
use crate::measure::{MeasureData, MeasureKind};

/// Sub-triangle refinement used to pair densities with hat functions.
const LOAD_SUBDIVISION: usize = 4;

/// Nodal load `b_v = <phi_v, mu>` (`m` components per vertex).
///
/// Atoms are paired exactly through the barycentric coordinates of the
/// containing triangle; densities by sub-triangle centroid quadrature.
pub fn load_vector(mesh: &Mesh2D, mu: &MeasureData) -> Result<Vec<f64>> {
    let m = mu.m();
    let mut b = vec![0.0; mesh.num_vertices() * m];
    let quad = subtriangle_points(LOAD_SUBDIVISION);
    let weight = 1.0 / quad.len() as f64;
    let mut add_density = |density: &dyn Fn([f64; 2]) -> Option<Vec<f64>>| {
        for t in 0..mesh.num_triangles() {
            let tri = mesh.triangles()[t];
            let p = tri.map(|v| mesh.vertices()[v]);
            for l in &quad {
                let x = [
                    l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
                    l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
                ];
                if let Some(f) = density(x) {
                    for k in 0..3 {
                        for c in 0..m {
                            b[tri[k] * m + c] += mesh.area(t) * weight * l[k] * f[c];
                        }
                    }
                }
            }
        }
    };
    match mu.kind() {
        MeasureKind::Atoms(atoms) => {
            for a in atoms {
                let (t, l) = mesh
                    .locate(a.point)
                    .ok_or_else(|| Error::Validation(format!("atom at {:?} lies outside the mesh", a.point)))?;
                let tri = mesh.triangles()[t];
                for k in 0..3 {
                    for c in 0..m {
                        b[tri[k] * m + c] += l[k] * a.weight[c];
                    }
                }
            }
        }
        MeasureKind::GridDensity { grid, values } => {
            add_density(&|x| grid.cell_of(x).map(|i| values[i * m..(i + 1) * m].to_vec()));
        }
        MeasureKind::Radial {
            center,
            mass,
            direction,
        } => {
            if center.len() != 2 {
                return Err(Error::Validation("planar solves need a planar radial measure".into()));
            }
            let c = [center[0], center[1]];
            add_density(&|x| {
                let s = (x[0] - c[0]).hypot(x[1] - c[1]);
                let rho = mass.volume_density(s, 2);
                Some(direction.iter().map(|d| d * rho).collect())
            });
            // restore the exact mass lost to the integrable singularity at
            // the center when the support lies inside the mesh
            let covered = (0..mesh.num_vertices())
                .filter(|&v| mesh.is_boundary(v))
                .all(|v| {
                    let p = mesh.vertices()[v];
                    (p[0] - c[0]).hypot(p[1] - c[1]) >= mass.radius()
                });
            let paired: f64 = b
                .chunks(m)
                .map(|bv| bv.iter().zip(direction).map(|(x, d)| x * d).sum::<f64>())
                .sum();
            if covered && paired > 0.0 {
                let factor = mass.total(2) / paired;
                b.iter_mut().for_each(|x| *x *= factor);
            }
        }
    }
    Ok(b)
}

/// Scratch space for one triangle gradient; on the stack for `m <= 8`.
struct GradBuf {
    stack: [f64; 16],
    heap: Vec<f64>,
    len: usize,
}

impl GradBuf {
    fn new(m: usize) -> Self {
        let len = 2 * m;
        Self {
            stack: [0.0; 16],
            heap: if len > 16 { vec![0.0; len] } else { Vec::new() },
            len,
        }
    }

    fn get(&mut self) -> &mut [f64] {
        if self.heap.is_empty() {
            &mut self.stack[..self.len]
        } else {
            &mut self.heap
        }
    }
}

/// Energy functional with regularization `ε` on a fixed mesh and load.
pub struct Functional<'a> {
    spec: &'a OperatorSpec,
    mesh: &'a Mesh2D,
    /// `|T| a(x_T)`.
    weights: Vec<f64>,
    load: Vec<f64>,
    epsilon: f64,
    exec: Exec,
}

/// Per-triangle data along a line `u + α d`: weight, `|Du|²`, `Du:Dd`,
/// `|Dd|²`.
#[derive(Clone, Copy, Default)]
pub(crate) struct LineTerms {
    w: f64,
    a: f64,
    b: f64,
    c: f64,
}

impl<'a> Functional<'a> {
    pub fn new(spec: &'a OperatorSpec, mesh: &'a Mesh2D, load: Vec<f64>, epsilon: f64, exec: Exec) -> Self {
        let weights = (0..mesh.num_triangles())
            .map(|t| mesh.area(t) * spec.coefficient.eval(mesh.centroid(t)))
            .collect();
        Self {
            spec,
            mesh,
            weights,
            load,
            epsilon,
            exec,
        }
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
    }

    fn rho(&self, norm2: f64) -> f64 {
        (norm2.max(0.0) + self.epsilon * self.epsilon).sqrt()
    }

    /// `G_ε(|ξ|) = G(sqrt(|ξ|² + ε²)) - G(ε)`.
    fn g_eps(&self, norm2: f64) -> f64 {
        self.spec.young.value(self.rho(norm2)) - self.spec.young.value(self.epsilon)
    }

    fn grad_sq(&self, values: &[f64], t: usize) -> f64 {
        let mut buf = GradBuf::new(self.m());
        let du = buf.get();
        gradient_into(self.mesh, values, self.m(), t, du);
        du.iter().map(|x| x * x).sum()
    }

    pub fn energy(&self, values: &[f64]) -> f64 {
        let elastic = self
            .exec
            .sum(self.mesh.num_triangles(), |t| self.weights[t] * self.g_eps(self.grad_sq(values, t)));
        elastic - self.pairing(values)
    }

    /// `<u, b>`.
    pub fn pairing(&self, values: &[f64]) -> f64 {
        self.exec.sum(values.len(), |i| values[i] * self.load[i])
    }

    /// Full gradient (boundary entries included).
    pub fn gradient(&self, values: &[f64], out: &mut [f64]) {
        let m = self.m();
        let width = 3 * m;
        let mut local = vec![0.0; self.mesh.num_triangles() * width];
        self.exec.fill_chunks(&mut local, width, |t, chunk| {
            let mut buf = GradBuf::new(m);
            let du = buf.get();
            gradient_into(self.mesh, values, m, t, du);
            let rho = self.rho(du.iter().map(|x| x * x).sum());
            let k = self.weights[t] * self.spec.young.deriv_over_t(rho);
            let g = self.mesh.basis_gradients(t);
            for l in 0..3 {
                for c in 0..m {
                    chunk[l * m + c] = k * (du[2 * c] * g[l][0] + du[2 * c + 1] * g[l][1]);
                }
            }
        });
        self.exec.fill_chunks(out, m, |v, chunk| {
            for (c, o) in chunk.iter_mut().enumerate() {
                let s: f64 = self
                    .mesh
                    .star(v)
                    .iter()
                    .map(|&(t, l)| local[t * width + l * m + c])
                    .sum();
                *o = s - self.load[v * m + c];
            }
        });
    }

    /// Diagonal of the Hessian, floored to stay positive.
    pub fn jacobi(&self, values: &[f64], out: &mut [f64]) {
        let m = self.m();
        let width = 3 * m;
        let mut local = vec![0.0; self.mesh.num_triangles() * width];
        self.exec.fill_chunks(&mut local, width, |t, chunk| {
            let mut buf = GradBuf::new(m);
            let du = buf.get();
            gradient_into(self.mesh, values, m, t, du);
            let rho = self.rho(du.iter().map(|x| x * x).sum());
            let k = self.spec.young.deriv_over_t(rho);
            let extra = if rho > 0.0 {
                (self.spec.young.deriv2(rho) - k) / (rho * rho)
            } else {
                0.0
            };
            let g = self.mesh.basis_gradients(t);
            for l in 0..3 {
                let gg = g[l][0] * g[l][0] + g[l][1] * g[l][1];
                for c in 0..m {
                    let proj = du[2 * c] * g[l][0] + du[2 * c + 1] * g[l][1];
                    chunk[l * m + c] = self.weights[t] * (k * gg + extra * proj * proj).max(0.0);
                }
            }
        });
        self.exec.fill_chunks(out, m, |v, chunk| {
            for (c, o) in chunk.iter_mut().enumerate() {
                *o = self
                    .mesh
                    .star(v)
                    .iter()
                    .map(|&(t, l)| local[t * width + l * m + c])
                    .sum();
            }
        });
        let top = out.iter().copied().fold(0.0, f64::max);
        let floor = if top > 0.0 { 1e-12 * top } else { 1.0 };
        out.iter_mut().for_each(|d| *d = d.max(floor));
    }

    pub(crate) fn line_terms(&self, u: &[f64], d: &[f64]) -> Vec<LineTerms> {
        let m = self.m();
        self.exec.map(self.mesh.num_triangles(), |t| {
            let (mut b1, mut b2) = (GradBuf::new(m), GradBuf::new(m));
            let (du, dd) = (b1.get(), b2.get());
            gradient_into(self.mesh, u, m, t, du);
            gradient_into(self.mesh, d, m, t, dd);
            LineTerms {
                w: self.weights[t],
                a: du.iter().map(|x| x * x).sum(),
                b: du.iter().zip(dd.iter()).map(|(x, y)| x * y).sum(),
                c: dd.iter().map(|x| x * x).sum(),
            }
        })
    }

    /// `(φ'(α), φ''(α))` for `φ(α) = E(u + α d)`, given `<b, d>`.
    pub(crate) fn line_derivatives(&self, terms: &[LineTerms], load_d: f64, alpha: f64) -> (f64, f64) {
        let young = &self.spec.young;
        let (d1, d2) = self.exec.sum2(terms.len(), |t| {
            let lt = terms[t];
            let along = lt.b + alpha * lt.c;
            let rho = self.rho(lt.a + 2.0 * alpha * lt.b + alpha * alpha * lt.c);
            let k = young.deriv_over_t(rho);
            let curv = if rho > 0.0 {
                (young.deriv2(rho) - k) * along * along / (rho * rho)
            } else {
                0.0
            };
            (lt.w * k * along, lt.w * (k * lt.c + curv))
        });
        (d1 - load_d, d2)
    }

    /// `φ(α) - φ(0)`, summed term by term to avoid cancellation.
    pub(crate) fn line_decrease(&self, terms: &[LineTerms], load_d: f64, alpha: f64) -> f64 {
        let young = &self.spec.young;
        let elastic = self.exec.sum(terms.len(), |t| {
            let lt = terms[t];
            let r0 = self.rho(lt.a);
            let r1 = self.rho(lt.a + 2.0 * alpha * lt.b + alpha * alpha * lt.c);
            // ρ₁ - ρ₀ without cancellation
            let dr = alpha * (2.0 * lt.b + alpha * lt.c) / (r0 + r1);
            if r0 + r1 == 0.0 {
                0.0
            } else if dr.abs() <= 1e-3 * r0 {
                // ∫ g over [ρ₀, ρ₁] by 3-point Gauss; relative error O(1e-18)
                let s = 0.6f64.sqrt() * 0.5;
                let gs = 5.0 * young.deriv(r0 + (0.5 - s) * dr)
                    + 8.0 * young.deriv(r0 + 0.5 * dr)
                    + 5.0 * young.deriv(r0 + (0.5 + s) * dr);
                lt.w * dr * gs / 18.0
            } else {
                lt.w * (young.value(r1) - young.value(r0))
            }
        });
        elastic - alpha * load_d
    }
}

/// Discrete energy of `u` for the load `mu` and regularization `epsilon`.
pub fn energy(spec: &OperatorSpec, u: &VectorField2D, mu: &MeasureData, epsilon: f64) -> Result<f64> {
    if mu.m() != u.m() || spec.m != u.m() {
        return Err(Error::Validation("load, operator and field must share m".into()));
    }
    let load = load_vector(u.mesh(), mu)?;
    Ok(Functional::new(spec, u.mesh(), load, epsilon, Exec::default()).energy(u.values()))
}
