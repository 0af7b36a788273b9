//! Reference computations that share no code with the library.
#![allow(dead_code)]

/// `∫_0^R g⁻¹(1/r) dr` for a unit point mass in the plane and `G(t) = t^p`,
/// `p > 2`: `g⁻¹(y) = (y/p)^{1/(p-1)}`.
pub fn dirac_wolff_power_law(p: f64, radius: f64) -> f64 {
    let q = 1.0 / (p - 1.0);
    p.powf(-q) * radius.powf(1.0 - q) / (1.0 - q)
}

/// Symmetric positive definite banded matrix stored by lower diagonals:
/// `band[i][k] = A[i][i - k]` for `k <= bw`.
pub struct Banded {
    n: usize,
    bw: usize,
    band: Vec<Vec<f64>>,
}

impl Banded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            band: vec![vec![0.0; bw + 1]; n],
        }
    }

    /// Adds to `A[i][j]` (and its mirror), `j <= i`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry outside the band");
        self.band[i][i - j] += v;
    }

    /// Cholesky factorization in place followed by the two triangular solves.
    pub fn solve(mut self, rhs: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bw);
        let l = &mut self.band;
        for i in 0..n {
            for k in (0..=bw.min(i)).rev() {
                let j = i - k;
                let mut s = l[i][k];
                let lo = i.saturating_sub(bw).max(j.saturating_sub(bw));
                for p in lo..j {
                    s -= l[i][i - p] * l[j][j - p];
                }
                if k == 0 {
                    assert!(s > 0.0, "matrix is not positive definite");
                    l[i][0] = s.sqrt();
                } else {
                    l[i][k] = s / l[j][0];
                }
            }
        }
        let mut y = rhs.to_vec();
        for i in 0..n {
            for p in i.saturating_sub(bw)..i {
                y[i] -= l[i][i - p] * y[p];
            }
            y[i] /= l[i][0];
        }
        for i in (0..n).rev() {
            for q in i + 1..(i + bw + 1).min(n) {
                y[i] -= l[q][q - i] * y[q];
            }
            y[i] /= l[i][0];
        }
        y
    }
}

/// P1 Dirichlet problem `-Δu = Σ w_k δ_{x_k}` with `u = g` on the boundary of
/// an axis-aligned rectangle, assembled from raw coordinates and solved by
/// banded Cholesky. Returns nodal values.
pub fn laplace_p1(
    vertices: &[[f64; 2]],
    triangles: &[[usize; 3]],
    rect: ([f64; 2], [f64; 2]),
    atoms: &[([f64; 2], f64)],
    g: impl Fn([f64; 2]) -> f64,
) -> Vec<f64> {
    let nv = vertices.len();
    let on_edge = |p: [f64; 2]| {
        let tol = 1e-12;
        (p[0] - rect.0[0]).abs() < tol
            || (p[0] - rect.0[1]).abs() < tol
            || (p[1] - rect.1[0]).abs() < tol
            || (p[1] - rect.1[1]).abs() < tol
    };
    let mut index = vec![usize::MAX; nv];
    let mut free = 0;
    for (v, &p) in vertices.iter().enumerate() {
        if !on_edge(p) {
            index[v] = free;
            free += 1;
        }
    }
    let mut bw = 0;
    for t in triangles {
        for &a in t {
            for &b in t {
                if index[a] != usize::MAX && index[b] != usize::MAX {
                    bw = bw.max(index[a].abs_diff(index[b]));
                }
            }
        }
    }
    let mut k = Banded::zeros(free, bw);
    let mut rhs = vec![0.0; free];
    let boundary: Vec<f64> = vertices.iter().map(|&p| if on_edge(p) { g(p) } else { 0.0 }).collect();
    for t in triangles {
        let [a, b, c] = t.map(|v| vertices[v]);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let area = 0.5 * det.abs();
        // ∇φ_i = perp(opposite edge) / (2 area), oriented by the sign of det
        let grads = [
            [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
            [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
            [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
        ];
        for i in 0..3 {
            for j in 0..3 {
                let kij = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                let (vi, vj) = (t[i], t[j]);
                if index[vi] == usize::MAX {
                    continue;
                }
                if index[vj] == usize::MAX {
                    rhs[index[vi]] -= kij * boundary[vj];
                } else if index[vj] <= index[vi] {
                    k.add(index[vi], index[vj], kij);
                }
            }
        }
    }
    for &(x, w) in atoms {
        let (t, l) = containing_triangle(vertices, triangles, x).expect("atom inside the mesh");
        for i in 0..3 {
            let v = triangles[t][i];
            if index[v] != usize::MAX {
                rhs[index[v]] += w * l[i];
            }
        }
    }
    let sol = k.solve(&rhs);
    (0..nv)
        .map(|v| if index[v] == usize::MAX { boundary[v] } else { sol[index[v]] })
        .collect()
}

/// First triangle containing `p` by a linear scan, with barycentric coordinates.
pub fn containing_triangle(vertices: &[[f64; 2]], triangles: &[[usize; 3]], p: [f64; 2]) -> Option<(usize, [f64; 3])> {
    triangles.iter().enumerate().find_map(|(t, tri)| {
        let [a, b, c] = tri.map(|v| vertices[v]);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
        let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
        let l0 = 1.0 - l1 - l2;
        let eps = -1e-12;
        (l0 >= eps && l1 >= eps && l2 >= eps).then_some((t, [l0, l1, l2]))
    })
}

/// Central difference of a vector map `R^m -> R^m`; column `j` is `∂f/∂x_j`.
pub fn jacobian_fd(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let m = x.len();
    let mut cols = Vec::with_capacity(m);
    for j in 0..m {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        cols.push((0..m).map(|i| (fp[i] - fm[i]) / (2.0 * h)).collect());
    }
    cols
}
