//! Structured triangulations of rectangles, disks and graded squares.

use std::collections::HashMap;

use std::sync::OnceLock;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Mesh2D {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    h: f64,
    areas: Vec<f64>,
    /// Gradients of the three barycentric coordinates on each triangle.
    grads: Vec<[[f64; 2]; 3]>,
    /// Triangles around each vertex as `(triangle, local index)`, CSR layout.
    star_offsets: Vec<usize>,
    star: Vec<(usize, usize)>,
    /// Point-location index, built on first use.
    buckets: OnceLock<Buckets>,
}

impl PartialEq for Mesh2D {
    fn eq(&self, o: &Self) -> bool {
        self.vertices == o.vertices && self.triangles == o.triangles && self.h == o.h
    }
}

/// Uniform bucket grid over the bounding box; each bucket lists, in
/// increasing order, the triangles whose bounding boxes meet it.
#[derive(Debug, Clone)]
struct Buckets {
    origin: [f64; 2],
    size: [f64; 2],
    n: usize,
    offsets: Vec<usize>,
    items: Vec<usize>,
}

impl Buckets {
    fn build(vertices: &[[f64; 2]], triangles: &[[usize; 3]]) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let n = ((triangles.len() as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let size = [((hi[0] - lo[0]) / n as f64).max(1e-300), ((hi[1] - lo[1]) / n as f64).max(1e-300)];
        let mut b = Self {
            origin: lo,
            size,
            n,
            offsets: vec![0; n * n + 1],
            items: Vec::new(),
        };
        let ranges: Vec<_> = triangles
            .iter()
            .map(|t| {
                let xs = t.map(|v| vertices[v][0]);
                let ys = t.map(|v| vertices[v][1]);
                let (x0, x1) = (xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                let (y0, y1) = (ys.iter().copied().fold(f64::INFINITY, f64::min), ys.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                (b.cell(0, x0), b.cell(0, x1), b.cell(1, y0), b.cell(1, y1))
            })
            .collect();
        for &(i0, i1, j0, j1) in &ranges {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    b.offsets[j * n + i + 1] += 1;
                }
            }
        }
        for k in 0..n * n {
            b.offsets[k + 1] += b.offsets[k];
        }
        let mut fill = b.offsets.clone();
        b.items = vec![0; b.offsets[n * n]];
        for (t, &(i0, i1, j0, j1)) in ranges.iter().enumerate() {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    b.items[fill[j * n + i]] = t;
                    fill[j * n + i] += 1;
                }
            }
        }
        b
    }

    fn cell(&self, d: usize, x: f64) -> usize {
        (((x - self.origin[d]) / self.size[d]).floor().max(0.0) as usize).min(self.n - 1)
    }

    fn candidates(&self, p: [f64; 2]) -> &[usize] {
        let fx = (p[0] - self.origin[0]) / self.size[0];
        let fy = (p[1] - self.origin[1]) / self.size[1];
        let n = self.n as f64;
        // a small margin admits points on the bounding box itself
        if !(fx >= -1e-9 && fy >= -1e-9 && fx <= n + 1e-9 && fy <= n + 1e-9) {
            return &[];
        }
        let k = self.cell(1, p[1]) * self.n + self.cell(0, p[0]);
        &self.items[self.offsets[k]..self.offsets[k + 1]]
    }
}

/// A mesh cut out of a parent mesh.
#[derive(Debug, Clone)]
pub struct SubMesh {
    pub mesh: Mesh2D,
    /// Parent index of every submesh vertex.
    pub parent_vertex: Vec<usize>,
    /// Parent index of every submesh triangle.
    pub parent_triangle: Vec<usize>,
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Vertices on edges that belong to exactly one triangle.
fn boundary_flags(nv: usize, triangles: &[[usize; 3]]) -> Vec<bool> {
    let mut count: HashMap<(usize, usize), u32> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let mut flags = vec![false; nv];
    for ((a, b), c) in count {
        if c == 1 {
            flags[a] = true;
            flags[b] = true;
        }
    }
    flags
}

/// Drops unused vertices and renumbers triangles.
fn compact(vertices: &[[f64; 2]], triangles: &[[usize; 3]]) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let mut map = vec![usize::MAX; vertices.len()];
    let mut out_v = Vec::new();
    let mut out_t = Vec::with_capacity(triangles.len());
    for t in triangles {
        let mut nt = [0; 3];
        for k in 0..3 {
            if map[t[k]] == usize::MAX {
                map[t[k]] = out_v.len();
                out_v.push(vertices[t[k]]);
            }
            nt[k] = map[t[k]];
        }
        out_t.push(nt);
    }
    (out_v, out_t)
}

impl Mesh2D {
    /// Builds derived data; triangles are reoriented counterclockwise and
    /// degenerate triangles are rejected.
    pub fn from_parts(vertices: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>, h: f64) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Validation("mesh has no triangles".into()));
        }
        let mut areas = Vec::with_capacity(triangles.len());
        let mut grads = Vec::with_capacity(triangles.len());
        for t in triangles.iter_mut() {
            if t.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Validation(format!("triangle {t:?} references a missing vertex")));
            }
            let mut area = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if area < 0.0 {
                t.swap(1, 2);
                area = -area;
            }
            let scale = (0..3)
                .map(|k| {
                    let (a, b) = (vertices[t[k]], vertices[t[(k + 1) % 3]]);
                    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
                })
                .fold(0.0, f64::max);
            if !(area > 1e-10 * scale) {
                return Err(Error::Validation(format!("degenerate triangle {t:?}")));
            }
            let p: Vec<[f64; 2]> = t.iter().map(|&v| vertices[v]).collect();
            let mut g = [[0.0; 2]; 3];
            for k in 0..3 {
                let (b, c) = (p[(k + 1) % 3], p[(k + 2) % 3]);
                // ∇λ_k is the inward normal of the opposite edge over twice the area
                g[k] = [(b[1] - c[1]) / (2.0 * area), (c[0] - b[0]) / (2.0 * area)];
            }
            areas.push(area);
            grads.push(g);
        }
        let nv = vertices.len();
        let boundary = boundary_flags(nv, &triangles);
        let mut degree = vec![0usize; nv + 1];
        for t in &triangles {
            for &v in t {
                degree[v + 1] += 1;
            }
        }
        for v in 0..nv {
            degree[v + 1] += degree[v];
        }
        let mut fill = degree.clone();
        let mut star = vec![(0, 0); degree[nv]];
        for (ti, t) in triangles.iter().enumerate() {
            for (k, &v) in t.iter().enumerate() {
                star[fill[v]] = (ti, k);
                fill[v] += 1;
            }
        }
        Ok(Self {
            vertices,
            triangles,
            boundary,
            h,
            areas,
            grads,
            star_offsets: degree,
            star,
            buckets: OnceLock::new(),
        })
    }

    /// Union-jack triangulation of `[x0, x1] × [y0, y1]` with `nx × ny`
    /// cells; diagonals point away from the rectangle's center.
    pub fn rectangle(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2]) -> Result<Self> {
        if nx == 0 || ny == 0 || x[1] <= x[0] || y[1] <= y[0] {
            return Err(Error::Validation("degenerate rectangle".into()));
        }
        let (dx, dy) = ((x[1] - x[0]) / nx as f64, (y[1] - y[0]) / ny as f64);
        let vertices: Vec<[f64; 2]> = (0..=ny)
            .flat_map(|j| (0..=nx).map(move |i| [x[0] + dx * i as f64, y[0] + dy * j as f64]))
            .collect();
        let center = [0.5 * (x[0] + x[1]), 0.5 * (y[0] + y[1])];
        let triangles = union_jack(nx, ny, |i, j| {
            let xc = x[0] + dx * (i as f64 + 0.5) - center[0];
            let yc = y[0] + dy * (j as f64 + 0.5) - center[1];
            xc * yc > 0.0
        });
        Self::from_parts(vertices, triangles, dx.max(dy))
    }

    /// Disk of radius `radius` about `center`: a union-jack grid of spacing
    /// about `h` (an even number of cells per diameter, so the center is a
    /// vertex), keeping triangles whose centroid lies inside and snapping
    /// boundary vertices radially onto the circle.
    pub fn disk(center: [f64; 2], radius: f64, h: f64) -> Result<Self> {
        if !(radius > 0.0 && h > 0.0 && h < radius) {
            return Err(Error::Validation(format!("bad disk mesh parameters R={radius}, h={h}")));
        }
        let mut n = (2.0 * radius / h).ceil() as usize;
        n += n % 2;
        let spacing = 2.0 * radius / n as f64;
        let vertices: Vec<[f64; 2]> = (0..=n)
            .flat_map(|j| {
                (0..=n).map(move |i| {
                    [
                        center[0] - radius + spacing * i as f64,
                        center[1] - radius + spacing * j as f64,
                    ]
                })
            })
            .collect();
        let half = n / 2;
        // diagonals run tangentially near the 45° directions so that no
        // boundary edge is radial and snapping cannot collapse it
        let all = union_jack(n, n, |i, j| (i >= half) != (j >= half));
        let inside = |t: &[usize; 3]| {
            let c = t.iter().fold([0.0, 0.0], |acc, &v| {
                [acc[0] + vertices[v][0] / 3.0, acc[1] + vertices[v][1] / 3.0]
            });
            (c[0] - center[0]).hypot(c[1] - center[1]) < radius
        };
        let mut kept: Vec<[usize; 3]> = all.into_iter().filter(|t| inside(t)).collect();
        // triangles with three boundary vertices would flatten onto the circle
        loop {
            let flags = boundary_flags(vertices.len(), &kept);
            let before = kept.len();
            kept.retain(|t| !t.iter().all(|&v| flags[v]));
            if kept.len() == before {
                break;
            }
        }
        let (mut vertices, triangles) = compact(&vertices, &kept);
        let boundary = boundary_flags(vertices.len(), &triangles);
        for (v, b) in vertices.iter_mut().zip(&boundary) {
            if *b {
                let d = (v[0] - center[0]).hypot(v[1] - center[1]);
                v[0] = center[0] + (v[0] - center[0]) * radius / d;
                v[1] = center[1] + (v[1] - center[1]) * radius / d;
            }
        }
        smooth_disk(&mut vertices, &triangles, &boundary, center, radius, 2.0 * spacing);
        Self::from_parts(vertices, triangles, spacing)
    }

    /// Square of half-width `half` about `center`, graded geometrically
    /// toward the center: `levels` nested rings, each halving the mesh size,
    /// around a uniform core of half-width `half / 2^levels`. Every ring
    /// boundary carries `per_side` segments per side and each ring has
    /// `layers` layers, so the local mesh size is proportional to the
    /// distance from the center.
    pub fn graded_square(center: [f64; 2], half: f64, levels: usize, per_side: usize, layers: usize) -> Result<Self> {
        if !(half > 0.0) || per_side < 2 || !per_side.is_multiple_of(2) || layers == 0 {
            return Err(Error::Validation("bad graded mesh parameters".into()));
        }
        let n = per_side;
        let core = half / 2f64.powi(levels as i32);
        let perimeter = |p: usize, s: f64| -> [f64; 2] {
            let side = p / n;
            let u = -1.0 + 2.0 * (p % n) as f64 / n as f64;
            let q = match side {
                0 => [u, -1.0],
                1 => [1.0, u],
                2 => [-u, 1.0],
                _ => [-1.0, -u],
            };
            [center[0] + s * q[0], center[1] + s * q[1]]
        };
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        // uniform core
        for j in 0..=n {
            for i in 0..=n {
                let d = 2.0 * core / n as f64;
                vertices.push([center[0] - core + d * i as f64, center[1] - core + d * j as f64]);
            }
        }
        let half_n = n / 2;
        triangles.extend(union_jack(n, n, |i, j| (i >= half_n) == (j >= half_n)));
        let core_index = |p: usize| -> usize {
            let k = p % n;
            let (i, j) = match p / n {
                0 => (k, 0),
                1 => (n, k),
                2 => (n - k, n),
                _ => (0, n - k),
            };
            j * (n + 1) + i
        };
        let mut previous: Vec<usize> = (0..4 * n).map(core_index).collect();
        let mut inner = core;
        for _ in 0..levels {
            for l in 1..=layers {
                let s = inner * (1.0 + l as f64 / layers as f64);
                let start = vertices.len();
                for p in 0..4 * n {
                    vertices.push(perimeter(p, s));
                }
                let current: Vec<usize> = (start..start + 4 * n).collect();
                for p in 0..4 * n {
                    let q = (p + 1) % (4 * n);
                    let (a, b, c, d) = (previous[p], previous[q], current[q], current[p]);
                    // split along the diagonal pointing away from the side's midpoint
                    if (p % n) < n / 2 {
                        triangles.push([a, b, d]);
                        triangles.push([b, c, d]);
                    } else {
                        triangles.push([a, b, c]);
                        triangles.push([a, c, d]);
                    }
                }
                previous = current;
            }
            inner *= 2.0;
        }
        Self::from_parts(vertices, triangles, 2.0 * half / n as f64 * (1.0 / layers as f64).max(0.5))
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary(&self) -> &[bool] {
        &self.boundary
    }

    /// Nominal mesh size.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn basis_gradients(&self, t: usize) -> &[[f64; 2]; 3] {
        &self.grads[t]
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Triangles containing vertex `v`, as `(triangle, local index)`.
    pub fn star(&self, v: usize) -> &[(usize, usize)] {
        &self.star[self.star_offsets[v]..self.star_offsets[v + 1]]
    }

    pub fn max_edge(&self) -> f64 {
        self.edge_lengths().fold(0.0, f64::max)
    }

    pub fn min_edge(&self) -> f64 {
        self.edge_lengths().fold(f64::INFINITY, f64::min)
    }

    fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.triangles.iter().flat_map(move |t| {
            (0..3).map(move |k| {
                let (a, b) = (self.vertices[t[k]], self.vertices[t[(k + 1) % 3]]);
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
        })
    }

    /// Diameter of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        (a[0] - b[0])
            .hypot(a[1] - b[1])
            .max((b[0] - c[0]).hypot(b[1] - c[1]))
            .max((c[0] - a[0]).hypot(c[1] - a[1]))
    }

    /// Smallest interior angle over the mesh, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut worst = std::f64::consts::PI;
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b, c) = (self.vertices[t[k]], self.vertices[t[(k + 1) % 3]], self.vertices[t[(k + 2) % 3]]);
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                worst = worst.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        worst
    }

    /// Barycentric coordinates of `p` in triangle `t`.
    pub fn barycentric(&self, t: usize, p: [f64; 2]) -> [f64; 3] {
        let g = &self.grads[t];
        let c = self.centroid(t);
        let d = [p[0] - c[0], p[1] - c[1]];
        [0, 1, 2].map(|k| 1.0 / 3.0 + g[k][0] * d[0] + g[k][1] * d[1])
    }

    /// Triangle containing `p` with its barycentric coordinates; ties go to
    /// the lowest triangle index.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        const TOL: f64 = 1e-12;
        let buckets = self.buckets.get_or_init(|| Buckets::build(&self.vertices, &self.triangles));
        buckets.candidates(p).iter().find_map(|&t| {
            let b = self.barycentric(t, p);
            b.iter().all(|&l| l >= -TOL).then_some((t, b))
        })
    }

    /// Submesh made of the triangles selected by `keep`.
    pub fn submesh<F: Fn(usize) -> bool>(&self, keep: F) -> Result<SubMesh> {
        let parent_triangle: Vec<usize> = (0..self.triangles.len()).filter(|&t| keep(t)).collect();
        if parent_triangle.is_empty() {
            return Err(Error::Validation("submesh selection is empty".into()));
        }
        let kept: Vec<[usize; 3]> = parent_triangle.iter().map(|&t| self.triangles[t]).collect();
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut parent_vertex = Vec::new();
        let mut triangles = Vec::with_capacity(kept.len());
        for t in &kept {
            triangles.push(t.map(|v| {
                if map[v] == usize::MAX {
                    map[v] = parent_vertex.len();
                    parent_vertex.push(v);
                }
                map[v]
            }));
        }
        let vertices = parent_vertex.iter().map(|&v| self.vertices[v]).collect();
        Ok(SubMesh {
            mesh: Mesh2D::from_parts(vertices, triangles, self.h)?,
            parent_vertex,
            parent_triangle,
        })
    }
}

/// Relaxes the snapped boundary layer: boundary vertices slide along the
/// circle toward the angular midpoint of their boundary neighbors, and
/// interior vertices within `band` of the circle move toward the average of
/// their neighbors. A sweep is undone if it would invert a triangle.
fn smooth_disk(
    vertices: &mut [[f64; 2]],
    triangles: &[[usize; 3]],
    boundary: &[bool],
    center: [f64; 2],
    radius: f64,
    band: f64,
) {
    const SWEEPS: usize = 8;
    const RELAX: f64 = 0.5;
    let nv = vertices.len();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let mut boundary_neighbors: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut edges: Vec<(&(usize, usize), &u32)> = edge_count.iter().collect();
    edges.sort();
    for (&(a, b), &c) in edges {
        neighbors[a].push(b);
        neighbors[b].push(a);
        if c == 1 {
            boundary_neighbors[a].push(b);
            boundary_neighbors[b].push(a);
        }
    }
    let angle = |p: [f64; 2]| (p[1] - center[1]).atan2(p[0] - center[0]);
    let valid = |vs: &[[f64; 2]]| {
        triangles.iter().all(|t| {
            let [a, b, c] = t.map(|v| vs[v]);
            signed_area(a, b, c) > 0.0
        })
    };
    for _ in 0..SWEEPS {
        let before = vertices.to_vec();
        for v in 0..nv {
            if boundary[v] {
                if boundary_neighbors[v].len() != 2 {
                    continue;
                }
                let a0 = angle(before[v]);
                // unwrap neighbor angles around the vertex's own angle
                let mut target = 0.0;
                for &w in &boundary_neighbors[v] {
                    let mut d = angle(before[w]) - a0;
                    d -= (d / std::f64::consts::TAU).round() * std::f64::consts::TAU;
                    target += 0.5 * d;
                }
                let a = a0 + RELAX * target;
                vertices[v] = [center[0] + radius * a.cos(), center[1] + radius * a.sin()];
            } else {
                let r = (before[v][0] - center[0]).hypot(before[v][1] - center[1]);
                if r < radius - band {
                    continue;
                }
                let k = neighbors[v].len() as f64;
                let avg = neighbors[v].iter().fold([0.0, 0.0], |acc, &w| {
                    [acc[0] + before[w][0] / k, acc[1] + before[w][1] / k]
                });
                vertices[v] = [
                    before[v][0] + RELAX * (avg[0] - before[v][0]),
                    before[v][1] + RELAX * (avg[1] - before[v][1]),
                ];
            }
        }
        if !valid(vertices) {
            vertices.copy_from_slice(&before);
            break;
        }
    }
}

/// Barycentric coordinates of the centroids of the `k²` sub-triangles of
/// the uniform `k`-fold refinement; equal weights give a positive
/// quadrature rule exact for affine functions.
pub fn subtriangle_points(k: usize) -> Vec<[f64; 3]> {
    let kf = k as f64;
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k - i {
            let (x, y) = ((i as f64 + 1.0 / 3.0) / kf, (j as f64 + 1.0 / 3.0) / kf);
            out.push([1.0 - x - y, x, y]);
            if i + j + 1 < k {
                let (x, y) = ((i as f64 + 2.0 / 3.0) / kf, (j as f64 + 2.0 / 3.0) / kf);
                out.push([1.0 - x - y, x, y]);
            }
        }
    }
    out
}

/// Triangles of an `nx × ny` vertex-grid, with the cell diagonal
/// `(i,j)-(i+1,j+1)` when `rising(i, j)` and `(i+1,j)-(i,j+1)` otherwise.
fn union_jack<F: Fn(usize, usize) -> bool>(nx: usize, ny: usize, rising: F) -> Vec<[usize; 3]> {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut out = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if rising(i, j) {
                out.push([a, b, c]);
                out.push([a, c, d]);
            } else {
                out.push([a, b, d]);
                out.push([b, c, d]);
            }
        }
    }
    out
}
