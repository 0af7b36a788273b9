//! The reference computations are checked against hand-solvable cases
//! before the acceptance suite relies on them.

mod common;

use common::{containing_triangle, dirac_wolff_power_law, jacobian_fd, laplace_p1, Banded};

#[test]
fn banded_cholesky_solves_tridiagonal() {
    let n = 50;
    let mut a = Banded::zeros(n, 1);
    for i in 0..n {
        a.add(i, i, 2.0);
        if i > 0 {
            a.add(i, i - 1, -1.0);
        }
    }
    let x = a.solve(&vec![1.0; n]);
    // -x'' = 1 with x_0 = x_{n+1} = 0: x_i = i(n+1-i)/2
    for (i, xi) in x.iter().enumerate() {
        let k = (i + 1) as f64;
        assert!((xi - k * (n as f64 + 1.0 - k) / 2.0).abs() < 1e-9);
    }
}

#[test]
fn laplace_oracle_reproduces_affine_data() {
    // P1 elements are exact for affine harmonic functions
    let n = 6;
    let mut vertices = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut triangles = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let v = j * (n + 1) + i;
            triangles.push([v, v + 1, v + n + 2]);
            triangles.push([v, v + n + 2, v + n + 1]);
        }
    }
    let g = |p: [f64; 2]| 1.0 + 2.0 * p[0] - 3.0 * p[1];
    let u = laplace_p1(&vertices, &triangles, ([0.0, 1.0], [0.0, 1.0]), &[], g);
    for (v, p) in vertices.iter().enumerate() {
        assert!((u[v] - g(*p)).abs() < 1e-12);
    }
    // a unit atom at an interior vertex raises the solution there
    let center = [0.5, 0.5];
    let w = laplace_p1(&vertices, &triangles, ([0.0, 1.0], [0.0, 1.0]), &[(center, 1.0)], g);
    let (t, l) = containing_triangle(&vertices, &triangles, center).unwrap();
    let vc = triangles[t][l.iter().position(|x| (x - 1.0).abs() < 1e-12).unwrap()];
    assert!(w[vc] > u[vc]);
}

#[test]
fn closed_form_wolff_and_finite_differences() {
    assert!((dirac_wolff_power_law(3.0, 1.0) - 2.0 / 3f64.sqrt()).abs() < 1e-15);
    let j = jacobian_fd(|x| vec![x[0] * x[1], x[0] + x[1] * x[1]], &[2.0, 3.0], 1e-5);
    assert!((j[0][0] - 3.0).abs() < 1e-8 && (j[1][0] - 2.0).abs() < 1e-8);
    assert!((j[0][1] - 1.0).abs() < 1e-8 && (j[1][1] - 6.0).abs() < 1e-8);
}
