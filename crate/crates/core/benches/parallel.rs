//! Element loops and a full solve, parallel against sequential execution.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use potlab::measure::MeasureData;
use potlab::solver::{energy::load_vector, solve_zero_dirichlet, Functional, Mesh2D, SolveConfig};
use potlab::young::YoungFunction;
use potlab::{field::OperatorSpec, Exec};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn element_loops(c: &mut Criterion) {
    let spec = OperatorSpec::scalar(YoungFunction::power_law(3.0).unwrap());
    let mu = MeasureData::dirac([0.0, 0.0], 1.0);
    for k in [64, 128] {
        let mesh = Mesh2D::disk([0.0, 0.0], 1.0, 1.0 / k as f64).unwrap();
        let load = load_vector(&mesh, &mu).unwrap();
        let u: Vec<f64> = mesh
            .vertices()
            .iter()
            .map(|p| (1.0 - p[0].hypot(p[1])).max(0.0).sqrt())
            .collect();
        let mut g = c.benchmark_group(format!("gradient/h=1/{k}"));
        for (name, exec) in MODES {
            let f = Functional::new(&spec, &mesh, load.clone(), 1e-3, exec);
            let mut out = vec![0.0; u.len()];
            g.bench_function(BenchmarkId::from_parameter(name), |b| {
                b.iter(|| f.gradient(black_box(&u), &mut out))
            });
        }
        g.finish();
        let mut g = c.benchmark_group(format!("energy/h=1/{k}"));
        for (name, exec) in MODES {
            let f = Functional::new(&spec, &mesh, load.clone(), 1e-3, exec);
            g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| f.energy(black_box(&u))));
        }
        g.finish();
    }
}

fn dirac_solve(c: &mut Criterion) {
    let spec = OperatorSpec::scalar(YoungFunction::power_law(3.0).unwrap());
    let mu = MeasureData::dirac([0.0, 0.0], 1.0);
    let mesh = Arc::new(Mesh2D::disk([0.0, 0.0], 1.0, 1.0 / 32.0).unwrap());
    let mut g = c.benchmark_group("solve/h=1/32");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SolveConfig {
            exec,
            ..SolveConfig::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| solve_zero_dirichlet(&spec, mesh.clone(), &mu, &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, element_loops, dirac_solve);
criterion_main!(benches);
