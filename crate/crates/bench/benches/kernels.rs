use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use frenet_ife::assembly::discretize;
use frenet_ife::geometry::locate;
use frenet_ife::ife::build_local_space;
use frenet_ife::mesh::{build_mesh, classify_elements, element_corners, fictitious_chart};
use frenet_ife::problems::{circle_problem, quartic_problem};
use frenet_ife::solver::assemble;
use frenet_ife::{DiscretizationOptions, FrenetChart, Problem, SidePair, Vec2, XiFamily, DEFAULT_SIGMA0};

fn first_chart(problem: &Problem, n: usize) -> FrenetChart {
    let mesh = build_mesh(problem.domain, n, n).unwrap();
    let class = classify_elements(&mesh, &problem.curve, None).unwrap();
    let id = class.interface_elements().next().unwrap();
    fictitious_chart(&problem.curve, &mesh.element(id), &class.cuts[id].unwrap(), &element_corners(&mesh, &class, id)).unwrap()
}

fn local_space(c: &mut Criterion) {
    let beta = SidePair::new(1.0, 10.0);
    let problem = quartic_problem(beta).unwrap();
    let chart = first_chart(&problem, 20);
    let mut g = c.benchmark_group("local_space");
    for m in [1, 3, 5] {
        g.bench_function(format!("quartic m={m}"), |b| {
            b.iter(|| build_local_space(black_box(&chart), m, beta, XiFamily::Legendre).unwrap())
        });
    }
    g.finish();
}

fn frenet_inverse(c: &mut Criterion) {
    let beta = SidePair::new(1.0, 10.0);
    let mut g = c.benchmark_group("locate");
    for (name, problem) in [("circle", circle_problem(beta).unwrap()), ("quartic", quartic_problem(beta).unwrap())] {
        let d = problem.domain;
        let points: Vec<Vec2> = (0..64)
            .map(|k| {
                let t = k as f64 / 64.0;
                Vec2::new(d.x0 + (0.5 + 0.4 * (7.0 * t).sin()) * d.width(), d.y0 + (0.5 + 0.4 * (5.0 * t).cos()) * d.height())
            })
            .collect();
        g.bench_function(format!("{name} 64 points"), |b| {
            b.iter(|| points.iter().filter_map(|&x| locate(&problem.curve, black_box(x)).ok()).count())
        });
    }
    g.finish();
}

fn assembly(c: &mut Criterion) {
    let problem = circle_problem(SidePair::new(1.0, 10.0)).unwrap();
    let opts = DiscretizationOptions::default();
    let mut g = c.benchmark_group("assembly");
    g.sample_size(10);
    for m in [1, 3] {
        g.bench_function(format!("discretize circle n=40 m={m}"), |b| b.iter(|| discretize(&problem, 40, m, &opts).unwrap()));
        let disc = discretize(&problem, 40, m, &opts).unwrap();
        g.bench_function(format!("assemble circle n=40 m={m}"), |b| {
            b.iter(|| assemble(&disc, &*problem.source, &*problem.exact, DEFAULT_SIGMA0).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, local_space, frenet_inverse, assembly);
criterion_main!(benches);
