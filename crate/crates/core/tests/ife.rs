mod common;

use common::*;
use frenet_ife::geometry::{frenet_forward, metric_coeffs, Curve, FrenetPoint, Side, SidePair, Vec2};
use frenet_ife::ife::*;
use frenet_ife::mesh::FrenetChart;
use frenet_ife::problems::circle_problem;
use frenet_ife::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn circle_charts(n: usize) -> Vec<FrenetChart> {
    let p = circle_problem(SidePair::new(1.0, 10.0)).unwrap();
    interface_charts(&p, n).into_iter().map(|(_, _, c)| c).collect()
}

fn manual_chart(curve: Curve, a: f64, b: f64, half_width: f64) -> FrenetChart {
    FrenetChart { curve, a, b, half_width, xi_hint: 0.5 * (a + b), curvature_ratio: 0.0 }
}

fn legendre_explicit(k: usize, t: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => t,
        2 => 0.5 * (3.0 * t * t - 1.0),
        3 => 0.5 * (5.0 * t.powi(3) - 3.0 * t),
        _ => unreachable!(),
    }
}

#[test]
fn bivariate_poly_matches_direct_expansion() {
    let mut r = rng(1);
    let (a, b) = (-0.3, 0.9);
    let basis = XiBasis::new(XiFamily::Legendre, 3, a, b);
    let mut poly = BivariateFrenetPoly::zeros(basis);
    for v in poly.coeffs.iter_mut() {
        *v = r.random_range(-1.0..1.0);
    }
    for _ in 0..5 {
        let (eta, xi): (f64, f64) = (r.random_range(-0.2..0.2), r.random_range(a..b));
        let t = (2.0 * xi - a - b) / (b - a);
        let mut direct = 0.0;
        for j in 0..4 {
            for i in 0..4 {
                direct += poly.coeffs[(j, i)] * eta.powi(j as i32) * legendre_explicit(i, t);
            }
        }
        assert!((poly.eval(eta, xi) - direct).abs() < 1e-12 * direct.abs().max(1.0));
    }
}

#[test]
fn cheap_basis_examples() {
    let chart = &circle_charts(10)[0];
    let beta = SidePair::new(1.0, 1000.0);
    let m1 = cheap_basis(chart, 1, beta, XiFamily::Legendre).unwrap();
    assert_eq!(m1.len(), 2);
    for s in &m1 {
        assert_eq!(s.minus.coeffs[(1, 0)] + s.minus.coeffs[(1, 1)], 1.0);
        assert_eq!(s.plus.coeffs[(1, 0)] + s.plus.coeffs[(1, 1)], 1e-3);
    }
    let same = cheap_basis(chart, 3, SidePair::new(1.0, 1.0), XiFamily::Legendre).unwrap();
    assert!(same.iter().all(|s| s.minus == s.plus));

    let m3 = cheap_basis(chart, 3, beta, XiFamily::Legendre).unwrap();
    assert_eq!(m3.len(), 12);
    for s in &m3 {
        for k in 0..50 {
            let xi = chart.a + chart.length() * k as f64 / 49.0;
            let (dm, dp) = (s.minus.derivs(0.0, xi), s.plus.derivs(0.0, xi));
            assert!((beta.minus * dm.v_eta - beta.plus * dp.v_eta).abs() <= 1e-14 * dm.v_eta.abs().max(1.0));
            assert_eq!(dm.v, 0.0);
            assert_eq!(dp.v, 0.0);
        }
    }
}

#[test]
fn laplacian_trace_examples() {
    let circle = unit_circle();
    let chart = manual_chart(circle.clone(), 0.2, 0.6, 0.1);
    let basis = XiBasis::new(XiFamily::Legendre, 3, chart.a, chart.b);
    let eta2 = BivariateFrenetPoly::term(basis, 2, 0, 1.0);
    let tr = laplacian_trace(&eta2, &circle, 0).unwrap();
    for xi in [0.25, 0.4, 0.55] {
        assert!((tr.at(xi).unwrap() - 2.0).abs() < 1e-14);
    }
    for i in 0..=3 {
        let p = BivariateFrenetPoly::term(basis, 0, i, 1.0);
        let tr = laplacian_trace(&p, &circle, 0).unwrap();
        for xi in [0.25, 0.4, 0.55] {
            let m = metric_coeffs(&circle, xi, 0.0, 0).unwrap();
            let pv = basis.eval(xi)[i];
            assert!((tr.at(xi).unwrap() - (m.j0 * pv[2] + m.j2 * pv[1])).abs() < 1e-12);
        }
    }
    let p = BivariateFrenetPoly::term(basis, 2, 0, 1.0);
    assert!(matches!(laplacian_trace(&p, &circle, 2), Err(Error::Degree(_))));
}

#[test]
fn laplacian_trace_eta_derivative_matches_finite_differences() {
    let mut r = rng(2);
    let curves = [unit_circle(), quartic_curve()];
    for curve in &curves {
        let (s, e) = curve.domain();
        let (a, b) = if curve.period().is_some() { (0.2, 0.7) } else { (s + 0.3 * (e - s), s + 0.5 * (e - s)) };
        let basis = XiBasis::new(XiFamily::Legendre, 4, a, b);
        let mut poly = BivariateFrenetPoly::zeros(basis);
        for v in poly.coeffs.iter_mut() {
            *v = r.random_range(-1.0..1.0);
        }
        for j in 0..=2 {
            let tr = laplacian_trace(&poly, curve, j).unwrap();
            for xi in [a + 0.1 * (b - a), 0.5 * (a + b), b - 0.1 * (b - a)] {
                let l = |eta: f64| frenet_laplacian(&poly, curve, eta, xi).unwrap();
                let diff = |d: f64| match j {
                    0 => l(0.0),
                    1 => (l(d) - l(-d)) / (2.0 * d),
                    _ => (l(d) - 2.0 * l(0.0) + l(-d)) / (d * d),
                };
                let fd = (4.0 * diff(1e-3) - diff(2e-3)) / 3.0;
                let exact = tr.at(xi).unwrap();
                assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0) * if j == 2 { 10.0 } else { 1.0 }, "j={j}: {fd} vs {exact}");
            }
        }
    }
}

#[test]
fn extension_system_on_a_straight_chart() {
    let line = Curve::line(Vec2::zeros(), Vec2::new(1.0, 0.0), -1.0, 2.0).unwrap();
    let (a, b) = (0.1, 0.6);
    let chart = manual_chart(line, a, b, 0.2);
    let sys = extension_system(&chart, 2, XiFamily::Legendre).unwrap();
    assert_eq!((sys.a.nrows(), sys.a.ncols(), sys.b.ncols()), (3, 3, 3));
    let len = b - a;
    for k in 0..3 {
        for i in 0..3 {
            let expect = if i == k { 2.0 * len / (2 * k + 1) as f64 } else { 0.0 };
            assert!((sys.a[(k, i)] - expect).abs() < 1e-12, "A[{k},{i}]");
            let expect_b = if (k, i) == (0, 2) { 12.0 / len } else { 0.0 };
            assert!((sys.b[(k, i)] - expect_b).abs() < 1e-12, "B[{k},{i}]");
        }
    }
}

#[test]
fn extension_system_is_empty_for_linear_shapes() {
    let chart = &circle_charts(10)[0];
    let sys = extension_system(chart, 1, XiFamily::Legendre).unwrap();
    assert_eq!(sys.a.nrows(), 0);
    let space = build_local_space(chart, 1, SidePair::new(1.0, 1000.0), XiFamily::Legendre).unwrap();
    let ife = space.ife().unwrap();
    for i in 0..2 {
        let s = &ife.shapes[i * 2];
        assert_eq!(s.minus, s.plus);
        assert_eq!(s.minus.coeffs[(0, i)], 1.0);
    }
}

#[test]
fn extension_matrix_is_block_lower_triangular_on_circle() {
    for chart in circle_charts(10) {
        for m in 2..=5 {
            let sys = extension_system(&chart, m, XiFamily::Legendre).unwrap();
            assert!(sys.upper_block_max() <= 1e-12 * sys.a.amax(), "m={m}");
        }
    }
}

#[test]
fn extension_matrix_does_not_depend_on_beta() {
    let chart = &circle_charts(10)[3];
    let s1 = build_local_space(chart, 4, SidePair::new(1.0, 10.0), XiFamily::Legendre).unwrap();
    let s2 = build_local_space(chart, 4, SidePair::new(7.0, 0.5), XiFamily::Legendre).unwrap();
    assert_eq!(s1.ife().unwrap().system.a, s2.ife().unwrap().system.a);
}

#[test]
fn equal_coefficients_give_zero_extension() {
    for chart in circle_charts(10) {
        let s = build_local_space(&chart, 4, SidePair::new(3.0, 3.0), XiFamily::Legendre).unwrap();
        assert!(s.ife().unwrap().coefficients.amax() <= 1e-12);
    }
}

#[test]
fn zero_minus_side_extends_to_zero() {
    let chart = &circle_charts(10)[1];
    let sys = extension_system(chart, 4, XiFamily::Legendre).unwrap();
    let c = sys.solve(&DMatrix::zeros(sys.a.nrows(), 5)).unwrap();
    assert_eq!(c.amax(), 0.0);
}

#[test]
fn jump_conditions_hold_on_every_shape() {
    for chart in circle_charts(10) {
        for m in 1..=4 {
            for bp in [10.0, 1000.0] {
                let s = build_local_space(&chart, m, SidePair::new(1.0, bp), XiFamily::Legendre).unwrap();
                let r = jump_residual(&s).unwrap();
                assert!(r.value <= 1e-11 && r.flux <= 1e-11, "m={m}: {r:?}");
            }
        }
    }
}

#[test]
fn weak_laplacian_conditions() {
    for chart in circle_charts(10) {
        let s = build_local_space(&chart, 3, SidePair::new(1.0, 10.0), XiFamily::Legendre).unwrap();
        let r = jump_residual(&s).unwrap();
        assert!(r.weak.iter().all(|&w| w <= 1e-10), "{:?}", r.weak);

        let s = build_local_space(&chart, 4, SidePair::new(2.0, 2.0), XiFamily::Legendre).unwrap();
        assert!(jump_residual(&s).unwrap().weak.iter().all(|&w| w <= 1e-12));

        let s = build_local_space(&chart, 4, SidePair::new(1.0, 1000.0), XiFamily::Legendre).unwrap();
        let norm = s.ife().unwrap().system.a.amax();
        assert!(jump_residual(&s).unwrap().weak.iter().all(|&w| w <= 1e-9 * norm));
    }
}

#[test]
fn monomial_family_spans_the_same_space() {
    let chart = &circle_charts(10)[2];
    let beta = SidePair::new(1.0, 10.0);
    let leg = build_local_space(chart, 3, beta, XiFamily::Legendre).unwrap();
    let mono = build_local_space(chart, 3, beta, XiFamily::Monomial).unwrap();
    // every monomial-family shape is a combination of Legendre-family shapes
    let pts = sample_points(chart, 40, 9);
    let (vl, vm) = (values(&leg, &pts), values(&mono, &pts));
    let fit = vl.clone().svd(true, true).solve(&vm, 1e-14).unwrap();
    assert!((&vl * fit - &vm).amax() < 1e-9 * vm.amax());
}

fn sample_points(chart: &FrenetChart, count: usize, seed: u64) -> Vec<(Vec2, Side)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let p = FrenetPoint::new(r.random_range(-0.3..0.3) * chart.half_width, r.random_range(chart.a..chart.b));
            (frenet_forward(&chart.curve, p).unwrap(), Side::of_offset(p.eta))
        })
        .collect()
}

fn values(space: &LocalSpace, pts: &[(Vec2, Side)]) -> DMatrix<f64> {
    let mut sv = ShapeValues::default();
    let mut out = DMatrix::zeros(pts.len(), space.dim());
    for (r, (x, s)) in pts.iter().enumerate() {
        space.eval_all(*x, Some(*s), &mut sv).unwrap();
        for k in 0..space.dim() {
            out[(r, k)] = sv.values[k];
        }
    }
    out
}

#[test]
fn shapes_are_independent() {
    for m in 1..=5 {
        let chart = &circle_charts(10)[0];
        let s = build_local_space(chart, m, SidePair::new(1.0, 100.0), XiFamily::Legendre).unwrap();
        assert_eq!(s.dim(), (m + 1) * (m + 1));
        let pts = sample_points(chart, (m + 2) * (m + 2), 4);
        let v = values(&s, &pts);
        let sv = v.singular_values();
        assert!(sv.min() > 1e-12 * sv.max(), "m={m}");
    }
}

#[test]
fn equal_coefficients_reproduce_frenet_polynomials() {
    let chart = &circle_charts(10)[4];
    let s = build_local_space(chart, 3, SidePair::new(5.0, 5.0), XiFamily::Legendre).unwrap();
    let mut r = rng(8);
    let target: Vec<f64> = (0..16).map(|_| r.random_range(-1.0..1.0)).collect();
    let pts = sample_points(chart, 60, 5);
    let rhs = DVector::from_iterator(
        pts.len(),
        pts.iter().map(|(x, _)| {
            let p = chart.to_frenet(*x).unwrap();
            (0..4).flat_map(|j| (0..4).map(move |i| (j, i))).map(|(j, i)| target[j * 4 + i] * p.eta.powi(j as i32) * p.xi.powi(i as i32)).sum::<f64>()
        }),
    );
    let v = values(&s, &pts);
    let fit = v.clone().svd(true, true).solve(&rhs, 1e-14).unwrap();
    assert!((&v * fit - &rhs).amax() <= 1e-10);
}

#[test]
fn shape_evaluation_examples() {
    let chart = &circle_charts(10)[0];
    let beta = SidePair::new(1.0, 10.0);
    let s = build_local_space(chart, 2, beta, XiFamily::Legendre).unwrap();
    let x = chart.curve.point(0.5 * (chart.a + chart.b));
    // shape (i, j) = (0, 1) is eta / beta
    assert!(s.eval_shape(1, x).unwrap().abs() < 1e-12);

    let same = build_local_space(chart, 3, SidePair::new(1.0, 1.0), XiFamily::Legendre).unwrap();
    let ife = same.ife().unwrap();
    for (x, _) in sample_points(chart, 20, 6) {
        let p = chart.to_frenet(x).unwrap();
        for k in 0..same.dim() {
            let direct = ife.shapes[k].minus.eval(p.eta, p.xi);
            assert!((same.eval_shape(k, x).unwrap() - direct).abs() < 1e-12);
        }
    }
}

#[test]
fn shape_gradients_match_finite_differences() {
    let chart = &circle_charts(10)[2];
    let s = build_local_space(chart, 3, SidePair::new(1.0, 10.0), XiFamily::Legendre).unwrap();
    let d = 1e-6 * chart.half_width;
    for (x, _) in sample_points(chart, 20, 7) {
        let p = chart.to_frenet(x).unwrap();
        if p.eta.abs() < 4.0 * d {
            continue;
        }
        for k in 0..s.dim() {
            let g = s.eval_shape_grad(k, x).unwrap();
            let fx = (s.eval_shape(k, x + Vec2::new(d, 0.0)).unwrap() - s.eval_shape(k, x - Vec2::new(d, 0.0)).unwrap()) / (2.0 * d);
            let fy = (s.eval_shape(k, x + Vec2::new(0.0, d)).unwrap() - s.eval_shape(k, x - Vec2::new(0.0, d)).unwrap()) / (2.0 * d);
            let scale = g.norm().max(1.0);
            assert!((g - Vec2::new(fx, fy)).norm() < 1e-5 * scale, "shape {k}");
        }
    }
}

#[test]
fn side_mismatch_is_reported() {
    let chart = &circle_charts(10)[0];
    let s = build_local_space(chart, 2, SidePair::new(1.0, 10.0), XiFamily::Legendre).unwrap();
    let p = FrenetPoint::new(0.2 * chart.half_width, 0.5 * (chart.a + chart.b));
    let x = frenet_forward(&chart.curve, p).unwrap();
    let mut sv = ShapeValues::default();
    assert!(matches!(s.eval_all(x, Some(Side::Minus), &mut sv), Err(Error::SideMismatch { .. })));
}

#[test]
fn conditioning_does_not_grow_as_the_cut_shrinks() {
    let c = unit_circle();
    let eps: Vec<f64> = (1..=6).map(|k| 10f64.powi(-k)).collect();
    assert!(conditioning_study(&c, 1, &eps).unwrap().iter().all(|&v| v == 1.0));
    let cond = conditioning_study(&c, 2, &eps).unwrap();
    let (lo, hi) = cond.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(hi / lo <= 10.0, "{cond:?}");
    let c5 = conditioning_study(&c, 5, &[1e-2, 1e-6]).unwrap();
    assert!(c5[1].is_finite() && c5[1] <= 2.0 * c5[0] && c5[0] <= 2.0 * c5[1], "{c5:?}");
}

#[test]
fn degree_limits() {
    let chart = &circle_charts(10)[0];
    assert!(matches!(build_local_space(chart, 0, SidePair::new(1.0, 1.0), XiFamily::Legendre), Err(Error::Degree(_))));
    assert!(matches!(
        build_local_space(chart, MAX_DEGREE + 1, SidePair::new(1.0, 1.0), XiFamily::Legendre),
        Err(Error::Degree(_))
    ));
}

#[test]
fn system_dump_lists_all_blocks() {
    let chart = &circle_charts(10)[0];
    let s = build_local_space(chart, 2, SidePair::new(1.0, 10.0), XiFamily::Legendre).unwrap();
    let ife = s.ife().unwrap();
    let text = ife.system.dump(7, &ife.coefficients);
    assert!(text.starts_with("% element 7, degree 2"));
    assert!(text.contains("%%A 3 3") && text.contains("%%B 3 3") && text.contains("%%C 3 3"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conformity_for_random_coefficients(bm in 0.01f64..100.0, bp in 0.01f64..100.0, m in 1usize..6, idx in 0usize..30) {
        let charts = circle_charts(10);
        let chart = &charts[idx % charts.len()];
        let s = build_local_space(chart, m, SidePair::new(bm, bp), XiFamily::Legendre).unwrap();
        let r = jump_residual(&s).unwrap();
        prop_assert!(r.value <= 1e-11 && r.flux <= 1e-11);
    }
}
