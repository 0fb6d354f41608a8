#![allow(dead_code)]

use frenet_ife::geometry::{curvature_derivative, frenet_apparatus, Curve, FrenetPoint, Side, SidePair, Vec2};
use frenet_ife::mesh::{
    build_mesh, classify_elements, cut_rectangle, element_corners, fictitious_chart, locate_corners, FrenetChart, Rect,
};
use frenet_ife::problems::{quartic_problem, Problem};
use frenet_ife::quadrature::{cut_cell_rule, gauss_rule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_circle() -> Curve {
    Curve::circle(Vec2::zeros(), 1.0).unwrap()
}

pub fn quartic_curve() -> Curve {
    quartic_problem(SidePair::new(1.0, 10.0)).unwrap().curve
}

/// Test curves with a parameter window and a safe tube half-width.
pub fn test_curves() -> Vec<(&'static str, Curve, (f64, f64), f64)> {
    let q = quartic_curve();
    let (s, e) = q.domain();
    let pad = 0.1 * (e - s);
    vec![
        ("unit circle", unit_circle(), (-3.0, 3.0), 0.4),
        ("radius-2 circle", Curve::circle(Vec2::zeros(), 2.0).unwrap(), (-3.0, 3.0), 0.8),
        ("line", Curve::line(Vec2::new(0.1, -0.2), Vec2::new(0.6, 0.8), -2.0, 2.0).unwrap(), (-1.5, 1.5), 1.0),
        ("quartic", q, (s + pad, e - pad), 0.08),
    ]
}

/// `u = x^3 y^2` with gradient and Hessian.
pub fn cubic_quadratic(x: Vec2) -> (f64, Vec2, [[f64; 2]; 2]) {
    let (a, b) = (x.x, x.y);
    let u = a.powi(3) * b * b;
    let g = Vec2::new(3.0 * a * a * b * b, 2.0 * a.powi(3) * b);
    let h = [[6.0 * a * b * b, 6.0 * a * a * b], [6.0 * a * a * b, 2.0 * a.powi(3)]];
    (u, g, h)
}


/// Charts and rectangles of all interface elements of an `n x n` mesh.
pub fn interface_charts(problem: &Problem, n: usize) -> Vec<(usize, Rect, FrenetChart)> {
    let mesh = build_mesh(problem.domain, n, n).unwrap();
    let class = classify_elements(&mesh, &problem.curve, None).unwrap();
    class
        .interface_elements()
        .map(|id| {
            let rect = mesh.element(id);
            let chart = fictitious_chart(&problem.curve, &rect, &class.cuts[id].unwrap(), &element_corners(&mesh, &class, id)).unwrap();
            (id, rect, chart)
        })
        .collect()
}

/// Problem with the given interface and a smooth exact solution shared by
/// both sides; the source assumes equal coefficients `beta`.
pub fn smooth_problem(
    curve: Curve,
    domain: Rect,
    beta: f64,
    exact: impl Fn(Vec2) -> (f64, Vec2, f64) + Send + Sync + Clone + 'static,
) -> Problem {
    use std::sync::Arc;
    let (e1, e2, e3) = (exact.clone(), exact.clone(), exact);
    Problem {
        name: "smooth".into(),
        domain,
        curve,
        beta: SidePair::new(beta, beta),
        exact: Arc::new(move |x, _| e1(x).0),
        exact_grad: Arc::new(move |x, _| e2(x).1),
        source: Arc::new(move |x, _| -beta * e3(x).2),
        side_hint: None,
    }
}

/// `sin(pi x) sin(pi y)` with its gradient and Laplacian.
pub fn sine_product(x: Vec2) -> (f64, Vec2, f64) {
    use std::f64::consts::PI;
    let (sx, cx, sy, cy) = ((PI * x.x).sin(), (PI * x.x).cos(), (PI * x.y).sin(), (PI * x.y).cos());
    (sx * sy, Vec2::new(PI * cx * sy, PI * sx * cy), -2.0 * PI * PI * sx * sy)
}

/// Frenet partials of `u(P(eta, xi))` by the exact chain rule.
pub fn frenet_partials(c: &Curve, p: FrenetPoint, u: impl Fn(Vec2) -> (f64, Vec2, [[f64; 2]; 2])) -> [f64; 5] {
    let smp = c.sample(p.xi);
    let f = frenet_apparatus(c, p.xi).unwrap();
    let (s, k) = (f.speed, f.kappa);
    let dk = curvature_derivative(&smp);
    let ds = smp.d1.dot(&smp.d2) / s;
    let x = smp.point + p.eta * f.n;
    let px = smp.d1 + p.eta * k * s * f.tau;
    let dtau = -k * s * f.n;
    let pxx = smp.d2 + p.eta * ((dk * s + k * ds) * f.tau + k * s * dtau);
    let (_, g, h) = u(x);
    let quad = |a: Vec2, b: Vec2| a.x * (h[0][0] * b.x + h[0][1] * b.y) + a.y * (h[1][0] * b.x + h[1][1] * b.y);
    [g.dot(&f.n), g.dot(&px), quad(f.n, f.n), quad(px, px) + g.dot(&pxx), h[0][0] + h[1][1]]
}

pub fn rect_moment(rect: &Rect, i: i32, j: i32) -> f64 {
    let px = (rect.x1.powi(i + 1) - rect.x0.powi(i + 1)) / (i + 1) as f64;
    let py = (rect.y1.powi(j + 1) - rect.y0.powi(j + 1)) / (j + 1) as f64;
    px * py
}

/// Exact `int x^i y^j` over a polygon by Green's theorem,
/// `int x^i y^j = oint x^{i+1} y^j / (i + 1) dy`, with Gauss on each side.
pub fn polygon_moment(poly: &[Vec2], i: i32, j: i32) -> f64 {
    let g = gauss_rule(((i + j + 2) / 2 + 1) as usize, 0.0, 1.0);
    let mut total = 0.0;
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        total += g.integrate(|t| {
            let x = a + t * (b - a);
            x.x.powi(i + 1) * x.y.powi(j) / (i + 1) as f64 * (b.y - a.y)
        });
    }
    total
}

/// Part of the rectangle where `(x - p) . nrm < 0`.
pub fn clip(rect: &Rect, p: Vec2, nrm: Vec2) -> Vec<Vec2> {
    let c = rect.corners();
    let mut out = Vec::new();
    for k in 0..4 {
        let (a, b) = (c[k], c[(k + 1) % 4]);
        let (fa, fb) = ((a - p).dot(&nrm), (b - p).dot(&nrm));
        if fa < 0.0 {
            out.push(a);
        }
        if (fa < 0.0) != (fb < 0.0) {
            out.push(a + fa / (fa - fb) * (b - a));
        }
    }
    out
}

pub fn straight_cut_case(rect: Rect, origin: Vec2, dir: Vec2, q: usize) -> Result<(), String> {
    let curve = Curve::line(origin, dir, -10.0, 10.0).unwrap();
    let corners = locate_corners(&curve, &rect);
    let cut = match cut_rectangle(&curve, &rect, &corners).unwrap() {
        Some(c) => c,
        None => return Ok(()),
    };
    let rule = cut_cell_rule(&curve, &rect, &cut, &corners, q).map_err(|e| e.to_string())?;
    let nrm = Vec2::new(dir.y, -dir.x);
    let minus = clip(&rect, origin, nrm);
    for deg in 0..=q as i32 {
        for i in 0..=deg {
            let j = deg - i;
            let exact_minus = polygon_moment(&minus, i, j);
            let exact_plus = rect_moment(&rect, i, j) - exact_minus;
            let gm = rule.integrate(|x, s| if s == Side::Minus { x.x.powi(i) * x.y.powi(j) } else { 0.0 });
            let gp = rule.integrate(|x, s| if s == Side::Plus { x.x.powi(i) * x.y.powi(j) } else { 0.0 });
            if (gm - exact_minus).abs() > 1e-12 || (gp - exact_plus).abs() > 1e-12 {
                return Err(format!("x^{i} y^{j}: {gm} vs {exact_minus}, {gp} vs {exact_plus}"));
            }
        }
    }
    Ok(())
}
