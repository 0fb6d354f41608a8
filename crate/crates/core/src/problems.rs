//! Manufactured interface problems with exact solutions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{validate_orientation, Curve, JetCurve, Side, SidePair, Vec2};
use crate::jet::Jet;
use crate::mesh::Rect;

pub type SideFn = Arc<dyn Fn(Vec2, Side) -> f64 + Send + Sync>;
pub type SideGradFn = Arc<dyn Fn(Vec2, Side) -> Vec2 + Send + Sync>;
pub type Classifier = Arc<dyn Fn(Vec2) -> Side + Send + Sync>;

/// `-div(beta grad u) = f` on a rectangle with Dirichlet data from `exact`.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub domain: Rect,
    pub curve: Curve,
    pub beta: SidePair<f64>,
    pub exact: SideFn,
    pub exact_grad: SideGradFn,
    pub source: SideFn,
    /// Level-set side of points away from the interface.
    pub side_hint: Option<Classifier>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("curve", &self.curve)
            .field("beta", &self.beta)
            .finish()
    }
}

fn check_beta(beta: SidePair<f64>) -> Result<()> {
    if !(beta.minus > 0.0 && beta.plus > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "diffusion coefficients must be positive, got ({}, {})",
            beta.minus, beta.plus
        )));
    }
    Ok(())
}

/// Radius of the circular interface of [`circle_problem`].
pub fn circle_radius() -> f64 {
    1.0 / 3f64.sqrt()
}

/// Circular interface of radius `1/sqrt(3)` in `(-1, 1)^2` with
/// `u = cos(pi r^2) / beta` plus a constant on the outside making `u`
/// continuous. The minus side is the disk.
pub fn circle_problem(beta: SidePair<f64>) -> Result<Problem> {
    check_beta(beta)?;
    let r0 = circle_radius();
    let shift = (PI * r0 * r0).cos() * (1.0 / beta.minus - 1.0 / beta.plus);
    let exact = move |x: Vec2, s: Side| {
        let v = (PI * x.norm_squared()).cos() / beta.get(s);
        match s {
            Side::Minus => v,
            Side::Plus => v + shift,
        }
    };
    let exact_grad = move |x: Vec2, s: Side| -(PI * x.norm_squared()).sin() * 2.0 * PI * x / beta.get(s);
    let source = |x: Vec2, _s: Side| {
        let r2 = x.norm_squared();
        4.0 * PI * PI * r2 * (PI * r2).cos() + 4.0 * PI * (PI * r2).sin()
    };
    Ok(Problem {
        name: "circle".into(),
        domain: Rect::new(-1.0, 1.0, -1.0, 1.0),
        curve: Curve::circle(Vec2::zeros(), r0)?,
        beta,
        exact: Arc::new(exact),
        exact_grad: Arc::new(exact_grad),
        source: Arc::new(source),
        side_hint: Some(Arc::new(move |x: Vec2| Side::of_offset(x.norm() - r0))),
    })
}

/// `Re(z^4) + 1/2`; its zero set is the interface of [`quartic_problem`].
pub fn quartic_level(x: Vec2) -> f64 {
    let (a, b) = (x.x * x.x, x.y * x.y);
    (a - b).powi(2) - 4.0 * a * b + 0.5
}

/// `Im(z^4)`, the harmonic conjugate of [`quartic_level`].
pub fn quartic_conjugate(x: Vec2) -> f64 {
    4.0 * x.x * x.y * (x.x * x.x - x.y * x.y)
}

fn quartic_level_grad(x: Vec2) -> Vec2 {
    let (a, b) = (x.x * x.x, x.y * x.y);
    Vec2::new(4.0 * x.x * (a - 3.0 * b), 4.0 * x.y * (b - 3.0 * a))
}

fn quartic_conjugate_grad(x: Vec2) -> Vec2 {
    let (a, b) = (x.x * x.x, x.y * x.y);
    Vec2::new(4.0 * x.y * (3.0 * a - b), 4.0 * x.x * (a - 3.0 * b))
}

/// Parametrization of `{quartic_level = 0}` in the first quadrant.
pub fn quartic_curve_map(xi: Jet) -> [Jet; 2] {
    let root = ((2.0 * xi).exp() * 2.0 + 1.0).sqrt();
    [root.sqrt() * 0.5, (root * 3.0 - xi.exp() * 4.0).sqrt() * 0.5]
}

/// Parameter interval of the quartic curve covering its part inside
/// `domain`, widened by `margin` times its length on both ends.
pub fn quartic_parameter_range(domain: &Rect, margin: f64) -> Result<(f64, f64)> {
    let point = |xi: f64| {
        let [x, y] = quartic_curve_map(Jet::constant(xi));
        Vec2::new(x.value(), y.value())
    };
    let inside = |xi: f64| domain.contains(point(xi), 0.0);
    let (lo, hi, steps) = (-6.0, 6.0, 2400);
    let grid: Vec<f64> = (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect();
    let first = grid.iter().position(|&xi| inside(xi));
    let last = grid.iter().rposition(|&xi| inside(xi));
    let (first, last) = match (first, last) {
        (Some(f), Some(l)) if f > 0 && l < steps => (f, l),
        _ => return Err(Error::InvalidCurve("interface does not cross the domain".into())),
    };
    let bisect = |mut a: f64, mut b: f64| {
        // inside(a) != inside(b)
        let ia = inside(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if inside(m) == ia {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let start = bisect(grid[first - 1], grid[first]);
    let end = bisect(grid[last], grid[last + 1]);
    let pad = margin * (end - start);
    Ok((start - pad, end + pad))
}

/// Quartic interface in `(0.6, 1.6) x (0.2, 1.2)` with
/// `u = L / beta + Lc + Lc L / beta`, where `L` is [`quartic_level`] and
/// `Lc` its harmonic conjugate; the plus side is `L > 0` and `f = 0`.
pub fn quartic_problem(beta: SidePair<f64>) -> Result<Problem> {
    check_beta(beta)?;
    let domain = Rect::new(0.6, 1.6, 0.2, 1.2);
    let (start, end) = quartic_parameter_range(&domain, 0.05)?;
    let curve = Curve::new(JetCurve::new(quartic_curve_map), start, end)?;
    let level_side = |x: Vec2| Side::of_offset(quartic_level(x));
    validate_orientation(&curve, level_side, 1e-4, 64)?;

    let exact = move |x: Vec2, s: Side| {
        let (l, lc) = (quartic_level(x), quartic_conjugate(x));
        (l + lc * l) / beta.get(s) + lc
    };
    let exact_grad = move |x: Vec2, s: Side| {
        let (l, lc) = (quartic_level(x), quartic_conjugate(x));
        let (gl, glc) = (quartic_level_grad(x), quartic_conjugate_grad(x));
        (gl * (1.0 + lc) + glc * l) / beta.get(s) + glc
    };
    Ok(Problem {
        name: "quartic".into(),
        domain,
        curve,
        beta,
        exact: Arc::new(exact),
        exact_grad: Arc::new(exact_grad),
        source: Arc::new(|_x: Vec2, _s: Side| 0.0),
        side_hint: Some(Arc::new(level_side)),
    })
}

/// Pointwise check of the interface conditions of a problem's exact
/// solution: returns the largest value jump and flux jump over `samples`
/// points of the curve inside the domain.
pub fn interface_condition_residuals(problem: &Problem, samples: usize) -> Result<(f64, f64)> {
    let (s, e) = problem.curve.domain();
    let (mut value, mut flux) = (0.0f64, 0.0f64);
    for k in 0..samples {
        let xi = s + (e - s) * (k as f64 + 0.5) / samples as f64;
        let x = problem.curve.point(xi);
        if !problem.domain.contains(x, 0.0) {
            continue;
        }
        let n = crate::geometry::frenet_apparatus(&problem.curve, xi)?.n;
        let (um, up) = ((problem.exact)(x, Side::Minus), (problem.exact)(x, Side::Plus));
        let fm = problem.beta.minus * (problem.exact_grad)(x, Side::Minus).dot(&n);
        let fp = problem.beta.plus * (problem.exact_grad)(x, Side::Plus).dot(&n);
        value = value.max((up - um).abs());
        flux = flux.max((fp - fm).abs());
    }
    Ok((value, flux))
}
