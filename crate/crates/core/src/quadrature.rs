//! Gauss rules on intervals and rectangles, side-tagged rules on cut
//! elements and on edges split by the interface.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{locate, wedge, Curve, FrenetPoint, Side, Vec2};
use crate::mesh::{cut_rectangle, locate_corners, Crossing, CutTopology, Rect};

/// Maximum depth of the subdivision fallback for cut cells.
pub const MAX_SUBDIVISION: usize = 3;
const CHECK_POINTS: usize = 8;

/// One-dimensional Gauss-Legendre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `n`-point Gauss-Legendre rule on `[a, b]`, exact to degree `2n - 1`.
pub fn gauss_rule(n: usize, a: f64, b: f64) -> GaussRule {
    assert!(n >= 1, "a Gauss rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    GaussRule {
        nodes: nodes.iter().map(|t| c + r * t).collect(),
        weights: weights.iter().map(|w| w * r).collect(),
    }
}

/// Planar rule whose nodes carry the side of the interface they lie on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadRule {
    pub nodes: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub sides: Vec<Side>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn push(&mut self, x: Vec2, w: f64, side: Side) {
        self.nodes.push(x);
        self.weights.push(w);
        self.sides.push(side);
    }

    pub fn extend(&mut self, other: QuadRule) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
        self.sides.extend(other.sides);
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn side_measure(&self, side: Side) -> f64 {
        self.weights.iter().zip(&self.sides).filter(|(_, s)| **s == side).map(|(w, _)| w).sum()
    }

    pub fn integrate(&self, f: impl Fn(Vec2, Side) -> f64) -> f64 {
        (0..self.len()).map(|q| self.weights[q] * f(self.nodes[q], self.sides[q])).sum()
    }
}

/// Tensor Gauss rule with `n` points per direction on a rectangle.
pub fn tensor_rule(rect: &Rect, n: usize, side: Side) -> QuadRule {
    let gx = gauss_rule(n, rect.x0, rect.x1);
    let gy = gauss_rule(n, rect.y0, rect.y1);
    let mut rule = QuadRule::default();
    for (y, wy) in gy.nodes.iter().zip(&gy.weights) {
        for (x, wx) in gx.nodes.iter().zip(&gx.weights) {
            rule.push(Vec2::new(*x, *y), wx * wy, side);
        }
    }
    rule
}

/// Gauss rule on the segment `a -> b`, split at the given crossings, each
/// piece tagged by `side_of` at its midpoint.
pub fn edge_rule(
    a: Vec2,
    b: Vec2,
    crossings: &[Crossing],
    n: usize,
    side_of: impl Fn(Vec2) -> Result<Side>,
) -> Result<QuadRule> {
    if crossings.len() > 1 {
        return Err(Error::MultiCut { element: usize::MAX, count: crossings.len() });
    }
    let mut cuts = vec![0.0];
    cuts.extend(crossings.iter().map(|c| c.t).filter(|&t| t > 0.0 && t < 1.0));
    cuts.push(1.0);
    let len = (b - a).norm();
    let mut rule = QuadRule::default();
    for w in cuts.windows(2) {
        let side = side_of(a + 0.5 * (w[0] + w[1]) * (b - a))?;
        let g = gauss_rule(n, w[0], w[1]);
        for (&t, &wt) in g.nodes.iter().zip(&g.weights) {
            rule.push(a + t * (b - a), wt * len, side);
        }
    }
    Ok(rule)
}

fn corner_frenet(curve: &Curve, rect: &Rect, corners: &[Option<FrenetPoint>; 4], k: usize) -> Result<FrenetPoint> {
    match corners[k] {
        Some(p) => Ok(p),
        None => locate(curve, rect.corners()[k]),
    }
}

/// Corners strictly between perimeter coordinates `from` and `to` going
/// counter-clockwise.
fn corners_between(from: f64, to: f64) -> Vec<usize> {
    let span = (to - from).rem_euclid(4.0);
    let eps = 1e-12;
    (1..=4)
        .map(|k| (from.floor() as i64 + k) as f64)
        .filter(|&c| {
            let d = c - from;
            d > eps && d < span - eps
        })
        .map(|c| (c as i64).rem_euclid(4) as usize)
        .collect()
}

struct Region {
    /// Polyline from the start cut point through the corners to the end point.
    path: Vec<Vec2>,
    corners: Vec<usize>,
    xi_start: f64,
    xi_end: f64,
}

fn blended_rule(
    curve: &Curve,
    rect: &Rect,
    region: &Region,
    corner_xi: &[f64; 4],
    n: usize,
    side: Side,
) -> Option<QuadRule> {
    let dxi = region.xi_end - region.xi_start;
    let m = region.path.len();
    let mut breaks = vec![0.0];
    let mut monotone = true;
    for &c in &region.corners {
        let t = (corner_xi[c] - region.xi_start) / dxi;
        if !(t > *breaks.last().unwrap() && t < 1.0) {
            monotone = false;
        }
        breaks.push(t);
    }
    breaks.push(1.0);
    if !monotone {
        let seg: Vec<f64> = region.path.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let total: f64 = seg.iter().sum();
        let mut acc = 0.0;
        breaks = vec![0.0];
        for s in &seg[..m - 2] {
            acc += s;
            breaks.push(acc / total);
        }
        breaks.push(1.0);
    }

    let gs = gauss_rule(n, 0.0, 1.0);
    let tol = 1e-12 * rect.diam();
    let mut rule = QuadRule::default();
    let mut sign = 0.0;
    for k in 0..m - 1 {
        let (t0, t1) = (breaks[k], breaks[k + 1]);
        let (p0, p1) = (region.path[k], region.path[k + 1]);
        let gt = gauss_rule(n, t0, t1);
        for (&t, &wt) in gt.nodes.iter().zip(&gt.weights) {
            let xi = region.xi_start + t * dxi;
            let gamma = curve.point(xi);
            let dgamma = dxi * curve.d1(xi);
            let lam = (t - t0) / (t1 - t0);
            let bt = p0 + lam * (p1 - p0);
            let dbt = (p1 - p0) / (t1 - t0);
            for (&s, &ws) in gs.nodes.iter().zip(&gs.weights) {
                let x = (1.0 - s) * gamma + s * bt;
                let det = wedge(&((1.0 - s) * dgamma + s * dbt), &(bt - gamma));
                if det.abs() > 1e-14 * rect.area() {
                    if sign == 0.0 {
                        sign = det.signum();
                    } else if det.signum() != sign {
                        return None;
                    }
                }
                if !rect.contains(x, tol) {
                    return None;
                }
                rule.push(x, wt * ws * det.abs(), side);
            }
        }
    }
    Some(rule)
}

fn region_side(
    curve: &Curve,
    rect: &Rect,
    corners: &[Option<FrenetPoint>; 4],
    region: &Region,
) -> Result<Option<Side>> {
    let mut best: Option<FrenetPoint> = None;
    for &c in &region.corners {
        let p = corner_frenet(curve, rect, corners, c)?;
        if best.map_or(true, |b| p.eta.abs() > b.eta.abs()) {
            best = Some(p);
        }
    }
    Ok(best.filter(|p| p.eta.abs() > 1e-12 * rect.diam()).map(|p| Side::of_offset(p.eta)))
}

fn cut_rule_at_depth(
    curve: &Curve,
    rect: &Rect,
    cut: &CutTopology,
    corners: &[Option<FrenetPoint>; 4],
    n: usize,
    depth: usize,
) -> Result<QuadRule> {
    let sd = rect.perimeter_coord(cut.d);
    let se = rect.perimeter_coord(cut.e);
    let mid = 0.5 * (cut.xi_d + cut.xi_e);
    let mut corner_xi = [0.0; 4];
    for (k, xi) in corner_xi.iter_mut().enumerate() {
        *xi = curve.unwrap_near(corner_frenet(curve, rect, corners, k)?.xi, mid);
    }
    let make = |from: f64, to: f64, pf: Vec2, pt: Vec2, xf: f64, xt: f64| {
        let cs = corners_between(from, to);
        let mut path = vec![pf];
        path.extend(cs.iter().map(|&c| rect.corners()[c]));
        path.push(pt);
        Region { path, corners: cs, xi_start: xf, xi_end: xt }
    };
    let first = make(sd, se, cut.d, cut.e, cut.xi_d, cut.xi_e);
    let second = make(se, sd, cut.e, cut.d, cut.xi_e, cut.xi_d);
    let s1 = region_side(curve, rect, corners, &first)?;
    let s2 = region_side(curve, rect, corners, &second)?;
    let (side1, side2) = match (s1, s2) {
        (Some(a), Some(b)) if a != b => (a, b),
        (Some(a), None) => (a, a.opposite()),
        (None, Some(b)) => (b.opposite(), b),
        _ => {
            return Err(Error::Quadrature {
                element: cut.element,
                detail: "both sub-regions report the same side".into(),
            })
        }
    };

    let area = rect.area();
    let build = |q: usize| {
        Some((
            blended_rule(curve, rect, &first, &corner_xi, q, side1)?,
            blended_rule(curve, rect, &second, &corner_xi, q, side2)?,
        ))
    };
    // folds are detected with a rule fine enough to resolve the area
    let valid = build(n.max(CHECK_POINTS)).is_some_and(|(r1, r2)| (r1.measure() + r2.measure() - area).abs() <= 1e-8 * area);
    if let Some((mut r1, r2)) = valid.then(|| build(n)).flatten() {
        r1.extend(r2);
        return Ok(r1);
    }
    if depth >= MAX_SUBDIVISION {
        return Err(Error::Quadrature {
            element: cut.element,
            detail: format!("no valid sub-region map after {depth} subdivisions"),
        });
    }
    let mut rule = QuadRule::default();
    for child in rect.split4() {
        let cc = locate_corners(curve, &child);
        match cut_rectangle(curve, &child, &cc)? {
            Some(mut sub) => {
                sub.element = cut.element;
                rule.extend(cut_rule_at_depth(curve, &child, &sub, &cc, n, depth + 1)?);
            }
            None => {
                let side = Side::of_offset(locate(curve, child.center())?.eta);
                rule.extend(tensor_rule(&child, n, side));
            }
        }
    }
    Ok(rule)
}

/// Side-tagged rule on a cut element with `n` Gauss points per direction.
///
/// Each sub-region is swept by segments joining the interface arc to the
/// matching boundary polyline; the sweep is split at the corners and
/// integrated with tensor Gauss rules. Elements where the sweep folds are
/// subdivided.
pub fn cut_cell_rule(
    curve: &Curve,
    rect: &Rect,
    cut: &CutTopology,
    corners: &[Option<FrenetPoint>; 4],
    n: usize,
) -> Result<QuadRule> {
    cut_rule_at_depth(curve, rect, cut, corners, n, 0).map_err(|e| e.at_element(cut.element))
}
