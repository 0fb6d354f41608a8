//! Uniform Cartesian meshes, interface-element classification and the
//! Frenet charts of cut elements.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    closest_point_param, frenet_apparatus, frenet_inverse, locate, wedge, Curve, FrenetPoint, Side, Vec2,
};

/// Number of sub-intervals of the sign scan along an edge.
pub const EDGE_SCAN_INTERVALS: usize = 64;
const BISECTION_TOL: f64 = 1e-13;
const SNAP_TOL: f64 = 1e-12;
const TANGENCY_TOL: f64 = 1e-8;
/// Charts whose vertices reach `1 + eta kappa` below this are rejected.
const MIN_TUBE_FACTOR: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Diagonal length.
    pub fn diam(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Corners counter-clockwise from `(x0, y0)`.
    pub fn corners(&self) -> [Vec2; 4] {
        [
            Vec2::new(self.x0, self.y0),
            Vec2::new(self.x1, self.y0),
            Vec2::new(self.x1, self.y1),
            Vec2::new(self.x0, self.y1),
        ]
    }

    /// Point at perimeter coordinate `s` in `[0, 4)`: edge `floor(s)`
    /// (bottom, right, top, left) at local fraction `fract(s)`.
    pub fn perimeter_point(&self, s: f64) -> Vec2 {
        let c = self.corners();
        let k = (s.floor() as usize).min(3);
        let t = s - k as f64;
        c[k] + t * (c[(k + 1) % 4] - c[k])
    }

    /// Perimeter coordinate of a boundary point.
    pub fn perimeter_coord(&self, x: Vec2) -> f64 {
        let c = self.corners();
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..4 {
            let a = c[k];
            let d = c[(k + 1) % 4] - a;
            let t = ((x - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
            let dist = (a + t * d - x).norm();
            if dist < best.0 - 1e-15 * self.diam() {
                best = (dist, k as f64 + t);
            }
        }
        best.1 % 4.0
    }

    pub fn contains(&self, x: Vec2, tol: f64) -> bool {
        x.x >= self.x0 - tol && x.x <= self.x1 + tol && x.y >= self.y0 - tol && x.y <= self.y1 + tol
    }

    /// The four quadrants.
    pub fn split4(&self) -> [Rect; 4] {
        let c = self.center();
        [
            Rect::new(self.x0, c.x, self.y0, c.y),
            Rect::new(c.x, self.x1, self.y0, c.y),
            Rect::new(c.x, self.x1, c.y, self.y1),
            Rect::new(self.x0, c.x, c.y, self.y1),
        ]
    }
}

/// A mesh edge. `normal` points from `left` into `right`; on the boundary
/// `right` is `None` and `normal` points out of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: Vec2,
    pub b: Vec2,
    pub left: usize,
    pub right: Option<usize>,
    pub normal: Vec2,
}

impl Edge {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub domain: Rect,
    pub nx: usize,
    pub ny: usize,
    pub edges: Vec<Edge>,
    /// Global edge ids of each element: bottom, right, top, left.
    pub element_edges: Vec<[usize; 4]>,
}

impl Mesh {
    pub fn n_elements(&self) -> usize {
        self.nx * self.ny
    }

    pub fn hx(&self) -> f64 {
        self.domain.width() / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.domain.height() / self.ny as f64
    }

    /// Element diameter.
    pub fn h(&self) -> f64 {
        self.hx().hypot(self.hy())
    }

    pub fn element(&self, id: usize) -> Rect {
        let (i, j) = (id % self.nx, id / self.nx);
        let x0 = self.domain.x0 + i as f64 * self.hx();
        let y0 = self.domain.y0 + j as f64 * self.hy();
        let x1 = if i + 1 == self.nx { self.domain.x1 } else { x0 + self.hx() };
        let y1 = if j + 1 == self.ny { self.domain.y1 } else { y0 + self.hy() };
        Rect::new(x0, x1, y0, y1)
    }

    pub fn vertex(&self, i: usize, j: usize) -> Vec2 {
        let x = if i == self.nx { self.domain.x1 } else { self.domain.x0 + i as f64 * self.hx() };
        let y = if j == self.ny { self.domain.y1 } else { self.domain.y0 + j as f64 * self.hy() };
        Vec2::new(x, y)
    }

    /// Vertex ids of an element, counter-clockwise from the lower left.
    pub fn element_vertices(&self, id: usize) -> [usize; 4] {
        let (i, j) = (id % self.nx, id / self.nx);
        let v = |i: usize, j: usize| j * (self.nx + 1) + i;
        [v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]
    }

    pub fn n_vertices(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn vertex_by_id(&self, id: usize) -> Vec2 {
        self.vertex(id % (self.nx + 1), id / (self.nx + 1))
    }
}

/// Uniform `nx` by `ny` mesh. Elements are numbered row-major from the lower
/// left; vertical edges come first, then horizontal ones.
pub fn build_mesh(domain: Rect, nx: usize, ny: usize) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::DegenerateDomain(format!("{nx} x {ny} elements")));
    }
    if !(domain.width() > 0.0 && domain.height() > 0.0) {
        return Err(Error::DegenerateDomain(format!("{domain:?}")));
    }
    let mut mesh = Mesh { domain, nx, ny, edges: Vec::new(), element_edges: vec![[0; 4]; nx * ny] };
    let elem = |i: usize, j: usize| j * nx + i;

    for j in 0..ny {
        for i in 0..=nx {
            let (a, b) = (mesh.vertex(i, j), mesh.vertex(i, j + 1));
            let id = mesh.edges.len();
            let edge = if i == 0 {
                mesh.element_edges[elem(0, j)][3] = id;
                Edge { a, b, left: elem(0, j), right: None, normal: Vec2::new(-1.0, 0.0) }
            } else if i == nx {
                mesh.element_edges[elem(nx - 1, j)][1] = id;
                Edge { a, b, left: elem(nx - 1, j), right: None, normal: Vec2::new(1.0, 0.0) }
            } else {
                mesh.element_edges[elem(i - 1, j)][1] = id;
                mesh.element_edges[elem(i, j)][3] = id;
                Edge { a, b, left: elem(i - 1, j), right: Some(elem(i, j)), normal: Vec2::new(1.0, 0.0) }
            };
            mesh.edges.push(edge);
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            let (a, b) = (mesh.vertex(i, j), mesh.vertex(i + 1, j));
            let id = mesh.edges.len();
            let edge = if j == 0 {
                mesh.element_edges[elem(i, 0)][0] = id;
                Edge { a, b, left: elem(i, 0), right: None, normal: Vec2::new(0.0, -1.0) }
            } else if j == ny {
                mesh.element_edges[elem(i, ny - 1)][2] = id;
                Edge { a, b, left: elem(i, ny - 1), right: None, normal: Vec2::new(0.0, 1.0) }
            } else {
                mesh.element_edges[elem(i, j - 1)][2] = id;
                mesh.element_edges[elem(i, j)][0] = id;
                Edge { a, b, left: elem(i, j - 1), right: Some(elem(i, j)), normal: Vec2::new(0.0, 1.0) }
            };
            mesh.edges.push(edge);
        }
    }
    Ok(mesh)
}

/// A transversal crossing of the interface with a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Fraction along the segment.
    pub t: f64,
    pub x: Vec2,
    pub xi: f64,
}

fn side_at(curve: &Curve, x: Vec2, hint: Option<FrenetPoint>) -> Result<FrenetPoint> {
    if let Some(h) = hint {
        if let Ok(p) = frenet_inverse(curve, x, h) {
            return Ok(p);
        }
    }
    locate(curve, x)
}

/// Crossings of the interface with the segment `a -> b`, found by a sign
/// scan of `eta`, bisection, and a Newton polish of `a + t (b - a) = g(xi)`.
///
/// `fa`, `fb` are the Frenet coordinates of the endpoints when they could be
/// located; `scale` sets the vertex snapping distance.
pub fn segment_crossings(
    curve: &Curve,
    a: Vec2,
    b: Vec2,
    fa: Option<FrenetPoint>,
    fb: Option<FrenetPoint>,
    scale: f64,
) -> Result<Vec<Crossing>> {
    let (fa, fb) = match (fa, fb) {
        (Some(fa), Some(fb)) => (fa, fb),
        _ => return Ok(Vec::new()),
    };
    let len = (b - a).norm();
    if fa.eta.abs() > 1.01 * len || fb.eta.abs() > 1.01 * len {
        return Ok(Vec::new());
    }
    if fa.eta.abs() <= SNAP_TOL * scale && fb.eta.abs() <= SNAP_TOL * scale {
        return Err(Error::Tangency { element: usize::MAX });
    }
    let dir = b - a;
    let at = |t: f64| a + t * dir;

    let n = EDGE_SCAN_INTERVALS;
    let mut samples: Vec<(f64, FrenetPoint)> = Vec::with_capacity(n + 1);
    samples.push((0.0, fa));
    for k in 1..n {
        let t = k as f64 / n as f64;
        let prev = samples[k - 1].1;
        samples.push((t, side_at(curve, at(t), Some(prev))?));
    }
    samples.push((1.0, fb));

    let mut out = Vec::new();
    for w in samples.windows(2) {
        let (t0, p0) = w[0];
        let (t1, p1) = w[1];
        if Side::of_offset(p0.eta) == Side::of_offset(p1.eta) {
            continue;
        }
        let (mut lo, mut hi, mut plo) = (t0, t1, p0);
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            let pm = side_at(curve, at(mid), Some(plo))?;
            if Side::of_offset(pm.eta) == Side::of_offset(plo.eta) {
                lo = mid;
                plo = pm;
            } else {
                hi = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        let mut xi = plo.xi;
        for _ in 0..3 {
            let r = at(t) - curve.point(xi);
            let d1 = curve.d1(xi);
            let det = wedge(&dir, &(-d1));
            if det.abs() < f64::MIN_POSITIVE {
                break;
            }
            // solve [dir, -g'] (dt, dxi) = -r
            let dt = -wedge(&r, &(-d1)) / det;
            let dxi = -wedge(&dir, &r) / det;
            if (t + dt - 0.5 * (lo + hi)).abs() > 1e-8 {
                break;
            }
            t += dt;
            xi += dxi;
        }
        let mut x = at(t);
        if (x - a).norm() <= SNAP_TOL * scale {
            t = 0.0;
            x = a;
        } else if (x - b).norm() <= SNAP_TOL * scale {
            t = 1.0;
            x = b;
        }
        let frame = frenet_apparatus(curve, xi)?;
        if wedge(&frame.tau, &(dir / len)).abs() < TANGENCY_TOL {
            return Err(Error::Tangency { element: usize::MAX });
        }
        out.push(Crossing { t, x, xi });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementTag {
    Interface,
    NonInterface(Side),
}

/// Where the interface crosses the boundary of a cut element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutTopology {
    pub element: usize,
    pub d: Vec2,
    pub e: Vec2,
    /// `xi_d <= xi_e`; on closed curves `xi_e` is unwrapped next to `xi_d`.
    pub xi_d: f64,
    pub xi_e: f64,
}

/// Cut of an arbitrary rectangle: `None` when the interface misses it.
pub fn cut_of_crossings(
    curve: &Curve,
    rect: &Rect,
    element: usize,
    mut crossings: Vec<Crossing>,
) -> Result<Option<CutTopology>> {
    let tol = 1e-10 * rect.diam();
    crossings.sort_by(|p, q| rect.perimeter_coord(p.x).total_cmp(&rect.perimeter_coord(q.x)));
    let mut unique: Vec<Crossing> = Vec::new();
    for c in crossings {
        if unique.iter().all(|u| (u.x - c.x).norm() > tol) {
            unique.push(c);
        }
    }
    match unique.len() {
        0 | 1 => Ok(None),
        2 => {
            let (mut p, mut q) = (unique[0], unique[1]);
            q.xi = curve.unwrap_near(q.xi, p.xi);
            if q.xi < p.xi {
                std::mem::swap(&mut p, &mut q);
            }
            Ok(Some(CutTopology { element, d: p.x, e: q.x, xi_d: p.xi, xi_e: q.xi }))
        }
        count => Err(Error::MultiCut { element, count }),
    }
}

/// Frenet coordinates of the four corners (`None` where location failed).
pub fn locate_corners(curve: &Curve, rect: &Rect) -> [Option<FrenetPoint>; 4] {
    rect.corners().map(|c| locate(curve, c).ok())
}

/// Cut of a free-standing rectangle (not a mesh element).
pub fn cut_rectangle(curve: &Curve, rect: &Rect, corners: &[Option<FrenetPoint>; 4]) -> Result<Option<CutTopology>> {
    let c = rect.corners();
    let mut all = Vec::new();
    for k in 0..4 {
        let l = (k + 1) % 4;
        all.extend(segment_crossings(curve, c[k], c[l], corners[k], corners[l], rect.diam())?);
    }
    cut_of_crossings(curve, rect, usize::MAX, all)
}

/// Interface data of a whole mesh.
#[derive(Debug, Clone)]
pub struct Classification {
    pub tags: Vec<ElementTag>,
    pub cuts: Vec<Option<CutTopology>>,
    /// Frenet coordinates of every mesh vertex that could be located.
    pub vertices: Vec<Option<FrenetPoint>>,
    pub edge_crossings: Vec<Vec<Crossing>>,
}

impl Classification {
    pub fn interface_elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.tags.iter().enumerate().filter(|(_, t)| **t == ElementTag::Interface).map(|(i, _)| i)
    }

    pub fn n_interface(&self) -> usize {
        self.interface_elements().count()
    }
}

/// Tag every element and find the cut points of interface elements.
///
/// `side_hint` classifies points away from the interface; without it the sign
/// of `eta` at the element center is used.
pub fn classify_elements(
    mesh: &Mesh,
    curve: &Curve,
    side_hint: Option<&(dyn Fn(Vec2) -> Side + Sync)>,
) -> Result<Classification> {
    let vertices: Vec<Option<FrenetPoint>> = (0..mesh.n_vertices())
        .into_par_iter()
        .map(|v| locate(curve, mesh.vertex_by_id(v)).ok())
        .collect();
    let vid = |x: Vec2| {
        let i = ((x.x - mesh.domain.x0) / mesh.hx()).round() as usize;
        let j = ((x.y - mesh.domain.y0) / mesh.hy()).round() as usize;
        j * (mesh.nx + 1) + i
    };
    let scale = mesh.h();
    let edge_crossings: Vec<Vec<Crossing>> = mesh
        .edges
        .par_iter()
        .map(|e| segment_crossings(curve, e.a, e.b, vertices[vid(e.a)], vertices[vid(e.b)], scale).map_err(|err| err.at_element(e.left)))
        .collect::<Result<_>>()?;

    let per_element: Vec<(ElementTag, Option<CutTopology>)> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|id| {
            let rect = mesh.element(id);
            let crossings: Vec<Crossing> =
                mesh.element_edges[id].iter().flat_map(|&e| edge_crossings[e].iter().copied()).collect();
            match cut_of_crossings(curve, &rect, id, crossings)? {
                Some(cut) => Ok((ElementTag::Interface, Some(cut))),
                None => {
                    let side = match side_hint {
                        Some(f) => f(rect.center()),
                        None => match locate(curve, rect.center()) {
                            Ok(p) => Side::of_offset(p.eta),
                            Err(err) => mesh
                                .element_vertices(id)
                                .iter()
                                .find_map(|&v| vertices[v].map(|p| Side::of_offset(p.eta)))
                                .ok_or(err)?,
                        },
                    };
                    Ok((ElementTag::NonInterface(side), None))
                }
            }
        })
        .collect::<Result<_>>()?;
    let (tags, cuts) = per_element.into_iter().unzip();
    Ok(Classification { tags, cuts, vertices, edge_crossings })
}

/// The fictitious Frenet rectangle `[-half_width, half_width] x [a, b]` of a
/// cut element.
#[derive(Debug, Clone)]
pub struct FrenetChart {
    pub curve: Curve,
    pub a: f64,
    pub b: f64,
    pub half_width: f64,
    /// Curve parameter used to start the inverse map.
    pub xi_hint: f64,
    /// `half_width * max |kappa|` over `[a, b]`.
    pub curvature_ratio: f64,
}

impl FrenetChart {
    /// Frenet coordinates of a point of the element.
    pub fn to_frenet(&self, x: Vec2) -> Result<FrenetPoint> {
        match frenet_inverse(&self.curve, x, FrenetPoint::new(0.0, self.xi_hint)) {
            Ok(p) => Ok(p),
            Err(first) => {
                let xi = closest_point_param(&self.curve, x).map_err(|_| first.clone())?;
                let xi = self.curve.unwrap_near(xi, self.xi_hint);
                frenet_inverse(&self.curve, x, FrenetPoint::new(0.0, xi)).map_err(|_| first)
            }
        }
    }

    pub fn side_of(&self, x: Vec2) -> Result<Side> {
        Ok(Side::of_offset(self.to_frenet(x)?.eta))
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }
}

/// Build the chart of a cut element from its corner projections.
pub fn fictitious_chart(
    curve: &Curve,
    rect: &Rect,
    cut: &CutTopology,
    corners: &[Option<FrenetPoint>; 4],
) -> Result<FrenetChart> {
    let element = cut.element;
    let mid = 0.5 * (cut.xi_d + cut.xi_e);
    let mut a = cut.xi_d.min(cut.xi_e);
    let mut b = cut.xi_d.max(cut.xi_e);
    let mut min_factor = f64::INFINITY;
    for (k, c) in corners.iter().enumerate() {
        let p = match c {
            Some(p) => *p,
            None => locate(curve, rect.corners()[k]).map_err(|e| Error::TubeViolation {
                element,
                detail: format!("corner {k} cannot be projected: {e}"),
            })?,
        };
        let xi = curve.unwrap_near(p.xi, mid);
        a = a.min(xi);
        b = b.max(xi);
        let kappa = frenet_apparatus(curve, xi)?.kappa;
        min_factor = min_factor.min(1.0 + p.eta * kappa);
    }
    if !(a < b) {
        return Err(Error::TubeViolation { element, detail: format!("empty parameter range [{a}, {b}]") });
    }
    if curve.period().is_none() {
        let (s, e) = curve.domain();
        if a < s || b > e {
            return Err(Error::TubeViolation {
                element,
                detail: format!("chart [{a}, {b}] exceeds the curve domain [{s}, {e}]"),
            });
        }
    }
    let half_width = rect.diam();
    let mut kappa_max: f64 = 0.0;
    for k in 0..=16 {
        let xi = a + (b - a) * k as f64 / 16.0;
        kappa_max = kappa_max.max(frenet_apparatus(curve, xi)?.kappa.abs());
    }
    if min_factor <= MIN_TUBE_FACTOR {
        return Err(Error::TubeViolation {
            element,
            detail: format!("1 + eta*kappa = {min_factor:.3e} at a corner"),
        });
    }
    Ok(FrenetChart {
        curve: curve.clone(),
        a,
        b,
        half_width,
        xi_hint: mid,
        curvature_ratio: half_width * kappa_max,
    })
}

/// Corner Frenet coordinates of a mesh element from the classification.
pub fn element_corners(mesh: &Mesh, class: &Classification, id: usize) -> [Option<FrenetPoint>; 4] {
    mesh.element_vertices(id).map(|v| class.vertices[v])
}

/// One row of the mesh diagnostic table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub element_id: usize,
    pub tag: ElementTag,
    pub xi_d: Option<f64>,
    pub xi_e: Option<f64>,
    pub a_k: Option<f64>,
    pub b_k: Option<f64>,
}

pub fn summary_table(class: &Classification, charts: &[Option<FrenetChart>]) -> Vec<SummaryRow> {
    class
        .tags
        .iter()
        .enumerate()
        .map(|(id, tag)| {
            let cut = class.cuts[id];
            let chart = charts.get(id).and_then(|c| c.as_ref());
            SummaryRow {
                element_id: id,
                tag: *tag,
                xi_d: cut.map(|c| c.xi_d),
                xi_e: cut.map(|c| c.xi_e),
                a_k: chart.map(|c| c.a),
                b_k: chart.map(|c| c.b),
            }
        })
        .collect()
}

/// CSV rendering of [`summary_table`].
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let opt = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
    let mut out = String::from("element_id,tag,xi_D,xi_E,a_K,b_K\n");
    for r in rows {
        let tag = match r.tag {
            ElementTag::Interface => "interface".to_string(),
            ElementTag::NonInterface(s) => format!("non-interface{s}"),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.element_id,
            tag,
            opt(r.xi_d),
            opt(r.xi_e),
            opt(r.a_k),
            opt(r.b_k)
        ));
    }
    out
}
