//! Local contributions of the symmetric interior penalty DG method and the
//! element-wise L2 projection.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Side, SidePair, Vec2};
use crate::ife::{build_local_space, BivariateFrenetPoly, IfeSpace, LocalSpace, PiecewiseFrenetPoly, ShapeValues, SpaceKind, XiBasis, XiFamily};
use crate::mesh::{
    build_mesh, classify_elements, element_corners, fictitious_chart, Classification, ElementTag, FrenetChart, Mesh,
};
use crate::problems::Problem;
use crate::quadrature::{cut_cell_rule, edge_rule, tensor_rule, QuadRule};

/// Default penalty constant.
pub const DEFAULT_SIGMA0: f64 = 4.0;

/// Which local space cut elements receive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutSpace {
    /// Immersed shapes satisfying the interface conditions.
    #[default]
    Ife,
    /// Plain polynomials `eta^j p_i` in the Frenet coordinates, identical on
    /// both sides; equals the immersed space when the coefficients agree.
    FrenetPolynomial,
    /// Tensor polynomials in `x, y`, ignoring the interface.
    Cartesian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationOptions {
    /// Gauss points per direction of volume rules; `m + 3` when `None`.
    pub volume_points: Option<usize>,
    /// Gauss points per edge piece; `2m + 2` when `None`.
    pub edge_points: Option<usize>,
    pub family: XiFamily,
    pub cut_space: CutSpace,
}

impl Default for DiscretizationOptions {
    fn default() -> Self {
        DiscretizationOptions { volume_points: None, edge_points: None, family: XiFamily::Legendre, cut_space: CutSpace::Ife }
    }
}

/// Mesh, local spaces and quadrature rules of one problem at one degree.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub class: Classification,
    pub m: usize,
    pub beta: SidePair<f64>,
    pub spaces: Vec<LocalSpace>,
    pub volume_rules: Vec<QuadRule>,
    pub edge_rules: Vec<QuadRule>,
    pub volume_points: usize,
    pub edge_points: usize,
}

impl Discretization {
    pub fn n_local(&self) -> usize {
        (self.m + 1) * (self.m + 1)
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_elements() * self.n_local()
    }

    pub fn chart(&self, id: usize) -> Option<&FrenetChart> {
        self.spaces[id].ife().map(|s| &s.chart)
    }
}

fn frenet_polynomial_space(chart: &FrenetChart, m: usize, beta: SidePair<f64>, family: XiFamily) -> LocalSpace {
    let n = m + 1;
    let basis = XiBasis::new(family, m, chart.a, chart.b);
    let mut shapes = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let p = BivariateFrenetPoly::term(basis, j, i, 1.0);
            shapes.push(PiecewiseFrenetPoly { minus: p.clone(), plus: p });
        }
    }
    let system = crate::ife::ExtensionSystem { m, a: DMatrix::zeros(0, 0), b: DMatrix::zeros(0, n) };
    LocalSpace {
        m,
        beta,
        kind: SpaceKind::Ife(Box::new(IfeSpace { chart: chart.clone(), shapes, system, coefficients: DMatrix::zeros(0, n) })),
    }
}

/// Build mesh, classification, local spaces and rules for an `n x n` mesh.
pub fn discretize(problem: &Problem, n: usize, m: usize, opts: &DiscretizationOptions) -> Result<Discretization> {
    let mesh = build_mesh(problem.domain, n, n)?;
    let hint = problem.side_hint.clone();
    let hint_ref = hint.as_deref().map(|f| f as &(dyn Fn(Vec2) -> Side + Sync));
    let class = classify_elements(&mesh, &problem.curve, hint_ref)?;
    let vp = opts.volume_points.unwrap_or(m + 3);
    let ep = opts.edge_points.unwrap_or(2 * m + 2);
    let beta = problem.beta;

    let per_element: Vec<(LocalSpace, QuadRule)> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|id| {
            let rect = mesh.element(id);
            match class.tags[id] {
                ElementTag::NonInterface(side) => Ok((LocalSpace::standard(rect, m, beta)?, tensor_rule(&rect, vp, side))),
                ElementTag::Interface => {
                    let cut = class.cuts[id].expect("interface elements carry a cut");
                    let corners = element_corners(&mesh, &class, id);
                    let chart = fictitious_chart(&problem.curve, &rect, &cut, &corners)?;
                    let rule = cut_cell_rule(&problem.curve, &rect, &cut, &corners, vp)?;
                    let space = match opts.cut_space {
                        CutSpace::Ife => build_local_space(&chart, m, beta, opts.family).map_err(|e| e.at_element(id))?,
                        CutSpace::FrenetPolynomial => frenet_polynomial_space(&chart, m, beta, opts.family),
                        CutSpace::Cartesian => LocalSpace::standard(rect, m, beta)?,
                    };
                    Ok((space, rule))
                }
            }
        })
        .collect::<Result<_>>()?;
    let (spaces, volume_rules): (Vec<_>, Vec<_>) = per_element.into_iter().unzip();

    let side_in = |id: usize, x: Vec2| -> Result<Side> {
        match class.tags[id] {
            ElementTag::NonInterface(s) => Ok(s),
            ElementTag::Interface => match spaces[id].ife() {
                Some(s) => s.chart.side_of(x),
                None => Ok(Side::of_offset(crate::geometry::locate(&problem.curve, x)?.eta)),
            },
        }
    };
    let edge_rules: Vec<QuadRule> = mesh
        .edges
        .par_iter()
        .enumerate()
        .map(|(e, edge)| {
            let crossings = &class.edge_crossings[e];
            let owner = match (class.tags[edge.left], edge.right) {
                (ElementTag::Interface, _) | (_, None) => edge.left,
                (_, Some(r)) => r,
            };
            edge_rule(edge.a, edge.b, crossings, ep, |x| side_in(owner, x)).map_err(|err| err.at_element(edge.left))
        })
        .collect::<Result<_>>()?;

    Ok(Discretization { mesh, class, m, beta, spaces, volume_rules, edge_rules, volume_points: vp, edge_points: ep })
}

/// Element stiffness, mass and load.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBlocks {
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub load: DVector<f64>,
}

/// Volume terms of one element; `source` is evaluated per side.
pub fn local_volume(
    space: &LocalSpace,
    rule: &QuadRule,
    source: Option<&(dyn Fn(Vec2, Side) -> f64 + Sync)>,
) -> Result<LocalBlocks> {
    let nl = space.dim();
    let mut stiffness = DMatrix::zeros(nl, nl);
    let mut mass = DMatrix::zeros(nl, nl);
    let mut load = DVector::zeros(nl);
    let mut sv = ShapeValues::default();
    for q in 0..rule.len() {
        let (x, w, side) = (rule.nodes[q], rule.weights[q], rule.sides[q]);
        space.eval_all(x, Some(side), &mut sv)?;
        let bw = space.beta.get(side) * w;
        for a in 0..nl {
            for b in a..nl {
                stiffness[(a, b)] += bw * sv.grads[a].dot(&sv.grads[b]);
                mass[(a, b)] += w * sv.values[a] * sv.values[b];
            }
        }
        if let Some(f) = source {
            let fv = w * f(x, side);
            for a in 0..nl {
                load[a] += fv * sv.values[a];
            }
        }
    }
    for a in 0..nl {
        for b in 0..a {
            stiffness[(a, b)] = stiffness[(b, a)];
            mass[(a, b)] = mass[(b, a)];
        }
    }
    Ok(LocalBlocks { stiffness, mass, load })
}

/// `sigma_e = m^2 sigma0 beta_e` with `beta_e` the largest coefficient met
/// on the edge.
pub fn penalty(m: usize, sigma0: f64, beta_edge: f64) -> f64 {
    (m * m) as f64 * sigma0 * beta_edge
}

/// Edge blocks. For an interior edge `blocks[(x, y)]` couples test shapes
/// of element `x` with trial shapes of element `y` (0 = left, 1 = right);
/// a boundary edge fills only `(0, 0)` and `load`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceBlocks {
    pub blocks: [[Option<DMatrix<f64>>; 2]; 2],
    pub load: Option<DVector<f64>>,
    pub sigma: f64,
}

/// SIPG terms of one edge. Jumps are left minus right and the normal
/// points from left to right; on the boundary the jump and the average are
/// the one-sided trace. `dirichlet` supplies boundary data per side.
pub fn face_terms(
    normal: Vec2,
    length: f64,
    spaces: (&LocalSpace, Option<&LocalSpace>),
    rule: &QuadRule,
    sigma0: f64,
    dirichlet: Option<&(dyn Fn(Vec2, Side) -> f64 + Sync)>,
) -> Result<FaceBlocks> {
    let (left, right) = spaces;
    let m = left.m;
    let nl = left.dim();
    let beta = left.beta;
    let beta_edge = rule.sides.iter().map(|&s| beta.get(s)).fold(0.0, f64::max);
    let sigma = penalty(m, sigma0, beta_edge);
    let pen = sigma / length;
    let sides: Vec<&LocalSpace> = match right {
        Some(r) => vec![left, r],
        None => vec![left],
    };
    let interior = sides.len() == 2;
    let omega = if interior { 0.5 } else { 1.0 };
    let sign = [1.0, -1.0];

    let mut blocks: [[Option<DMatrix<f64>>; 2]; 2] = Default::default();
    for x in 0..sides.len() {
        for y in 0..sides.len() {
            blocks[x][y] = Some(DMatrix::zeros(nl, nl));
        }
    }
    let mut load = if interior { None } else { Some(DVector::zeros(nl)) };
    let mut vals = vec![ShapeValues::default(), ShapeValues::default()];
    for q in 0..rule.len() {
        let (pt, w, side) = (rule.nodes[q], rule.weights[q], rule.sides[q]);
        let b = beta.get(side);
        for (k, sp) in sides.iter().enumerate() {
            sp.eval_all(pt, Some(side), &mut vals[k])?;
        }
        for x in 0..sides.len() {
            for y in 0..sides.len() {
                let blk = blocks[x][y].as_mut().unwrap();
                let (vx, vy) = (&vals[x], &vals[y]);
                let (sx, sy) = (sign[x], sign[y]);
                for a in 0..nl {
                    let flux_a = b * vx.grads[a].dot(&normal);
                    for c in 0..nl {
                        let flux_c = b * vy.grads[c].dot(&normal);
                        blk[(a, c)] += w
                            * (-omega * flux_c * sx * vx.values[a] - omega * flux_a * sy * vy.values[c]
                                + pen * sx * sy * vx.values[a] * vy.values[c]);
                    }
                }
            }
        }
        if let (Some(ld), Some(g)) = (load.as_mut(), dirichlet) {
            let gv = g(pt, side);
            let v = &vals[0];
            for a in 0..nl {
                ld[a] += w * gv * (-b * v.grads[a].dot(&normal) + pen * v.values[a]);
            }
        }
    }
    Ok(FaceBlocks { blocks, load, sigma })
}

/// Right-hand side of one element: volume source plus boundary data.
pub fn load_terms(
    disc: &Discretization,
    element: usize,
    source: &(dyn Fn(Vec2, Side) -> f64 + Sync),
) -> Result<DVector<f64>> {
    Ok(local_volume(&disc.spaces[element], &disc.volume_rules[element], Some(source))?.load)
}

fn solve_spd(mass: &DMatrix<f64>, rhs: &DVector<f64>, element: usize) -> Result<DVector<f64>> {
    let n = mass.nrows();
    let d: Vec<f64> = (0..n).map(|i| mass[(i, i)]).collect();
    if d.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::SingularMass { element });
    }
    let s: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| s[i] * mass[(i, j)] * s[j]);
    let rs = DVector::from_fn(n, |i, _| s[i] * rhs[i]);
    let y = scaled.cholesky().ok_or(Error::SingularMass { element })?.solve(&rs);
    Ok(DVector::from_fn(n, |i, _| s[i] * y[i]))
}

/// Element-wise L2 projection of a side-wise function.
pub fn project_l2(disc: &Discretization, u: &(dyn Fn(Vec2, Side) -> f64 + Sync)) -> Result<DVector<f64>> {
    let nl = disc.n_local();
    let local: Vec<DVector<f64>> = (0..disc.mesh.n_elements())
        .into_par_iter()
        .map(|id| {
            let blocks = local_volume(&disc.spaces[id], &disc.volume_rules[id], Some(u)).map_err(|e| e.at_element(id))?;
            solve_spd(&blocks.mass, &blocks.load, id)
        })
        .collect::<Result<_>>()?;
    let mut out = DVector::zeros(disc.n_dofs());
    for (id, c) in local.iter().enumerate() {
        out.rows_mut(id * nl, nl).copy_from(c);
    }
    Ok(out)
}

/// Errors of a discrete function against an exact side-wise solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub rel_l2: f64,
    pub rel_h1: f64,
    pub abs_l2: f64,
    pub abs_h1: f64,
    /// Squared L2 error restricted to each side.
    pub l2_sq_minus: f64,
    pub l2_sq_plus: f64,
    pub volume_points: usize,
}

/// Relative L2 and broken H1-seminorm errors using the discretization's
/// volume rules, or rules with `points` Gauss points per direction.
pub fn compute_error(
    disc: &Discretization,
    coeffs: &DVector<f64>,
    exact: &(dyn Fn(Vec2, Side) -> f64 + Sync),
    exact_grad: &(dyn Fn(Vec2, Side) -> Vec2 + Sync),
    rules: Option<&[QuadRule]>,
) -> Result<ErrorReport> {
    let nl = disc.n_local();
    let rules = rules.unwrap_or(&disc.volume_rules);
    let sums: Vec<[f64; 6]> = (0..disc.mesh.n_elements())
        .into_par_iter()
        .map(|id| {
            let space = &disc.spaces[id];
            let c = coeffs.rows(id * nl, nl);
            let rule = &rules[id];
            let mut sv = ShapeValues::default();
            let mut acc = [0.0; 6];
            for q in 0..rule.len() {
                let (x, w, side) = (rule.nodes[q], rule.weights[q], rule.sides[q]);
                space.eval_all(x, Some(side), &mut sv).map_err(|e| e.at_element(id))?;
                let uh: f64 = (0..nl).map(|k| c[k] * sv.values[k]).sum();
                let guh: Vec2 = (0..nl).fold(Vec2::zeros(), |g, k| g + c[k] * sv.grads[k]);
                let (u, gu) = (exact(x, side), exact_grad(x, side));
                let e2 = (uh - u).powi(2);
                acc[0] += w * e2;
                acc[1] += w * u * u;
                acc[2] += w * (guh - gu).norm_squared();
                acc[3] += w * gu.norm_squared();
                match side {
                    Side::Minus => acc[4] += w * e2,
                    Side::Plus => acc[5] += w * e2,
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut t = [0.0; 6];
    for s in &sums {
        for k in 0..6 {
            t[k] += s[k];
        }
    }
    Ok(ErrorReport {
        rel_l2: (t[0] / t[1]).sqrt(),
        rel_h1: (t[2] / t[3]).sqrt(),
        abs_l2: t[0].sqrt(),
        abs_h1: t[2].sqrt(),
        l2_sq_minus: t[4],
        l2_sq_plus: t[5],
        volume_points: disc.volume_points,
    })
}

/// Volume rules of every element with `points` Gauss points per direction.
pub fn volume_rules_with(problem: &Problem, disc: &Discretization, points: usize) -> Result<Vec<QuadRule>> {
    (0..disc.mesh.n_elements())
        .into_par_iter()
        .map(|id| {
            let rect = disc.mesh.element(id);
            match disc.class.tags[id] {
                ElementTag::NonInterface(side) => Ok(tensor_rule(&rect, points, side)),
                ElementTag::Interface => {
                    let cut = disc.class.cuts[id].expect("interface elements carry a cut");
                    let corners = element_corners(&disc.mesh, &disc.class, id);
                    cut_cell_rule(&problem.curve, &rect, &cut, &corners, points)
                }
            }
        })
        .collect()
}

/// Evaluate a discrete function at `x` inside element `id`.
pub fn eval_discrete(disc: &Discretization, coeffs: &DVector<f64>, id: usize, x: Vec2, side: Option<Side>) -> Result<f64> {
    let nl = disc.n_local();
    let mut sv = ShapeValues::default();
    disc.spaces[id].eval_all(x, side, &mut sv)?;
    Ok((0..nl).map(|k| coeffs[id * nl + k] * sv.values[k]).sum())
}
