//! Local shape-function spaces: tensor Legendre polynomials on plain
//! elements, and Frenet immersed finite element spaces on cut elements.
//!
//! On a cut element the shapes are polynomials in the Frenet coordinates
//! `(eta, xi)` of the element's chart, one polynomial per side of `eta = 0`.
//! Shape `i (m + 1) + j` is
//! * `eta^j p_i(xi) / beta` on each side for `j >= 1`, which satisfies both
//!   pointwise interface conditions with no solve, and
//! * `p_i` on the minus side, extended to `p_i + sum_l c_l N_l` on the plus
//!   side for `j = 0`, with `N_l = eta^q p_k`, `q >= 2`, and `c` fixed by
//!   weak conditions on the jump of `beta * Laplacian` and its `eta`
//!   derivatives along the interface.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{frenet_apparatus, Curve, MetricData, Side, SidePair, Vec2};
use crate::mesh::{fictitious_chart, locate_corners, FrenetChart, Rect};
use crate::quadrature::gauss_rule;

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 12;
const SIDE_TOL: f64 = 1e-10;

/// One-dimensional polynomial family in `xi`, mapped to `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XiFamily {
    #[default]
    Legendre,
    Monomial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiBasis {
    pub family: XiFamily,
    pub degree: usize,
    pub a: f64,
    pub b: f64,
}

impl XiBasis {
    pub fn new(family: XiFamily, degree: usize, a: f64, b: f64) -> Self {
        XiBasis { family, degree, a, b }
    }

    /// `[p_i, p_i', p_i'']` in `xi` for `i = 0..=degree`.
    pub fn eval(&self, xi: f64) -> Vec<[f64; 3]> {
        let s = 2.0 / (self.b - self.a);
        let t = (2.0 * xi - self.a - self.b) / (self.b - self.a);
        let m = self.degree;
        let mut out = vec![[0.0; 3]; m + 1];
        match self.family {
            XiFamily::Legendre => {
                out[0] = [1.0, 0.0, 0.0];
                if m >= 1 {
                    out[1] = [t, 1.0, 0.0];
                }
                for k in 1..m {
                    let kf = k as f64;
                    let p = ((2.0 * kf + 1.0) * t * out[k][0] - kf * out[k - 1][0]) / (kf + 1.0);
                    let d1 = out[k - 1][1] + (2.0 * kf + 1.0) * out[k][0];
                    let d2 = out[k - 1][2] + (2.0 * kf + 1.0) * out[k][1];
                    out[k + 1] = [p, d1, d2];
                }
            }
            XiFamily::Monomial => {
                for (i, o) in out.iter_mut().enumerate() {
                    let fi = i as f64;
                    let pw = |e: i32| if e < 0 { 0.0 } else { t.powi(e) };
                    *o = [pw(i as i32), fi * pw(i as i32 - 1), fi * (fi - 1.0) * pw(i as i32 - 2)];
                }
            }
        }
        for o in out.iter_mut() {
            o[1] *= s;
            o[2] *= s * s;
        }
        out
    }
}

/// Value and partial derivatives of a Frenet polynomial at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PolyDerivs {
    pub v: f64,
    pub v_eta: f64,
    pub v_xi: f64,
    pub v_eta_eta: f64,
    pub v_xi_xi: f64,
}

/// `sum_{j,i} coeffs[(j, i)] eta^j p_i(xi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateFrenetPoly {
    pub basis: XiBasis,
    /// Row `j` is the power of `eta`, column `i` the `xi` polynomial.
    pub coeffs: DMatrix<f64>,
}

impl BivariateFrenetPoly {
    pub fn zeros(basis: XiBasis) -> Self {
        let n = basis.degree + 1;
        BivariateFrenetPoly { basis, coeffs: DMatrix::zeros(n, n) }
    }

    /// `scale * eta^j p_i`.
    pub fn term(basis: XiBasis, j: usize, i: usize, scale: f64) -> Self {
        let mut p = Self::zeros(basis);
        p.coeffs[(j, i)] = scale;
        p
    }

    pub fn derivs(&self, eta: f64, xi: f64) -> PolyDerivs {
        let p = self.basis.eval(xi);
        let n = self.basis.degree + 1;
        let mut out = PolyDerivs::default();
        let mut pw = vec![0.0; n + 1];
        pw[0] = 1.0;
        for j in 1..=n {
            pw[j] = pw[j - 1] * eta;
        }
        for j in 0..n {
            let jf = j as f64;
            let e0 = pw[j];
            let e1 = if j >= 1 { jf * pw[j - 1] } else { 0.0 };
            let e2 = if j >= 2 { jf * (jf - 1.0) * pw[j - 2] } else { 0.0 };
            for (i, pi) in p.iter().enumerate() {
                let c = self.coeffs[(j, i)];
                if c == 0.0 {
                    continue;
                }
                out.v += c * e0 * pi[0];
                out.v_eta += c * e1 * pi[0];
                out.v_xi += c * e0 * pi[1];
                out.v_eta_eta += c * e2 * pi[0];
                out.v_xi_xi += c * e0 * pi[2];
            }
        }
        out
    }

    pub fn eval(&self, eta: f64, xi: f64) -> f64 {
        self.derivs(eta, xi).v
    }

    /// `d^r/d eta^r` at `eta = 0` with `[value, d_xi, d_xi_xi]`, given the
    /// `xi` basis at the point.
    fn eta_trace(&self, r: usize, p: &[[f64; 3]]) -> [f64; 3] {
        if r >= self.coeffs.nrows() {
            return [0.0; 3];
        }
        let f = factorial(r);
        let mut out = [0.0; 3];
        for (i, pi) in p.iter().enumerate() {
            let c = self.coeffs[(r, i)] * f;
            for d in 0..3 {
                out[d] += c * pi[d];
            }
        }
        out
    }
}

/// One shape: a polynomial per side of the interface.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFrenetPoly {
    pub minus: BivariateFrenetPoly,
    pub plus: BivariateFrenetPoly,
}

impl PiecewiseFrenetPoly {
    pub fn side(&self, side: Side) -> &BivariateFrenetPoly {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn check_degree(m: usize) -> Result<()> {
    if m == 0 || m > MAX_DEGREE {
        return Err(Error::Degree(format!("degree {m} outside 1..={MAX_DEGREE}")));
    }
    Ok(())
}

/// The `m (m + 1)` shapes `eta^j p_i / beta`, `j >= 1`, in index order.
pub fn cheap_basis(chart: &FrenetChart, m: usize, beta: SidePair<f64>, family: XiFamily) -> Result<Vec<PiecewiseFrenetPoly>> {
    check_degree(m)?;
    let basis = XiBasis::new(family, m, chart.a, chart.b);
    let mut out = Vec::with_capacity(m * (m + 1));
    for i in 0..=m {
        for j in 1..=m {
            out.push(PiecewiseFrenetPoly {
                minus: BivariateFrenetPoly::term(basis, j, i, 1.0 / beta.minus),
                plus: BivariateFrenetPoly::term(basis, j, i, 1.0 / beta.plus),
            });
        }
    }
    Ok(out)
}

/// `d^j/d eta^j` of the Frenet Laplacian of `v` at `eta = 0`, assembled from
/// the `eta` traces `traces[r] = [d^r v, d^r v_xi, d^r v_xi_xi]` and the
/// metric derivatives.
fn trace_formula(j: usize, traces: &[[f64; 3]], dj: &[Vec<f64>; 3]) -> f64 {
    let get = |r: usize, d: usize| traces.get(r).map_or(0.0, |t| t[d]);
    let mut sum = get(j + 2, 0);
    for l in 0..=j {
        let c = binomial(j, l);
        sum += c * (dj[0][l] * get(j - l, 2) + dj[1][l] * get(j - l + 1, 0) + dj[2][l] * get(j - l, 1));
    }
    sum
}

/// The `j`-th `eta` derivative of the Frenet Laplacian of a polynomial,
/// restricted to the interface `eta = 0`.
pub struct LaplacianTrace<'a> {
    poly: &'a BivariateFrenetPoly,
    curve: &'a Curve,
    j: usize,
}

impl LaplacianTrace<'_> {
    pub fn at(&self, xi: f64) -> Result<f64> {
        let md = MetricData::at(self.curve, xi)?;
        let dj = md.eta_derivatives(self.j);
        let p = self.poly.basis.eval(xi);
        let traces: Vec<[f64; 3]> = (0..=self.j + 2).map(|r| self.poly.eta_trace(r, &p)).collect();
        Ok(trace_formula(self.j, &traces, &dj))
    }
}

pub fn laplacian_trace<'a>(poly: &'a BivariateFrenetPoly, curve: &'a Curve, j: usize) -> Result<LaplacianTrace<'a>> {
    let m = poly.basis.degree;
    if j + 2 > m {
        return Err(Error::Degree(format!("trace order {j} needs degree at least {}, got {m}", j + 2)));
    }
    Ok(LaplacianTrace { poly, curve, j })
}

/// Frenet Laplacian `v_ee + J0 v_xx + J1 v_e + J2 v_x` at `(eta, xi)`.
pub fn frenet_laplacian(poly: &BivariateFrenetPoly, curve: &Curve, eta: f64, xi: f64) -> Result<f64> {
    let (j0, j1, j2) = MetricData::at(curve, xi)?.values(eta)?;
    let d = poly.derivs(eta, xi);
    Ok(d.v_eta_eta + j0 * d.v_xi_xi + j1 * d.v_eta + j2 * d.v_xi)
}

/// Number of Gauss points used for the weak interface conditions.
pub fn weak_condition_points(m: usize) -> usize {
    (3 * m + 3).div_ceil(2) + 2
}

/// The weak Laplacian-jump system `A c = ((beta- - beta+) / beta+) B`.
///
/// Row `j (m + 1) + k` tests the `j`-th `eta` derivative against `p_k`;
/// column `l = (q - 2)(m + 1) + i` of `A` is `N_l = eta^q p_i`, column `i`
/// of `B` the constant-in-`eta` polynomial `p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionSystem {
    pub m: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

pub fn extension_system(chart: &FrenetChart, m: usize, family: XiFamily) -> Result<ExtensionSystem> {
    check_degree(m)?;
    let n = m + 1;
    let size = (m - 1) * (m + 1);
    let mut a = DMatrix::zeros(size, size);
    let mut b = DMatrix::zeros(size, n);
    if m < 2 {
        return Ok(ExtensionSystem { m, a, b });
    }
    let basis = XiBasis::new(family, m, chart.a, chart.b);
    let rule = gauss_rule(weak_condition_points(m), chart.a, chart.b);
    let mut traces = vec![[0.0; 3]; m + 1];
    for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
        let dj = MetricData::at(&chart.curve, xi)?.eta_derivatives(m - 2);
        let p = basis.eval(xi);
        for j in 0..=m - 2 {
            for q in 2..=m {
                if q > j + 2 {
                    continue;
                }
                for i in 0..n {
                    traces.iter_mut().for_each(|t| *t = [0.0; 3]);
                    let f = factorial(q);
                    traces[q] = [f * p[i][0], f * p[i][1], f * p[i][2]];
                    let val = trace_formula(j, &traces, &dj);
                    let col = (q - 2) * n + i;
                    for k in 0..n {
                        a[(j * n + k, col)] += w * val * p[k][0];
                    }
                }
            }
            for i in 0..n {
                traces.iter_mut().for_each(|t| *t = [0.0; 3]);
                traces[0] = p[i];
                let val = trace_formula(j, &traces, &dj);
                for k in 0..n {
                    b[(j * n + k, i)] += w * val * p[k][0];
                }
            }
        }
    }
    Ok(ExtensionSystem { m, a, b })
}

impl ExtensionSystem {
    /// Solve `A C = rhs` by block forward substitution; the diagonal blocks
    /// are `(j + 2)!` times the mass matrix of the `xi` polynomials.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.m + 1;
        let blocks = self.m.saturating_sub(1);
        let mut c = DMatrix::zeros(blocks * n, rhs.ncols());
        for j in 0..blocks {
            let mut r = rhs.rows(j * n, n).into_owned();
            for q in 0..j {
                r -= self.a.view((j * n, q * n), (n, n)) * c.rows(q * n, n);
            }
            let diag = self.a.view((j * n, j * n), (n, n)).into_owned();
            let lu = diag.lu();
            let x = lu.solve(&r).ok_or(Error::SingularExtension { element: usize::MAX })?;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::SingularExtension { element: usize::MAX });
            }
            c.rows_mut(j * n, n).copy_from(&x);
        }
        Ok(c)
    }

    /// Extension coefficients for the given coefficient pair, one column per
    /// extended shape.
    pub fn coefficients(&self, beta: SidePair<f64>) -> Result<DMatrix<f64>> {
        let factor = (beta.minus - beta.plus) / beta.plus;
        self.solve(&(&self.b * factor))
    }

    /// Largest entry strictly above the block diagonal.
    pub fn upper_block_max(&self) -> f64 {
        let n = self.m + 1;
        let mut max: f64 = 0.0;
        for r in 0..self.a.nrows() {
            for c in 0..self.a.ncols() {
                if c / n > r / n {
                    max = max.max(self.a[(r, c)].abs());
                }
            }
        }
        max
    }

    /// `cond_2(diag(A)^-1 A)` from singular values; 1 for an empty system.
    pub fn jacobi_condition(&self) -> f64 {
        if self.a.nrows() == 0 {
            return 1.0;
        }
        let mut scaled = self.a.clone();
        for r in 0..scaled.nrows() {
            let d = self.a[(r, r)];
            scaled.row_mut(r).scale_mut(1.0 / d);
        }
        let sv = scaled.singular_values();
        sv.max() / sv.min()
    }

    /// Matrix-market style dump of `A`, `B` and the coefficients `C`.
    pub fn dump(&self, element: usize, c: &DMatrix<f64>) -> String {
        let mut out = format!("% element {element}, degree {}\n", self.m);
        for (name, mat) in [("A", &self.a), ("B", &self.b), ("C", c)] {
            out.push_str(&format!("%%{name} {} {}\n", mat.nrows(), mat.ncols()));
            for r in 0..mat.nrows() {
                for col in 0..mat.ncols() {
                    if mat[(r, col)] != 0.0 {
                        out.push_str(&format!("{} {} {:.17e}\n", r + 1, col + 1, mat[(r, col)]));
                    }
                }
            }
        }
        out
    }
}

/// Shapes of a cut element together with their construction data.
#[derive(Debug, Clone)]
pub struct IfeSpace {
    pub chart: FrenetChart,
    pub shapes: Vec<PiecewiseFrenetPoly>,
    pub system: ExtensionSystem,
    /// Extension coefficients, one column per extended shape.
    pub coefficients: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub enum SpaceKind {
    /// Tensor Legendre polynomials on the physical rectangle.
    Standard { rect: Rect },
    Ife(Box<IfeSpace>),
}

#[derive(Debug, Clone)]
pub struct LocalSpace {
    pub m: usize,
    pub beta: SidePair<f64>,
    pub kind: SpaceKind,
}

/// Values and gradients of all shapes at one point.
#[derive(Debug, Clone, Default)]
pub struct ShapeValues {
    pub values: Vec<f64>,
    pub grads: Vec<Vec2>,
}

impl LocalSpace {
    pub fn standard(rect: Rect, m: usize, beta: SidePair<f64>) -> Result<Self> {
        check_degree(m)?;
        Ok(LocalSpace { m, beta, kind: SpaceKind::Standard { rect } })
    }

    pub fn dim(&self) -> usize {
        (self.m + 1) * (self.m + 1)
    }

    pub fn is_ife(&self) -> bool {
        matches!(self.kind, SpaceKind::Ife(_))
    }

    pub fn ife(&self) -> Option<&IfeSpace> {
        match &self.kind {
            SpaceKind::Ife(s) => Some(s),
            SpaceKind::Standard { .. } => None,
        }
    }

    /// Evaluate every shape at `x`. On cut elements `side` is the side the
    /// caller believes `x` lies on; it must agree with the sign of `eta`.
    pub fn eval_all(&self, x: Vec2, side: Option<Side>, out: &mut ShapeValues) -> Result<()> {
        let n = self.m + 1;
        out.values.resize(n * n, 0.0);
        out.grads.resize(n * n, Vec2::zeros());
        match &self.kind {
            SpaceKind::Standard { rect } => {
                let bx = XiBasis::new(XiFamily::Legendre, self.m, rect.x0, rect.x1).eval(x.x);
                let by = XiBasis::new(XiFamily::Legendre, self.m, rect.y0, rect.y1).eval(x.y);
                for i in 0..n {
                    for j in 0..n {
                        let k = i * n + j;
                        out.values[k] = bx[i][0] * by[j][0];
                        out.grads[k] = Vec2::new(bx[i][1] * by[j][0], bx[i][0] * by[j][1]);
                    }
                }
            }
            SpaceKind::Ife(space) => {
                let chart = &space.chart;
                let p = chart.to_frenet(x)?;
                let tol = SIDE_TOL * chart.half_width;
                let side = match side {
                    Some(s) => {
                        if Side::of_offset(p.eta) != s && p.eta.abs() > tol {
                            return Err(Error::SideMismatch { x: [x.x, x.y] });
                        }
                        s
                    }
                    None => Side::of_offset(p.eta),
                };
                let f = frenet_apparatus(&chart.curve, p.xi)?;
                let factor = 1.0 + p.eta * f.kappa;
                let tangential = 1.0 / (f.speed * factor);
                let basis = space.shapes[0].minus.basis.eval(p.xi);
                let mut eta_pow = vec![1.0; n];
                for j in 1..n {
                    eta_pow[j] = eta_pow[j - 1] * p.eta;
                }
                // all shape polynomials share the term basis eta^j p_i
                for (k, shape) in space.shapes.iter().enumerate() {
                    let poly = shape.side(side);
                    let (mut v, mut ve, mut vx) = (0.0, 0.0, 0.0);
                    for j in 0..n {
                        let e1 = if j >= 1 { j as f64 * eta_pow[j - 1] } else { 0.0 };
                        for i in 0..n {
                            let c = poly.coeffs[(j, i)];
                            if c != 0.0 {
                                v += c * eta_pow[j] * basis[i][0];
                                ve += c * e1 * basis[i][0];
                                vx += c * eta_pow[j] * basis[i][1];
                            }
                        }
                    }
                    out.values[k] = v;
                    out.grads[k] = ve * f.n + vx * tangential * f.tau;
                }
            }
        }
        Ok(())
    }

    pub fn eval_shape(&self, k: usize, x: Vec2) -> Result<f64> {
        let mut sv = ShapeValues::default();
        self.eval_all(x, None, &mut sv)?;
        Ok(sv.values[k])
    }

    pub fn eval_shape_grad(&self, k: usize, x: Vec2) -> Result<Vec2> {
        let mut sv = ShapeValues::default();
        self.eval_all(x, None, &mut sv)?;
        Ok(sv.grads[k])
    }
}

/// Build the IFE space of a chart.
pub fn build_local_space(chart: &FrenetChart, m: usize, beta: SidePair<f64>, family: XiFamily) -> Result<LocalSpace> {
    check_degree(m)?;
    if !(beta.minus > 0.0 && beta.plus > 0.0) {
        return Err(Error::InvalidParameter("diffusion coefficients must be positive".into()));
    }
    let n = m + 1;
    let basis = XiBasis::new(family, m, chart.a, chart.b);
    let system = extension_system(chart, m, family)?;
    let coefficients = system.coefficients(beta)?;
    let cheap = cheap_basis(chart, m, beta, family)?;
    let mut shapes = Vec::with_capacity(n * n);
    let mut cheap_iter = cheap.into_iter();
    for i in 0..n {
        let minus = BivariateFrenetPoly::term(basis, 0, i, 1.0);
        let mut plus = minus.clone();
        for q in 2..=m {
            for k in 0..n {
                plus.coeffs[(q, k)] += coefficients[((q - 2) * n + k, i)];
            }
        }
        shapes.push(PiecewiseFrenetPoly { minus, plus });
        shapes.extend(cheap_iter.by_ref().take(m));
    }
    Ok(LocalSpace {
        m,
        beta,
        kind: SpaceKind::Ife(Box::new(IfeSpace { chart: chart.clone(), shapes, system, coefficients })),
    })
}

/// Interface-condition residuals of a cut-element space.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpResidual {
    /// Largest `|[phi]|` relative to the shape scale.
    pub value: f64,
    /// Largest `|[beta phi_eta]|` relative to the shape scale.
    pub flux: f64,
    /// Per weak condition (row of the extension system), the largest
    /// absolute residual over the shapes.
    pub weak: Vec<f64>,
}

/// Evaluate the interface conditions of every shape: pointwise on Chebyshev
/// samples of `[a, b]`, weakly with the Gauss rule of the construction.
pub fn jump_residual(space: &LocalSpace) -> Result<JumpResidual> {
    let ife = space.ife().ok_or_else(|| Error::InvalidParameter("not an interface-element space".into()))?;
    let beta = space.beta;
    let m = space.m;
    let (a, b) = (ife.chart.a, ife.chart.b);
    let samples = 50;
    let (mut value, mut flux) = (0.0f64, 0.0f64);
    for shape in &ife.shapes {
        let mut scale: f64 = 1.0;
        let mut dv: f64 = 0.0;
        let mut df: f64 = 0.0;
        for k in 0..samples {
            let t = ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * samples) as f64).cos();
            let xi = 0.5 * (a + b) + 0.5 * (b - a) * t;
            let dm = shape.minus.derivs(0.0, xi);
            let dp = shape.plus.derivs(0.0, xi);
            scale = scale.max(dm.v.abs()).max(dp.v.abs());
            scale = scale.max((beta.minus * dm.v_eta).abs()).max((beta.plus * dp.v_eta).abs());
            dv = dv.max((dp.v - dm.v).abs());
            df = df.max((beta.plus * dp.v_eta - beta.minus * dm.v_eta).abs());
        }
        value = value.max(dv / scale);
        flux = flux.max(df / scale);
    }
    let n = m + 1;
    let mut weak = vec![0.0f64; m.saturating_sub(1) * n];
    if m >= 2 {
        let basis = XiBasis::new(ife.shapes[0].minus.basis.family, m, a, b);
        let rule = gauss_rule(weak_condition_points(m), a, b);
        for shape in &ife.shapes {
            for j in 0..=m - 2 {
                let tm = laplacian_trace(&shape.minus, &ife.chart.curve, j)?;
                let tp = laplacian_trace(&shape.plus, &ife.chart.curve, j)?;
                let mut acc = vec![0.0; n];
                for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let jump = beta.plus * tp.at(xi)? - beta.minus * tm.at(xi)?;
                    let p = basis.eval(xi);
                    for k in 0..n {
                        acc[k] += w * jump * p[k][0];
                    }
                }
                for k in 0..n {
                    weak[j * n + k] = weak[j * n + k].max(acc[k].abs());
                }
            }
        }
    }
    Ok(JumpResidual { value, flux, weak })
}

/// Condition numbers of the Jacobi-scaled extension matrix on the element
/// `(1/sqrt(2) - eps) + [0, 1/2]^2` cut by `curve`, one per `eps`.
pub fn conditioning_study(curve: &Curve, m: usize, eps: &[f64]) -> Result<Vec<f64>> {
    check_degree(m)?;
    eps.iter()
        .map(|&e| {
            if !(e > 0.0 && e < 0.5) {
                return Err(Error::InvalidParameter(format!("epsilon {e} outside (0, 1/2)")));
            }
            let c = std::f64::consts::FRAC_1_SQRT_2 - e;
            let rect = Rect::new(c, c + 0.5, c, c + 0.5);
            let corners = locate_corners(curve, &rect);
            let cut = crate::mesh::cut_rectangle(curve, &rect, &corners)?
                .ok_or_else(|| Error::InvalidParameter(format!("element for epsilon {e} is not cut")))?;
            let chart = fictitious_chart(curve, &rect, &cut, &corners)?;
            Ok(extension_system(&chart, m, XiFamily::Legendre)?.jacobi_condition())
        })
        .collect()
}
