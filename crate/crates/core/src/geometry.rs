//! Frenet apparatus of a planar interface curve.
//!
//! A point near the curve `g` is written in Frenet coordinates `(eta, xi)`
//! as `x = g(xi) + eta * n(xi)`, where `n = Q tau` is the unit normal and
//! `tau = g' / |g'|` the unit tangent. The parametrization must be oriented
//! so that `n` points from the minus subdomain into the plus subdomain.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::jet::Jet;

pub type Vec2 = Vector2<f64>;

/// Newton residual tolerance for the Frenet inverse, relative to `1 + |x|`.
pub const INVERSE_TOL: f64 = 1e-12;
/// Iteration cap shared by the inverse map and the closest-point search.
pub const MAX_ITERATIONS: usize = 50;
/// Number of samples of the coarse line search in [`closest_point_param`].
pub const LINE_SEARCH_SAMPLES: usize = 200;
const MIN_SPEED: f64 = 1e-13;

/// Which subdomain a point belongs to. `Minus` is `eta < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn of_offset(eta: f64) -> Side {
        if eta < 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Minus => "-",
            Side::Plus => "+",
        })
    }
}

/// A pair of values indexed by [`Side`], typically the diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidePair<T> {
    pub minus: T,
    pub plus: T,
}

impl<T: Copy> SidePair<T> {
    pub fn new(minus: T, plus: T) -> Self {
        SidePair { minus, plus }
    }

    pub fn get(&self, side: Side) -> T {
        match side {
            Side::Minus => self.minus,
            Side::Plus => self.plus,
        }
    }
}

/// 2D cross product `u^T Q v` with `Q = [[0, 1], [-1, 0]]`.
pub fn wedge(u: &Vec2, v: &Vec2) -> f64 {
    u.x * v.y - u.y * v.x
}

/// `Q v` with `Q = [[0, 1], [-1, 0]]`.
pub fn rotate_q(v: &Vec2) -> Vec2 {
    Vec2::new(v.y, -v.x)
}

/// A regular parametrization with derivatives. `d3` may be omitted, in which
/// case [`Curve`] falls back to a central difference of `d2`.
pub trait Parametrization: Send + Sync {
    fn point(&self, xi: f64) -> Vec2;
    fn d1(&self, xi: f64) -> Vec2;
    fn d2(&self, xi: f64) -> Vec2;
    fn d3(&self, _xi: f64) -> Option<Vec2> {
        None
    }
}

/// Circle traversed counter-clockwise, so `n` is the outward normal.
#[derive(Debug, Clone, Copy)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

impl Parametrization for Circle {
    fn point(&self, xi: f64) -> Vec2 {
        self.center + self.radius * Vec2::new(xi.cos(), xi.sin())
    }
    fn d1(&self, xi: f64) -> Vec2 {
        self.radius * Vec2::new(-xi.sin(), xi.cos())
    }
    fn d2(&self, xi: f64) -> Vec2 {
        -self.radius * Vec2::new(xi.cos(), xi.sin())
    }
    fn d3(&self, xi: f64) -> Option<Vec2> {
        Some(self.radius * Vec2::new(xi.sin(), -xi.cos()))
    }
}

/// Straight line `origin + xi * direction`.
#[derive(Debug, Clone, Copy)]
pub struct Line {
    pub origin: Vec2,
    pub direction: Vec2,
}

impl Parametrization for Line {
    fn point(&self, xi: f64) -> Vec2 {
        self.origin + xi * self.direction
    }
    fn d1(&self, _xi: f64) -> Vec2 {
        self.direction
    }
    fn d2(&self, _xi: f64) -> Vec2 {
        Vec2::zeros()
    }
    fn d3(&self, _xi: f64) -> Option<Vec2> {
        Some(Vec2::zeros())
    }
}

/// A parametrization written once over [`Jet`]; all derivatives are exact.
pub struct JetCurve<F> {
    f: F,
}

impl<F> JetCurve<F>
where
    F: Fn(Jet) -> [Jet; 2] + Send + Sync,
{
    pub fn new(f: F) -> Self {
        JetCurve { f }
    }

    fn eval(&self, xi: f64) -> [Jet; 2] {
        (self.f)(Jet::variable(xi))
    }
}

impl<F> Parametrization for JetCurve<F>
where
    F: Fn(Jet) -> [Jet; 2] + Send + Sync,
{
    fn point(&self, xi: f64) -> Vec2 {
        let [x, y] = self.eval(xi);
        Vec2::new(x.d[0], y.d[0])
    }
    fn d1(&self, xi: f64) -> Vec2 {
        let [x, y] = self.eval(xi);
        Vec2::new(x.d[1], y.d[1])
    }
    fn d2(&self, xi: f64) -> Vec2 {
        let [x, y] = self.eval(xi);
        Vec2::new(x.d[2], y.d[2])
    }
    fn d3(&self, xi: f64) -> Option<Vec2> {
        let [x, y] = self.eval(xi);
        Some(Vec2::new(x.d[3], y.d[3]))
    }
}

/// `g`, `g'`, `g''`, `g'''` at one parameter value.
#[derive(Debug, Clone, Copy)]
pub struct CurveSample {
    pub xi: f64,
    pub point: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
    pub d3: Vec2,
}

/// The interface curve: a parametrization plus its parameter domain.
///
/// Closed curves carry a period; their parameter is unwrapped freely and
/// never fails the domain check.
#[derive(Clone)]
pub struct Curve {
    param: Arc<dyn Parametrization>,
    start: f64,
    end: f64,
    period: Option<f64>,
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Curve")
            .field("start", &self.start)
            .field("end", &self.end)
            .field("period", &self.period)
            .finish()
    }
}

impl Curve {
    pub fn new(param: impl Parametrization + 'static, start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(Error::InvalidCurve(format!("empty parameter domain [{start}, {end}]")));
        }
        let curve = Curve { param: Arc::new(param), start, end, period: None };
        curve.check_regular()?;
        Ok(curve)
    }

    /// A closed curve with `g(xi + period) = g(xi)`.
    pub fn periodic(param: impl Parametrization + 'static, start: f64, period: f64) -> Result<Self> {
        let mut curve = Curve::new(param, start, start + period)?;
        curve.period = Some(period);
        Ok(curve)
    }

    /// Counter-clockwise circle over `[-pi, pi)`.
    pub fn circle(center: Vec2, radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::InvalidCurve(format!("radius {radius} must be positive")));
        }
        Curve::periodic(Circle { center, radius }, -PI, 2.0 * PI)
    }

    pub fn line(origin: Vec2, direction: Vec2, start: f64, end: f64) -> Result<Self> {
        Curve::new(Line { origin, direction }, start, end)
    }

    fn check_regular(&self) -> Result<()> {
        for k in 0..=64 {
            let xi = self.start + (self.end - self.start) * k as f64 / 64.0;
            let speed = self.param.d1(xi).norm();
            if !(speed >= MIN_SPEED) {
                return Err(Error::DegenerateTangent { xi, speed });
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn point(&self, xi: f64) -> Vec2 {
        self.param.point(xi)
    }

    pub fn d1(&self, xi: f64) -> Vec2 {
        self.param.d1(xi)
    }

    pub fn d2(&self, xi: f64) -> Vec2 {
        self.param.d2(xi)
    }

    /// Third derivative; central difference of `g''` when not supplied.
    pub fn d3(&self, xi: f64) -> Vec2 {
        self.param.d3(xi).unwrap_or_else(|| {
            let h = 1e-6 * self.length();
            (self.param.d2(xi + h) - self.param.d2(xi - h)) / (2.0 * h)
        })
    }

    pub fn sample(&self, xi: f64) -> CurveSample {
        CurveSample {
            xi,
            point: self.point(xi),
            d1: self.d1(xi),
            d2: self.d2(xi),
            d3: self.d3(xi),
        }
    }

    /// Shift `xi` by whole periods to lie closest to `reference`.
    pub fn unwrap_near(&self, xi: f64, reference: f64) -> f64 {
        match self.period {
            Some(p) => xi - p * ((xi - reference) / p).round(),
            None => xi,
        }
    }

    /// Whether `xi` may be evaluated, allowing `margin` past either end.
    pub fn admits(&self, xi: f64, margin: f64) -> bool {
        self.period.is_some() || (xi >= self.start - margin && xi <= self.end + margin)
    }

    fn clamp(&self, xi: f64) -> f64 {
        if self.period.is_some() {
            xi
        } else {
            xi.clamp(self.start, self.end)
        }
    }

    fn extrapolation_margin(&self) -> f64 {
        1e-2 * self.length()
    }
}

/// Unit tangent, unit normal, signed curvature and speed at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetFrame {
    pub tau: Vec2,
    pub n: Vec2,
    pub kappa: f64,
    pub speed: f64,
}

/// Frenet coordinates: signed normal offset `eta` and curve parameter `xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetPoint {
    pub eta: f64,
    pub xi: f64,
}

impl FrenetPoint {
    pub fn new(eta: f64, xi: f64) -> Self {
        FrenetPoint { eta, xi }
    }
}

fn frame_from(sample: &CurveSample) -> Result<FrenetFrame> {
    let speed = sample.d1.norm();
    if !(speed >= MIN_SPEED) {
        return Err(Error::DegenerateTangent { xi: sample.xi, speed });
    }
    let tau = sample.d1 / speed;
    Ok(FrenetFrame {
        tau,
        n: rotate_q(&tau),
        // the cubed speed keeps the Frenet-Serret relations exact for any
        // parametrization speed
        kappa: wedge(&sample.d1, &sample.d2) / (speed * speed * speed),
        speed,
    })
}

pub fn frenet_apparatus(curve: &Curve, xi: f64) -> Result<FrenetFrame> {
    let d1 = curve.d1(xi);
    let d2 = curve.d2(xi);
    frame_from(&CurveSample { xi, point: Vec2::zeros(), d1, d2, d3: Vec2::zeros() })
}

/// `kappa'(xi)` from `g'`, `g''`, `g'''`.
pub fn curvature_derivative(sample: &CurveSample) -> f64 {
    let s2 = sample.d1.norm_squared();
    let s = s2.sqrt();
    let cross = wedge(&sample.d1, &sample.d2);
    wedge(&sample.d1, &sample.d3) / (s2 * s) - 3.0 * cross * sample.d1.dot(&sample.d2) / (s2 * s2 * s)
}

/// `P(eta, xi) = g(xi) + eta n(xi)`.
pub fn frenet_forward(curve: &Curve, p: FrenetPoint) -> Result<Vec2> {
    let frame = frenet_apparatus(curve, p.xi)?;
    Ok(curve.point(p.xi) + p.eta * frame.n)
}

/// Jacobian of `P` with columns `[n, |g'| (1 + eta kappa) tau]`.
pub fn frenet_jacobian(curve: &Curve, p: FrenetPoint) -> Result<Matrix2<f64>> {
    let f = frenet_apparatus(curve, p.xi)?;
    let t = f.speed * (1.0 + p.eta * f.kappa) * f.tau;
    Ok(Matrix2::from_columns(&[f.n, t]))
}

/// Invert the Frenet map by Newton's method from `hint`.
pub fn frenet_inverse(curve: &Curve, x: Vec2, hint: FrenetPoint) -> Result<FrenetPoint> {
    let tol = INVERSE_TOL * (1.0 + x.norm());
    let margin = curve.extrapolation_margin();
    let residual_at = |p: FrenetPoint| -> Result<(Vec2, FrenetFrame)> {
        let frame = frenet_apparatus(curve, p.xi)?;
        Ok((x - (curve.point(p.xi) + p.eta * frame.n), frame))
    };

    let mut p = hint;
    let (mut r, mut frame) = residual_at(p)?;
    let mut rnorm = r.norm();
    for _ in 0..MAX_ITERATIONS {
        if rnorm <= tol {
            return Ok(p);
        }
        let factor = 1.0 + p.eta * frame.kappa;
        if factor <= 0.0 {
            return Err(Error::SingularTube { xi: p.xi, factor });
        }
        let step = FrenetPoint::new(frame.n.dot(&r), frame.tau.dot(&r) / (frame.speed * factor));
        let mut lambda = 1.0;
        loop {
            let cand = FrenetPoint::new(p.eta + lambda * step.eta, p.xi + lambda * step.xi);
            if !curve.admits(cand.xi, margin) {
                let (start, end) = curve.domain();
                return Err(Error::OutOfDomain { xi: cand.xi, start, end });
            }
            let (rc, fc) = residual_at(cand)?;
            let rcn = rc.norm();
            if rcn < rnorm || lambda < 1e-3 {
                p = cand;
                r = rc;
                frame = fc;
                rnorm = rcn;
                break;
            }
            lambda *= 0.5;
        }
    }
    if rnorm <= tol {
        Ok(p)
    } else {
        Err(Error::NoConvergence { iterations: MAX_ITERATIONS, residual: rnorm })
    }
}

/// Parameter of the closest curve point to `x`.
///
/// Coarse line search over the domain, one safeguarded Newton step on
/// `|g - x|^2 = 0`, then Barzilai-Borwein descent on `|g - x|^2` finished by
/// Newton steps on its derivative.
pub fn closest_point_param(curve: &Curve, x: Vec2) -> Result<f64> {
    let (start, end) = curve.domain();
    let periodic = curve.period().is_some();
    let n = LINE_SEARCH_SAMPLES;
    let count = if periodic { n } else { n + 1 };
    let samples: Vec<(f64, f64)> = (0..count)
        .map(|k| {
            let xi = start + (end - start) * k as f64 / n as f64;
            (xi, (curve.point(xi) - x).norm_squared())
        })
        .collect();

    let neighbor = |k: usize, offset: isize| -> Option<usize> {
        let idx = k as isize + offset;
        if periodic {
            Some(idx.rem_euclid(count as isize) as usize)
        } else if idx < 0 || idx >= count as isize {
            None
        } else {
            Some(idx as usize)
        }
    };
    let minima: Vec<usize> = (0..count)
        .filter(|&k| {
            let v = samples[k].1;
            [-1isize, 1]
                .iter()
                .all(|&o| neighbor(k, o).map_or(true, |j| v <= samples[j].1))
        })
        .collect();
    let best = *minima
        .iter()
        .min_by(|&&a, &&b| samples[a].1.total_cmp(&samples[b].1))
        .expect("a finite sample set has a minimum");
    let scale = 1.0 + samples[best].1;
    let spacing = (end - start) / n as f64;
    for &k in &minima {
        if k == best || (samples[k].1 - samples[best].1).abs() > 1e-10 * scale {
            continue;
        }
        let apart = (curve.point(samples[k].0) - curve.point(samples[best].0)).norm();
        let mut step = (samples[k].0 - samples[best].0).abs();
        if let Some(p) = curve.period() {
            step = step.min(p - step);
        }
        if apart > 1e-8 * (1.0 + x.norm()) && step > 1.5 * spacing {
            return Err(Error::AmbiguousProjection { first: samples[best].0, second: samples[k].0 });
        }
    }

    let objective = |xi: f64| (curve.point(xi) - x).norm_squared();
    let slope = |xi: f64| 2.0 * curve.d1(xi).dot(&(curve.point(xi) - x));
    let stationary = |xi: f64| {
        let d1 = curve.d1(xi);
        let r = curve.point(xi) - x;
        (d1.dot(&r) / d1.norm()).abs() <= 1e-13 * (1.0 + x.norm())
    };
    let at_bound = |xi: f64| !periodic && (xi <= start || xi >= end);

    let mut xi = samples[best].0;
    let r0 = curve.point(xi) - x;
    let denom = 2.0 * curve.d1(xi).dot(&r0);
    if denom.abs() > f64::MIN_POSITIVE {
        let cand = curve.clamp(xi - r0.norm_squared() / denom);
        if (cand - xi).abs() <= spacing && objective(cand) < objective(xi) {
            xi = cand;
        }
    }

    let mut grad = slope(xi);
    let mut gamma = 0.5 / curve.d1(xi).norm_squared();
    for _ in 0..4 * MAX_ITERATIONS {
        if stationary(xi) {
            break;
        }
        let next = curve.clamp(xi - gamma * grad);
        let next_grad = slope(next);
        let dxi = next - xi;
        let dgrad = next_grad - grad;
        if dxi == 0.0 {
            break;
        }
        gamma = if dxi * dgrad > 0.0 { dxi / dgrad } else { 0.5 / curve.d1(next).norm_squared() };
        xi = next;
        grad = next_grad;
        if at_bound(xi) && grad * if xi <= start { 1.0 } else { -1.0 } >= 0.0 {
            return Ok(xi);
        }
    }
    for _ in 0..3 {
        if stationary(xi) {
            break;
        }
        let d1 = curve.d1(xi);
        let r = curve.point(xi) - x;
        let curv = 2.0 * (d1.norm_squared() + curve.d2(xi).dot(&r));
        if curv <= 0.0 {
            break;
        }
        xi = curve.clamp(xi - 2.0 * d1.dot(&r) / curv);
    }
    if stationary(xi) || at_bound(xi) {
        Ok(xi)
    } else {
        let d1 = curve.d1(xi);
        let residual = (d1.dot(&(curve.point(xi) - x)) / d1.norm()).abs();
        Err(Error::NoConvergence { iterations: 4 * MAX_ITERATIONS, residual })
    }
}

/// Frenet coordinates of `x` from a global search, no hint required.
pub fn locate(curve: &Curve, x: Vec2) -> Result<FrenetPoint> {
    let xi = closest_point_param(curve, x)?;
    let frame = frenet_apparatus(curve, xi)?;
    let foot = curve.point(xi);
    let eta = (x - foot).dot(&frame.n);
    // the foot point is orthogonal, so one polish step settles xi exactly
    match frenet_inverse(curve, x, FrenetPoint::new(eta, xi)) {
        Ok(p) => Ok(p),
        Err(_) => Ok(FrenetPoint::new(eta, xi)),
    }
}

/// Metric coefficients of the Laplacian in Frenet coordinates.
///
/// `j0, j1, j2` are evaluated at `(eta, xi)`; `dj0[l]`, `dj1[l]`, `dj2[l]`
/// hold the `l`-th `eta` derivative at `(0, xi)` for `l <= max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricCoeffs {
    pub j0: f64,
    pub j1: f64,
    pub j2: f64,
    pub dj0: Vec<f64>,
    pub dj1: Vec<f64>,
    pub dj2: Vec<f64>,
}

/// Everything the metric coefficients need at one `xi`.
#[derive(Debug, Clone, Copy)]
pub struct MetricData {
    pub speed: f64,
    pub kappa: f64,
    pub dkappa: f64,
    /// `g' . g''`
    pub stretch: f64,
}

impl MetricData {
    pub fn at(curve: &Curve, xi: f64) -> Result<Self> {
        let sample = curve.sample(xi);
        let frame = frame_from(&sample)?;
        Ok(MetricData {
            speed: frame.speed,
            kappa: frame.kappa,
            dkappa: curvature_derivative(&sample),
            stretch: sample.d1.dot(&sample.d2),
        })
    }

    pub fn psi(&self, eta: f64) -> Result<f64> {
        let factor = 1.0 + eta * self.kappa;
        if factor <= 0.0 {
            return Err(Error::SingularTube { xi: f64::NAN, factor });
        }
        Ok(1.0 / factor)
    }

    pub fn values(&self, eta: f64) -> Result<(f64, f64, f64)> {
        let psi = self.psi(eta)?;
        let a = (psi / self.speed).powi(2);
        let j2 = -a * (eta * self.dkappa * psi + self.stretch / (self.speed * self.speed));
        Ok((a, self.kappa * psi, j2))
    }

    /// `eta` derivatives of `J0, J1, J2` at `eta = 0` up to `max_order`.
    pub fn eta_derivatives(&self, max_order: usize) -> [Vec<f64>; 3] {
        let s2 = self.speed * self.speed;
        let k = self.kappa;
        let mut dj0 = Vec::with_capacity(max_order + 1);
        let mut dj1 = Vec::with_capacity(max_order + 1);
        let mut dj2 = Vec::with_capacity(max_order + 1);
        let mut fact = 1.0; // l!
        for l in 0..=max_order {
            if l > 0 {
                fact *= l as f64;
            }
            let sgn = if l % 2 == 0 { 1.0 } else { -1.0 };
            let kl = k.powi(l as i32);
            let fact_l1 = fact * (l as f64 + 1.0); // (l+1)!
            dj0.push(sgn * fact_l1 * kl / s2);
            dj1.push(k * sgn * fact * kl);
            let curvature_part = if l == 0 {
                0.0
            } else {
                // l (-1)^(l-1) (l+1)!/2 kappa^(l-1)
                -self.dkappa / s2 * (l as f64) * (-sgn) * fact_l1 / 2.0 * k.powi(l as i32 - 1)
            };
            dj2.push(curvature_part - self.stretch / (s2 * s2) * sgn * fact_l1 * kl);
        }
        [dj0, dj1, dj2]
    }
}

pub fn metric_coeffs(curve: &Curve, xi: f64, eta: f64, max_order: usize) -> Result<MetricCoeffs> {
    let data = MetricData::at(curve, xi)?;
    let (j0, j1, j2) = data.values(eta).map_err(|e| match e {
        Error::SingularTube { factor, .. } => Error::SingularTube { xi, factor },
        other => other,
    })?;
    let [dj0, dj1, dj2] = data.eta_derivatives(max_order);
    Ok(MetricCoeffs { j0, j1, j2, dj0, dj1, dj2 })
}

/// Cartesian gradient of `u` from its Frenet partials `u_eta`, `u_xi`.
pub fn pushforward_gradient(curve: &Curve, p: FrenetPoint, du_eta: f64, du_xi: f64) -> Result<Vec2> {
    let f = frenet_apparatus(curve, p.xi)?;
    let factor = 1.0 + p.eta * f.kappa;
    if factor <= 0.0 {
        return Err(Error::SingularTube { xi: p.xi, factor });
    }
    Ok(du_eta * f.n + du_xi / (f.speed * factor) * f.tau)
}

/// Check that `n` points from the minus side into the plus side.
///
/// `side_of` is an independent classifier (usually a level-set sign); it is
/// probed at `g(xi) +- delta n(xi)` on `samples` parameters.
pub fn validate_orientation(
    curve: &Curve,
    side_of: impl Fn(Vec2) -> Side,
    delta: f64,
    samples: usize,
) -> Result<()> {
    let (start, end) = curve.domain();
    for k in 0..samples {
        let xi = start + (end - start) * (k as f64 + 0.5) / samples as f64;
        let f = frenet_apparatus(curve, xi)?;
        let g = curve.point(xi);
        let plus = side_of(g + delta * f.n);
        let minus = side_of(g - delta * f.n);
        if plus != Side::Plus || minus != Side::Minus {
            return Err(Error::InvalidCurve(format!(
                "orientation mismatch at xi = {xi}: normal must point into the plus side"
            )));
        }
    }
    Ok(())
}
