//! Global assembly, sparse Cholesky solve and convergence-rate fits.

use std::ops::AddAssign;
use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::assembly::{compute_error, discretize, face_terms, local_volume, Discretization, DiscretizationOptions, ErrorReport};
use crate::error::{Error, Result};
use crate::geometry::{Side, Vec2};
use crate::problems::Problem;

/// Default bound on `|S c - f| / |f|`.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
const REFINEMENT_STEPS: usize = 3;

/// Symmetric block-sparse system over element-major degrees of freedom.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub n_local: usize,
    pub n_elements: usize,
    /// Diagonal block of each element.
    pub diag: Vec<DMatrix<f64>>,
    /// Off-diagonal blocks `(test element, trial element, block)`.
    pub couplings: Vec<(usize, usize, DMatrix<f64>)>,
    pub rhs: DVector<f64>,
    pub solution: Option<DVector<f64>>,
}

impl GlobalSystem {
    pub fn dim(&self) -> usize {
        self.n_local * self.n_elements
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let nl = self.n_local;
        let mut y = DVector::zeros(self.dim());
        for (e, d) in self.diag.iter().enumerate() {
            let r = d * x.rows(e * nl, nl);
            y.rows_mut(e * nl, nl).add_assign(&r);
        }
        for (t, s, b) in &self.couplings {
            let r = b * x.rows(s * nl, nl);
            y.rows_mut(t * nl, nl).add_assign(&r);
        }
        y
    }

    /// Largest entry of the matrix in absolute value.
    pub fn max_abs(&self) -> f64 {
        let d = self.diag.iter().map(|b| b.amax()).fold(0.0, f64::max);
        self.couplings.iter().map(|(_, _, b)| b.amax()).fold(d, f64::max)
    }

    /// `max |S - S^T|` over all entries.
    pub fn symmetry_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for d in &self.diag {
            defect = defect.max((d - d.transpose()).amax());
        }
        for (t, s, b) in &self.couplings {
            let mirror = self
                .couplings
                .iter()
                .find(|(t2, s2, _)| t2 == s && s2 == t)
                .map(|(_, _, m)| m.transpose());
            match mirror {
                Some(m) => defect = defect.max((b - m).amax()),
                None => defect = defect.max(b.amax()),
            }
        }
        defect
    }

    /// Dense copy, for small systems.
    pub fn dense(&self) -> DMatrix<f64> {
        let nl = self.n_local;
        let mut a = DMatrix::zeros(self.dim(), self.dim());
        for (e, d) in self.diag.iter().enumerate() {
            a.view_mut((e * nl, e * nl), (nl, nl)).add_assign(d);
        }
        for (t, s, b) in &self.couplings {
            a.view_mut((t * nl, s * nl), (nl, nl)).add_assign(b);
        }
        a
    }

    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.rhs - self.matvec(x)
    }

    pub fn relative_residual(&self, x: &DVector<f64>) -> f64 {
        let fnorm = self.rhs.norm();
        let r = self.residual(x).norm();
        if fnorm == 0.0 {
            r
        } else {
            r / fnorm
        }
    }

    fn scaled_triplets(&self, scale: &[f64]) -> Vec<Triplet<usize, usize, f64>> {
        let nl = self.n_local;
        let mut out = Vec::with_capacity((self.diag.len() + self.couplings.len()) * nl * nl);
        let mut push = |r0: usize, c0: usize, b: &DMatrix<f64>| {
            for c in 0..nl {
                for r in 0..nl {
                    let (gr, gc) = (r0 + r, c0 + c);
                    let v = b[(r, c)];
                    if v != 0.0 && gr >= gc {
                        out.push(Triplet::new(gr, gc, v * scale[gr] * scale[gc]));
                    }
                }
            }
        };
        for (e, d) in self.diag.iter().enumerate() {
            push(e * nl, e * nl, d);
        }
        for (t, s, b) in &self.couplings {
            if t > s {
                push(t * nl, s * nl, b);
            }
        }
        out
    }

    /// Factor the Jacobi-scaled matrix with a sparse Cholesky decomposition
    /// and solve, refining until the relative residual meets `tolerance`.
    pub fn solve(&mut self, tolerance: f64) -> Result<SolveStats> {
        let start = Instant::now();
        let n = self.dim();
        if self.rhs.norm() == 0.0 {
            self.solution = Some(DVector::zeros(n));
            return Ok(SolveStats { relative_residual: 0.0, seconds: start.elapsed().as_secs_f64(), refinements: 0 });
        }
        let nl = self.n_local;
        let mut scale = vec![0.0; n];
        for (e, d) in self.diag.iter().enumerate() {
            for k in 0..nl {
                let v = d[(k, k)];
                if !(v > 0.0) {
                    return Err(Error::Factorization { pivot: e * nl + k });
                }
                scale[e * nl + k] = 1.0 / v.sqrt();
            }
        }
        let triplets = self.scaled_triplets(&scale);
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|_| Error::Factorization { pivot: 0 })?;
        let llt = mat.sp_cholesky(faer::Side::Lower).map_err(|_| Error::Factorization { pivot: 0 })?;
        let solve_scaled = |r: &DVector<f64>| -> DVector<f64> {
            let b = Mat::<f64>::from_fn(n, 1, |i, _| r[i] * scale[i]);
            let y = llt.solve(&b);
            DVector::from_fn(n, |i, _| y[(i, 0)] * scale[i])
        };
        let mut x = solve_scaled(&self.rhs);
        let mut rel = self.relative_residual(&x);
        let mut steps = 0;
        while rel > tolerance && steps < REFINEMENT_STEPS {
            let r = self.residual(&x);
            x += solve_scaled(&r);
            rel = self.relative_residual(&x);
            steps += 1;
        }
        if !rel.is_finite() || rel > tolerance {
            return Err(Error::Residual { residual: rel, tolerance });
        }
        self.solution = Some(x);
        Ok(SolveStats { relative_residual: rel, seconds: start.elapsed().as_secs_f64(), refinements: steps })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub relative_residual: f64,
    pub seconds: f64,
    pub refinements: usize,
}

/// Assemble the SIPG system. Element and edge blocks are computed in
/// parallel and summed in element, then edge, order.
pub fn assemble(
    disc: &Discretization,
    source: &(dyn Fn(Vec2, Side) -> f64 + Sync),
    dirichlet: &(dyn Fn(Vec2, Side) -> f64 + Sync),
    sigma0: f64,
) -> Result<GlobalSystem> {
    if !(sigma0 > 0.0) {
        return Err(Error::InvalidParameter(format!("penalty constant {sigma0} must be positive")));
    }
    let nl = disc.n_local();
    let ne = disc.mesh.n_elements();
    let volumes: Vec<_> = (0..ne)
        .into_par_iter()
        .map(|id| local_volume(&disc.spaces[id], &disc.volume_rules[id], Some(source)).map_err(|e| e.at_element(id)))
        .collect::<Result<_>>()?;
    let faces: Vec<_> = disc
        .mesh
        .edges
        .par_iter()
        .enumerate()
        .map(|(e, edge)| {
            let spaces = (&disc.spaces[edge.left], edge.right.map(|r| &disc.spaces[r]));
            face_terms(edge.normal, edge.length(), spaces, &disc.edge_rules[e], sigma0, Some(dirichlet))
                .map_err(|err| err.at_element(edge.left))
        })
        .collect::<Result<_>>()?;

    let mut diag = Vec::with_capacity(ne);
    let mut rhs = DVector::zeros(ne * nl);
    for (id, v) in volumes.into_iter().enumerate() {
        rhs.rows_mut(id * nl, nl).add_assign(&v.load);
        diag.push(v.stiffness);
    }
    let mut couplings = Vec::new();
    for (edge, face) in disc.mesh.edges.iter().zip(faces) {
        let [[ll, lr], [rl, rr]] = face.blocks;
        diag[edge.left] += ll.expect("every edge has a left block");
        if let Some(load) = face.load {
            rhs.rows_mut(edge.left * nl, nl).add_assign(&load);
        }
        if let Some(r) = edge.right {
            diag[r] += rr.expect("interior edges have a right block");
            couplings.push((edge.left, r, lr.expect("interior edges couple both sides")));
            couplings.push((r, edge.left, rl.expect("interior edges couple both sides")));
        }
    }
    Ok(GlobalSystem { n_local: nl, n_elements: ne, diag, couplings, rhs, solution: None })
}

/// Outcome of one discretize-assemble-solve run.
#[derive(Debug, Clone)]
pub struct SolveRecord {
    pub disc: Discretization,
    pub system: GlobalSystem,
    pub stats: SolveStats,
    pub error: ErrorReport,
}

/// Discretize `problem` on an `n x n` mesh with degree `m`, solve, and
/// measure the error against the exact solution.
pub fn assemble_and_solve(
    problem: &Problem,
    n: usize,
    m: usize,
    sigma0: f64,
    tolerance: f64,
    opts: &DiscretizationOptions,
) -> Result<SolveRecord> {
    let disc = discretize(problem, n, m, opts)?;
    let mut system = assemble(&disc, &*problem.source, &*problem.exact, sigma0)?;
    let stats = system.solve(tolerance)?;
    let error = compute_error(
        &disc,
        system.solution.as_ref().expect("solved"),
        &*problem.exact,
        &*problem.exact_grad,
        None,
    )?;
    Ok(SolveRecord { disc, system, stats, error })
}

/// Least-squares line through points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientData(format!("{} points", xs.len().min(ys.len()))));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("abscissae are not distinct".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit { slope, intercept: my - slope * mx, r_squared })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    /// Least-squares slope of `log(error)` against `log(h)`.
    pub slope: f64,
    /// `log(e_k / e_{k+1}) / log(h_k / h_{k+1})` for consecutive records.
    pub pairwise: Vec<f64>,
}

/// Convergence rate of `(h, error)` records; at least three distinct `h`.
pub fn convergence_rates(records: &[(f64, f64)]) -> Result<Rates> {
    if records.len() < 3 {
        return Err(Error::InsufficientData(format!("{} records, need at least 3", records.len())));
    }
    if records.iter().any(|&(h, e)| !(h > 0.0 && e > 0.0)) {
        return Err(Error::InsufficientData("mesh sizes and errors must be positive".into()));
    }
    let xs: Vec<f64> = records.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.1.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    let pairwise = records.windows(2).map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln()).collect();
    Ok(Rates { slope: fit.slope, pairwise })
}
