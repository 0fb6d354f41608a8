//! Runs configured experiments and collects table rows.

use std::time::Instant;

use frenet_ife::assembly::{compute_error, discretize, project_l2};
use frenet_ife::ife::conditioning_study;
use frenet_ife::problems::{circle_problem, interface_condition_residuals, quartic_problem};
use frenet_ife::solver::{assemble_and_solve, convergence_rates, linear_fit};
use frenet_ife::{Curve, DiscretizationOptions, Problem, SidePair, Vec2};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Config, Example, Section};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub example: Example,
    pub m: usize,
    pub n: usize,
    pub h: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub rel_l2_error: f64,
    pub rel_h1_error: f64,
    pub dofs: usize,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub section: String,
    pub example: Example,
    /// `h` for mesh refinement, `m` for degree refinement.
    pub variable: &'static str,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub slope: f64,
    pub pairwise: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditioningRow {
    pub m: usize,
    pub epsilon: f64,
    pub cond: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tables {
    pub results: Vec<ResultRow>,
    pub rates: Vec<RateRow>,
    pub conditioning: Vec<ConditioningRow>,
}

/// Failure of one grid point, with enough context to rerun it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError(pub String);

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn problem_for(example: Example, beta: SidePair<f64>) -> frenet_ife::Result<Problem> {
    match example {
        Example::Ex2Solve => quartic_problem(beta),
        _ => circle_problem(beta),
    }
}

fn options(section: &Section) -> DiscretizationOptions {
    DiscretizationOptions {
        volume_points: section.volume_points,
        edge_points: section.edge_points,
        family: section.family.into(),
        ..Default::default()
    }
}

struct Job<'a> {
    section: &'a Section,
    beta: [f64; 2],
    m: usize,
    n: usize,
}

fn run_job(job: &Job, timings: bool) -> Result<ResultRow, RunError> {
    let s = job.section;
    let beta = SidePair::new(job.beta[0], job.beta[1]);
    let context = |e: frenet_ife::Error| {
        RunError(format!("[{}] {} m={} n={} beta=({}, {}): {e}", s.name, s.example, job.m, job.n, beta.minus, beta.plus))
    };
    let problem = problem_for(s.example, beta).map_err(context)?;
    let opts = options(s);
    let start = Instant::now();
    let error = match s.example {
        Example::Ex1Projection => {
            let disc = discretize(&problem, job.n, job.m, &opts).map_err(context)?;
            let c = project_l2(&disc, &*problem.exact).map_err(context)?;
            compute_error(&disc, &c, &*problem.exact, &*problem.exact_grad, None).map_err(context)?
        }
        _ => assemble_and_solve(&problem, job.n, job.m, s.sigma0, s.tolerance, &opts).map_err(context)?.error,
    };
    let seconds = if timings { start.elapsed().as_secs_f64() } else { 0.0 };
    Ok(ResultRow {
        example: s.example,
        m: job.m,
        n: job.n,
        h: problem.domain.width() / job.n as f64,
        beta_minus: beta.minus,
        beta_plus: beta.plus,
        rel_l2_error: error.rel_l2,
        rel_h1_error: error.rel_h1,
        dofs: job.n * job.n * (job.m + 1) * (job.m + 1),
        solve_seconds: seconds,
    })
}

fn rates_of(section: &Section, rows: &[ResultRow]) -> Result<Vec<RateRow>, RunError> {
    let mut out = Vec::new();
    let wrap = |e: frenet_ife::Error| RunError(format!("[{}] rate fit: {e}", section.name));
    for b in &section.beta {
        let matching = |r: &&ResultRow| r.beta_minus == b[0] && r.beta_plus == b[1];
        if section.meshes.len() >= 3 {
            for &m in &section.degrees {
                let recs: Vec<(f64, f64)> = rows.iter().filter(matching).filter(|r| r.m == m).map(|r| (r.h, r.rel_l2_error)).collect();
                let rates = convergence_rates(&recs).map_err(wrap)?;
                out.push(RateRow {
                    section: section.name.clone(),
                    example: section.example,
                    variable: "h",
                    m: Some(m),
                    n: None,
                    beta_minus: b[0],
                    beta_plus: b[1],
                    slope: rates.slope,
                    pairwise: rates.pairwise,
                });
            }
        }
        if section.example == Example::Ex3PSweep && section.degrees.len() >= 3 {
            for &n in &section.meshes {
                let recs: Vec<&ResultRow> = rows.iter().filter(matching).filter(|r| r.n == n).collect();
                let ms: Vec<f64> = recs.iter().map(|r| r.m as f64).collect();
                let logs: Vec<f64> = recs.iter().map(|r| r.rel_l2_error.ln()).collect();
                let fit = linear_fit(&ms, &logs).map_err(wrap)?;
                let pairwise = recs.windows(2).map(|w| (w[0].rel_l2_error / w[1].rel_l2_error).ln() / (w[1].m as f64 - w[0].m as f64)).collect();
                out.push(RateRow {
                    section: section.name.clone(),
                    example: section.example,
                    variable: "m",
                    m: None,
                    n: Some(n),
                    beta_minus: b[0],
                    beta_plus: b[1],
                    slope: fit.slope,
                    pairwise,
                });
            }
        }
    }
    Ok(out)
}

/// Run every section. Grid points run concurrently on the current rayon
/// pool; rows are ordered by section name, then by coefficient pair,
/// degree and mesh as listed.
pub fn run(config: &Config) -> Result<Tables, RunError> {
    let mut tables = Tables::default();
    for section in &config.sections {
        if section.example == Example::Conditioning {
            let circle = Curve::circle(Vec2::zeros(), 1.0).map_err(|e| RunError(e.to_string()))?;
            let per_m: Vec<Vec<f64>> = section
                .degrees
                .par_iter()
                .map(|&m| {
                    conditioning_study(&circle, m, &section.epsilons).map_err(|e| RunError(format!("[{}] conditioning m={m}: {e}", section.name)))
                })
                .collect::<Result<_, _>>()?;
            for (&m, conds) in section.degrees.iter().zip(per_m) {
                for (&epsilon, cond) in section.epsilons.iter().zip(conds) {
                    tables.conditioning.push(ConditioningRow { m, epsilon, cond });
                }
            }
            continue;
        }
        let mut jobs = Vec::new();
        for &beta in &section.beta {
            for &m in &section.degrees {
                for &n in &section.meshes {
                    jobs.push(Job { section, beta, m, n });
                }
            }
        }
        let rows: Vec<ResultRow> = jobs.par_iter().map(|j| run_job(j, config.timings)).collect::<Result<_, _>>()?;
        tables.rates.extend(rates_of(section, &rows)?);
        tables.results.extend(rows);
    }
    Ok(tables)
}

/// Startup check of the manufactured solutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTest {
    pub circle_value_jump: f64,
    pub circle_flux_jump: f64,
    pub quartic_value_jump: f64,
    pub quartic_flux_jump: f64,
}

impl SelfTest {
    pub fn passed(&self) -> bool {
        self.circle_value_jump <= 1e-12
            && self.circle_flux_jump <= 1e-10
            && self.quartic_value_jump <= 1e-12
            && self.quartic_flux_jump <= 1e-10
    }
}

/// Interface conditions of both exact solutions at 20 interface points;
/// building the quartic problem also validates its orientation.
pub fn self_test() -> frenet_ife::Result<SelfTest> {
    let beta = SidePair::new(1.0, 10.0);
    let (cv, cf) = interface_condition_residuals(&circle_problem(beta)?, 20)?;
    let (qv, qf) = interface_condition_residuals(&quartic_problem(beta)?, 20)?;
    Ok(SelfTest { circle_value_jump: cv, circle_flux_jump: cf, quartic_value_jump: qv, quartic_flux_jump: qf })
}
