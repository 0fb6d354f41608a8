//! CSV tables and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde_json::json;

use crate::config::Config;
use crate::experiments::{SelfTest, Tables};

pub const RESULTS_HEADER: &str = "example,m,n,h,beta_minus,beta_plus,rel_l2_error,rel_h1_error,dofs,solve_seconds";
pub const RATES_HEADER: &str = "section,example,variable,m,n,beta_minus,beta_plus,slope,pairwise";
pub const CONDITIONING_HEADER: &str = "m,epsilon,cond";

fn opt(v: Option<usize>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn results_csv(t: &Tables) -> String {
    let mut s = format!("{RESULTS_HEADER}\n");
    for r in &t.results {
        writeln!(
            s,
            "{},{},{},{},{},{},{:.10e},{:.10e},{},{:.6}",
            r.example, r.m, r.n, r.h, r.beta_minus, r.beta_plus, r.rel_l2_error, r.rel_h1_error, r.dofs, r.solve_seconds
        )
        .unwrap();
    }
    s
}

pub fn rates_csv(t: &Tables) -> String {
    let mut s = format!("{RATES_HEADER}\n");
    for r in &t.rates {
        let pairwise: Vec<String> = r.pairwise.iter().map(|p| format!("{p:.4}")).collect();
        writeln!(
            s,
            "{},{},{},{},{},{},{},{:.4},{}",
            r.section,
            r.example,
            r.variable,
            opt(r.m),
            opt(r.n),
            r.beta_minus,
            r.beta_plus,
            r.slope,
            pairwise.join(";")
        )
        .unwrap();
    }
    s
}

pub fn conditioning_csv(t: &Tables) -> String {
    let mut s = format!("{CONDITIONING_HEADER}\n");
    for r in &t.conditioning {
        writeln!(s, "{},{:e},{:.10e}", r.m, r.epsilon, r.cond).unwrap();
    }
    s
}

pub struct RunInfo<'a> {
    pub config_path: &'a Path,
    pub serial: bool,
    pub workers: Option<usize>,
    pub self_test: &'a SelfTest,
}

pub fn manifest(config: &Config, info: &RunInfo) -> String {
    let value = json!({
        "library": "frenet-ife",
        "version": frenet_ife::VERSION,
        "config_path": info.config_path.display().to_string(),
        "serial": info.serial,
        "workers": info.workers,
        "config": config,
        "self_test": info.self_test,
        "files": ["results.csv", "rates.csv", "conditioning.csv", "manifest.json"],
    });
    let mut s = serde_json::to_string_pretty(&value).expect("manifest is plain data");
    s.push('\n');
    s
}

pub fn write_all(dir: &Path, config: &Config, tables: &Tables, info: &RunInfo) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), results_csv(tables))?;
    fs::write(dir.join("rates.csv"), rates_csv(tables))?;
    fs::write(dir.join("conditioning.csv"), conditioning_csv(tables))?;
    fs::write(dir.join("manifest.json"), manifest(config, info))?;
    Ok(())
}
