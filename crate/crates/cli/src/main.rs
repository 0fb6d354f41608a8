//! Experiment driver for elliptic interface problems solved with Frenet
//! immersed finite elements.

mod config;
mod experiments;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::Config;
use output::RunInfo;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "frenet-ife", version, about = "Run interface-problem convergence and conditioning studies")]
struct Args {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH", required_unless_present = "selftest")]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Run grid points one at a time.
    #[arg(long, conflicts_with = "workers")]
    serial: bool,
    /// Number of concurrent grid points.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Check the manufactured solutions and exit.
    #[arg(long)]
    selftest: bool,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = Args::parse();

    let self_test = match experiments::self_test() {
        Ok(t) if t.passed() => t,
        Ok(t) => return fail(EXIT_NUMERICAL, format!("self-test failed: {t:?}")),
        Err(e) => return fail(EXIT_NUMERICAL, format!("self-test failed: {e}")),
    };
    if args.selftest {
        println!(
            "self-test passed: circle jumps {:.1e} / {:.1e}, quartic jumps {:.1e} / {:.1e}",
            self_test.circle_value_jump, self_test.circle_flux_jump, self_test.quartic_value_jump, self_test.quartic_flux_jump
        );
        if args.config.is_none() {
            return ExitCode::SUCCESS;
        }
    }

    let path = args.config.expect("clap requires a config without --selftest");
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_CONFIG, format!("cannot read {}: {e}", path.display())),
    };
    let config = match Config::parse(&text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", path.display())),
    };
    if args.workers == Some(0) {
        return fail(EXIT_CONFIG, "--workers must be positive");
    }
    let out = args.out.clone().or_else(|| config.out.clone()).unwrap_or_else(|| PathBuf::from("results"));

    let threads = if args.serial { 1 } else { args.workers.unwrap_or(0) };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return fail(EXIT_NUMERICAL, format!("cannot start workers: {e}")),
    };
    let tables = match pool.install(|| experiments::run(&config)) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_NUMERICAL, e),
    };

    let info = RunInfo { config_path: &path, serial: args.serial, workers: args.workers, self_test: &self_test };
    if let Err(e) = output::write_all(&out, &config, &tables, &info) {
        return fail(EXIT_NUMERICAL, format!("cannot write {}: {e}", out.display()));
    }
    for r in &tables.rates {
        let at = match (r.m, r.n) {
            (Some(m), _) => format!("m={m}"),
            (_, Some(n)) => format!("n={n}"),
            _ => String::new(),
        };
        println!("{:<16} {:<15} beta=({}, {}) {at:<5} {}-slope {:.2}", r.section, r.example, r.beta_minus, r.beta_plus, r.variable, r.slope);
    }
    println!(
        "{} result rows, {} conditioning rows written to {}",
        tables.results.len(),
        tables.conditioning.len(),
        out.display()
    );
    ExitCode::SUCCESS
}
