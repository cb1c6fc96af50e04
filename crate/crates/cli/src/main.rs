//! `ebt`: run EBT simulations, residual reports, convergence studies and rate
//! validation from JSON problem configurations.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure,
//! 3 failed assertion (`converge --assert`) or rate violations (`validate`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ebt_core::io::{self, ConvergeSummary, ProblemConfig};
use ebt_core::model::{random_probes, validate_rates, SampleGrid};
use ebt_core::residual::{residual_norm, residual_report, standard_family};
use ebt_core::verify::convergence_study;
use ebt_core::{run, Error, ProblemSpec};

#[derive(Debug, Parser)]
#[command(
    name = "ebt",
    version,
    about = "Escalator Boxcar Train solver and convergence tooling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a problem and write its trajectory.
    Run(Common),
    /// Evaluate weak-form residuals per internalization interval.
    Residual(Common),
    /// Run the convergence study described in the config's `study` section.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Exit with status 3 unless every slope expectation and mass bound holds.
        #[arg(long = "assert")]
        check: bool,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
        /// Fill the `runtime_s` column (makes the CSV non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Check the model's rates for sign, bound and feedback-Lipschitz violations.
    Validate(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Problem configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for output artifacts.
    #[arg(long, env = "EBT_OUTPUT_DIR", default_value = ".")]
    output_dir: PathBuf,
    /// Override a config value, e.g. `--set N=200`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

enum Failure {
    Config(String),
    Numerical(String),
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl Common {
    fn load(&self) -> Result<(ProblemConfig, ProblemSpec), Failure> {
        let mut config = io::read_config(&self.config)?;
        for item in &self.overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Failure::Config(format!("override `{item}` is not of the form KEY=VALUE")))?;
            config.apply_override(key.trim(), value)?;
        }
        config.validate()?;
        let base = self.config.parent().unwrap_or(Path::new("."));
        let problem = config.to_problem(base)?;
        Ok((config, problem))
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.output_dir.join(name);
        io::write_atomic(&path, contents.as_bytes())?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn cmd_run(common: &Common) -> Result<(), Failure> {
    let (config, problem) = common.load()?;
    let traj = run(&problem, &config.run_options())?;
    common.write("trajectory.csv", &io::trajectory_csv(&traj))?;
    common.write("trajectory.json", &io::trajectory_metadata(&config, &traj))?;
    let last = traj.final_snapshot();
    println!(
        "{}: T = {}, h_eff = {}, {} snapshots, {} cohorts, final mass {}",
        problem.model_name,
        last.t,
        traj.step,
        traj.snapshots.len(),
        last.state.cohort_count(),
        last.state.total_mass()
    );
    Ok(())
}

fn cmd_residual(common: &Common) -> Result<(), Failure> {
    let (config, problem) = common.load()?;
    let traj = run(&problem, &config.run_options())?;
    let family = standard_family(&problem);
    let rows = residual_report(&traj, &family)?;
    let norm = residual_norm(&traj, &family)?;
    let max_diff = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    common.write("residual.csv", &io::residual_csv(&rows))?;
    let summary = serde_json::json!({
        "model": problem.model_name,
        "boundary_formulation": problem.formulation,
        "h_eff": traj.step,
        "test_functions": family,
        "residual_norm": norm,
        "max_abs_diff": max_diff,
    });
    common.write("residual_summary.json", &io::to_json(&summary))?;
    println!("residual norm {norm}, largest quadrature/closed-form gap {max_diff}");
    Ok(())
}

fn cmd_converge(common: &Common, check: bool, jobs: Option<usize>, timings: bool) -> Result<(), Failure> {
    let (config, problem) = common.load()?;
    let study = config.study_config()?;
    let expectations = config.study.as_ref().map(|s| s.expect.clone()).unwrap_or_default();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Config(format!("cannot start worker pool: {e}")))?;
    let report = pool.install(|| convergence_study(&problem, &study))?;
    let summary = ConvergeSummary::new(&report, &expectations);
    common.write("converge.csv", &io::converge_csv(&report, timings))?;
    common.write("converge_summary.json", &summary.to_json())?;

    println!(
        "{:>6} {:>6} {:>12} {:>12} {:>12} {:>10}",
        "N", "n", "flat", "functional", "residual", "runtime_s"
    );
    let show = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"));
    for r in &report.rows {
        println!(
            "{:>6} {:>6} {:>12} {:>12} {:>12} {:>10.3}",
            r.cohorts,
            r.intervals,
            show(r.flat_error),
            show(r.functional_error),
            show(r.residual_norm),
            r.runtime_s
        );
    }
    for s in &report.slopes {
        println!("slope {} along {}: {}", s.metric, s.axis, show(s.slope));
    }
    for f in &summary.failures {
        eprintln!("row N={} n={} failed: {}", f.cohorts, f.intervals, f.failure);
    }
    if check && !summary.passed {
        let missed: Vec<String> = summary
            .expectations
            .iter()
            .filter(|o| !o.pass)
            .map(|o| {
                format!(
                    "{} along {}: fitted {}, expected {} ± {}",
                    o.expectation.metric.name(),
                    o.expectation.axis.name(),
                    show(o.fitted),
                    o.expectation.slope,
                    o.expectation.tolerance
                )
            })
            .collect();
        let mut reasons = missed;
        if !summary.all_mass_bounds_ok {
            reasons.push("mass bound violated".into());
        }
        if !summary.failures.is_empty() {
            reasons.push(format!("{} rows failed", summary.failures.len()));
        }
        return Err(Failure::Assertion(reasons.join("; ")));
    }
    Ok(())
}

fn cmd_validate(common: &Common) -> Result<(), Failure> {
    let (_, problem) = common.load()?;
    let lo = problem.x_b;
    let hi = problem.reachable_extent().unwrap_or(lo + problem.horizon).max(lo + 1.0);
    let max_mass = problem
        .reachable_mass()
        .unwrap_or_else(|| problem.initial.total_mass())
        .max(1.0);
    let probes = random_probes(0x5eed, 16, (lo, hi), max_mass, 6);
    let report = validate_rates(problem.rates.as_ref(), &SampleGrid::new(lo, hi, 101), &probes);
    common.write("validation.json", &io::validation_json(&report))?;
    println!(
        "{}: {} samples, {} probe pairs, {} violations",
        problem.model_name,
        report.samples,
        report.probe_pairs,
        report.violations.len()
    );
    if report.is_clean() {
        Ok(())
    } else {
        for v in report.violations.iter().take(10) {
            eprintln!(
                "{:?} {} at x = {}: value {} (limit {})",
                v.kind, v.rate, v.x, v.value, v.limit
            );
        }
        Err(Failure::Assertion(format!(
            "{} rate violations",
            report.violations.len()
        )))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Residual(c) => cmd_residual(c),
        Command::Converge {
            common,
            check,
            jobs,
            timings,
        } => cmd_converge(common, *check, *jobs, *timings),
        Command::Validate(c) => cmd_validate(c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Assertion(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(3)
        }
    }
}
