//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::path::{Path, PathBuf};
use std::time::Instant;

use common::split_oracle::flat_distance_oracle;
use common::{catalog_problems, log_slope};
use ebt_core::io::{self, ConvergeSummary, ProblemConfig};
use ebt_core::measure::{flat_distance, flat_distance_lp};
use ebt_core::model::{random_probes, validate_rates, BoundaryFormulation, ProblemSpec, SampleGrid};
use ebt_core::residual::{
    chained_residual, residual_norm, residual_quadrature, residual_report, standard_family, Method,
};
use ebt_core::verify::{
    check_boundary_center, check_mass_bound, check_tail_bound, convergence_study, correction_profile, fit_log_slope,
    SLOPE_FLOOR,
};
use ebt_core::{run, DiscreteMeasure, RunOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BOTH: [BoundaryFormulation; 2] = [BoundaryFormulation::Simplified, BoundaryFormulation::Original];

type Outcome = Result<String, String>;
type Criterion = (&'static str, f64, fn() -> Outcome);

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../cli/configs")
}

fn load(name: &str) -> (ProblemConfig, ProblemSpec) {
    let path = configs_dir().join(name);
    let config = io::read_config(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
    config.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
    let problem = config
        .to_problem(&configs_dir())
        .unwrap_or_else(|e| panic!("{name}: {e}"));
    (config, problem)
}

fn all_configs() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(configs_dir())
        .expect("config directory")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    names
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn flat_metric() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let atoms = |rng: &mut ChaCha8Rng| -> Vec<(f64, f64)> {
        let k = rng.gen_range(1..=4);
        (0..k)
            .map(|_| (rng.gen_range(0.0..4.0), rng.gen_range(0.0..2.0)))
            .collect()
    };
    let mut worst = 0.0f64;
    let cases = 60;
    for _ in 0..cases {
        let (a, b) = (atoms(&mut rng), atoms(&mut rng));
        let (ma, mb) = (
            DiscreteMeasure::from_pairs(&a).unwrap(),
            DiscreteMeasure::from_pairs(&b).unwrap(),
        );
        let oracle = flat_distance_oracle(&a, &b);
        let lp = flat_distance_lp(&ma, &mb).map_err(|e| e.to_string())?;
        let chain = flat_distance(&ma, &mb).map_err(|e| e.to_string())?;
        worst = worst.max((lp - oracle).abs()).max((chain - oracle).abs());
    }
    ensure(
        worst <= 1e-6,
        format!("LP vs split-search oracle differs by {worst:.2e}"),
    )?;
    let mut dirac = 0.0f64;
    for d in [0.5, 1.0, 2.0, 4.0] {
        let a = DiscreteMeasure::from_pairs(&[(0.0, 1.0)]).unwrap();
        let b = DiscreteMeasure::from_pairs(&[(d, 1.0)]).unwrap();
        for value in [flat_distance(&a, &b).unwrap(), flat_distance_lp(&a, &b).unwrap()] {
            dirac = dirac.max((value - 2.0 * d / (d + 2.0)).abs());
        }
    }
    ensure(dirac <= 1e-9, format!("unit Dirac closed form off by {dirac:.2e}"))?;
    Ok(format!(
        "{cases} random pairs, max oracle gap {worst:.1e}; Dirac gap {dirac:.1e}"
    ))
}

fn interior_exactness() -> Outcome {
    let (config, problem) = load("pure_decay.json");
    let traj = run(&problem, &config.run_options()).map_err(|e| e.to_string())?;
    let first = &traj.snapshots[0].state;
    let last = &traj.final_snapshot().state;
    let target = (-0.5 * problem.horizon).exp();
    let mut decay_gap = 0.0f64;
    for c in first.internal.iter().filter(|c| c.abundance > 0.0) {
        let end = last.cohort(c.index).ok_or(format!("cohort {} lost", c.index))?;
        decay_gap = decay_gap.max((end.abundance / c.abundance - target).abs());
    }
    ensure(decay_gap <= 1e-10, format!("decay ratio off by {decay_gap:.2e}"))?;

    let (config, problem) = load("pure_transport.json");
    let traj = run(&problem, &config.run_options()).map_err(|e| e.to_string())?;
    let g0 = 1.0;
    let shift = g0 * problem.horizon;
    let last = &traj.final_snapshot().state;
    let (mut moved, mut worst_shift) = (0, 0.0f64);
    for c in &traj.snapshots[0].state.internal {
        let end = last.cohort(c.index).ok_or(format!("cohort {} lost", c.index))?;
        let gap = (end.center - (c.center + shift)).abs();
        ensure(
            gap <= 1e-12,
            format!("cohort {}: {} vs {}", c.index, end.center, c.center + shift),
        )?;
        ensure(end.abundance == c.abundance, format!("cohort {} changed mass", c.index))?;
        worst_shift = worst_shift.max(gap);
        moved += 1;
    }
    Ok(format!(
        "decay ratio gap {decay_gap:.1e}; {moved} cohorts transported, centre gap {worst_shift:.1e}"
    ))
}

fn mass_and_tail_bounds() -> Outcome {
    let thresholds: Vec<f64> = (0..=40).map(|k| 0.1 * k as f64).collect();
    let mut problems: Vec<(ProblemSpec, RunOptions)> = Vec::new();
    for name in all_configs() {
        let (config, problem) = load(&name);
        problems.push((problem, config.run_options()));
    }
    for formulation in BOTH {
        for p in catalog_problems(formulation, 10) {
            problems.push((p, RunOptions::new(1e-3)));
        }
    }
    let (mut worst, mut tails) = (0.0f64, 0);
    for (p, opts) in &problems {
        let traj = run(p, opts).map_err(|e| format!("{}: {e}", p.model_name))?;
        let mass = check_mass_bound(&traj).ok_or(format!("{}: no declared bounds", p.model_name))?;
        ensure(
            mass.ok,
            format!(
                "{} {}: mass ratio {} at t = {}",
                p.model_name, p.formulation, mass.worst_ratio, mass.worst_t
            ),
        )?;
        worst = worst.max(mass.worst_ratio);
        if let Some(tail) = check_tail_bound(&traj, &thresholds) {
            ensure(
                tail.ok,
                format!(
                    "{}: tail breaches {:?}",
                    p.model_name,
                    &tail.breaches[..tail.breaches.len().min(3)]
                ),
            )?;
            tails += 1;
        }
    }
    Ok(format!(
        "{} runs, worst mass ratio {worst:.6}; tail bound checked on {tails} birth-free runs",
        problems.len()
    ))
}

fn residual_algebra() -> Outcome {
    let mut problems = Vec::new();
    for formulation in BOTH {
        for p in catalog_problems(formulation, 8) {
            problems.push((p, 2e-3));
        }
        for name in ["constant_rates.json", "ramp_fecundity.json", "logistic_feedback.json"] {
            let (config, p) = load(name);
            problems.push((p.with_formulation(formulation), config.step_size));
        }
    }
    let (mut rows, mut worst) = (0, 0.0f64);
    for (p, step) in &problems {
        let traj = run(p, &RunOptions::new(*step)).map_err(|e| e.to_string())?;
        let family = standard_family(p);
        ensure(family.len() == 10, format!("family has {} members", family.len()))?;
        for row in residual_report(&traj, &family).map_err(|e| e.to_string())? {
            let scaled = row.abs_diff / (1.0 + row.closed_form.abs());
            worst = worst.max(scaled);
            ensure(scaled <= 1e-6, format!("{} {} {row:?}", p.model_name, p.formulation))?;
            rows += 1;
        }
        for phi in &family {
            let chained = chained_residual(&traj, phi, Method::ClosedForm).map_err(|e| e.to_string())?;
            let whole = residual_quadrature(&traj, phi, 0.0, p.horizon, &p.initial).map_err(|e| e.to_string())?;
            ensure(
                (chained - whole).abs() <= 1e-6 * (1.0 + whole.abs()),
                format!("{} {}: chained {chained} vs whole {whole}", p.model_name, p.formulation),
            )?;
        }
    }
    Ok(format!(
        "{} problems, {rows} interval rows, worst scaled gap {worst:.1e}; chaining consistent",
        problems.len()
    ))
}

fn residual_rate() -> Outcome {
    let (config, problem) = load("constant_rates.json");
    let mut study = config.study_config().map_err(|e| e.to_string())?;
    study.intervals = vec![10, 20, 40, 80, 160];
    let report = convergence_study(&problem, &study).map_err(|e| e.to_string())?;
    let slope = report.slope("residual_norm", "n").ok_or("no residual slope")?;
    ensure((slope + 1.0).abs() <= 0.3, format!("residual_norm slope {slope:.3}"))?;
    Ok(format!("residual_norm slope in n {slope:.3}"))
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn monotone(values: &[f64], noise: f64) -> bool {
    values.windows(2).all(|w| w[1] <= noise * w[0])
}

fn solution_convergence() -> Outcome {
    let (config, problem) = load("constant_rates_grid.json");
    let mut study = config.study_config().map_err(|e| e.to_string())?;
    study.self_reference = false;
    let report = convergence_study(&problem, &study).map_err(|e| e.to_string())?;
    let grid = [25, 50, 100, 200];
    let error = |c, i| {
        report
            .row(c, i)
            .and_then(|r| r.functional_error)
            .ok_or(format!("row {c}/{i} missing"))
    };
    let along_n: Vec<f64> = grid.iter().map(|&i| error(200, i)).collect::<Result<_, _>>()?;
    let along_big_n: Vec<f64> = grid.iter().map(|&c| error(c, 200)).collect::<Result<_, _>>()?;
    ensure(
        monotone(&along_n, 1.2),
        format!("not monotone along n: {}", sci(&along_n)),
    )?;
    ensure(
        monotone(&along_big_n, 1.2),
        format!("not monotone along N: {}", sci(&along_big_n)),
    )?;
    let finest = error(200, 200)?;
    let p0 = problem.initial.total_mass();
    ensure(finest <= 1e-2 * p0, format!("finest error {finest:.2e} > 1e-2·P(0)"))?;
    let slope = log_slope(&grid.map(|x| x as f64), &along_n);
    Ok(format!(
        "along n {} (slope {slope:.2}); along N {}; finest {finest:.1e}",
        sci(&along_n),
        sci(&along_big_n)
    ))
}

fn original_formulation() -> Outcome {
    let (mut measured, mut declared, mut worst_ratio) = (0.0f64, 0.0f64, 0.0f64);
    let mut runs: Vec<ProblemSpec> = catalog_problems(BoundaryFormulation::Original, 10);
    runs.push(load("original_boundary.json").1);
    runs.push(load("logistic_feedback.json").1);
    for p in &runs {
        let traj = run(p, &RunOptions::new(1e-3)).map_err(|e| e.to_string())?;
        let check = check_boundary_center(&traj).ok_or("no declared bounds")?;
        ensure(
            check.ok,
            format!(
                "{}: boundary centre slope {} > {}",
                p.model_name, check.measured_slope, check.declared
            ),
        )?;
        if check.declared > 0.0 && check.measured_slope / check.declared >= worst_ratio {
            worst_ratio = check.measured_slope / check.declared;
            measured = check.measured_slope;
            declared = check.declared;
        }
    }

    let (_, base) = load("original_boundary.json");
    let family = standard_family(&base);
    let profile = correction_profile(&base, &[10, 20, 40, 80, 160], 1e-3, &family).map_err(|e| e.to_string())?;
    let slope = fit_log_slope(&profile, SLOPE_FLOOR).ok_or("correction profile at floor")?;
    ensure((slope - 2.0).abs() <= 0.4, format!("correction slope {slope:.3} in Δt"))?;

    let (config, grid) = load("constant_rates_grid.json");
    let step = config.step_size;
    let opts = RunOptions::new(step).with_snapshot_stride(usize::MAX);
    let mut finals = Vec::new();
    let mut errors = Vec::new();
    for formulation in BOTH {
        let p = grid.with_formulation(formulation);
        let coarse = run(&p.with_grid(200, 200), &opts)
            .map_err(|e| e.to_string())?
            .final_measure();
        let fine = run(&p.with_grid(800, 800), &opts)
            .map_err(|e| e.to_string())?
            .final_measure();
        errors.push(flat_distance(&coarse, &fine).map_err(|e| e.to_string())?);
        finals.push(coarse);
    }
    let gap = flat_distance(&finals[0], &finals[1]).map_err(|e| e.to_string())?;
    let allowed = 3.0 * errors[0].max(errors[1]);
    ensure(
        gap <= allowed,
        format!("formulation gap {gap:.2e} > 3 × {:.2e}", allowed / 3.0),
    )?;
    Ok(format!(
        "centre slope {measured:.3} ≤ C = {declared}; correction slope {slope:.2}; formulation gap {gap:.1e} vs errors {:.1e}/{:.1e}",
        errors[0], errors[1]
    ))
}

fn artifacts(name: &str) -> Result<Vec<(String, String)>, String> {
    let (config, problem) = load(name);
    let traj = run(&problem, &config.run_options()).map_err(|e| e.to_string())?;
    let mut out = vec![
        ("trajectory.csv".into(), io::trajectory_csv(&traj)),
        ("trajectory.json".into(), io::trajectory_metadata(&config, &traj)),
    ];
    if config.snapshot_stride == 1 {
        let family = standard_family(&problem);
        let rows = residual_report(&traj, &family).map_err(|e| e.to_string())?;
        let norm = residual_norm(&traj, &family).map_err(|e| e.to_string())?;
        out.push((
            "residual.csv".into(),
            format!("{}{}", io::residual_csv(&rows), io::format_f64(norm)),
        ));
    }
    let lo = problem.x_b;
    let hi = problem.reachable_extent().unwrap_or(lo + 1.0).max(lo + 1.0);
    let probes = random_probes(
        0x5eed,
        16,
        (lo, hi),
        problem.reachable_mass().unwrap_or(1.0).max(1.0),
        6,
    );
    let report = validate_rates(problem.rates.as_ref(), &SampleGrid::new(lo, hi, 101), &probes);
    out.push(("validation.json".into(), io::validation_json(&report)));
    if let Some(section) = &config.study {
        let study = config.study_config().map_err(|e| e.to_string())?;
        let report = convergence_study(&problem, &study).map_err(|e| e.to_string())?;
        out.push(("converge.csv".into(), io::converge_csv(&report, false)));
        out.push((
            "converge_summary.json".into(),
            ConvergeSummary::new(&report, &section.expect).to_json(),
        ));
    }
    Ok(out)
}

fn determinism() -> Outcome {
    let mut files = 0;
    let names = all_configs();
    for name in &names {
        let first = artifacts(name)?;
        let second = artifacts(name)?;
        for ((file, a), (_, b)) in first.iter().zip(&second) {
            ensure(
                a.as_bytes() == b.as_bytes(),
                format!("{name}: {file} differs between invocations"),
            )?;
            files += 1;
        }
    }
    Ok(format!("{} configs, {files} artifacts byte-identical", names.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("flat metric correctness", 10.0, flat_metric),
        ("interior exactness", 5.0, interior_exactness),
        ("mass and tail bounds", 30.0, mass_and_tail_bounds),
        ("residual algebra", 60.0, residual_algebra),
        ("residual rate", 120.0, residual_rate),
        ("solution convergence", 300.0, solution_convergence),
        ("original-formulation bounds", 120.0, original_formulation),
        ("determinism", f64::INFINITY, determinism),
    ];
    let mut failed = 0;
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let elapsed = started.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; took {elapsed:.1} s, budget {budget} s")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name} ({elapsed:.2} s): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name} ({elapsed:.2} s): {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
