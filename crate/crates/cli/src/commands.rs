use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use bregman_ep::properties::{run_suites, ALL_SUITES};
use bregman_ep::schedule::{validate_schedule, ValidationOptions};
use bregman_ep::solver::IterateState;
use bregman_ep::{trace, LinearMap, Preset, RunOutcome, RunStatus, Solver, TraceRow, Vector};
use serde::Serialize;

use crate::config::{self, Loaded};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_MAX_ITERS: u8 = 3;
pub const EXIT_STAGE: u8 = 4;

const ASSUMPTION_SAMPLES: usize = 1000;
const ASSUMPTION_SEED: u64 = 7;

const REPRODUCE_ROWS: usize = 10;
const Y_RATIO: f64 = 23.0 / 64.0;
const Z_RATIO: f64 = 1841.0 / 4096.0;
const RATIO_TOL: f64 = 1e-12;

fn load_or_report(path: &Path) -> Result<Loaded, u8> {
    config::load(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_INPUT
    })
}

/// Schedule report plus sampled assumption checks; `true` when all pass.
fn report_validation(solver: &Solver, horizon: usize, out: &mut impl Write) -> io::Result<bool> {
    let p = &solver.problem;
    let report = validate_schedule(&solver.schedule, horizon, p.c1, p.c2, ValidationOptions::default());
    write!(out, "{report}")?;
    let mut passed = report.passed();
    match p.check_assumptions(ASSUMPTION_SAMPLES, ASSUMPTION_SEED) {
        Ok(checks) => {
            for c in checks {
                writeln!(
                    out,
                    "{:<24} {} (worst {:.3e} over {} samples)",
                    c.name,
                    if c.report.passed { "ok" } else { "VIOLATED" },
                    c.report.worst,
                    c.report.samples
                )?;
                passed &= c.report.passed;
            }
        }
        Err(e) => {
            writeln!(out, "assumption sampling failed: {e}")?;
            passed = false;
        }
    }
    Ok(passed)
}

pub fn validate(path: &Path) -> u8 {
    let loaded = match load_or_report(path) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let mut out = io::stdout().lock();
    match report_validation(&loaded.solver, loaded.run.max_iters, &mut out) {
        Ok(true) => {
            let _ = writeln!(out, "valid");
            EXIT_OK
        }
        Ok(false) => {
            let _ = writeln!(out, "invalid");
            EXIT_FAILED
        }
        Err(_) => EXIT_INPUT,
    }
}

pub struct RunFlags<'a> {
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub anchor: Option<Vector>,
    pub trace_out: Option<&'a Path>,
    pub artifact_out: Option<&'a Path>,
}

#[derive(Serialize)]
struct RunArtifact<'a> {
    config: &'a str,
    trace: &'a [TraceRow],
    solution: &'a Vector,
    status: String,
    wall_time_seconds: f64,
}

fn status_text(status: &RunStatus) -> String {
    match status {
        RunStatus::Converged => "converged".into(),
        RunStatus::MaxIters => "max-iters".into(),
        RunStatus::Error(e) => format!("error: {e}"),
    }
}

fn write_trace(outcome: &RunOutcome, dim: usize, path: Option<&Path>) -> Result<(), String> {
    match path {
        Some(path) => {
            let file = File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?;
            trace::write_csv(&outcome.trace, dim, BufWriter::new(file)).map_err(|e| e.to_string())
        }
        None => trace::write_csv(&outcome.trace, dim, io::stdout().lock()).map_err(|e| e.to_string()),
    }
}

pub fn run(path: &Path, flags: RunFlags) -> u8 {
    let mut loaded = match load_or_report(path) {
        Ok(l) => l,
        Err(code) => return code,
    };
    if let Some(n) = flags.max_iters {
        loaded.run.max_iters = n;
    }
    if let Some(tol) = flags.tol {
        loaded.run.residual_tol = tol;
    }
    if let Some(anchor) = flags.anchor {
        loaded.run.anchor = anchor;
    }
    let mut report = Vec::new();
    match report_validation(&loaded.solver, loaded.run.max_iters, &mut report) {
        Ok(true) => {}
        Ok(false) => {
            eprint!("{}", String::from_utf8_lossy(&report));
            eprintln!("error: configuration fails validation");
            return EXIT_FAILED;
        }
        Err(_) => return EXIT_INPUT,
    }

    let started = Instant::now();
    let outcome = match loaded.solver.run(&loaded.run) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let wall = started.elapsed().as_secs_f64();

    let dim = loaded.solver.problem.spec.dim;
    if let Err(e) = write_trace(&outcome, dim, flags.trace_out) {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    if let Some(path) = flags.artifact_out {
        let artifact = RunArtifact {
            config: &loaded.text,
            trace: &outcome.trace,
            solution: &outcome.solution,
            status: status_text(&outcome.status),
            wall_time_seconds: wall,
        };
        let written = File::create(path)
            .map_err(|e| e.to_string())
            .and_then(|f| serde_json::to_writer_pretty(BufWriter::new(f), &artifact).map_err(|e| e.to_string()));
        if let Err(e) = written {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_INPUT;
        }
    }

    eprintln!(
        "{} after {} iteration(s), solution {} ({wall:.3} s)",
        status_text(&outcome.status),
        outcome.iterations(),
        outcome.solution
    );
    match outcome.status {
        RunStatus::Converged => EXIT_OK,
        RunStatus::MaxIters => EXIT_MAX_ITERS,
        RunStatus::Error(_) => EXIT_STAGE,
    }
}

pub struct ReproduceFlags {
    pub lambda: Option<f64>,
    pub identity_s: bool,
}

/// Runs the corrected worked example and checks `y/x = 23/64` and
/// `z/x = 1841/4096` at every iterate whose prox points are interior to `C`.
pub fn reproduce_example(flags: ReproduceFlags) -> u8 {
    let mut solver = Preset::PaperExample.solver();
    if let Some(lam) = flags.lambda {
        solver.schedule.lambda = bregman_ep::Sequence::constant(lam);
    }
    if flags.identity_s {
        solver.problem.map = LinearMap::identity(1);
    }
    let lam = solver.schedule.lambda(1);
    let cfg = Preset::PaperExample.run_config();

    println!("worked example: x1 = {}, anchor = {}, lambda = {lam}", cfg.x1, cfg.anchor);
    println!(
        "{:>3} {:>24} {:>24} {:>24} {:>20} {:>20}",
        "n", "x_n", "y_n", "z_n", "y_n/x_n", "z_n/x_n"
    );
    let mut state = IterateState::initial(cfg.x1.clone());
    let mut mismatches = 0;
    let mut checked = 0;
    for _ in 0..REPRODUCE_ROWS {
        let next = match solver.step(&state, &cfg.anchor) {
            Ok(next) => next,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_FAILED;
            }
        };
        let stages = next.stages.as_ref().expect("a step records its stages");
        let (x, y, z) = (state.x[0], stages.y[0], stages.z[0]);
        let interior = |t: f64| x != 0.0 && t > 0.0 && t < 2.0;
        let mut notes = Vec::new();
        for (name, value, expected) in [("y", y, Y_RATIO), ("z", z, Z_RATIO)] {
            if !interior(value) {
                notes.push(format!("{name} on boundary"));
                continue;
            }
            checked += 1;
            if (value / x - expected).abs() > RATIO_TOL {
                mismatches += 1;
                notes.push(format!("{name} MISMATCH"));
            }
        }
        let note = if notes.is_empty() { String::new() } else { format!("  ({})", notes.join(", ")) };
        println!(
            "{:>3} {:>24.17e} {:>24.17e} {:>24.17e} {:>20.15} {:>20.15}{note}",
            state.n,
            x,
            y,
            z,
            y / x,
            z / x
        );
        state = next;
    }
    println!(
        "closed-form ratios for lambda = {lam}: y/x = {:.15}, z/x = {:.15}",
        (1.0 - 9.0 * lam) / (1.0 + 32.0 * lam),
        (1.0 - 9.0 * lam * (1.0 - 9.0 * lam) / (1.0 + 32.0 * lam)) / (1.0 + 32.0 * lam)
    );
    println!("expected: y/x = 23/64 = {Y_RATIO:.15}, z/x = 1841/4096 = {Z_RATIO:.15}");
    if mismatches == 0 && checked > 0 {
        println!("all {checked} interior ratio checks match");
        EXIT_OK
    } else {
        println!("{mismatches} of {checked} interior ratio checks mismatch");
        EXIT_FAILED
    }
}

pub fn check_properties(seed: u64) -> u8 {
    let started = Instant::now();
    let mut failed = 0;
    for result in run_suites(&ALL_SUITES, seed) {
        match result {
            Ok(r) => {
                failed += usize::from(!r.passed());
                println!("{r}");
            }
            Err(e) => {
                failed += 1;
                println!("[FAIL] suite aborted: {e}");
            }
        }
    }
    println!(
        "{} suite(s), {failed} failed, seed {seed}, {:.2} s",
        ALL_SUITES.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
