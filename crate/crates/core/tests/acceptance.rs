//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bregman_ep::oracle::golden_section;
use bregman_ep::problem::prox_step;
use bregman_ep::properties::{SuiteResult, ACCEPTANCE_SUITES, DEFAULT_SEED};
use bregman_ep::{Bifunction, LegendreSpec, Preset, QuadraticBifunction, RunConfig, RunStatus, Solver, Vector, Wiring};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LAMBDA: f64 = 1.0 / 32.0;
const Y_RATIO: f64 = 23.0 / 64.0;
const Z_RATIO: f64 = 1841.0 / 4096.0;

struct Verdict {
    passed: bool,
    detail: String,
}

fn s(v: f64) -> Vector {
    Vector::scalar(v).unwrap()
}

fn worked_g() -> Bifunction {
    QuadraticBifunction::worked_example().into()
}

/// Worked-example prox objective `λ g(a, t) + ½(t − b)²`.
fn prox_objective(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    move |t| LAMBDA * (16.0 * t * t + 9.0 * a * t - 25.0 * a * a) + 0.5 * (t - b).powi(2)
}

fn prox_ratios() -> Verdict {
    let p = bregman_ep::presets::worked_example_problem();
    let g = worked_g();
    let (mut closed, mut oracle) = (0.0f64, 0.0f64);
    // z/x = 1841/4096 keeps z interior for x < 4096/1841·2
    for i in 1..=200 {
        let x = 4.0 * i as f64 / 200.0;
        let y = prox_step(&p.spec, &g, &p.set, &s(x), &s(x), LAMBDA).unwrap()[0];
        let z = prox_step(&p.spec, &g, &p.set, &s(y), &s(x), LAMBDA).unwrap()[0];
        closed = closed.max((y / x - Y_RATIO).abs()).max((z / x - Z_RATIO).abs());
        let yo = golden_section(prox_objective(x, x), 0.0, 2.0, 1e-10).unwrap();
        let zo = golden_section(prox_objective(yo, x), 0.0, 2.0, 1e-10).unwrap();
        oracle = oracle.max((yo / x - Y_RATIO).abs()).max((zo / x - Z_RATIO).abs());
    }
    Verdict {
        passed: closed <= 1e-12 && oracle <= 1e-8,
        detail: format!("200 anchors in (0, 4]: closed-form error {closed:.2e} (<= 1e-12), golden-section error {oracle:.2e} (<= 1e-8)"),
    }
}

fn lipschitz_identity() -> Verdict {
    let spec = LegendreSpec::squared_norm(1);
    let g = worked_g();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let [x, y, z] = [0; 3].map(|_| s(rng.random_range(0.0..=2.0)));
        let d = |a: &Vector, b: &Vector| spec.bregman_distance(a, b).unwrap();
        let e = |a: &Vector, b: &Vector| g.evaluate(a, b).unwrap();
        let value = e(&x, &y) + e(&y, &z) - e(&x, &z) + 9.0 * d(&x, &y) + 9.0 * d(&y, &z) - 9.0 * d(&x, &z);
        worst = worst.max(value.abs());
    }
    Verdict {
        passed: worst <= 1e-10,
        detail: format!("10^4 triples in [0,2]^3: |identity| <= {worst:.2e} (<= 1e-10)"),
    }
}

fn nonexpansive_ratio() -> Verdict {
    let p = bregman_ep::presets::worked_example_problem();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 1);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    while pairs < 10_000 {
        let (x, y) = (s(rng.random_range(0.0..=2.0)), s(rng.random_range(0.0..=2.0)));
        // rounding of Sx, Sy costs about eps·|x| / |x − y| relative, which
        // is past 1e-12 once the pair is closer than ~1e-3
        if (x[0] - y[0]).abs() < 1e-2 {
            continue;
        }
        let d = |a: &Vector, b: &Vector| p.spec.bregman_distance(a, b).unwrap();
        let ratio = d(&p.map.apply(&x).unwrap(), &p.map.apply(&y).unwrap()) / d(&x, &y);
        worst = worst.max((ratio - 1.0 / 9.0).abs());
        pairs += 1;
    }
    Verdict {
        passed: worst <= 1e-12,
        detail: format!("10^4 pairs in [0,2]^2 with |x - y| >= 0.01: |D(Sx,Sy)/D(x,y) - 1/9| <= {worst:.2e} (<= 1e-12)"),
    }
}

fn paper_run_config() -> RunConfig {
    RunConfig::new(s(5.0), s(1.0))
        .with_max_iters(20_000)
        .with_tol(1e-10)
        .with_target(s(0.0))
}

fn golden_values() -> Vec<(usize, f64)> {
    include_str!("golden/paper_example.golden")
        .lines()
        .filter_map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f.len() == 3 && f[1] == "x").then(|| (f[0].parse().unwrap(), f[2].parse().unwrap()))
        })
        .collect()
}

fn convergence() -> Verdict {
    let out = Preset::PaperExample.solver().run(&paper_run_config()).unwrap();
    let reached = out.trace.iter().find(|r| r.x[0].abs() <= 0.05).map(|r| r.n);
    let mut golden_err = 0.0f64;
    let mut golden_checked = 0;
    for (n, want) in golden_values().into_iter().filter(|(n, _)| [1, 10, 100].contains(n)) {
        golden_err = golden_err.max((out.trace[n - 1].x[0] - want).abs());
        golden_checked += 1;
    }
    let final_x = out.solution[0];
    Verdict {
        passed: reached.is_some()
            && final_x.abs() <= 0.05
            && golden_checked == 3
            && golden_err <= 1e-12
            && !matches!(out.status, RunStatus::Error(_)),
        detail: format!(
            "|x_n| <= 0.05 first at n = {}, x after {} iterations = {final_x:.3e}; golden n = 1, 10, 100 error {golden_err:.2e} (<= 1e-12)",
            reached.map_or("never".into(), |n| n.to_string()),
            out.iterations()
        ),
    }
}

fn lemma_descent() -> Verdict {
    let out = Preset::PaperExample.solver().run(&paper_run_config()).unwrap();
    let slacks: Vec<f64> = out.trace.iter().filter_map(|r| r.lemma_arg_slack).collect();
    let worst = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    Verdict {
        passed: slacks.len() == out.trace.len() && !slacks.is_empty() && worst >= -1e-8,
        detail: format!("{} iterations with x* = 0: minimum slack {worst:.3e} (>= -1e-8)", slacks.len()),
    }
}

fn projection_equivalence() -> Verdict {
    let cfg = RunConfig::new(s(5.0), s(1.0)).with_max_iters(1_000).with_tol(f64::MIN_POSITIVE);
    let resolvent = Preset::PaperExample.solver().run(&cfg).unwrap();
    let projection = Solver::new(
        bregman_ep::presets::worked_example_problem(),
        Preset::PaperExample.schedule(),
    )
    .with_wiring(Wiring::Projection)
    .run(&cfg)
    .unwrap();
    let worst = resolvent
        .trace
        .iter()
        .zip(&projection.trace)
        .map(|(a, b)| a.x.dist_inf(&b.x).unwrap())
        .fold(0.0f64, f64::max);
    let rows = resolvent.trace.len().min(projection.trace.len());
    Verdict {
        passed: rows == 1_000 && projection.trace.len() == 1_000 && worst <= 1e-12,
        detail: format!("{rows} iterations: max |x_n(phi = 0) - x_n(projection)| = {worst:.2e} (<= 1e-12)"),
    }
}

fn invariant_suites() -> Verdict {
    let mut lines = Vec::new();
    let mut passed = true;
    for suite in ACCEPTANCE_SUITES {
        match suite(DEFAULT_SEED) {
            Ok(r) => {
                passed &= r.passed();
                lines.push(format!("      {}", SuiteResult::to_string(&r)));
            }
            Err(e) => {
                passed = false;
                lines.push(format!("      [FAIL] suite aborted: {e}"));
            }
        }
    }
    Verdict {
        passed,
        detail: format!("{} suites, seed {DEFAULT_SEED}\n{}", ACCEPTANCE_SUITES.len(), lines.join("\n")),
    }
}

fn multi_omega() -> Verdict {
    let cfg = Preset::MultiOmega.run_config();
    let out = Preset::MultiOmega.solver().run(&cfg).unwrap();
    let err = (out.solution[0] - 0.7).abs();
    Verdict {
        passed: cfg.anchor == s(0.7) && err <= 1e-6,
        detail: format!(
            "x1 = {}, u = 0.7: limit {} after {} iterations, |x - 0.7| = {err:.2e} (<= 1e-6)",
            cfg.x1,
            out.solution[0],
            out.iterations()
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict, Duration); 8] = [
        ("1 prox ratio reproduction", prox_ratios, Duration::from_secs(1)),
        ("2 Bregman-Lipschitz identity", lipschitz_identity, Duration::from_secs(1)),
        ("3 nonexpansiveness ratio", nonexpansive_ratio, Duration::from_secs(1)),
        ("4 convergence of the full algorithm", convergence, Duration::from_secs(5)),
        ("5 two-step descent along the trajectory", lemma_descent, Duration::from_secs(5)),
        ("6 zero-resolvent equals projection wiring", projection_equivalence, Duration::from_secs(2)),
        ("7 invariant suites", invariant_suites, Duration::from_secs(30)),
        ("8 multi-point solution set anchor", multi_omega, Duration::from_secs(2)),
    ];
    let mut failures = 0;
    for (name, check, budget) in criteria {
        let started = Instant::now();
        let verdict = check();
        let elapsed = started.elapsed();
        let in_time = elapsed <= budget;
        let passed = verdict.passed && in_time;
        failures += usize::from(!passed);
        println!(
            "[{}] {name} ({:.3} s, budget {} s{})\n      {}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" },
            verdict.detail
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
