use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bregman_ep::trace::read_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bregman-ep"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn validate_shipped_configs() {
    for name in [
        "paper-example.toml",
        "projection-only.toml",
        "multi-omega.toml",
        "zero-start.toml",
        "entropy-simplex.toml",
    ] {
        let out = bin().arg("validate").arg(config(name)).output().unwrap();
        assert_eq!(code(&out), 0, "{name}: {}", stdout(&out));
        assert!(stdout(&out).ends_with("valid\n"));
    }
}

#[test]
fn validate_literal_schedule_cites_first_iterate() {
    let out = bin().arg("validate").arg(config("paper-literal.toml")).output().unwrap();
    assert_eq!(code(&out), 1);
    let report = stdout(&out);
    assert!(report.contains("n=1: alpha2 not in (0,1) (value -0.41666"), "{report}");
    assert!(report.ends_with("invalid\n"));
}

#[test]
fn validate_reports_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(&dir, "[problem\npreset = 1\n");
    assert_eq!(code(&bin().arg("validate").arg(&bad).output().unwrap()), 2);

    let unknown = write_config(&dir, "[problem]\npreset = \"nope\"\n");
    let out = bin().arg("validate").arg(&unknown).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown preset 'nope'"));

    let missing = dir.path().join("absent.toml");
    assert_eq!(code(&bin().arg("validate").arg(&missing).output().unwrap()), 2);
}

#[test]
fn validate_flags_violated_assumptions() {
    let dir = tempfile::tempdir().unwrap();
    // S(x) = 2x expands distances fourfold
    let path = write_config(&dir, "[problem]\npreset = \"paper-example\"\nmap = 2.0\n");
    let out = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("S Bregman nonexpansive   VIOLATED"));
}

#[test]
fn run_paper_example_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let artifact = dir.path().join("run.json");
    let out = bin()
        .arg("run")
        .arg(config("paper-example.toml"))
        .arg("--trace-out")
        .arg(&csv)
        .arg("--artifact-out")
        .arg(&artifact)
        .output()
        .unwrap();
    // 2·10⁴ iterations do not reach a 1e-10 step at the O(1/n) rate
    assert_eq!(code(&out), 3, "{}", stderr(&out));

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,x_0,y_0,z_0,residual,df_target,lemma_arg_slack,projection_cert_slack"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert_eq!(first[2].parse::<f64>().unwrap(), 1.796875);

    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 20_000);
    assert!(rows.last().unwrap().x[0].abs() <= 0.05);

    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&artifact).unwrap()).unwrap();
    let echo = json["config"].as_str().unwrap();
    assert_eq!(echo.as_bytes(), std::fs::read(config("paper-example.toml")).unwrap().as_slice());
    assert_eq!(json["trace"].as_array().unwrap().len(), rows.len());
    assert_eq!(json["status"], "max-iters");
    assert!(json["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn run_respects_iteration_cap() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let out = bin()
        .args(["run", "--max-iters", "10", "--trace-out"])
        .arg(&csv)
        .arg(config("paper-example.toml"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
    let rows = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), (1..=10).collect::<Vec<_>>());
}

#[test]
fn run_from_solution_converges_in_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let out = bin()
        .arg("run")
        .arg(config("zero-start.toml"))
        .arg("--trace-out")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].x[0], 0.0);
    assert_eq!(rows[0].residual, 0.0);
}

#[test]
fn run_multi_omega_reaches_anchor() {
    let out = bin().arg("run").arg(config("multi-omega.toml")).output().unwrap();
    assert_eq!(code(&out), 0);
    let rows = read_csv(out.stdout.as_slice()).unwrap();
    assert!((rows.last().unwrap().x[0] - 0.7).abs() <= 1e-6);
}

#[test]
fn run_anchor_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let artifact = dir.path().join("run.json");
    let out = bin()
        .arg("run")
        .arg(config("multi-omega.toml"))
        .args(["--anchor", "1.25", "--artifact-out"])
        .arg(&artifact)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&artifact).unwrap()).unwrap();
    let solution = json["solution"][0].as_f64().unwrap();
    assert!((solution - 1.25).abs() <= 1e-6, "{solution}");
}

#[test]
fn run_stage_error_names_stage() {
    let dir = tempfile::tempdir().unwrap();
    // 0 lies in C = [0, 2] but outside the interior of the entropy domain
    let path = write_config(
        &dir,
        "[problem]\npreset = \"multi-omega\"\nlegendre = \"negative-entropy\"\n\n[run]\nx1 = 0.0\nanchor = 1.0\n",
    );
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("stage y (prox step) failed"), "{}", stderr(&out));
}

#[test]
fn run_rejects_invalid_schedule() {
    let out = bin().arg("run").arg(config("paper-literal.toml")).output().unwrap();
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("fails validation"));
}

#[test]
fn reproduce_example_matches_ratios() {
    let out = bin().arg("reproduce-example").output().unwrap();
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.trim_start().chars().next().is_some_and(|c| c.is_ascii_digit())).count(), 10);
    assert!(text.contains("all 19 interior ratio checks match"));
}

#[test]
fn reproduce_example_detects_other_step_size() {
    let out = bin().args(["reproduce-example", "--lambda", "1/64"]).output().unwrap();
    assert_eq!(code(&out), 1);
    // (1 − 9λ)/(1 + 32λ) at λ = 1/64
    assert!(stdout(&out).contains(&format!("y/x = {:.15}", 55.0 / 96.0)));
}

#[test]
fn reproduce_example_ratios_ignore_map() {
    let out = bin().args(["reproduce-example", "--identity-s"]).output().unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn check_properties_passes() {
    let out = bin().arg("check-properties").output().unwrap();
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(!stdout(&out).contains("[FAIL]"));
}
