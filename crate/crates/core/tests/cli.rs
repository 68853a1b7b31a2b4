use std::path::Path;
use std::process::{Command, Output};

use hybrid_ide::problem::{csv_string, run, RunOptions};
use hybrid_ide::reproduce::{example_spec, EXAMPLE_ONE_R3Q4, EXAMPLE_TWO};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybrid-ide"))
}

fn problem(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("problems")
        .join(name)
}

fn solve(args: &[&str]) -> Output {
    bin().arg("solve").args(args).output().unwrap()
}

#[test]
fn solve_writes_csv_to_stdout_and_report_to_stderr() {
    let out = solve(&[problem("example2.prob").to_str().unwrap()]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,y_approx,y_exact,abs_error"));
    assert_eq!(lines.count(), 10);
    assert!(!csv.contains('\r'));
    let report = String::from_utf8(out.stderr).unwrap();
    assert!(report.contains("converged"), "{report}");
    assert!(report.contains("r = 3, q = 4"), "{report}");
}

#[test]
fn csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let file = problem("example1_r3q4.prob");
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("run{i}.csv"));
        let report = dir.path().join(format!("run{i}.txt"));
        let out = solve(&[
            file.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    let spec = example_spec(EXAMPLE_ONE_R3Q4, "bundled");
    let lib = csv_string(&run(&spec, &RunOptions::default()).unwrap());
    assert_eq!(lib.as_bytes(), outputs[0].as_slice());
}

#[test]
fn overrides_change_basis_and_grid() {
    let out = solve(&[
        problem("example1.prob").to_str().unwrap(),
        "--r",
        "4",
        "--q",
        "3",
        "--grid-size",
        "5",
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let report = String::from_utf8(out.stderr).unwrap();
    assert!(report.contains("r = 4, q = 3"), "{report}");
}

#[test]
fn supplied_bound_constant_is_used() {
    let out = solve(&[problem("example2.prob").to_str().unwrap(), "--bound-m", "2"]);
    assert!(out.status.success());
    let report = String::from_utf8(out.stderr).unwrap();
    assert!(report.contains("0.010417"), "{report}");
    assert!(report.contains("supplied"), "{report}");
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let out = solve(&[
        problem("example1_r3q4.prob").to_str().unwrap(),
        "--max-iter",
        "0",
    ]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("did not converge"), "{stderr}");
}

#[test]
fn missing_file_is_an_error() {
    let out = solve(&["/nonexistent/problem.prob"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/problem.prob"));
}

#[test]
fn grid_errors_stay_below_bound() {
    for text in [EXAMPLE_ONE_R3Q4, EXAMPLE_TWO] {
        let spec = example_spec(text, "bundled");
        let out = run(
            &spec,
            &RunOptions {
                grid_size: Some(200),
                ..Default::default()
            },
        )
        .unwrap();
        let bound = out.bound.unwrap().value;
        assert!(out.max_abs_error().unwrap() <= bound);
    }
}

#[test]
fn reproduce_paper_reports_each_case() {
    let out = bin()
        .args(["reproduce-paper", "--verbose"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for label in ["fredholm r=2 q=1", "fredholm r=3 q=4", "volterra r=3 q=4"] {
        assert!(text.contains(label), "{text}");
    }
    assert!(
        text.contains("fredholm r=3 q=4: 24/24 checks pass"),
        "{text}"
    );
    assert!(
        text.contains("volterra r=3 q=4: 24/24 checks pass"),
        "{text}"
    );
    // the r=2 q=1 coefficient vector does not match the stored closed form
    assert!(!out.status.success());
}
