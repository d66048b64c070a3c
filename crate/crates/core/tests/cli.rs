use std::path::{Path, PathBuf};
use std::process::Command;

use cmot::cli::run_cli;

const PROBLEMS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/problems");

fn problem(name: &str) -> String {
    format!("{PROBLEMS}/{name}.toml")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["cmot"];
    full.extend_from_slice(args);
    let code = run_cli(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn solve_identity(dir: &Path) -> (i32, String) {
    let out_dir = dir.to_str().unwrap();
    let (code, out, err) = run(&["solve", &problem("identity"), "--out-dir", out_dir, "--snapshots", "3"]);
    assert!(err.is_empty(), "{err}");
    (code, out)
}

#[test]
fn validate_reports_boundary_for_default_steps() {
    let (code, out, _) = run(&["validate", &problem("identity")]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().filter(|l| l.starts_with("alg23_")).collect();
    assert_eq!(lines.len(), 2, "{out}");
    assert!(lines.iter().all(|l| l.trim_end().ends_with("Boundary")), "{out}");

    let (code, out, _) = run(&["validate", &problem("identity"), "--algorithm", "alg1"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.trim_end().ends_with("Strict")).count(), 3, "{out}");

    let (code, out, _) = run(&["validate", &problem("translation")]);
    assert_eq!(code, 0);
    assert!(out.lines().filter(|l| l.starts_with("alg23_")).all(|l| l.trim_end().ends_with("Strict")), "{out}");
}

#[test]
fn solve_identity_writes_everything() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = solve_identity(dir.path());
    assert_eq!(code, 0);
    assert!(out.contains("converged = true"), "{out}");

    let history = cmot::io::read_history(dir.path().join("history.csv")).unwrap();
    assert!(!history.is_empty());
    // The tail of the stopping quantity is non-increasing (up to roundoff:
    // the static solution is reached almost at once).
    let changes: Vec<f64> = history.records.iter().map(|r| r.density_change).collect();
    let tail = &changes[changes.len().saturating_sub(3)..];
    assert!(tail.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{tail:?}");
    assert!(*changes.last().unwrap() < 1e-3);

    let relative = cmot::io::read_history(dir.path().join("history_relative.csv")).unwrap();
    assert_eq!(relative.len(), history.len());

    let frames = cmot::io::read_frames(dir.path().join("frames.cmot")).unwrap();
    assert_eq!((frames.grid.nt, frames.grid.nx, frames.grid.ny), (17, 16, 16));
    for n in 0..3 {
        assert!(dir.path().join(format!("density_{n:03}.pgm")).exists());
    }
    assert!(!dir.path().join("density_003.pgm").exists());
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("iterations = ") && summary.contains("elapsed_seconds"));

    let (code, out, _) = run(&["info", dir.path().join("frames.cmot").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("grid 17x16x16") && out.contains("fields rho,mx,my"), "{out}");
}

#[test]
fn iteration_budget_exhaustion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let (code, out, _) = run(&["solve", &problem("translation"), "--out-dir", d, "--max-iters", "3", "--quiet"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(std::fs::read_to_string(dir.path().join("summary.txt")).unwrap().contains("converged = false"));
    assert_eq!(cmot::io::read_history(dir.path().join("history.csv")).unwrap().len(), 3);
}

#[test]
fn usage_and_input_errors_exit_one() {
    let (code, _, err) = run(&["solve", &problem("identity"), "--no-such-flag"]);
    assert_eq!(code, 1);
    assert!(err.contains("Usage"), "{err}");
    let (code, _, err) = run(&[]);
    assert_eq!(code, 1);
    assert!(err.contains("Usage"), "{err}");
    let (code, _, err) = run(&["solve", "/nonexistent.toml"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"), "{err}");
    let (code, _, _) = run(&["solve", &problem("identity"), "--algorithm", "alg9"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["info", &problem("identity")]);
    assert_eq!(code, 1);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("solve") && out.contains("validate") && out.contains("info"));
}

fn output_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    solve_identity(a.path());
    solve_identity(b.path());
    let (fa, fb) = (output_files(a.path()), output_files(b.path()));
    assert_eq!(fa.iter().map(|p| p.file_name()).collect::<Vec<_>>(), fb.iter().map(|p| p.file_name()).collect::<Vec<_>>());
    for (x, y) in fa.iter().zip(&fb) {
        let (bx, by) = (std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        if x.file_name().unwrap() == "summary.txt" {
            let strip = |b: &[u8]| -> String {
                String::from_utf8_lossy(b).lines().filter(|l| !l.starts_with("elapsed_seconds")).collect::<Vec<_>>().join("\n")
            };
            assert_eq!(strip(&bx), strip(&by));
        } else {
            assert_eq!(bx, by, "{}", x.display());
        }
    }
}

#[test]
fn binary_honours_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_cmot"))
        .args(["solve", &problem("identity"), "--quiet", "--out-dir"])
        .arg(dir.path())
        .env("CMOT_THREADS", "1")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_cmot"))
        .args(["solve", &problem("identity"), "--quiet", "--out-dir"])
        .arg(dir.path())
        .env("CMOT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("CMOT_THREADS"));
}
