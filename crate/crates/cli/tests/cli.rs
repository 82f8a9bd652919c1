//! The `stcontrol` binary: exit codes and emitted artifacts.

use std::path::Path;
use std::process::{Command, Output};

fn stcontrol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stcontrol"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_bad_usage() {
    assert_eq!(code(&stcontrol(&["--help"])), 0);
    let help = stcontrol(&["convergence", "--help"]);
    assert_eq!(code(&help), 0);
    let text = String::from_utf8_lossy(&help.stdout);
    for flag in ["--preset", "--config", "--layers", "--adjoint-space", "--quad-subdiv", "--out", "--serial", "--mode"] {
        assert!(text.contains(flag), "{flag}");
    }
    assert!(text.contains("reference_layers"));
    assert_eq!(code(&stcontrol(&[])), 1);
    assert_eq!(code(&stcontrol(&["frobnicate"])), 1);
    assert_eq!(code(&stcontrol(&["mesh", "--bogus"])), 1);
    assert_eq!(code(&stcontrol(&["mesh", "--preset", "nope"])), 1);
    assert_eq!(code(&stcontrol(&["solve", "--adjoint-space", "V_h"])), 1);
}

#[test]
fn mesh_command_writes_a_valid_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let out = stcontrol(&["mesh", "--preset", "example1-static", "--layers", "8", "--out", path(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("straddling 0"));
    assert!(stdout.contains("conformity 0"));
    assert!(dir.path().join("mesh_8.stmesh").exists());
}

#[test]
fn single_layer_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = stcontrol(&["mesh", "--layers", "1", "--out", path(dir.path())]);
    assert_eq!(code(&out), 1);
}

#[test]
fn reversed_offsets_are_a_geometry_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "[problem]\noffsets = 0.6 0.4\n").unwrap();
    let out = stcontrol(&["mesh", "--config", path(&cfg), "--layers", "4", "--out", path(dir.path())]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("a < b"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let target = blocker.join("sub");
    let out = stcontrol(&["solve", "--layers", "4", "--out", path(&target)]);
    assert_eq!(code(&out), 4);
    let missing = dir.path().join("missing.cfg");
    assert_eq!(code(&stcontrol(&["solve", "--config", path(&missing)])), 4);
}

#[test]
fn static_solve_summary_is_near_the_published_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = stcontrol(&["solve", "--preset", "example1-static", "--layers", "30", "--out", path(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let line = std::fs::read_to_string(dir.path().join("summary.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    let e = v["error"].as_f64().unwrap();
    assert!(e <= 2.5 * 4.732 && e >= 4.732 / 2.5, "{e}");
    assert!(v["residual"].as_f64().unwrap() <= 1e-8);
    assert!(v["star_u"].as_f64().unwrap() >= v["triple_u"].as_f64().unwrap());
    let rows = stcontrol::solver::read_solution_csv(dir.path().join("solution.csv")).unwrap();
    assert_eq!(rows.len() as u64, v["vertices"].as_u64().unwrap());
    for f in ["u.svg", "p.svg", "z_f.svg"] {
        assert!(std::fs::read_to_string(dir.path().join(f)).unwrap().contains("<polygon"));
    }
}

#[test]
fn zero_data_gives_zero_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.cfg");
    std::fs::write(&cfg, "[problem]\nname = quiet\ndesired_state = zero\n[discretization]\nlayers = 10\n").unwrap();
    let out = stcontrol(&["solve", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let line = std::fs::read_to_string(dir.path().join("summary.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    for key in ["error", "triple_u", "star_u", "triple_p", "residual"] {
        assert_eq!(v[key].as_f64(), Some(0.0), "{key}");
    }
}

#[test]
fn reference_mode_convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = stcontrol(&[
        "convergence",
        "--preset",
        "example1-moving",
        "--layers",
        "4,6,8",
        "--mode",
        "reference",
        "--reference-layers",
        "24",
        "--plot",
        "--serial",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read(dir.path().join("convergence.csv")).unwrap();
    let rows = stcontrol::metrics::read_convergence_rows(&csv[..]).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].order.is_none() && rows[2].order.is_some());
    assert!(dir.path().join("convergence.svg").exists());
    assert_eq!(std::fs::read_to_string(dir.path().join("levels.jsonl")).unwrap().lines().count(), 3);

    let bad = stcontrol(&["convergence", "--layers", "4,8", "--out", path(dir.path())]);
    assert_eq!(code(&bad), 1);
    let coarse_ref = stcontrol(&[
        "convergence", "--layers", "4,6,8", "--mode", "reference", "--reference-layers", "8", "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&coarse_ref), 1);
}

#[test]
fn selftest_passes_on_both_presets() {
    for preset in ["example1-static", "example1-moving"] {
        let out = stcontrol(&["selftest", "--preset", preset, "--seed", "5", "--layers", "12"]);
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert_eq!(code(&out), 0, "{stdout}");
        assert!(!stdout.contains("[FAIL]"));
        assert_eq!(stdout.matches("[PASS]").count(), 6);
    }
}
