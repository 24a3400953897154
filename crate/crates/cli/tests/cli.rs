use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nqp(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nqp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn reference_commands_pass() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["spectrum", "pipeline", "export-field"] {
        let o = nqp(&[cmd], dir.path());
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(dir.path().join("spectrum.txt").exists());
    assert!(dir.path().join("p3.field").exists());
    assert!(dir.path().join("perturbation_tilde.field").exists());
}

#[test]
fn reference_config_file_matches_builtin_defaults() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = configs().join("reference.cfg");
    assert_eq!(nqp(&["pipeline"], a.path()).status.code(), Some(0));
    assert_eq!(nqp(&["pipeline", "--config", cfg.to_str().unwrap()], b.path()).status.code(), Some(0));
    let read = |d: &Path| fs::read(d.join("pipeline.txt")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn oversized_perturbations_exit_with_a_named_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("perturbed_x100.cfg");
    let o = nqp(&["pipeline", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("[[P_2]] <= mu_1"), "{err}");
}

#[test]
fn io_and_name_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nqp(&["verify", "nonexistent"], dir.path()).status.code(), Some(1));
    assert_eq!(nqp(&["spectrum", "--config", "/no/such/file.cfg"], dir.path()).status.code(), Some(1));
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "theta = not-a-number\n").unwrap();
    let o = nqp(&["spectrum", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn verify_reports_are_deterministic_and_seed_dependent() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(nqp(&["verify", "bracket", "--seed", "5"], d.path()).status.code(), Some(0));
    }
    assert_eq!(nqp(&["verify", "bracket", "--seed", "6"], c.path()).status.code(), Some(0));
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("verify_bracket.txt")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn single_harmonic_normalize_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("single_harmonic.cfg");
    let o = nqp(&["normalize", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("p_star.field").exists());
}
