use std::process::Command;

use ehd::diagnostics::CSV_HEADER;

fn ehd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ehd"))
}

const SMALL: [&str; 6] = [
    "--set",
    "grid.nx=16",
    "--set",
    "grid.ny=16",
    "--set",
    "time.t_max=0.01",
];

#[test]
fn run_writes_csv_with_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let st = ehd()
        .args(["run", "--preset", "relax-small-mass", "--quiet", "--out"])
        .arg(dir.path())
        .args(SMALL)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert!(dir.path().join("stationary/phi.txt").exists());
}

#[test]
fn run_without_output_dir_prints_csv() {
    let out = ehd().args(["run", "--quiet"]).args(SMALL).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
}

#[test]
fn stationary_symmetric_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let st = ehd()
        .args([
            "stationary",
            "--quiet",
            "--set",
            "initial.M=0.3",
            "--set",
            "initial.N=0.3",
            "--set",
            "grid.nx=32",
            "--set",
            "grid.ny=32",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let meta = std::fs::read_to_string(dir.path().join("metadata.txt")).unwrap();
    let v: f64 = meta
        .lines()
        .find_map(|l| l.strip_prefix("phi_max_abs = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(v <= 1e-10);
}

#[test]
fn check_symmetric_null_passes() {
    let out = ehd()
        .args([
            "check",
            "--quiet",
            "--preset",
            "symmetric-null",
            "--set",
            "initial.N=0.05",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() > 10);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[grid]\nnx = 12\nny = 12\n[time]\nt_max = 0.004\n").unwrap();
    let out = ehd()
        .args(["run", "--quiet", "--config"])
        .arg(&cfg)
        .args(["--set", "time.record_every=1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    // header plus t = 0 and four steps
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 6);
}

#[test]
fn usage_errors_exit_one() {
    let out = ehd().arg("--bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert_eq!(ehd().output().unwrap().status.code(), Some(1));
    assert_eq!(
        ehd()
            .args(["run", "--set", "grid.nz=4"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        ehd()
            .args(["run", "--preset", "nope"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        ehd()
            .args(["run", "--config", "/nonexistent/x.toml"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
    assert_eq!(ehd().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn solver_failure_exits_two() {
    // a residual target below roundoff is unreachable
    let out = ehd()
        .args([
            "stationary",
            "--quiet",
            "--set",
            "initial.M=5",
            "--set",
            "initial.N=40",
            "--set",
            "tolerances.pb=1e-300",
        ])
        .args(["--set", "grid.nx=16", "--set", "grid.ny=16"])
        .args(["--out"])
        .arg(tempfile::tempdir().unwrap().path())
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn failing_check_exits_three() {
    // strong charges drive forces large enough that the projected velocity
    // misses the absolute divergence threshold of the check suite
    let out = ehd()
        .args([
            "check",
            "--quiet",
            "--steps",
            "5",
            "--set",
            "initial.M=50",
            "--set",
            "initial.N=100",
        ])
        .args([
            "--set",
            "grid.nx=16",
            "--set",
            "grid.ny=16",
            "--set",
            "time.dt=0.05",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAIL ")));
}

#[test]
fn presets_are_listed() {
    let out = ehd().arg("presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for p in [
        "symmetric-null",
        "relax-small-mass",
        "vortex-charge",
        "near-equilibrium",
    ] {
        assert!(text.contains(p));
    }
}
