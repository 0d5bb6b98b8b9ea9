use std::f64::consts::PI;
use std::process::{Command, Output};

fn bdk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdk"))
        .args(args)
        .env_remove("BDK_LEVEL")
        .output()
        .expect("bdk runs")
}

fn csv_values(out: &Output) -> Vec<Vec<f64>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    lines.next().expect("header");
    lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn invariants_of_z_minus_w_at_origin() {
    let out = bdk(&[
        "invariants",
        "-g",
        "z-w",
        "-p",
        "0,0",
        "-k",
        "0,1",
        "--level",
        "60",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_values(&out);
    let expected = PI * PI / 6.0;
    assert!((rows[0][5] - expected).abs() < 5e-3);
    assert!((rows[1][5] - (expected - 1.0)).abs() < 5e-3);
}

#[test]
fn beurling_invariants_are_one_and_zero() {
    let out = bdk(&[
        "invariants",
        "-g",
        "z",
        "-p",
        "0.3,0.4",
        "-k",
        "0,1",
        "--level",
        "12",
    ]);
    assert!(out.status.success());
    let rows = csv_values(&out);
    assert!((rows[0][5] - 1.0).abs() < 1e-9);
    assert!(rows[1][5].abs() < 1e-9);
}

#[test]
fn oracle_matches_closed_form() {
    let out = bdk(&[
        "invariants",
        "-g",
        "(1+0i)*z - w",
        "-p",
        "0,0",
        "-k",
        "1",
        "--oracle",
        "zw",
    ]);
    assert!(out.status.success());
    assert!((csv_values(&out)[0][5] - (PI * PI / 6.0 - 1.0)).abs() < 1e-6);
    let out = bdk(&["invariants", "-g", "z-w^2", "-p", "0,0", "--oracle", "zw"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(
        bdk(&["invariants", "-g", "", "-p", "0,0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        bdk(&["invariants", "-g", "z-", "-p", "0,0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        bdk(&["invariants", "-g", "z-w", "-p", "0,0", "--rmax", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bdk(&["invariants", "-g", "z-w", "-p", "0.95,0", "--level", "8"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(bdk(&["verify", "no-such-suite"]).status.code(), Some(2));
}

#[test]
fn env_level_overrides_default() {
    let out = Command::new(env!("CARGO_BIN_EXE_bdk"))
        .args(["invariants", "-g", "z-w", "-p", "0,0", "-k", "1"])
        .env("BDK_LEVEL", "10")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(csv_values(&out)[0][7], 10.0);
}

#[test]
fn sweep_is_deterministic_and_ordered() {
    let args = |jobs: &'static str| {
        vec![
            "sweep",
            "-g",
            "z-w",
            "--grid",
            "polar:11x8",
            "-k",
            "1",
            "--level",
            "16",
            "--jobs",
            jobs,
        ]
    };
    let a = bdk(&args("1"));
    let b = bdk(&args("3"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rows = csv_values(&a);
    assert_eq!(rows.len(), 88);
    assert!(rows.iter().all(|r| r[5] <= 2.0));
    let radii: Vec<f64> = rows.iter().map(|r| r[0].hypot(r[1])).collect();
    assert!(radii.windows(2).all(|w| w[0] <= w[1] + 1e-12));
}

#[test]
fn sweep_gap_is_one_for_coordinate_submodule() {
    let out = bdk(&[
        "sweep",
        "-g",
        "z, w",
        "--grid",
        "moduli:3x3",
        "--quantity",
        "gap",
        "--level",
        "20",
        "--rmax",
        "0.5",
    ]);
    assert!(out.status.success());
    for r in csv_values(&out) {
        assert!((r[5] - 1.0).abs() < 1e-6);
    }
}

#[test]
fn empty_grid_gives_header_only() {
    let out = bdk(&["sweep", "-g", "z-w", "--grid", "polar:0x8"]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "a_re,a_im,b_re,b_im,order,value,tail,level\n"
    );
}

#[test]
fn verify_zw_and_nevanlinna() {
    let out = bdk(&["verify", "zw", "--format", "json"]);
    assert!(out.status.success());
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ids: Vec<&str> = reports
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["identity"].as_str().unwrap())
        .collect();
    assert!(ids.contains(&"sigma1-zw-origin"));

    let out = bdk(&["verify", "nevanlinna", "--tol", "1e-8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("w_re,w_im,N_root,N_closed,abs_gap\n"));
    assert_eq!(text.lines().count(), 501);
}

#[test]
fn verify_kernel_identity_writes_report_file() {
    let dir = std::env::temp_dir().join(format!("bdk-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = bdk(&[
        "verify",
        "kernel-identity",
        "--level",
        "12",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let r = &report[0];
    for key in [
        "identity",
        "level",
        "grid",
        "residuals",
        "max_residual",
        "pass",
        "tolerance",
    ] {
        assert!(r.get(key).is_some(), "{key}");
    }
    assert_eq!(r["pass"], true);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn failing_tolerance_exits_nonzero() {
    let out = bdk(&[
        "verify",
        "kernel-identity",
        "--level",
        "6",
        "--tol",
        "1e-14",
        "-o",
        "-",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
