use std::path::{Path, PathBuf};
use std::process::Command;

use skewdim::cli::{run, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["skewdim"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_spec(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn simdim_prints_moran_root() {
    let (code, out, _) = invoke(&["simdim", &fixture("moran_halves.json")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("1.584963"), "{out}");
}

#[test]
fn barnsley_dim_brackets_the_closed_form() {
    let (code, out, _) = invoke(&["barnsley-dim", &fixture("doubling.json")]);
    assert_eq!(code, EXIT_OK);
    let line = out.lines().find(|l| l.starts_with("dimension:")).unwrap();
    let inside = &line[line.find('[').unwrap() + 1..line.find(']').unwrap()];
    let ends: Vec<f64> = inside.split(", ").map(|x| x.parse().unwrap()).collect();
    assert!(ends[0] >= 1.5 - 1e-8 && ends[1] <= 1.5 + 1e-8, "{line}");
}

#[test]
fn pressure_curve_on_markov_system_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let (code, _, err) = invoke(&[
        "pressure-curve",
        &fixture("golden_skew.json"),
        "--s-grid",
        "0:2:0.05",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let csv = std::fs::read_to_string(out_dir.join("pressure_curve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,lower,upper"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 41);
    assert!(rows.windows(2).all(|w| w[1][2] < w[0][2]));
    assert!(rows.iter().all(|r| r[1] == r[2]));
}

#[test]
fn hesc_reports_exact_overlap() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = invoke(&["hesc", &fixture("overlap_third.json"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("exact overlap: (0,3) and (1,0)"), "{out}");
    let csv = std::fs::read_to_string(dir.path().join("separation.csv")).unwrap();
    assert!(csv.starts_with("n,delta,rate\n1,1,"));
    assert!(csv.contains("\n2,0,\n"));
}

#[test]
fn every_command_runs_on_a_fixture() {
    for (command, spec) in [
        ("affdim", "six_diagonals.json"),
        ("lyapdim", "six_diagonals.json"),
        ("entropy", "golden_mean.json"),
        ("entropy", "golden_skew.json"),
        ("validate", "golden_skew.json"),
        ("validate", "gasket.json"),
        ("boxcount", "gasket.json"),
    ] {
        let (code, out, err) = invoke(&[command, &fixture(spec), "--points", "20000"]);
        assert_eq!(code, EXIT_OK, "{command} {spec}: {err}");
        assert!(!out.is_empty());
    }
}

#[test]
fn unknown_command_is_a_usage_error() {
    let (code, _, err) = invoke(&["frobnicate", "x.json"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("frobnicate"));
    let (code, _, _) = invoke(&[]);
    assert_eq!(code, EXIT_USAGE);
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("pressure-curve"));
}

#[test]
fn malformed_spec_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad_number = write_spec(
        dir.path(),
        "a.json",
        r#"{"kind":"similar","system":{"maps":[{"ratio":"1/3","translation":0},{"ratio":"1/x","translation":1}]}}"#,
    );
    let (code, _, err) = invoke(&["simdim", bad_number.to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("system.maps[1].ratio"), "{err}");

    let expanding = write_spec(
        dir.path(),
        "b.json",
        r#"{"kind":"barnsley","system":{"partition":[0,0.5,1],"branches":[
            {"gamma":2,"v":0,"a":0,"lambda":0.5,"t":0},{"gamma":2,"v":-1,"a":0,"lambda":1.5,"t":0}]}}"#,
    );
    let (code, _, err) = invoke(&["barnsley-dim", expanding.to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("branch 1"), "{err}");

    let (code, _, err) = invoke(&["hesc", &fixture("six_diagonals.json")]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("`kind`"), "{err}");

    let (code, _, err) = invoke(&["pressure-curve", &fixture("golden_mean.json"), "--s-grid", "0:2"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("--s-grid"), "{err}");
}

#[test]
fn numeric_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "c.json",
        r#"{"kind":"similar","system":{"maps":[{"ratio":"1/3","translation":0},{"ratio":"1/3","translation":1}]}}"#,
    );
    let (code, _, err) = invoke(&["hesc", spec.to_str().unwrap(), "--n", "40"]);
    assert_eq!(code, EXIT_NUMERIC);
    assert!(err.contains("try n = 23"), "{err}");
    let (code, _, err) = invoke(&["boxcount", &fixture("gasket.json"), "--points", "1000"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let one_scale = write_spec(
        dir.path(),
        "d.json",
        r#"{"kind":"similar","system":{"maps":[{"ratio":0.5,"translation":[0,0]},{"ratio":0.5,"translation":[0.5,0.5]}]},"task":{"scales":["1/4"]}}"#,
    );
    let (code, _, err) = invoke(&["boxcount", one_scale.to_str().unwrap(), "--points", "1000"]);
    assert_eq!(code, EXIT_NUMERIC);
    assert!(err.contains("need >= 2 scales"), "{err}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_skewdim");
    let status = Command::new(bin).args(["simdim", &fixture("moran_halves.json")]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&status.stdout).lines().next().map(|l| l.contains("1.584963")), Some(true));
    let status = Command::new(bin).arg("nonsense").output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
}

#[test]
fn seeds_change_samples_but_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let read = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        let (code, _, err) = invoke(&[
            "barnsley-dim",
            &fixture("doubling.json"),
            "--points",
            "5000",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        std::fs::read(out.join("repeller.csv")).unwrap()
    };
    let a = read("1", "a");
    assert_eq!(a, read("1", "b"));
    assert_ne!(a, read("2", "c"));
    assert!(a.starts_with(b"x,y\n"));
}
