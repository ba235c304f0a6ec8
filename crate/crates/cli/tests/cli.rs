use std::path::Path;
use std::process::{Command, Output};

fn lgradial(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgradial"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/report-v1.json");
    let text = std::fs::read_to_string(path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

#[test]
fn rings_prints_p() {
    let o = lgradial(&["rings", "--p", "3", "--ell", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "3\n");
    let o = lgradial(&["rings", "--p", "0", "--ell", "-4"]);
    assert_eq!(stdout(&o), "0\n");
}

#[test]
fn wp_vacuum_row() {
    let o = lgradial(&["wp", "--zeta", "0.7071,0", "--ell", "0", "--pmax", "32"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    let meta = lines.next().unwrap();
    assert!(meta.starts_with("# pbar="));
    let pbar: f64 = meta["# pbar=".len()..].split_whitespace().next().unwrap().parse().unwrap();
    assert!((pbar - 1.0).abs() < 1e-3);
    assert_eq!(lines.next(), Some("p,W_p"));
    let rows: Vec<(usize, f64)> = lines
        .map(|l| {
            let (p, w) = l.split_once(',').unwrap();
            (p.parse().unwrap(), w.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 33);
    assert_eq!(rows[0].0, 0);
    assert!((rows[0].1 - 0.5).abs() < 1e-4);
    assert!((rows[1].1 - 0.25).abs() < 1e-4);
}

#[test]
fn field_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for f in [&a, &b] {
        let o = lgradial(&["mode", "--p", "2", "--ell", "-1", "--nr", "128", "--nphi", "16", "--out", f.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert_eq!(text.lines().next(), Some("r,phi,re,im,intensity"));
    assert_eq!(text.lines().count(), 1 + 128 * 16);
}

#[test]
fn pgm_output() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("hg.pgm");
    let o = lgradial(&[
        "hg", "--nx", "1", "--ny", "2", "--nr", "256", "--format", "pgm", "--side", "64", "--out",
        f.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(&f).unwrap();
    let header = b"P5\n64 64\n65535\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 2 * 64 * 64);
}

#[test]
fn coherent_and_bg_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.csv");
    let o = lgradial(&["coherent", "--zeta", "0.3,-0.4", "--ell", "2", "--nphi", "8", "--out", f.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.csv.json")).unwrap()).unwrap();
    assert_eq!(side["kind"], "perelomov");
    assert!(side["oracle_residual"].as_f64().unwrap() < 1e-8);
    assert!((side["pbar"].as_f64().unwrap() - 3.0 * 0.25 / 0.75).abs() < 1e-12);

    let f = dir.path().join("b.csv");
    let o = lgradial(&["bg", "--zeta", "1.2,0.5", "--ell", "-1", "--nphi", "8", "--out", f.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.csv.json")).unwrap()).unwrap();
    assert!(side["eigen_residual"].as_f64().unwrap() < 1e-10);
    assert!(side["oracle_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn intelligent_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("i.csv");
    let o = lgradial(&[
        "intelligent", "--ell", "1", "--M", "3", "--tau", "0.5", "--nr", "256", "--nphi", "8", "--out",
        f.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("i.csv.json")).unwrap()).unwrap();
    assert_eq!(side["M"], 3);
    assert_eq!(side["uncertainty"]["intelligent"], true);
    assert!(side["eigen_residual_opposite_sign"].as_f64().unwrap() < 1e-6);
}

#[test]
fn dmat_csv() {
    let o = lgradial(&["dmat", "--ell", "0", "--tau", "1", "--pmax", "48"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p_prime,p,d,interior"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..2], &["0", "0"]);
    let d: f64 = first[2].parse().unwrap();
    assert!((d - 1.0 / 0.5f64.cosh()).abs() < 1e-10);
    assert_eq!(first[3], "1");
    assert_eq!(text.lines().count(), 1 + 49 * 49);
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        &["rings", "--p", "x", "--ell", "1"][..],
        &["coherent", "--zeta", "1.5,0", "--ell", "0", "--out", "/dev/null"],
        &["wp", "--zeta", "0.1", "--ell", "0", "--pmax", "4"],
        &["wp", "--zeta", "nan,0", "--ell", "0", "--pmax", "4"],
        &["dmat", "--ell", "0", "--tau", "9", "--pmax", "40"],
        &["mode", "--p", "1", "--ell", "0", "--nr", "10", "--out", "/dev/null"],
        &["verify", "--suite", "bogus"],
        &["verify", "--suite", "twomode", "--tol-scale", "-1"],
    ] {
        let o = lgradial(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn verify_twomode_report() {
    let o = lgradial(&["verify", "--suite", "twomode"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(schema().is_valid(&report));
    assert_eq!(report["schema"], "report-v1");
    assert_eq!(report["pass"], true);
}

#[test]
fn verify_failure_exits_1() {
    let o = lgradial(&["verify", "--suite", "specfun", "--tol-scale", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(schema().is_valid(&report));
    assert_eq!(report["pass"], false);
}

#[test]
fn verify_all_exits_zero() {
    let o = lgradial(&["verify", "--suite", "all"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(schema().is_valid(&report));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
