use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::NamedTempFile;

fn l2ext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l2ext")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_file(v: &str) -> NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    f.write_all(v.as_bytes()).unwrap();
    f
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const CIRCLE: &str = r#"{"num_vars": 1, "ranks": [1, 1], "boundaries": [{"degree": 1, "matrix":
    {"rows": 1, "cols": 1, "num_vars": 1, "entries": [{"row": 0, "col": 0, "terms": [
        {"exp": [1], "re": 1.0, "im": 0.0}, {"exp": [0], "re": -1.0, "im": 0.0}]}]}}]}"#;

#[test]
fn betti_of_presets_and_files() {
    let o = l2ext(&["betti", "circle"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "b0=0 b1=0"));
    let o = l2ext(&["betti", "torus2"]);
    assert_eq!(stdout(&o).trim(), "b0=0 b1=0 b2=0");

    let f = json_file(r#"{"num_vars": 1, "ranks": [2, 3]}"#);
    let o = l2ext(&["betti", f.path().to_str().unwrap()]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "b0=2 b1=3"));

    let f = json_file(CIRCLE);
    let o = l2ext(&["betti", f.path().to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "b0=0 b1=0");
}

#[test]
fn ns_of_circle_and_modules() {
    let o = l2ext(&["--output", "json", "ns", "circle", "--degree", "0"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ns = v["fit"]["ns"].as_f64().unwrap();
    assert!((ns - 1.0).abs() <= 0.05, "{ns}");

    let f = json_file(
        r#"{"rank_src": 1, "rank_dst": 1, "alpha": {"symbol": "abs_power", "center_angle": 0.0, "nu": 2.0}}"#,
    );
    let o = l2ext(&["--output", "json", "ns", f.path().to_str().unwrap()]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cap = v["fit"]["capacity"].as_f64().unwrap();
    assert!((cap - 2.0).abs() <= 0.1, "{cap}");

    let f = json_file(r#"{"rank_src": 0, "rank_dst": 1, "alpha": {"rows": 1, "cols": 0, "num_vars": 1}}"#);
    let o = l2ext(&["ns", f.path().to_str().unwrap()]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "torsion trivial; capacity 0"));
    let o = l2ext(&["--output", "json", "ns", f.path().to_str().unwrap()]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["fit"]["ns"], "inf");
}

#[test]
fn density_csv_and_json_agree() {
    let o = l2ext(&["--grid", "256", "--output", "csv", "density", "circle"]);
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lambda,F"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));

    let o = l2ext(&["--grid", "256", "--output", "json", "density", "circle"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let values: Vec<f64> = serde_json::from_value(v["values"].clone()).unwrap();
    assert_eq!(values, rows.iter().map(|r| r.1).collect::<Vec<_>>());
}

#[test]
fn output_is_identical_across_thread_counts() {
    let a = l2ext(&["--threads", "1", "--output", "json", "density", "torus2"]);
    let b = l2ext(&["--threads", "4", "--output", "json", "density", "torus2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = l2ext(&["--threads", "4", "--output", "json", "density", "torus2"]);
    assert_eq!(b.stdout, c.stdout);
}

#[test]
fn morse_bounds() {
    let o = l2ext(&["morse", "circle"]);
    let text = stdout(&o);
    assert!(text.contains("m0 >= 1") && text.contains("m1 >= 1"), "{text}");

    let o = l2ext(&["--output", "json", "morse", "circle", "--rep", "trivial2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let bounds: Vec<u64> = v["indices"].as_array().unwrap().iter().map(|e| e["bound"].as_u64().unwrap()).collect();
    assert_eq!(bounds, vec![1, 1]);
    assert_eq!(v["rep_dim"], 2);

    let o = l2ext(&["--output", "csv", "morse", "torus2"]);
    let text = stdout(&o);
    let bounds: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(bounds.len(), 3);
    assert!(bounds.iter().all(|b| b.parse::<u32>().unwrap() >= 1));
}

#[test]
fn mu_and_tor() {
    let o = l2ext(&["--output", "json", "mu", "circle"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["lower"].as_u64(), v["upper"].as_u64()), (Some(1), Some(1)));
    assert!(v["certificate"].is_string());

    let o = l2ext(&["tor", "circle"]);
    let text = stdout(&o);
    assert!(text.contains("TOR_0: projective dim 0") && text.contains("TOR_1 = 0"), "{text}");
    let o = l2ext(&["tor", "circle", "--q", "5"]);
    assert_eq!(stdout(&o).trim(), "TOR_5 = 0");
}

#[test]
fn check_passes_and_flags_coarse_grids() {
    let o = l2ext(&["check"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("checks passed"));

    let o = l2ext(&["--grid", "4", "check", "circle"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("coarse"));
}

#[test]
fn exit_codes() {
    let broken = json_file(
        r#"{"num_vars": 1, "ranks": [1, 1, 1], "boundaries": [
        {"degree": 1, "matrix": {"rows": 1, "cols": 1, "num_vars": 1, "entries": [{"row": 0, "col": 0, "terms": [{"exp": [0], "re": 1.0, "im": 0.0}]}]}},
        {"degree": 2, "matrix": {"rows": 1, "cols": 1, "num_vars": 1, "entries": [{"row": 0, "col": 0, "terms": [{"exp": [0], "re": 1.0, "im": 0.0}]}]}}]}"#,
    );
    let path = broken.path().to_str().unwrap();
    for cmd in ["betti", "check"] {
        let o = l2ext(&[cmd, path]);
        assert_eq!(code(&o), 3, "{cmd}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("degree 1"));
    }

    let garbage = json_file("{ not json");
    assert_eq!(code(&l2ext(&["betti", garbage.path().to_str().unwrap()])), 2);
    assert_eq!(code(&l2ext(&["betti", "no_such_preset"])), 2);
    let neither = json_file(r#"{"hello": 1}"#);
    assert_eq!(code(&l2ext(&["betti", neither.path().to_str().unwrap()])), 2);

    assert_eq!(code(&l2ext(&["density", "circle", "--degree", "7"])), 4);
    assert_eq!(code(&l2ext(&["--grid", "1", "betti", "circle"])), 4);
    assert_eq!(code(&l2ext(&["--lambda", "2:1:10", "betti", "circle"])), 4);
    assert_eq!(code(&l2ext(&["frobnicate"])), 4);
    assert_eq!(code(&l2ext(&["--help"])), 0);
    assert_eq!(code(&l2ext(&["--version"])), 0);
}
