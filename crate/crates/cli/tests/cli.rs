use std::path::Path;
use std::process::{Command, Output};

fn cass(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cass"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn synth(dir: &Path) {
    let out = cass(
        dir,
        &["synth", "--k", "3", "--dim", "4", "--ambient", "30", "--per", "20", "--sigma", "0", "--seed", "7"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn report(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn synth_writes_expected_shape_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let first = read(dir.path(), "data.csv");
    let rows = data_rows(&first);
    assert_eq!(rows.len(), 60);
    assert!(rows.iter().all(|r| r.split(',').count() == 30));
    let labels = read(dir.path(), "labels.csv");
    assert_eq!(data_rows(&labels)[0], "index,label");
    assert_eq!(data_rows(&labels).len(), 61);
    assert!(first.contains("# seed = 7"));

    synth(dir.path());
    assert_eq!(read(dir.path(), "data.csv"), first);
}

#[test]
fn synth_rejects_empty_subspaces() {
    let dir = tempfile::tempdir().unwrap();
    let out = cass(dir.path(), &["synth", "--k", "3", "--dim", "4", "--ambient", "30", "--per", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn segment_clean_data_with_cass_and_lsr() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    for method in ["cass", "lsr"] {
        let output = format!("{method}.csv");
        let out = cass(
            dir.path(),
            &[
                "segment", "--input", "data.csv", "--labels", "labels.csv", "--method", method, "--lambda",
                "0.01", "--output", &output,
            ],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let json = report(dir.path(), &format!("{method}.json"));
        assert_eq!(json["accuracy"], 1.0);
        assert_eq!(json["diagnostics"].as_array().unwrap().len(), 60);
        assert_eq!(json["config"]["method"], method);
        let labels = read(dir.path(), &output);
        assert_eq!(data_rows(&labels).len(), 61);
    }
}

#[test]
fn segment_output_reproduces_from_its_echo() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let args = [
        "segment", "--input", "data.csv", "--labels", "labels.csv", "--method", "ssc", "--lambda", "0.05",
        "--seed", "3", "--output", "run.csv",
    ];
    assert!(cass(dir.path(), &args).status.success());
    let first = read(dir.path(), "run.csv");
    let echo: String = first
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(dir.path().join("echo.cfg"), echo).unwrap();
    std::fs::remove_file(dir.path().join("run.csv")).unwrap();
    assert!(cass(dir.path(), &["segment", "--config", "echo.cfg"]).status.success());
    assert_eq!(read(dir.path(), "run.csv"), first);
}

#[test]
fn segment_usage_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let bad = cass(dir.path(), &["segment", "--input", "data.csv", "--labels", "labels.csv", "--method", "pca"]);
    assert_eq!(bad.status.code(), Some(2));
    let missing = cass(dir.path(), &["segment", "--input", "nope.csv", "--k", "3"]);
    assert_eq!(missing.status.code(), Some(4));
    std::fs::write(dir.path().join("bad.csv"), "1,2\n3,x\n").unwrap();
    let non_numeric = cass(dir.path(), &["segment", "--input", "bad.csv", "--k", "2"]);
    assert_eq!(non_numeric.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&non_numeric.stderr).contains("(2, 2)"));
}

#[test]
fn segment_non_convergence_exits_3_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    std::fs::write(dir.path().join("tight.cfg"), "max_iter = 2\neps = 1e-12\n").unwrap();
    let out = cass(
        dir.path(),
        &["segment", "--config", "tight.cfg", "--input", "data.csv", "--labels", "labels.csv", "--output", "t.csv"],
    );
    assert_eq!(out.status.code(), Some(3));
    let json = report(dir.path(), "t.json");
    assert_eq!(json["converged"], false);
    let diag = &json["diagnostics"][0];
    assert_eq!(diag["iterations"], 2);
    assert!(diag["residual"].as_f64().is_some());
}

#[test]
fn benchmark_reports_best_lambda_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bench.cfg"),
        "methods = cass, lsr\nlambdas = 0.01, 0.1, 1\noutput = out/report\n\
         dataset.toy.format = synth\ndataset.toy.k = 2\ndataset.toy.dim = 3\n\
         dataset.toy.ambient = 10\ndataset.toy.per = 10\ndataset.toy.sigma = 0.05\n",
    )
    .unwrap();
    let out = cass(dir.path(), &["benchmark", "--config", "bench.cfg", "--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "out/report.csv");
    let rows = data_rows(&csv);
    assert_eq!(rows[0], "dataset,method,accuracy,error,lambda,iterations");
    assert_eq!(rows.len(), 3);
    let json = report(dir.path(), "out/report.json");
    assert_eq!(json["grid"].as_array().unwrap().len(), 6);
    for row in json["rows"].as_array().unwrap() {
        let best = json["grid"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|g| g["method"] == row["method"])
            .map(|g| g["accuracy"].as_f64().unwrap())
            .fold(0.0, f64::max);
        assert_eq!(row["accuracy"].as_f64().unwrap(), best);
        assert!(row["lambda"].as_f64().is_some());
    }
}

#[test]
fn benchmark_errors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.cfg"), "methods =\ndataset.a.format = synth\n").unwrap();
    assert_eq!(cass(dir.path(), &["benchmark", "--config", "empty.cfg"]).status.code(), Some(2));
    std::fs::write(
        dir.path().join("missing.cfg"),
        "methods = lsr\ndataset.a.format = csv\ndataset.a.input = absent.csv\ndataset.a.labels = absent_labels.csv\n",
    )
    .unwrap();
    let out = cass(dir.path(), &["benchmark", "--config", "missing.cfg"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dataset a"));
}

#[test]
fn norms_curve_interpolates() {
    let dir = tempfile::tempdir().unwrap();
    let out = cass(dir.path(), &["norms", "--steps", "6", "--seed", "2", "--output", "curve.csv"]);
    assert!(out.status.success());
    let text = read(dir.path(), "curve.csv");
    let rows = data_rows(&text);
    assert_eq!(rows[0], "correlation,omega,l1,l2");
    let values: Vec<Vec<f64>> = rows[1..]
        .iter()
        .map(|r| r.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(values.len(), 6);
    for pair in values.windows(2) {
        assert!(pair[1][0] > pair[0][0]);
    }
    for v in &values {
        assert!(v[3] - 1e-10 <= v[1] && v[1] <= v[2] + 1e-10);
    }
    let (first, last) = (&values[0], &values[5]);
    assert!((first[1] - first[2]).abs() <= 1e-10);
    assert!((last[1] - last[3]).abs() <= 1e-10);
    let mid = &values[2];
    assert!(mid[3] < mid[1] && mid[1] < mid[2]);
}

#[test]
fn norms_rejects_small_ambient_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = cass(dir.path(), &["norms", "--dim", "3", "--columns", "3"]);
    assert_eq!(out.status.code(), Some(2));
}
