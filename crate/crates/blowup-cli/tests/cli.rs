use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SUPRA_LEPIN: &[&str] = &["--m", "2", "--N", "20", "--p", "10"];

fn blowup(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blowup"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn assert_schema_valid(doc: &Value) {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/summary.schema.json");
    let schema: Value = serde_json::from_str(&fs::read_to_string(schema_path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(doc) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    panic!("summary does not match schema: {msgs:?}");
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect();
    (header, rows)
}

#[test]
fn exponents_table_contains_lepin() {
    let dir = tempfile::tempdir().unwrap();
    let out = blowup(&["exponents", "--m", "2", "--N", "20"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&dir.path().join("exponents.csv"));
    assert_eq!(header, ["quantity", "K", "value"]);
    let pl = rows.iter().find(|r| r[0] == "p_L").unwrap();
    assert_eq!(pl[2].parse::<f64>().unwrap(), 3.2);
    let doc = summary(dir.path());
    assert_schema_valid(&doc);
    assert!(doc["results"]["regime"].is_null());
}

#[test]
fn low_dimension_exponents_are_infinite() {
    let dir = tempfile::tempdir().unwrap();
    assert!(blowup(&["exponents", "--m", "2", "--N", "5", "--format", "json"], dir.path()).status.success());
    let doc = summary(dir.path());
    assert_schema_valid(&doc);
    assert_eq!(doc["results"]["lepin"], "inf");
    let table: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("exponents.json")).unwrap()).unwrap();
    let pjl = table["rows"].as_array().unwrap().iter().find(|r| r["quantity"] == "p_JL").unwrap();
    assert_eq!(pjl["value"], "inf");
}

#[test]
fn shoot_supra_lepin_classifies_and_writes_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["shoot"];
    args.extend_from_slice(SUPRA_LEPIN);
    args.extend_from_slice(&["--C", "1.5,50"]);
    let out = blowup(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = summary(dir.path());
    assert_schema_valid(&doc);
    let shots = doc["results"]["shots"].as_array().unwrap();
    assert_eq!(shots[0]["classification"], "set-c");
    assert_eq!(shots[1]["classification"], "set-a");

    let (header, rows) = csv_rows(&dir.path().join("trajectory_0.csv"));
    assert_eq!(header, ["eta", "X", "Y", "Z", "events"]);
    assert!(rows.iter().any(|r| r[4].contains("y-zero-up")));
    let (header, rows) = csv_rows(&dir.path().join("profile_1.csv"));
    assert_eq!(header, ["xi", "f"]);
    let f0 = (50.0f64 / 9.0).powf(1.0 / 9.0);
    let first: f64 = rows[0][1].parse().unwrap();
    assert!((first - f0).abs() < 1e-4 * f0);

    let (header, rows) = csv_rows(&dir.path().join("reference.csv"));
    assert_eq!(header, ["xi", "u_star", "u_s"]);
    let k_star: f64 = rows[0][1].parse().unwrap();
    assert!((k_star - 0.7834).abs() < 1e-4);
}

#[test]
fn shoot_without_c_writes_header_only_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["shoot"];
    args.extend_from_slice(SUPRA_LEPIN);
    assert!(blowup(&args, dir.path()).status.success());
    assert_eq!(fs::read_to_string(dir.path().join("reference.csv")).unwrap(), "xi,u_star,u_s\n");
    assert_schema_valid(&summary(dir.path()));
}

#[test]
fn output_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut args = vec!["shoot"];
    args.extend_from_slice(SUPRA_LEPIN);
    args.extend_from_slice(&["--C", "5"]);
    assert!(blowup(&args, a.path()).status.success());
    assert!(blowup(&args, b.path()).status.success());
    for name in ["summary.json", "trajectory_0.csv", "profile_0.csv", "reference.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn find_supra_lepin_reports_the_monotone_connection() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["find"];
    args.extend_from_slice(SUPRA_LEPIN);
    args.extend_from_slice(&["--K", "1"]);
    let out = blowup(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = summary(dir.path());
    assert_schema_valid(&doc);
    let sol = &doc["results"]["solutions"][0];
    assert_eq!(sol["oscillations"], 0);
    assert_eq!(sol["monotone"], true);
    assert!((sol["C"].as_f64().unwrap() - 5.349_266_816).abs() < 1e-6);
    assert!(dir.path().join("solution_0_profile.csv").exists());
}

#[test]
fn portrait_lepin_and_residuals_validate() {
    for (mode, p) in [("portrait", "10"), ("lepin", "4"), ("residuals", "10")] {
        let dir = tempfile::tempdir().unwrap();
        let out = blowup(&[mode, "--m", "2", "--N", "20", "--p", p], dir.path());
        assert!(out.status.success(), "{mode}: {}", String::from_utf8_lossy(&out.stderr));
        assert_schema_valid(&summary(dir.path()));
    }
    let dir = tempfile::tempdir().unwrap();
    assert!(blowup(&["lepin", "--m", "2", "--N", "20", "--p", "4"], dir.path()).status.success());
    assert_eq!(summary(dir.path())["results"]["count"], 1);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "m = 2.0\nN = 20.0\np = 3.0\nformat = \"json\"\n[lepin]\nstart_level = 200.0\n").unwrap();
    let out = blowup(&["lepin", "--config", cfg.to_str().unwrap(), "--p", "10"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = summary(dir.path());
    assert_eq!(doc["params"]["p"], 10.0);
    assert_eq!(doc["results"]["count"], 2);
    assert!(dir.path().join("lepin_zeros.json").exists());
}

fn error_record(out: &Output) -> Value {
    serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).expect("error record is JSON")
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Subcritical p is a configuration error.
    let out = blowup(&["shoot", "--m", "2", "--N", "20", "--p", "2.2", "--C", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"]["kind"], "config");
    let out = blowup(&["shoot", "--m", "2", "--N", "20"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = blowup(&["shoot", "--m", "2", "--N", "20", "--p", "10", "--C", "-1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // A tiny step budget leaves the Lepin count undecided.
    let cfg = dir.path().join("tight.toml");
    fs::write(&cfg, "m = 2.0\nN = 20.0\np = 4.0\n[lepin.integrator]\nmax_steps = 10\n").unwrap();
    let out = blowup(&["lepin", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["error"]["exit_code"], 3);
    // An output path below a regular file cannot be created.
    let file = dir.path().join("plain");
    fs::write(&file, "").unwrap();
    let out = blowup(&["exponents", "--m", "2", "--N", "20"], &file.join("sub"));
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_record(&out)["error"]["kind"], "io");
}
