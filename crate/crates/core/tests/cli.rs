mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::*;
use prosgpv::io::{load_csv, write_csv, CsvSchema, ResponseSpec};
use prosgpv::simulation::{draw_dataset, SurvivalSettings};
use prosgpv::{Error, Family, Response};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prosgpv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn schema(family: Family, response: &str) -> CsvSchema {
    CsvSchema {
        family,
        response: ResponseSpec::Column(response.into()),
        predictors: None,
    }
}

#[test]
fn round_trip_preserves_values_and_order() {
    let dir = tempfile::tempdir().unwrap();
    for family in Family::ALL {
        let d = random_dataset(family, 25, 4, 21);
        let path = dir.path().join(format!("{family}.csv"));
        write_csv(&path, &d).unwrap();
        let s = match family {
            Family::Cox => CsvSchema {
                family,
                response: ResponseSpec::Survival { time: "time".into(), status: "status".into() },
                predictors: None,
            },
            _ => schema(family, "y"),
        };
        let back = load_csv(&path, &s).unwrap();
        assert_eq!(back.names(), d.names());
        assert_eq!(back.x(), d.x());
        assert_eq!(back.y(), d.y());
    }
}

#[test]
fn two_level_strings_are_coded_lexicographically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    fs::write(&path, "a,b,class\n1,2,normal\n2,1,abnormal\n3,5,normal\n4,3,abnormal\n").unwrap();
    let d = load_csv(&path, &schema(Family::Logistic, "class")).unwrap();
    assert_eq!(d.y(), &Response::Binary(vec![1.0, 0.0, 1.0, 0.0]));
}

#[test]
fn missing_values_report_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    fs::write(&path, "a,b,y\n1,2,0\n2,,1\n3,5,NA\n4,3,1\n").unwrap();
    let err = load_csv(&path, &schema(Family::Logistic, "y")).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("3, 4"), "{msg}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn unparseable_field_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    fs::write(&path, "a,b,y\n1,2,0\n2,x1,1\n").unwrap();
    match load_csv(&path, &schema(Family::Logistic, "y")) {
        Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn bad_cox_status_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    fs::write(&path, "a,t,s\n1,2,0\n2,1,1\n3,4,2\n").unwrap();
    let s = CsvSchema {
        family: Family::Cox,
        response: ResponseSpec::Survival { time: "t".into(), status: "s".into() },
        predictors: None,
    };
    assert!(matches!(load_csv(&path, &s), Err(Error::InvalidData(_))));
}

#[test]
fn empty_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    fs::write(&path, "").unwrap();
    let o = bin(&["select", "--family", "logistic", "--input", path.to_str().unwrap(), "--response", "y"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn constant_column_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    fs::write(&path, "a,flat,y\n1,7,0\n2,7,1\n3,7,0\n5,7,1\n").unwrap();
    let o = bin(&["select", "--family", "logistic", "--input", path.to_str().unwrap(), "--response", "y"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("flat"), "{}", stderr(&o));
}

#[test]
fn missing_input_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = bin(&[
        "select", "--family", "logistic", "--input", "/definitely/not/here.csv", "--response", "y",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn response_spec_must_match_family() {
    let o = bin(&["select", "--family", "cox", "--input", "x.csv", "--response", "y"]);
    assert_eq!(code(&o), 2);
    let o = bin(&["select", "--family", "gamma", "--input", "x.csv", "--response", "y"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dup.csv");
    let mut text = String::from("a,b,y\n");
    let mut r = rng(31);
    for i in 0..30 {
        let v: f64 = rand::Rng::random_range(&mut r, -1.0..1.0);
        text.push_str(&format!("{v},{v},{}\n", i % 2));
    }
    fs::write(&path, text).unwrap();
    let out = dir.path().join("fit.json");
    let o = bin(&[
        "fit", "--family", "logistic", "--input", path.to_str().unwrap(), "--response", "y", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn pure_noise_select_reports_empty_model() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(32);
    let d = draw_dataset(Family::Poisson, 300, &[0.0; 6], 0.35, 1.0, &SurvivalSettings::default(), &mut r).unwrap();
    let path = dir.path().join("noise.csv");
    write_csv(&path, &d).unwrap();
    let out = dir.path().join("r.json");
    let o = bin(&[
        "select", "--family", "poisson", "--input", path.to_str().unwrap(), "--response", "y",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["final_set"].as_array().unwrap().len(), 0);
    let coefs = report["coefficients"].as_array().unwrap();
    assert_eq!(coefs.len(), 1);
    assert_eq!(coefs[0]["name"], "(Intercept)");
}

#[test]
fn cox_select_runs_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(33);
    let d = draw_dataset(Family::Cox, 200, &[0.8, 0.0, 0.0, -0.6], 0.35, 1.0, &SurvivalSettings::default(), &mut r).unwrap();
    let path = dir.path().join("surv.csv");
    write_csv(&path, &d).unwrap();
    let o = bin(&[
        "select", "--family", "cox", "--input", path.to_str().unwrap(), "--time", "time", "--status",
        "status", "--format", "csv",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("final set: V1, V4"), "{text}");
}

#[test]
fn preset_listing_has_nine_rows() {
    let o = bin(&["simulate", "--list-presets"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 9);
    let o = bin(&["simulate", "--preset", "nope"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("cox-high-s"));
}

fn simulate(dir: &Path, seed: &str, threads: &str) -> (Vec<u8>, Vec<u8>) {
    let o = bin(&[
        "simulate", "--preset", "poisson-low-s", "--n", "100", "--reps", "6", "--seed", seed,
        "--threads", threads, "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    (
        fs::read(dir.join("replications.csv")).unwrap(),
        fs::read(dir.join("aggregate.csv")).unwrap(),
    )
}

#[test]
fn simulate_honors_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(&dir.path().join("a"), "7", "1");
    let b = simulate(&dir.path().join("b"), "7", "3");
    let c = simulate(&dir.path().join("c"), "8", "1");
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
    let text = String::from_utf8(a.0).unwrap();
    assert_eq!(text.lines().count(), 1 + 6 * 2);
    assert!(text.starts_with("scenario,method,replication,seed,exact_capture,power,type1,pfdr,pfndr,mae,score,runtime_s"));
}

#[test]
fn spine_without_data_exits_2() {
    let o = bin(&["spine", "--input", "/no/such/spine.csv", "--splits", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("spine data not found"));
}
