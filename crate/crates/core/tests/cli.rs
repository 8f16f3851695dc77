use std::io::Write;
use std::process::Command;

use num_bigint::BigInt;
use serde_json::Value;
use thinorbits::cli::{run, WORKERS_ENV};

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("thinorbits").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = call(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    assert!(err.is_empty(), "{err}");
    out
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn classgroup_1365() {
    let v = json(&["classgroup", "1365"]);
    assert_eq!(v["h"], 8);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for r in rows {
        let f: Vec<i64> = r["rep"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect();
        assert_eq!(f[1] * f[1] - 4 * f[0] * f[2], 1365);
        assert!(!r["period"].as_array().unwrap().is_empty());
    }
}

#[test]
fn pell_1337() {
    let out = ok(&["pell", "1337"]);
    let t: BigInt = field(&out, "t").parse().unwrap();
    let s: BigInt = field(&out, "s").parse().unwrap();
    assert_eq!(&t * &t - BigInt::from(1337) * &s * &s, BigInt::from(4));
    assert_eq!(field(&out, "minus_t"), "none");
    assert_eq!(field(&out, "brute_force_agrees"), "true");
}

#[test]
fn geodesic_of_form() {
    // [2,-2,-3] has D = 28 and 16^2 - 28 * 3^2 = 4, giving ((16+6)/2, 9; 6, (16-6)/2)
    let out = ok(&["geodesic", "--form", "2,-2,-3"]);
    assert_eq!(field(&out, "matrix"), "(11 9;6 5)");
    assert_eq!(field(&out, "trace"), "16");
    let by_matrix = ok(&["geodesic", "--matrix", "11,9,6,5"]);
    assert_eq!(field(&by_matrix, "form"), "[2,-2,-3]");
}

#[test]
fn exit_codes() {
    let (code, out, err) = call(&["pell", "9"]);
    assert_eq!((code, out.as_str()), (1, ""));
    assert_eq!(err, "error:bad_discriminant:bad discriminant 9\n");

    let (code, _, err) = call(&["frobnicate"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:usage:"));
    assert_eq!(err.lines().count(), 1);

    let (code, _, err) = call(&["surd", "not a surd"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:parse:"));

    let (code, _, err) = call(&["mult", "5", "--functional", "0,0,0,0"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:zero_functional:"));

    for args in [&["--help"][..], &["--version"], &["cohen", "--help"]] {
        let (code, out, err) = call(args);
        assert_eq!(code, 0, "{args:?}");
        assert!(!out.is_empty() && err.is_empty());
    }
}

#[test]
fn deterministic_across_workers() {
    let scan = |w: &str| ok(&["--workers", w, "zaremba-scan", "2000", "--alphabet", "3"]);
    assert_eq!(scan("1"), scan("4"));
    let growth = |w: &str| ok(&["--workers", w, "growth", "--alphabet", "3", "--lo", "100", "--hi", "20000", "--points", "5"]);
    assert_eq!(growth("1"), growth("3"));
    assert_eq!(growth("2"), growth("2"));
}

#[test]
fn csv_has_one_header() {
    let out = ok(&["zaremba-scan", "50", "--alphabet", "2", "--format", "csv"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "d,b,digits");
    assert_eq!(lines.len(), 51);
    assert_eq!(lines.iter().filter(|l| l.starts_with("d,")).count(), 1);
    assert_eq!(lines[3], "3,1,2 1");

    let rec = ok(&["pell", "5", "--format", "csv"]);
    assert_eq!(rec.lines().next(), Some("field,value"));
    assert!(rec.contains("\nt,3\n"));
}

#[test]
fn limit_marks_truncation() {
    let out = ok(&["--limit", "3", "zaremba-scan", "100", "--alphabet", "2"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[4], "# truncated");

    let v = json(&["--limit", "2", "--format", "json", "cohen", "--lo", "100", "--hi", "200"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["truncated"], true);

    let v = json(&["--format", "json", "zaremba-scan", "30", "--alphabet", "2"]);
    assert_eq!(v["truncated"], false);
    assert_eq!(v["rows"].as_array().unwrap().len(), 30);
}

#[test]
fn time_budget_truncates() {
    let out = ok(&["--time-budget", "0", "growth", "--alphabet", "4", "--lo", "100", "--hi", "10000000", "--points", "5"]);
    assert!(out.ends_with("# truncated\n"), "{out}");
    let v = json(&["--time-budget", "0", "--format", "json", "zaremba-scan", "100000"]);
    assert_eq!(v["truncated"], true);
    assert_eq!(v["exceptions"].as_array().unwrap().len(), 0);
}

#[test]
fn config_file_and_flag_override() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# local settings\nq_bound = 7\nletters = 5").unwrap();
    let path = file.path().to_str().unwrap();

    let v = json(&["--config", path, "mult", "5"]);
    assert_eq!(v["q_bound"], 7);
    let v = json(&["--config", path, "mult", "5", "--q-bound", "11"]);
    assert_eq!(v["q_bound"], 11);

    let letters = |args: &[&str]| {
        let out = ok(args);
        field(&out, "letters").split_whitespace().count()
    };
    assert_eq!(letters(&["--config", path, "cutseq", "--matrix", "7,3,2,1"]), 5);
    assert_eq!(letters(&["--config", path, "cutseq", "--matrix", "7,3,2,1", "--letters", "8"]), 8);

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "colour = red").unwrap();
    let (code, _, err) = call(&["--config", bad.path().to_str().unwrap(), "pell", "5"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:config:"), "{err}");
}

#[test]
fn workers_from_environment() {
    let bin = env!("CARGO_BIN_EXE_thinorbits");
    let run_with = |v: &str, args: &[&str]| Command::new(bin).env(WORKERS_ENV, v).args(args).output().unwrap();

    let bad = run_with("lots", &["zaremba-scan", "100"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:config:"));

    // the flag wins over the environment
    let flagged = run_with("lots", &["--workers", "2", "zaremba-scan", "100"]);
    assert_eq!(flagged.status.code(), Some(0));

    let one = run_with("1", &["zaremba-scan", "500"]);
    let many = run_with("6", &["zaremba-scan", "500"]);
    assert!(one.status.success() && many.status.success());
    assert_eq!(one.stdout, many.stdout);
}
