use std::f64::consts::PI;
use std::process::{Command, Output};

use serde_json::Value;

fn quantizer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quantizer"))
        .args(args)
        .env_remove("QUANTIZER_SEED")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let out = quantizer(args);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn artifacts_embed_config_version_and_anchor() {
    let (code, v) = json(&["dim", "--n", "2", "--l", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["tool"], "quantizer");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["command"], "dim");
    assert_eq!(v["config"]["n"], 2);
    assert!(v["anchor"].as_str().unwrap().contains("C(n+l, n)"));
    let out = quantizer(&["spectrum", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# tool: quantizer "));
    assert!(text.contains("# config: {\"command\":\"spectrum\""));
}

#[test]
fn dim_table_examples() {
    let (_, v) = json(&["dim", "--n", "4", "--l", "4"]);
    let rows = v["result"]["table"].as_array().unwrap();
    assert_eq!(rows.len(), 4 * 6);
    for row in rows {
        let (n, l) = (row["n"].as_u64().unwrap(), row["l"].as_i64().unwrap());
        let d = row["dimension"].as_u64().unwrap();
        if l < 0 {
            assert_eq!(d, 0);
        } else {
            let mut b = 1u64;
            for i in 0..n {
                b = b * (l as u64 + n - i) / (i + 1);
            }
            assert_eq!(d, b, "n={n} l={l}");
        }
    }
    assert!(rows
        .iter()
        .any(|r| r["n"] == 2 && r["l"] == 1 && r["dimension"] == 3));
}

#[test]
fn atlas_check_passes_and_failure_path() {
    let (code, v) = json(&[
        "atlas-check",
        "--n",
        "2",
        "--samples",
        "1000",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
    let (code, v) = json(&[
        "atlas-check",
        "--n",
        "2",
        "--samples",
        "20",
        "--inject-tolerance",
        "0",
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["pass"], false);
    let failure = &v["result"]["suites"][0]["first_failure"];
    assert!(failure["point"].is_array() && failure["error"].as_f64().unwrap() > 0.0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        quantizer(&["atlas-check", "--samples", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        quantizer(&["volume", "--format", "xml"]).status.code(),
        Some(2)
    );
    assert_eq!(quantizer(&["no-such-command"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "[{\"type\": \"spiral\"}]").unwrap();
    assert_eq!(
        quantizer(&["holonomy", "--loop", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let open = dir.path().join("open.json");
    std::fs::write(
        &open,
        r#"[{"type":"polyline","chart":1,"points":[[0,0],[1,0]]}]"#,
    )
    .unwrap();
    assert_eq!(
        quantizer(&["holonomy", "--loop", open.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        quantizer(&["holonomy", "--loop", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn chern_rows() {
    for (l, c) in [("1", 1.0), ("0", 0.0), ("-3", -3.0)] {
        let (code, v) = json(&["chern", "--l", l]);
        assert_eq!(code, 0);
        assert!((v["result"]["chern_number"].as_f64().unwrap() - c).abs() < 1e-3);
    }
    let (_, v) = json(&["chern", "--l", "1"]);
    let units = v["result"]["f_over_omega"]["volume_1"]["in_units_of_pi_i"]
        .as_f64()
        .unwrap();
    assert!((units + 2.0).abs() < 1e-10);
}

#[test]
fn spectrum_csv_tables() {
    for n in [1usize, 2, 4] {
        let out = quantizer(&["spectrum", "--n", &n.to_string(), "--format", "csv"]);
        assert_eq!(out.status.code(), Some(0));
        let rows = csv_rows(&out);
        assert_eq!(rows.len(), n + 1);
        let vac: f64 = rows[0][2].parse().unwrap();
        assert!((vac - (1.0 + n as f64 / 2.0).ln()).abs() < 1e-15);
        for row in &rows[1..] {
            let e: f64 = row[2].parse().unwrap();
            assert!((e - (2.0 + n as f64 / 2.0).ln()).abs() < 1e-15);
            assert_eq!(row[3], n.to_string());
        }
    }
    let text = String::from_utf8(quantizer(&["spectrum", "--format", "csv"]).stdout).unwrap();
    assert!(text.contains("state,E_lin,E_proj,degeneracy"));
}

#[test]
fn holonomy_examples() {
    let (code, v) = json(&["holonomy", "--l", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["nonflat"], true);
    assert!(
        v["result"]["holonomy"]["deviation_from_identity"]
            .as_f64()
            .unwrap()
            > 0.1
    );

    let dir = tempfile::tempdir().unwrap();
    let point = dir.path().join("point.json");
    std::fs::write(&point, r#"[{"type":"latitude","chart":1,"radius":0.0}]"#).unwrap();
    let (code, v) = json(&["holonomy", "--l", "3", "--loop", point.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(
        v["result"]["holonomy"]["deviation_from_identity"]
            .as_f64()
            .unwrap()
            < 1e-12
    );

    let (_, v) = json(&["holonomy", "--l", "0"]);
    let phase = &v["result"]["holonomy"]["vacuum_phase"];
    assert!(
        (phase[0].as_f64().unwrap() - 1.0).abs() < 1e-12
            && phase[1].as_f64().unwrap().abs() < 1e-12
    );
}

#[test]
fn holonomy_step_check_fails_with_status_one() {
    let out = quantizer(&["holonomy", "--l", "40", "--steps", "100"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));
}

#[test]
fn bergman_models() {
    let (code, v) = json(&["bergman", "--truncation", "120"]);
    assert_eq!(code, 0);
    let records = v["result"]["records"].as_array().unwrap();
    assert_eq!(records[0]["point"], serde_json::json!([0.0, 0.0]));
    assert!((records[0]["kernel"].as_f64().unwrap() - 1.0 / PI).abs() < 1e-15);
    for r in records {
        assert!(r["deviation"].as_f64().unwrap() < 1e-3);
        assert_eq!(r["truncation"], 120);
        for key in ["point", "lhs", "rhs"] {
            assert!(!r[key].is_null());
        }
    }
    let (code, v) = json(&["bergman", "--model", "cn", "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["records"][0]["propagator"]["pass"], true);
}

#[test]
fn volume_estimates_and_error_scaling() {
    let (code, a) = json(&["volume", "--n", "1", "--samples", "20000", "--seed", "3"]);
    assert_eq!(code, 0);
    let (_, b) = json(&["volume", "--n", "1", "--samples", "40000", "--seed", "3"]);
    let ea = a["result"]["estimate"]["std_error"].as_f64().unwrap();
    let eb = b["result"]["estimate"]["std_error"].as_f64().unwrap();
    assert!((eb / ea - 0.5f64.sqrt()).abs() < 0.07, "{}", eb / ea);
    let (code, v) = json(&["volume", "--n", "2", "--samples", "50000"]);
    assert_eq!(code, 0);
    assert!((v["result"]["estimate"]["value"].as_f64().unwrap() - 3.0).abs() < 0.1);
}

#[test]
fn qh_check_passes() {
    let (code, v) = json(&["qh-check", "--n", "2", "--l", "-1", "--samples", "100"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["certificate"]["pass"], true);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, args: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_quantizer"));
        c.args(args);
        match env {
            Some(s) => c.env("QUANTIZER_SEED", s),
            None => c.env_remove("QUANTIZER_SEED"),
        };
        serde_json::from_slice::<Value>(&c.output().unwrap().stdout).unwrap()
    };
    let v = run(Some("99"), &["volume", "--samples", "1000"]);
    assert_eq!(v["config"]["seed"], 99);
    let w = run(None, &["volume", "--samples", "1000", "--seed", "99"]);
    assert_eq!(v["result"], w["result"]);
    let x = run(Some("99"), &["volume", "--samples", "1000", "--seed", "5"]);
    assert_eq!(x["config"]["seed"], 5);
}

#[test]
fn out_flag_and_thread_independence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    let out = quantizer(&[
        "volume",
        "--samples",
        "5000",
        "--serial",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let file: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let (_, threaded) = json(&["volume", "--samples", "5000"]);
    assert_eq!(file["result"], threaded["result"]);
}
