use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn volcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volcap"))
        .args(args)
        .env_remove("VOLCAP_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn toy_panel() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/toy_panel.csv")
}

/// Parses CSV output into rows of cells, with empty cells as `None`.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<Option<String>>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| {
            rec.unwrap()
                .iter()
                .map(|c| (!c.is_empty()).then(|| c.to_string()))
                .collect()
        })
        .collect();
    (header, rows)
}

fn num(cell: &Option<String>) -> f64 {
    cell.as_deref().unwrap().parse().unwrap()
}

#[test]
fn tail_expect_prints_closed_form() {
    let text = stdout(&volcap(&["tail-expect", "--n", "60", "--alpha", "0.01"]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["n", "alpha", "side", "ratio"]);
    assert_eq!(rows.len(), 1);
    assert!((num(&rows[0][3]) - 0.7603876200739851).abs() < 1e-12);

    let text = stdout(&volcap(&["tail-expect", "--n", "60", "--alpha", "0.001"]));
    assert!((num(&csv_rows(&text).1[0][3]) - 0.7027233845217064).abs() < 1e-12);

    let text = stdout(&volcap(&["tail-expect", "--n", "60", "--alpha", "0.01", "--upper"]));
    let (_, rows) = csv_rows(&text);
    assert_eq!(rows[0][2].as_deref(), Some("upper"));
    assert!((num(&rows[0][3]) - 1.248897298871079).abs() < 1e-9);
}

#[test]
fn domain_errors_exit_two() {
    let out = volcap(&["tail-expect", "--n", "1", "--alpha", "0.01"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert_eq!(
        volcap(&["tail-expect", "--n", "10", "--alpha", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        volcap(&["tail-expect", "--n", "ten", "--alpha", "0.1"]).status.code(),
        Some(2)
    );
    assert_eq!(volcap(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn stochastic_commands_require_a_seed() {
    let out = volcap(&["sim", "fat-moments", "--draws", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("VOLCAP_SEED"));

    let with_env = Command::new(env!("CARGO_BIN_EXE_volcap"))
        .args(["sim", "fat-moments", "--draws", "1000"])
        .env("VOLCAP_SEED", "5")
        .output()
        .unwrap();
    let with_flag = volcap(&["sim", "fat-moments", "--draws", "1000", "--seed", "5"]);
    assert_eq!(stdout(&with_env), stdout(&with_flag));
}

#[test]
fn missing_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    let out = volcap(&["empirical", "--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let unwritable = dir.path().join("no/such/dir/out.csv");
    let out = volcap(&[
        "--out",
        unwritable.to_str().unwrap(),
        "tail-expect",
        "--n",
        "5",
        "--alpha",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_csv_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "date,security_id,return\n2000-01-31,A,0.01\n2000-02-29,A,abc\n").unwrap();
    let out = volcap(&["empirical", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn toy_panel_matches_hand_computation() {
    // As of 2000-03-31: A has past (0.01, 0.03, 0.02) and future (0, 0.04);
    // B has past (0, 0.1, 0.2) and future (0.1, 0.2). Later dates lack two
    // future points, earlier dates lack three past points.
    let ratio_a = (0.0008f64).sqrt() / 0.01;
    let ratio_b = (0.005f64).sqrt() / 0.1;
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.json");
    let text = stdout(&volcap(&[
        "empirical",
        "--input",
        toy_panel().to_str().unwrap(),
        "--past",
        "3",
        "--future",
        "2",
        "--groups",
        "0.5",
        "--summary",
        summary.to_str().unwrap(),
    ]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["date", "group", "mean_ratio", "count"]);
    assert_eq!(rows.len(), 2);
    for (row, (group, ratio)) in rows.iter().zip([(0, ratio_a), (1, ratio_b)]) {
        assert_eq!(row[0].as_deref(), Some("2000-03-31"));
        assert_eq!(num(&row[1]) as usize, group);
        assert!((num(&row[2]) - ratio).abs() < 1e-12, "{row:?}");
        assert_eq!(row[3].as_deref(), Some("1"));
    }

    let summary: Value = serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
    assert_eq!(summary["as_of_dates"], 1);
    let overall = summary["groups"][0]["overall_mean_ratio"].as_f64().unwrap();
    assert!((overall - ratio_a).abs() < 1e-12);
}

#[test]
fn empty_groups_are_blank_not_zero() {
    let text = stdout(&volcap(&[
        "empirical",
        "--input",
        toy_panel().to_str().unwrap(),
        "--past",
        "3",
        "--future",
        "2",
        "--groups",
        "0.1,0.5",
    ]));
    let (_, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], None);
    assert_eq!(rows[0][3].as_deref(), Some("0"));

    let json = stdout(&volcap(&[
        "--format",
        "json",
        "empirical",
        "--input",
        toy_panel().to_str().unwrap(),
        "--past",
        "3",
        "--future",
        "2",
        "--groups",
        "0.1,0.5",
    ]));
    let records: Value = serde_json::from_str(&json).unwrap();
    assert!(records[0]["mean_ratio"].is_null());
}

/// Every cell of the CSV rendering equals the corresponding JSON value.
fn assert_same_table(csv_text: &str, json_text: &str) {
    let (header, rows) = csv_rows(csv_text);
    let records = serde_json::from_str::<Value>(json_text).unwrap();
    let records = records.as_array().unwrap();
    assert_eq!(records.len(), rows.len());
    for (row, rec) in rows.iter().zip(records) {
        assert_eq!(rec.as_object().unwrap().len(), header.len());
        for (name, cell) in header.iter().zip(row) {
            let v = &rec[name.as_str()];
            match (cell, v) {
                (None, Value::Null) => {}
                (Some(c), Value::Number(n)) => assert_eq!(c.parse::<f64>().unwrap(), n.as_f64().unwrap(), "{name}"),
                (Some(c), Value::String(s)) => assert_eq!(c, s),
                other => panic!("column {name}: {other:?}"),
            }
        }
    }
}

#[test]
fn csv_and_json_agree() {
    let cases: &[&[&str]] = &[
        &["curve", "--n-min", "30", "--n-max", "40", "--alphas", "0.05,0.01"],
        &[
            "sim",
            "stddev-hist",
            "--m",
            "200",
            "--n",
            "60",
            "--normal",
            "--seed",
            "3",
        ],
        &["sim", "basel2-hist", "--m", "50", "--n", "300", "--seed", "3"],
        &["sim", "fat-moments", "--draws", "5000", "--seed", "3"],
        &[
            "empirical",
            "--synthetic",
            "--securities",
            "100",
            "--dates",
            "3",
            "--seed",
            "3",
        ],
        &[
            "response",
            "--m",
            "100",
            "--banks",
            "4",
            "--runs",
            "2",
            "--independent",
            "--seed",
            "3",
        ],
    ];
    for args in cases {
        let csv_text = stdout(&volcap(args));
        let mut json_args = vec!["--format", "json"];
        json_args.extend_from_slice(args);
        let json_text = stdout(&volcap(&json_args));
        assert_same_table(&csv_text, &json_text);
    }
}

#[test]
fn out_flag_writes_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("resp.csv");
    let args = ["response", "--m", "200", "--seed", "9"];
    let direct = stdout(&volcap(&args));
    let mut with_out = vec!["--out", path.to_str().unwrap()];
    with_out.extend_from_slice(&args);
    let out = volcap(&with_out);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap(), direct);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["sim", "stddev-hist", "--m", "300", "--n", "500", "--seed", "11"];
    let first = volcap(&args).stdout;
    assert_eq!(volcap(&args).stdout, first);
    let mut threaded = vec!["--threads", "3"];
    threaded.extend_from_slice(&args);
    assert_eq!(volcap(&threaded).stdout, first);
}

#[test]
fn curve_rises_with_sample_size() {
    let text = stdout(&volcap(&["curve", "--n-min", "30", "--n-max", "1200", "--step", "10"]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["n", "alpha_0.01", "alpha_0.001"]);
    assert_eq!(rows.len(), 118);
    for col in 1..3 {
        let values: Vec<f64> = rows.iter().map(|r| num(&r[col])).collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]));
        assert!(values.iter().all(|&v| v > 0.0 && v < 1.0));
    }
    for row in &rows {
        assert!(num(&row[2]) < num(&row[1]));
    }
}

#[test]
fn values_out_matches_histogram_total() {
    let dir = tempfile::tempdir().unwrap();
    let values = dir.path().join("values.csv");
    let text = stdout(&volcap(&[
        "sim",
        "stddev-hist",
        "--m",
        "250",
        "--n",
        "100",
        "--seed",
        "4",
        "--values-out",
        values.to_str().unwrap(),
    ]));
    let (_, bins) = csv_rows(&text);
    let total: f64 = bins.iter().map(|b| num(&b[2])).sum();
    assert_eq!(total, 250.0);
    let (header, rows) = csv_rows(&std::fs::read_to_string(values).unwrap());
    assert_eq!(header, ["security", "value"]);
    assert_eq!(rows.len(), 250);
    for row in &rows {
        let v = num(&row[1]);
        let bin = bins.iter().find(|b| num(&b[0]) <= v && v < num(&b[1]));
        assert!(bin.is_some(), "{v} outside every bin");
    }
}

#[test]
fn response_shared_histories_concentrate() {
    let text = stdout(&volcap(&["response", "--banks", "5", "--seed", "2"]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header[..3], ["seed", "bank", "chosen"]);
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[2] == rows[0][2]));
    assert!(rows.iter().all(|r| num(&r[5]) == 1.0 && num(&r[6]) == 1.0));
    assert!(rows.iter().all(|r| num(&r[4]) > 1.0));
}
