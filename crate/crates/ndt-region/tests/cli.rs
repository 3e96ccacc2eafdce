//! End-to-end checks of the command-line contract: outputs, exit codes,
//! config merging and CSV round-tripping.

use std::process::{Command, Output};

use ndt_region::optimizer::{trace_region_slice, SweepOptions};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ndt-region"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn eval_prints_the_three_coinciding_bounds() {
    let out = run(&["eval", "--alloc", "0.375:0.375", "--rate", "0.2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("inner = 2.625 (regime 1)"), "{text}");
    assert!(text.contains("outer = 2.625"), "{text}");
    assert!(text.contains("lp    = 2.625"), "{text}");
}

#[test]
fn eval_json_round_trips() {
    let out = run(&["eval", "--alloc", "0.2,0.8", "--rate", "1.5", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["regime"], 4);
    assert!((v["inner"].as_f64().unwrap() - v["lp"]["value"].as_f64().unwrap()).abs() <= 1e-9);
}

#[test]
fn plan_table_and_json_agree_on_the_total() {
    let args = ["plan", "--alloc", "0.25,0.5", "--rate", "0.5"];
    let table = run(&args);
    assert!(table.status.success());
    assert!(stdout(&table).contains("sum=2"), "{}", stdout(&table));

    let json = run(&["plan", "--alloc", "0.25,0.5", "--rate", "0.5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).expect("valid json");
    assert!((v["total"]["sum"].as_f64().unwrap() - 2.0).abs() <= 1e-12);
}

#[test]
fn region_csv_contains_the_labeled_corners_and_round_trips() {
    let out = run(&[
        "region", "--j1", "2", "--j2", "2", "--mu", "0.5", "--rate", "0.2", "--step", "0.01",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<(f64, f64)> = text
        .lines()
        .map(|line| {
            let (x, y) = line.split_once(',').expect("two columns");
            (x.parse().expect("numeric"), y.parse().expect("numeric"))
        })
        .collect();
    let has = |x: f64, y: f64| rows.iter().any(|r| (r.0 - x).abs() <= 1e-9 && (r.1 - y).abs() <= 1e-9);
    assert!(has(1.5, 1.5) && has(4.0, 1.0), "{text}");

    // emitted text re-parses to the in-memory envelope within 1e-12
    let slice = trace_region_slice(2, 2, 0.5, 0.2, SweepOptions { step: 0.01, interior: false });
    assert_eq!(rows.len(), slice.points.len());
    for (row, p) in rows.iter().zip(&slice.points) {
        assert!((row.0 - p.x).abs() <= 1e-12 && (row.1 - p.y).abs() <= 1e-12);
    }
}

#[test]
fn extended_csv_appends_allocations_and_regime() {
    let out = run(&[
        "average", "--j1", "2", "--j2", "2", "--mu", "0.375", "--rate", "0.2", "--popularity",
        "0.5", "--step", "0.05", "--extended",
    ]);
    assert!(out.status.success());
    for line in stdout(&out).lines() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5, "{line}");
        fields[4].parse::<u8>().expect("regime id");
    }
}

#[test]
fn strict_average_mode_changes_the_second_column() {
    let base = ["average", "--j1", "2", "--j2", "2", "--mu", "0.375", "--rate", "0.2",
        "--popularity", "0.3", "--step", "0.05"];
    let default = stdout(&run(&base));
    let mut strict_args = base.to_vec();
    strict_args.push("--strict-paper-average");
    let strict = stdout(&run(&strict_args));
    assert_ne!(default, strict);
}

#[test]
fn config_file_is_merged_and_overridden_by_flags() {
    let dir = std::env::temp_dir().join("ndt-region-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scenario.json");
    std::fs::write(
        &path,
        r#"{"rate": 0.2, "alloc": [0.25, 0.25]}"#,
    )
    .unwrap();
    let from_file = stdout(&run(&["eval", "--config", path.to_str().unwrap()]));
    assert!(from_file.contains("inner = 3.75"), "{from_file}");
    // the flag wins over the file value
    let overridden = stdout(&run(&[
        "eval", "--config", path.to_str().unwrap(), "--alloc", "0.375:0.375",
    ]));
    assert!(overridden.contains("inner = 2.625"), "{overridden}");
}

#[test]
fn exit_codes_distinguish_usage_and_constraint_errors() {
    assert_eq!(run(&["eval", "--rate", "0.2"]).status.code(), Some(2));
    assert_eq!(
        run(&["eval", "--rate", "0.2", "--alloc", "1.5:0"]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(&["region", "--j1", "2", "--j2", "2", "--mu", "2.0", "--rate", "0.2"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn verify_exits_zero_with_one_line_per_suite() {
    let out = run(&["verify"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS:")).count(), 8);
    assert_eq!(text.lines().filter(|l| l.starts_with("FAIL:")).count(), 0);
}
