use std::path::Path;
use std::process::{Command, Output};

fn qss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ideal_run_exits_zero_with_zero_qber() {
    let o = qss(&[
        "run",
        "--protocol",
        "product",
        "--rounds",
        "10000",
        "--seed",
        "42",
        "--memory",
        "on",
    ]);
    assert_eq!(code(&o), 0);
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m["qber"], 0.0);
    assert_eq!(m["efficiency"], 1.0);
    assert!(stdout(&o).ends_with('\n'));
}

#[test]
fn detected_cheat_exits_two() {
    let o = qss(&[
        "run",
        "--protocol",
        "ghz",
        "--adversary",
        "ghz-cheat",
        "--ordering",
        "random",
        "--rounds",
        "10000",
    ]);
    assert_eq!(code(&o), 2);
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m["aborted"], true);
}

#[test]
fn fixed_order_cheat_is_silent() {
    let o = qss(&[
        "run",
        "--protocol",
        "ghz",
        "--adversary",
        "ghz-cheat",
        "--ordering",
        "fixed",
        "--rounds",
        "10000",
    ]);
    assert_eq!(code(&o), 0);
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m["leak_rate"], 1.0);
    assert_eq!(m["qber"], 0.0);
}

#[test]
fn replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "1", "4"].iter().enumerate() {
        let out = dir.path().join(format!("t{i}.json"));
        let csv = dir.path().join(format!("t{i}.csv"));
        let metrics = dir.path().join(format!("m{i}.json"));
        let o = qss(&[
            "run",
            "--protocol",
            "product",
            "--adversary",
            "intercept:c",
            "--rounds",
            "3000",
            "--seed",
            "9",
            "--threads",
            threads,
            "--out",
            path(&out),
            "--csv",
            path(&csv),
            "--metrics",
            path(&metrics),
        ]);
        assert_eq!(code(&o), 2);
        let read = |p: &Path| std::fs::read(p).unwrap();
        outputs.push((read(&out), read(&csv), read(&metrics)));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    for bytes in [&outputs[0].0, &outputs[0].1, &outputs[0].2] {
        assert_eq!(bytes.last(), Some(&b'\n'));
    }
}

#[test]
fn errors_exit_one_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    for args in [
        vec!["run", "--adversary", "nonsense"],
        vec!["run", "--protocol", "ghz", "--adversary", "bell-joint"],
        vec![
            "run",
            "--adversary",
            "bell-joint",
            "--transmission",
            "sequential",
        ],
        vec!["run", "--check-fraction", "1.5"],
        vec!["run", "--table", "missing.json"],
        vec!["run", "--unknown-flag"],
    ] {
        let mut args = args;
        args.extend(["--out", path(&out)]);
        let o = qss(&args);
        assert_eq!(code(&o), 1, "{args:?}");
        assert!(!out.exists(), "{args:?}");
    }
    // an existing transcript is left untouched
    std::fs::write(&out, "keep\n").unwrap();
    let o = qss(&["run", "--parties", "1", "--out", path(&out)]);
    assert_eq!(code(&o), 1);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "keep\n");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.json");
    std::fs::write(
        &cfg,
        r#"{"protocol":"ghz","rounds":500,"seed":3,"adversary":"ghz-cheat","ordering":"random"}"#,
    )
    .unwrap();
    assert_eq!(code(&qss(&["run", "--config", path(&cfg)])), 2);
    let o = qss(&["run", "--config", path(&cfg), "--ordering", "fixed"]);
    assert_eq!(code(&o), 0);
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m["rounds"], 500);

    std::fs::write(&cfg, r#"{"protocl":"ghz"}"#).unwrap();
    assert_eq!(code(&qss(&["run", "--config", path(&cfg)])), 1);
}

#[test]
fn compare_shows_resource_rows() {
    let o = qss(&[
        "compare",
        "--protocol product --rounds 2000",
        "--protocol two-bb84 --rounds 2000",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let row = |prefix: &str| {
        text.lines()
            .find(|l| l.starts_with(prefix))
            .unwrap()
            .split_whitespace()
            .rev()
            .take(3)
            .collect::<Vec<_>>()
    };
    assert_eq!(row("product"), ["0", "1", "2"]);
    assert_eq!(row("two_bb84"), ["0", "2", "2"]);
    assert_eq!(row("epr reference"), ["2", "1", "4"]);
}

#[test]
fn compare_validates_everything_first() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.json");
    let o = qss(&[
        "compare",
        "--protocol product",
        "--adversary nope",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).is_empty());
    assert!(!out.exists());
    assert_eq!(code(&qss(&["compare", "--protocol product"])), 1);
}

#[test]
fn leakage_reports_and_rejects_bad_tables() {
    let o = qss(&["leakage", "--conditioning", "known"]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((r["mutual_information_bits"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let o = qss(&["leakage", "--conditioning", "unknown"]);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((r["mutual_information_bits"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("constant.json");
    std::fs::write(
        &table,
        r#"{"name":"constant","num_shares":2,"cells":{"Z0":["00"],"Z1":["00"],"X0":["11"],"X1":["11"]}}"#,
    )
    .unwrap();
    let o = qss(&["leakage", "--table", path(&table)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}
