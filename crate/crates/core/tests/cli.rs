use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fibcode::analysis::FitReport;
use fibcode::experiment::{read_results, CSV_HEADER};

fn fibcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibcode"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(code(&fibcode(&[])), 1);
    assert_eq!(code(&fibcode(&["sample", "--lattice-exp", "3"])), 1);
    assert_eq!(code(&fibcode(&["graph", "dump", "--lattice-exp", "x"])), 1);
    let help = fibcode(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("fit-threshold"));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    // L = 4 has no usable matching graph
    let small = fibcode(&[
        "sample",
        "--lattice-exp",
        "2",
        "--error-rate",
        "0.1",
        "--noise",
        "iid",
        "--samples",
        "5",
        "--seed",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&small), 2, "{}", String::from_utf8_lossy(&small.stderr));
    let bad_rate = fibcode(&[
        "sample",
        "--lattice-exp",
        "3",
        "--error-rate",
        "1.5",
        "--noise",
        "iid",
        "--samples",
        "5",
        "--seed",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&bad_rate), 2);
    let missing = fibcode(&[
        "fit-ansatz",
        "--in",
        path_str(&dir.path().join("none.csv")),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn sample_writes_the_csv_schema_and_appends() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let args = [
        "sample",
        "--lattice-exp",
        "3,4",
        "--error-rate",
        "0.05,0.1",
        "--noise",
        "spanning",
        "--samples",
        "50",
        "--seed",
        "9",
        "--jobs",
        "2",
        "--out",
        path_str(&out),
    ];
    assert_eq!(code(&fibcode(&args)), 0);
    let first = fs::read_to_string(&out).unwrap();
    assert_eq!(first.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(first.lines().count(), 5);
    assert!(first
        .lines()
        .skip(1)
        .all(|l| l.contains(",spanning,50,") && l.ends_with(",9")));

    assert_eq!(code(&fibcode(&args)), 0);
    let second = fs::read_to_string(&out).unwrap();
    assert_eq!(second.lines().count(), 9);
    // the same seed reproduces the same rows
    assert_eq!(&second[first.len()..], &first[first.find('\n').unwrap() + 1..]);
    assert_eq!(read_results(&out).unwrap().len(), 8);
}

#[test]
fn graph_dump_ascii_and_json() {
    let ascii = fibcode(&["graph", "dump", "--lattice-exp", "3"]);
    assert_eq!(code(&ascii), 0);
    let text = String::from_utf8(ascii.stdout).unwrap();
    assert!(text.contains("vertices 12, edges 22"), "{text}");
    assert!(text.contains("special h: (4, 1) - (4, 4)"), "{text}");
    assert!(text.contains("special v: (1, 1) - (7, 1)"), "{text}");

    let json = fibcode(&["graph", "dump", "--lattice-exp", "3", "--format", "json"]);
    assert_eq!(code(&json), 0);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 12);
    assert_eq!(v["edges"].as_array().unwrap().len(), 22);
}

fn write_rows(path: &Path, rows: impl IntoIterator<Item = (u32, f64, &'static str, u64, u64)>) {
    let mut text = CSV_HEADER.join(",") + "\n";
    for (l, p, noise, samples, failures) in rows {
        let pf = failures as f64 / samples as f64;
        let se = (pf * (1.0 - pf) / samples as f64).sqrt();
        text += &format!("{l},{p},{noise},{samples},{failures},{failures},0,1,{pf},{se},1\n");
    }
    fs::write(path, text).unwrap();
}

#[test]
fn fit_ansatz_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("low.csv");
    let json = dir.path().join("fit.json");
    let samples = 1u64 << 40;
    let rows = [(8u32, 3), (16, 10), (32, 17)].into_iter().flat_map(|(l, lo)| {
        (0..5).map(move |k| {
            let p = (lo + k) as f64 / 100.0;
            let lf = l as f64;
            let pf = (-1.79 + 0.59 * lf.powf(1.25) + 0.18 * lf.powf(1.47) * p.ln()).exp();
            (l, p, "iid", samples, (pf * samples as f64).round().max(1.0) as u64)
        })
    });
    write_rows(&csv, rows);
    let out = fibcode(&["fit-ansatz", "--in", path_str(&csv), "--out", path_str(&json)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = FitReport::from_json(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report.model, "ansatz");
    assert_eq!(report.points_used, 15);
    assert_eq!(report.per_l.len(), 3);
    assert!((report.params["gamma"] - 1.47).abs() < 0.05, "{report:?}");
}

#[test]
fn fit_threshold_records_the_window_and_filters_noise() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("th.csv");
    let json = dir.path().join("fit.json");
    let samples = 1u64 << 40;
    let mut rows = Vec::new();
    for l in [8u32, 16, 32] {
        for k in 0..9 {
            let p = (10 + 2 * k) as f64 / 100.0;
            let pf = (-1.0 + 0.4 * (p - 0.18) * l as f64).exp().min(1.0);
            rows.push((l, p, "spanning", samples, (pf * samples as f64).round() as u64));
        }
    }
    rows.push((8, 0.2, "iid", 100, 3));
    write_rows(&csv, rows);

    let mixed = fibcode(&["fit-threshold", "--in", path_str(&csv), "--out", path_str(&json)]);
    assert_eq!(code(&mixed), 2);

    let out = fibcode(&[
        "fit-threshold",
        "--in",
        path_str(&csv),
        "--out",
        path_str(&json),
        "--noise",
        "spanning",
        "--p-min",
        "0.12",
        "--p-max",
        "0.24",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = FitReport::from_json(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report.model, "threshold");
    assert_eq!(report.params["p_min"], 0.12);
    assert_eq!(report.params["p_max"], 0.24);
    assert_eq!(report.points_used, 21);
    assert!((report.params["p_th"] - 0.18).abs() < 1e-4, "{report:?}");
}
