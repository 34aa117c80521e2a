use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use negsym::synthetic::SplitMix64;
use serde_json::Value;
use statrs::distribution::{ContinuousCDF, Normal};

fn negsym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_negsym"))
        .args(args)
        .output()
        .expect("negsym runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_lines(out: &Output) -> usize {
    String::from_utf8_lossy(&out.stderr).lines().count()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn single(dir: &Path, kind: &str, order: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "generate",
        "--out",
        path(dir),
        "--single",
        "--type",
        kind,
        "--order",
        order,
    ];
    args.extend_from_slice(extra);
    negsym(&args)
}

/// 16-bit PGM whose disk pixels are standard-normal quantiles in random order.
fn write_gaussian_pgm(file: &Path, n: usize) {
    let c = (n as f64 - 1.0) / 2.0;
    let r2 = c * c;
    let disk: Vec<usize> = (0..n * n)
        .filter(|i| {
            let (row, col) = ((i / n) as f64, (i % n) as f64);
            (row - c).powi(2) + (col - c).powi(2) <= r2
        })
        .collect();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut quantiles: Vec<f64> = (0..disk.len())
        .map(|k| normal.inverse_cdf((k as f64 + 0.5) / disk.len() as f64))
        .collect();
    let mut rng = SplitMix64::new(1);
    for i in (1..quantiles.len()).rev() {
        quantiles.swap(i, rng.below(i as u64 + 1) as usize);
    }
    let mut pixels = vec![0.5f64; n * n];
    for (&i, q) in disk.iter().zip(quantiles) {
        pixels[i] = (q + 6.0) / 12.0;
    }
    let mut bytes = format!("P5\n{n} {n}\n65535\n").into_bytes();
    for p in pixels {
        bytes.extend_from_slice(&((p * 65535.0).round() as u16).to_be_bytes());
    }
    fs::write(file, bytes).unwrap();
}

#[test]
fn detect_reports_order_three_axes() {
    let dir = tempfile::tempdir().unwrap();
    assert!(single(dir.path(), "reflection", "3", &["--tilt", "50", "--seed", "3"])
        .status
        .success());
    let image = dir.path().join("reflection_o3_000.pgm");
    let curves = dir.path().join("curves.csv");
    let v = json(&negsym(&["detect", path(&image), "--curves", path(&curves)]));
    assert_eq!(v["order"], 3);
    assert_eq!(v["type"], "reflection");
    assert_eq!(v["tilt_deg"], 50.0);
    assert_eq!(v["tilt_axes"], serde_json::json!([50.0, 110.0, 170.0]));
    assert_eq!(v["rotational_curve"].as_array().unwrap().len(), 9);
    assert_eq!(v["reflectional_curve"].as_array().unwrap().len(), 180);
    assert_eq!(v["baseline_j"], v["rotational_curve"][0]);
    assert_eq!(v["config"]["delta"], 0.05);

    let csv = fs::read_to_string(&curves).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "curve,index_or_angle,j");
    assert_eq!(lines.len(), 1 + 9 + 180);
    assert!(lines[1].starts_with("rotational,1,"));
    assert!(lines[10].starts_with("reflectional,0,"));
    assert!(lines[189].starts_with("reflectional,179,"));
}

#[test]
fn detect_echoes_knobs() {
    let dir = tempfile::tempdir().unwrap();
    single(dir.path(), "rotation", "4", &["--size", "64"]);
    let image = dir.path().join("rotation_o4_000.pgm");
    let v = json(&negsym(&[
        "detect",
        path(&image),
        "--delta",
        "0.1",
        "--kmax",
        "6",
        "--angle-step",
        "2",
        "--size",
        "64",
    ]));
    assert_eq!(v["config"]["delta"], 0.1);
    assert_eq!(v["config"]["k_max"], 6);
    assert_eq!(v["config"]["angle_step"], 2.0);
    assert_eq!(v["config"]["working_size"], 64);
    assert_eq!(v["reflectional_curve"].as_array().unwrap().len(), 90);
    assert_eq!(v["order"], 4);
}

#[test]
fn detect_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let white = dir.path().join("white.pgm");
    let mut bytes = b"P5\n32 32\n255\n".to_vec();
    bytes.extend(std::iter::repeat_n(255u8, 32 * 32));
    fs::write(&white, bytes).unwrap();
    let out = negsym(&["detect", path(&white)]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_lines(&out), 1);

    let tiny = dir.path().join("tiny.pgm");
    let mut bytes = b"P5\n4 4\n255\n".to_vec();
    bytes.extend(0u8..16);
    fs::write(&tiny, bytes).unwrap();
    assert_eq!(negsym(&["detect", path(&tiny)]).status.code(), Some(3));

    let gaussian = dir.path().join("gaussian.pgm");
    write_gaussian_pgm(&gaussian, 128);
    let out = negsym(&["detect", path(&gaussian), "--size", "128"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stderr_lines(&out), 1);

    let out = negsym(&["detect", path(&dir.path().join("missing.png"))]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_lines(&out), 1);

    let text = dir.path().join("notes.png");
    fs::write(&text, "not an image").unwrap();
    assert_eq!(negsym(&["detect", path(&text)]).status.code(), Some(2));

    assert_eq!(
        negsym(&["detect", path(&white), "--angle-step", "7"]).status.code(),
        Some(2)
    );
    assert_eq!(negsym(&["detect"]).status.code(), Some(2));
}

#[test]
fn generate_single_and_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = single(dir.path(), "rotation", "7", &[]);
    assert!(out.status.success());
    let manifest = fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
    assert_eq!(
        manifest.lines().collect::<Vec<_>>(),
        ["filename,type,order,tilt_deg", "rotation_o7_000.pgm,rotation,7,"]
    );
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);

    let bad = negsym(&[
        "generate",
        "--out",
        path(dir.path()),
        "--single",
        "--type",
        "rotation",
        "--order",
        "1",
    ]);
    assert_eq!(bad.status.code(), Some(2));

    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let args = [
            "generate",
            "--out",
            path(d.path()),
            "--per-class",
            "10",
            "--seed",
            "7",
            "--size",
            "32",
        ];
        assert!(negsym(&args).status.success());
    }
    let manifest = fs::read_to_string(a.path().join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 171);
    let mut count = 0;
    for entry in fs::read_dir(a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap()
        );
        count += 1;
    }
    assert_eq!(count, 171);
}

#[test]
fn evaluate_writes_report_and_validates_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let gen = [
        "generate",
        "--out",
        path(&data),
        "--per-class",
        "1",
        "--seed",
        "5",
        "--size",
        "96",
    ];
    assert!(negsym(&gen).status.success());
    let truth = data.join("manifest.csv");
    let report = dir.path().join("report.json");
    let out = negsym(&[
        "evaluate",
        "--images",
        path(&data),
        "--truth",
        path(&truth),
        "--report",
        path(&report),
        "--size",
        "96",
    ]);
    let v = json(&out);
    assert_eq!(v["image_count"], 17);
    assert_eq!(v["reflectional_count"], 9);
    assert_eq!(v["config"]["working_size"], 96);
    let written: Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(written, v);
    let (e, s, l) = (
        v["exact_rate"].as_f64().unwrap(),
        v["strict_rate"].as_f64().unwrap(),
        v["lenient_rate"].as_f64().unwrap(),
    );
    assert!(0.0 <= e && e <= s && s <= l && l <= 1.0);

    let malformed = dir.path().join("bad.csv");
    fs::write(&malformed, "name,kind\nx,y\n").unwrap();
    let out = negsym(&["evaluate", "--images", path(&data), "--truth", path(&malformed)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_lines(&out), 1);

    let dangling = dir.path().join("dangling.csv");
    fs::write(&dangling, "filename,type,order,tilt_deg\nghost.pgm,rotation,3,\n").unwrap();
    let out = negsym(&["evaluate", "--images", path(&data), "--truth", path(&dangling)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ghost.pgm"));
}

#[test]
fn thread_count_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_negsym"))
        .args([
            "generate",
            "--out",
            path(dir.path()),
            "--single",
            "--type",
            "none",
            "--size",
            "16",
        ])
        .env("NEGSYM_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NEGSYM_THREADS"));
}
