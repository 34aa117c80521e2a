use std::fs;

use negsym::evaluate::{evaluate_dataset, read_manifest};
use negsym::synthetic::MANIFEST_NAME;
use negsym::{
    average, generate_dataset, load_image, resize, rotate, DetectorConfig, DiskMask, SymmetrySpec, SymmetryType,
};

#[test]
fn resize_round_trip_stays_close() {
    let img = negsym::generate(&SymmetrySpec::reflectional(3, 20.0, 14)).unwrap();
    let back = resize(&resize(&img, 128).unwrap(), 256).unwrap();
    let diff = img.disk_mean_abs_diff(&back, &DiskMask::new(256).unwrap()).unwrap();
    assert!(diff <= 0.02, "{diff}");
}

#[test]
fn half_turn_average_of_point_symmetric_image() {
    let img = negsym::generate(&SymmetrySpec::rotational(2, 15)).unwrap();
    let avg = average(&img, &rotate(&img, 180.0)).unwrap();
    let diff = img.disk_mean_abs_diff(&avg, &DiskMask::new(256).unwrap()).unwrap();
    assert!(diff <= 1e-6, "{diff}");
}

#[test]
fn dataset_layout_and_reproducibility() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let records = generate_dataset(10, 7, 32, a.path()).unwrap();
    generate_dataset(10, 7, 32, b.path()).unwrap();
    assert_eq!(records.len(), 170);

    let manifest = read_manifest(a.path().join(MANIFEST_NAME)).unwrap();
    assert_eq!(manifest, records);
    let text = fs::read_to_string(a.path().join(MANIFEST_NAME)).unwrap();
    let reflection_row = text.lines().nth(1).unwrap();
    assert!(reflection_row.starts_with("reflection_o1_000.pgm,reflection,1,"));
    let tilt = reflection_row.rsplit(',').next().unwrap();
    assert_eq!(tilt.split('.').nth(1).map(str::len), Some(3), "{reflection_row}");

    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 171);
    for name in &names {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let img = load_image(a.path().join(&records[0].filename)).unwrap();
    assert_eq!(img.size(), 32);
}

#[test]
fn evaluation_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let records = generate_dataset(1, 3, 96, dir.path()).unwrap();
    let cfg = DetectorConfig {
        working_size: 96,
        ..DetectorConfig::default()
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let report = pool.install(|| evaluate_dataset(dir.path(), &records, &cfg)).unwrap();
        serde_json::to_string(&report).unwrap()
    };
    let one = run(1);
    assert_eq!(one, run(3));

    let report: negsym::EvaluationReport = serde_json::from_str(&one).unwrap();
    assert_eq!(report.image_count, 17);
    assert_eq!(report.reflectional_count, 9);
    let names: Vec<_> = report.verdicts.iter().map(|v| v.filename.clone()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    let order_hits = report.verdicts.iter().filter(|v| v.order_hit).count();
    assert_eq!(report.order_rate, order_hits as f64 / 17.0);
    let exact = report
        .verdicts
        .iter()
        .filter_map(|v| v.tilt)
        .filter(|t| t.exact)
        .count();
    assert_eq!(report.exact_rate, Some(exact as f64 / 9.0));
    for v in &report.verdicts {
        assert_eq!(v.tilt.is_some(), v.truth_type == SymmetryType::Reflectional);
    }
}
