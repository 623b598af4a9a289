use std::io::Write;

use cass_core::data::{self, gen_synthetic, CsvOptions, LabeledData, SyntheticSpec};
use cass_core::evaluation::{accuracy, benchmark_report, CellResult};
use cass_core::segmentation::{segment, Method, SegmentationConfig};
use cass_core::Error;

fn clean() -> LabeledData {
    gen_synthetic(&SyntheticSpec::uniform(3, 4, 30, 20, 0.0, 7)).unwrap()
}

#[test]
fn every_method_segments_clean_independent_data() {
    let data = clean();
    for method in Method::ALL {
        let lambda = if method == Method::Lrr { 1.0 } else { 0.01 };
        let cfg = SegmentationConfig::new(method, 3).with_lambda(lambda);
        let seg = segment(&data.x, &cfg).unwrap();
        let acc = accuracy(&seg.labels, &data.labels).unwrap();
        assert_eq!(acc, 1.0, "{method}");
        assert_eq!(seg.coefficients.w.shape(), (60, 60));
        assert!(seg.coefficients.w.diagonal().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn seed_makes_runs_reproducible() {
    let data = gen_synthetic(&SyntheticSpec::uniform(3, 3, 12, 10, 0.2, 1)).unwrap();
    let cfg = SegmentationConfig::new(Method::Cass, 3).with_lambda(0.1).with_seed(5);
    let a = segment(&data.x, &cfg).unwrap();
    let b = segment(&data.x, &cfg).unwrap();
    assert_eq!(a.labels, b.labels);
    assert_eq!(a.coefficients.w, b.coefficients.w);
}

#[test]
fn csv_roundtrip_then_segment() {
    let data = clean();
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# synthetic").unwrap();
    for col in data.x.column_iter() {
        let row: Vec<String> = col.iter().map(|v| format!("{v:e}")).collect();
        writeln!(file, "{}", row.join(",")).unwrap();
    }
    let x = data::load_csv(file.path(), CsvOptions::default()).unwrap();
    assert_eq!(x, data.x);
    let seg = segment(&x, &SegmentationConfig::new(Method::Lsr, 3).with_lambda(0.01)).unwrap();
    assert_eq!(accuracy(&seg.labels, &data.labels).unwrap(), 1.0);
}

fn idx_images(n: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
    let mut b = vec![0, 0, 8, 3];
    for v in [n, rows, cols] {
        b.extend_from_slice(&v.to_be_bytes());
    }
    b.extend_from_slice(pixels);
    b
}

fn idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut b = vec![0, 0, 8, 1];
    b.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    b.extend_from_slice(labels);
    b
}

#[test]
fn idx_files_load_and_subset() {
    let dir = tempfile::tempdir().unwrap();
    let pixels: Vec<u8> = (0..6 * 4).map(|i| (i * 10) as u8).collect();
    let img = dir.path().join("images");
    let lab = dir.path().join("labels");
    std::fs::write(&img, idx_images(6, 2, 2, &pixels)).unwrap();
    std::fs::write(&lab, idx_labels(&[3, 1, 3, 1, 3, 1])).unwrap();
    let data = data::load_idx(&img, &lab).unwrap();
    assert_eq!(data.x.shape(), (4, 6));
    assert_eq!(data.x[(1, 0)], 10.0 / 255.0);
    assert_eq!(data.num_classes(), 2);
    let sub = data::first_m_per_class(&data, 2).unwrap();
    assert_eq!(sub.len(), 4);
    assert!(matches!(data::first_m_per_class(&data, 4), Err(Error::ClassTooSmall { .. })));

    std::fs::write(&lab, idx_labels(&[0, 1])).unwrap();
    assert!(matches!(data::load_idx(&img, &lab), Err(Error::CountMismatch { .. })));
    std::fs::write(&lab, idx_images(1, 1, 1, &[0])).unwrap();
    assert!(matches!(data::load_idx(&img, &lab), Err(Error::WrongMagic { .. })));
}

#[test]
fn grid_search_feeds_report() {
    let data = gen_synthetic(&SyntheticSpec::uniform(2, 3, 10, 10, 0.1, 3)).unwrap();
    let mut cells = Vec::new();
    for method in [Method::Cass, Method::Lsr] {
        for lambda in [0.01, 0.1, 1.0] {
            let seg = segment(&data.x, &SegmentationConfig::new(method, 2).with_lambda(lambda)).unwrap();
            cells.push(CellResult {
                dataset: "synth".into(),
                method: method.to_string(),
                accuracy: accuracy(&seg.labels, &data.labels).unwrap(),
                lambda: Some(lambda),
                wall_time_s: 0.0,
                iterations: seg.coefficients.total_iterations(),
            });
        }
    }
    let report = benchmark_report(&cells);
    assert_eq!(report.populated(), 2);
    for method in ["cass", "lsr"] {
        let row = report.cell("synth", method).unwrap();
        let best = cells
            .iter()
            .filter(|c| c.method == method)
            .map(|c| c.accuracy)
            .fold(0.0, f64::max);
        assert_eq!(row.accuracy, Some(best));
        assert!(row.lambda.is_some());
    }
}
