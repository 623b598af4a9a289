use std::path::PathBuf;
use std::time::Instant;

use cass_core::evaluation::accuracy;
use cass_core::segmentation::{segment, Method, PointDiagnostics};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{config_json, labels_csv, with_extension, write_file, write_json};
use crate::settings::Settings;
use crate::{flag, opt, path, source, with_workers, SegmentArgs};

#[derive(Serialize)]
struct Report {
    config: serde_json::Map<String, serde_json::Value>,
    source: String,
    method: Method,
    k: usize,
    lambda: Option<f64>,
    n: usize,
    accuracy: Option<f64>,
    converged: bool,
    total_iterations: usize,
    diagnostics: Vec<PointDiagnostics>,
    metadata: Metadata,
}

#[derive(Serialize)]
struct Metadata {
    wall_time_s: f64,
}

pub fn run(a: &SegmentArgs) -> CliResult<()> {
    let mut s = Settings::new(
        a.config.as_deref(),
        &[
            ("format", a.format.clone()),
            ("input", path(&a.input)),
            ("labels", path(&a.labels)),
            ("orientation", a.orientation.clone()),
            ("header", flag(a.header)),
            ("per_class", opt(&a.per_class)),
            ("pca_dim", opt(&a.pca_dim)),
            ("method", a.method.clone()),
            ("k", opt(&a.k)),
            ("lambda", opt(&a.lambda)),
            ("seed", opt(&a.seed)),
            ("workers", opt(&a.workers)),
            ("output", path(&a.output)),
            ("report", path(&a.report)),
        ],
    )?;
    let method: Method = s.get("method", Method::Cass)?;
    let output: PathBuf = s.get("output", "segmentation.csv".to_string())?.into();
    let report_path: PathBuf = match s.opt::<String>("report")? {
        Some(p) => p.into(),
        None => with_extension(&output, "json"),
    };
    let workers: usize = s.get("workers", 0)?;
    let data = source::load(&mut s, "")?;
    let k: usize = match (s.opt("k")?, &data.labels) {
        (Some(k), _) => k,
        (None, Some(labels)) => {
            let k = labels.iter().max().map_or(0, |m| m + 1);
            s.record("k", k);
            k
        }
        (None, None) => return Err(CliError::usage("k is required when no labels are given")),
    };
    let config = s.segmentation(method, k)?;

    let start = Instant::now();
    let seg = with_workers(workers, || segment(&data.x, &config))??;
    let wall_time_s = start.elapsed().as_secs_f64();
    let acc = match &data.labels {
        Some(truth) => Some(accuracy(&seg.labels, truth)?),
        None => None,
    };
    let converged = seg.coefficients.all_converged();

    write_file(&output, &labels_csv(s.effective(), &seg.labels))?;
    write_json(
        &report_path,
        &Report {
            config: config_json(s.effective()),
            source: data.source,
            method,
            k,
            lambda: method.uses_lambda().then_some(config.lambda),
            n: seg.labels.len(),
            accuracy: acc,
            converged,
            total_iterations: seg.coefficients.total_iterations(),
            diagnostics: seg.coefficients.diagnostics.clone(),
            metadata: Metadata { wall_time_s },
        },
    )?;
    match acc {
        Some(acc) => println!("{method}: accuracy {acc} on {} points", seg.labels.len()),
        None => println!("{method}: segmented {} points into {k} groups", seg.labels.len()),
    }
    if !converged {
        let failed = seg.coefficients.diagnostics.iter().filter(|d| !d.converged).count();
        return Err(CliError::NonConvergence(format!(
            "{failed} point(s) did not converge; diagnostics in {}",
            report_path.display()
        )));
    }
    Ok(())
}
