use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use cass_core::evaluation::{accuracy, benchmark_report, CellResult, ErrorStats, ReportRow};
use cass_core::segmentation::{segment, Method, SegmentationConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{config_header, config_json, write_file, write_json};
use crate::settings::Settings;
use crate::{path, source, with_workers, BenchmarkArgs};

const DEFAULT_LAMBDAS: [f64; 3] = [0.01, 0.1, 1.0];

struct Dataset {
    name: String,
    x: cass_core::DMatrix<f64>,
    labels: Vec<usize>,
    k: usize,
}

struct Job {
    dataset: usize,
    method: Method,
    lambda: Option<f64>,
    config: SegmentationConfig,
}

#[derive(Serialize)]
struct GridEntry {
    dataset: String,
    method: Method,
    lambda: Option<f64>,
    /// Mean over seeds.
    accuracy: f64,
    per_seed: Vec<f64>,
    converged: bool,
    iterations: usize,
}

#[derive(Serialize)]
struct Report {
    config: serde_json::Map<String, serde_json::Value>,
    std_convention: String,
    rows: Vec<ReportRow>,
    method_stats: BTreeMap<String, ErrorStats>,
    grid: Vec<GridEntry>,
    metadata: Metadata,
}

#[derive(Serialize)]
struct Metadata {
    wall_time_s: f64,
    /// Seconds per grid entry, in grid order.
    entry_times_s: Vec<f64>,
}

fn dataset_names(s: &Settings) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for (rest, _) in s.source().with_prefix("dataset.") {
        if let Some((name, _)) = rest.split_once('.') {
            if !names.iter().any(|n| n == name) {
                names.push(name.to_string());
            }
        }
    }
    names
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn run(a: &BenchmarkArgs) -> CliResult<()> {
    let mut s = Settings::new(
        Some(&a.config),
        &[
            ("output", path(&a.output)),
            ("workers", a.workers.map(|w| w.to_string())),
            ("methods", a.methods.clone()),
        ],
    )?;
    let methods: Vec<Method> = s.list("methods")?.unwrap_or_default();
    if methods.is_empty() {
        return Err(CliError::usage("benchmark needs a non-empty `methods` list"));
    }
    let output: PathBuf = s.get("output", "benchmark".to_string())?.into();
    let workers: usize = s.get("workers", 0)?;
    let seeds: Vec<u64> = s.list("seeds")?.unwrap_or_else(|| vec![0]);
    if seeds.is_empty() {
        return Err(CliError::usage("`seeds` must list at least one seed"));
    }
    let default_grid: Vec<f64> = s.list("lambdas")?.unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec());

    let names = dataset_names(&s);
    if names.is_empty() {
        return Err(CliError::usage("no datasets configured (expected `dataset.<name>.format = ...`)"));
    }
    let mut datasets = Vec::new();
    for name in names {
        let prefix = format!("dataset.{name}.");
        let loaded = source::load(&mut s, &prefix).map_err(|e| e.context(&format!("dataset {name}")))?;
        let labels = loaded
            .labels
            .ok_or_else(|| CliError::usage(format!("dataset {name} has no ground-truth labels")))?;
        let k = match s.opt::<usize>(&format!("{prefix}k_clusters"))? {
            Some(k) => k,
            None => labels.iter().max().map_or(0, |m| m + 1),
        };
        log::info!("loaded dataset {name}: {} ({} points)", loaded.source, labels.len());
        datasets.push(Dataset {
            name,
            x: loaded.x,
            labels,
            k,
        });
    }

    let mut jobs = Vec::new();
    for (di, d) in datasets.iter().enumerate() {
        for &method in &methods {
            let grid: Vec<Option<f64>> = if method.uses_lambda() {
                let grid = s.list(&format!("lambdas.{method}"))?.unwrap_or_else(|| default_grid.clone());
                grid.into_iter().map(Some).collect()
            } else {
                vec![None]
            };
            let base = s.segmentation(method, d.k)?;
            for lambda in grid {
                let mut config = base.clone();
                if let Some(l) = lambda {
                    config.lambda = l;
                }
                config.validate(d.x.ncols()).map_err(|e| CliError::from(e).context(&d.name))?;
                jobs.push(Job {
                    dataset: di,
                    method,
                    lambda,
                    config,
                });
            }
        }
    }

    let start = Instant::now();
    let outcomes: Vec<CliResult<(GridEntry, f64)>> = with_workers(workers, || {
        jobs.par_iter()
            .map(|job| {
                let d = &datasets[job.dataset];
                let t = Instant::now();
                let mut per_seed = Vec::with_capacity(seeds.len());
                let mut converged = true;
                let mut iterations = 0;
                for &seed in &seeds {
                    let config = SegmentationConfig { seed, ..job.config.clone() };
                    let seg = segment(&d.x, &config).map_err(|e| {
                        CliError::from(e).context(&format!("{} / {} / lambda {:?}", d.name, job.method, job.lambda))
                    })?;
                    per_seed.push(accuracy(&seg.labels, &d.labels)?);
                    converged &= seg.coefficients.all_converged();
                    iterations += seg.coefficients.total_iterations();
                }
                let mean = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
                Ok((
                    GridEntry {
                        dataset: d.name.clone(),
                        method: job.method,
                        lambda: job.lambda,
                        accuracy: mean,
                        per_seed,
                        converged,
                        iterations,
                    },
                    t.elapsed().as_secs_f64(),
                ))
            })
            .collect()
    })?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let mut grid = Vec::with_capacity(outcomes.len());
    let mut entry_times_s = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        let (entry, secs) = outcome?;
        if !entry.converged {
            log::warn!(
                "{} / {} / lambda {:?}: some points did not converge",
                entry.dataset,
                entry.method,
                entry.lambda
            );
        }
        grid.push(entry);
        entry_times_s.push(secs);
    }

    let cells: Vec<CellResult> = grid
        .iter()
        .map(|g| CellResult {
            dataset: g.dataset.clone(),
            method: g.method.to_string(),
            accuracy: g.accuracy,
            lambda: g.lambda,
            wall_time_s: 0.0,
            iterations: g.iterations,
        })
        .collect();
    let mut report = benchmark_report(&cells);
    for row in &mut report.rows {
        row.wall_time_s = None;
    }
    let method_stats = report
        .methods
        .iter()
        .filter_map(|m| report.method_stats(m).map(|st| (m.clone(), st)))
        .collect();

    let mut csv = config_header(s.effective());
    csv.push_str("dataset,method,accuracy,error,lambda,iterations\n");
    for r in &report.rows {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.dataset,
            r.method,
            opt_cell(r.accuracy),
            opt_cell(r.error),
            opt_cell(r.lambda),
            r.iterations.map(|i| i.to_string()).unwrap_or_default()
        )
        .unwrap();
    }
    write_file(&output.with_extension("csv"), &csv)?;
    write_json(
        &output.with_extension("json"),
        &Report {
            config: config_json(s.effective()),
            std_convention: report.std_convention.clone(),
            rows: report.rows.clone(),
            method_stats,
            grid,
            metadata: Metadata {
                wall_time_s,
                entry_times_s,
            },
        },
    )?;
    for r in &report.rows {
        println!(
            "{:<16} {:<5} accuracy {:<8} lambda {}",
            r.dataset,
            r.method,
            opt_cell(r.accuracy),
            opt_cell(r.lambda)
        );
    }
    Ok(())
}
