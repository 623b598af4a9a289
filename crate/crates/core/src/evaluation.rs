//! Matching accuracy, error statistics and benchmark reports.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Standard deviation convention used by [`error_stats`].
pub const STD_CONVENTION: &str = "sample (divisor n-1)";

/// Minimum-cost perfect assignment on a square cost matrix
/// (shortest augmenting paths with potentials). Returns `row → column`.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based internals; index 0 is the virtual root
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = INF;
            let mut col1 = 0;
            for col in 1..=n {
                if !used[col] {
                    let cur = cost[r - 1][col - 1] - u[r] - v[col];
                    if cur < minv[col] {
                        minv[col] = cur;
                        way[col] = col0;
                    }
                    if minv[col] < delta {
                        delta = minv[col];
                        col1 = col;
                    }
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for col in 1..=n {
        if owner[col] != 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}

/// Best one-to-one relabeling of `pred` onto `truth`, as `pred label → truth label`.
pub fn best_matching(pred: &[usize], truth: &[usize]) -> Result<Vec<usize>> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predicted labels vs {} ground-truth labels",
            pred.len(),
            truth.len()
        )));
    }
    let k = pred.iter().chain(truth).max().map_or(0, |m| m + 1);
    let mut confusion = vec![vec![0i64; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        confusion[p][t] += 1;
    }
    let cost: Vec<Vec<i64>> = confusion.iter().map(|r| r.iter().map(|c| -c).collect()).collect();
    Ok(min_cost_assignment(&cost))
}

/// Fraction of points whose label agrees with the ground truth under the
/// best one-to-one relabeling of predicted clusters.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let mapping = best_matching(pred, truth)?;
    if pred.is_empty() {
        return Ok(1.0);
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| mapping[**p] == **t).count();
    Ok(hits as f64 / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
}

pub fn error_stats(errors: &[f64]) -> Result<ErrorStats> {
    if errors.is_empty() {
        return Err(Error::invalid("error statistics need at least one value"));
    }
    if let Some(bad) = errors.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::invalid(format!("error rate {bad} outside [0, 1]")));
    }
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut max = f64::NEG_INFINITY;
    for (i, &e) in errors.iter().enumerate() {
        let delta = e - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (e - mean);
        max = max.max(e);
    }
    let n = errors.len();
    let std = if n > 1 { (m2 / (n - 1) as f64).sqrt() } else { 0.0 };
    Ok(ErrorStats { max, mean, std })
}

/// One pipeline run on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dataset: String,
    pub method: String,
    pub accuracy: f64,
    pub lambda: Option<f64>,
    pub wall_time_s: f64,
    pub iterations: usize,
}

/// A `(dataset, method)` cell; fields are `None` when the method was not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub method: String,
    pub accuracy: Option<f64>,
    pub error: Option<f64>,
    pub lambda: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub iterations: Option<usize>,
}

impl ReportRow {
    pub fn is_present(&self) -> bool {
        self.accuracy.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    /// Dataset-major grid, one row per `(dataset, method)` pair.
    pub rows: Vec<ReportRow>,
    pub std_convention: String,
}

impl BenchmarkReport {
    pub fn cell(&self, dataset: &str, method: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.dataset == dataset && r.method == method)
    }

    pub fn populated(&self) -> usize {
        self.rows.iter().filter(|r| r.is_present()).count()
    }

    /// Error statistics of one method across all datasets it ran on.
    pub fn method_stats(&self, method: &str) -> Option<ErrorStats> {
        let errors: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method)
            .filter_map(|r| r.error)
            .collect();
        error_stats(&errors).ok()
    }
}

/// Arranges results into a dataset × method grid.
///
/// Several results for the same cell (a parameter grid) collapse to the one
/// with the highest accuracy; ties keep the earliest. Pairs with no result
/// stay in the grid as absent cells.
pub fn benchmark_report(results: &[CellResult]) -> BenchmarkReport {
    let mut datasets: Vec<String> = Vec::new();
    let mut methods: Vec<String> = Vec::new();
    for r in results {
        if !datasets.contains(&r.dataset) {
            datasets.push(r.dataset.clone());
        }
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
    }
    let mut rows = Vec::with_capacity(datasets.len() * methods.len());
    for dataset in &datasets {
        for method in &methods {
            let best = results
                .iter()
                .filter(|r| &r.dataset == dataset && &r.method == method)
                .fold(None::<&CellResult>, |best, r| match best {
                    Some(b) if b.accuracy >= r.accuracy => Some(b),
                    _ => Some(r),
                });
            rows.push(match best {
                Some(b) => ReportRow {
                    dataset: dataset.clone(),
                    method: method.clone(),
                    accuracy: Some(b.accuracy),
                    error: Some(1.0 - b.accuracy),
                    lambda: b.lambda,
                    wall_time_s: Some(b.wall_time_s),
                    iterations: Some(b.iterations),
                },
                None => ReportRow {
                    dataset: dataset.clone(),
                    method: method.clone(),
                    accuracy: None,
                    error: None,
                    lambda: None,
                    wall_time_s: None,
                    iterations: None,
                },
            });
        }
    }
    BenchmarkReport {
        datasets,
        methods,
        rows,
        std_convention: STD_CONVENTION.to_string(),
    }
}
