//! The segmentation pipeline: per-point representation coefficients,
//! symmetric affinity, and normalized spectral clustering.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, LrrConfig};
use crate::numerics::{self, normalize_columns};
use crate::trace_lasso::{AdmConfig, TraceLassoSolver};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Trace Lasso regression.
    Cass,
    /// Lasso regression.
    Ssc,
    /// Low-rank representation (whole matrix).
    Lrr,
    /// Ridge regression.
    Lsr,
    /// Exponential kernel on the nearest neighbours.
    Knn,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Cass, Method::Ssc, Method::Lrr, Method::Lsr, Method::Knn];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cass => "cass",
            Method::Ssc => "ssc",
            Method::Lrr => "lrr",
            Method::Lsr => "lsr",
            Method::Knn => "knn",
        }
    }

    /// Whether the method has a regularization weight.
    pub fn uses_lambda(self) -> bool {
        self != Method::Knn
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?} (expected cass, ssc, lrr, lsr or knn)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    pub method: Method,
    /// Number of clusters.
    pub k: usize,
    /// Regularization weight shared by every point.
    pub lambda: f64,
    /// ADM schedule for `cass` (its `lambda` field is ignored).
    pub adm: AdmConfig,
    pub ssc_tol: f64,
    pub ssc_max_iter: usize,
    pub lrr_tol: f64,
    pub lrr_max_iter: usize,
    pub knn_neighbors: usize,
    pub kmeans_restarts: usize,
    pub kmeans_max_iter: usize,
    pub seed: u64,
}

impl SegmentationConfig {
    pub fn new(method: Method, k: usize) -> Self {
        SegmentationConfig {
            method,
            k,
            lambda: 0.1,
            adm: AdmConfig::default(),
            ssc_tol: 1e-10,
            ssc_max_iter: 5000,
            lrr_tol: 1e-6,
            lrr_max_iter: 1000,
            knn_neighbors: 6,
            kmeans_restarts: 50,
            kmeans_max_iter: 300,
            seed: 0,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn adm_config(&self) -> AdmConfig {
        AdmConfig {
            lambda: self.lambda,
            ..self.adm
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 || self.k > n {
            return Err(Error::invalid(format!("k must be in 2..={n}, got {}", self.k)));
        }
        if self.method.uses_lambda() && !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.kmeans_restarts == 0 || self.kmeans_max_iter == 0 {
            return Err(Error::invalid("k-means needs at least one restart and one iteration"));
        }
        if self.method == Method::Knn && self.knn_neighbors == 0 {
            return Err(Error::invalid("knn needs at least one neighbour"));
        }
        if self.method == Method::Cass {
            self.adm_config().validate()?;
        }
        Ok(())
    }
}

/// Solver diagnostics for one point (or, for `lrr`, the shared solve).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointDiagnostics {
    pub index: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Final constraint residual where the solver has one, else 0.
    pub residual: f64,
}

/// `n × n` coefficients; column `i` represents point `i`, diagonal is zero.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    pub w: DMatrix<f64>,
    pub diagnostics: Vec<PointDiagnostics>,
}

impl CoefficientMatrix {
    pub fn all_converged(&self) -> bool {
        self.diagnostics.iter().all(|d| d.converged)
    }

    pub fn total_iterations(&self) -> usize {
        self.diagnostics.iter().map(|d| d.iterations).sum()
    }
}

fn leave_one_out(x: &DMatrix<f64>, i: usize) -> DMatrix<f64> {
    x.clone().remove_column(i)
}

fn scatter_skipping(coeffs: &DVector<f64>, skip: usize, n: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n);
    for (j, v) in coeffs.iter().enumerate() {
        out[if j < skip { j } else { j + 1 }] = *v;
    }
    out
}

fn solve_point(x: &DMatrix<f64>, i: usize, config: &SegmentationConfig) -> Result<(DVector<f64>, PointDiagnostics)> {
    let n = x.ncols();
    let dict = leave_one_out(x, i);
    let y = x.column(i).into_owned();
    let (coeffs, iterations, converged, residual) = match config.method {
        Method::Cass => {
            let res = TraceLassoSolver::new(&dict)?.solve(&y, &config.adm_config())?;
            (res.w, res.iterations, res.converged, res.final_residual)
        }
        Method::Ssc => {
            let res = baselines::solve_ssc(&dict, &y, config.lambda, config.ssc_tol, config.ssc_max_iter)?;
            (res.w, res.iterations, res.converged, 0.0)
        }
        Method::Lsr => (baselines::solve_lsr(&dict, &y, config.lambda)?, 0, true, 0.0),
        Method::Lrr | Method::Knn => unreachable!("whole-matrix methods are not solved per point"),
    };
    Ok((
        scatter_skipping(&coeffs, i, n),
        PointDiagnostics {
            index: i,
            iterations,
            converged,
            residual,
        },
    ))
}

fn per_point(x: &DMatrix<f64>, config: &SegmentationConfig) -> Result<CoefficientMatrix> {
    let n = x.ncols();
    let run = |i: usize| {
        solve_point(x, i, config).map_err(|e| Error::PointSolve {
            index: i,
            source: Box::new(e),
        })
    };
    #[cfg(feature = "parallel")]
    let solved: Vec<_> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let solved: Vec<_> = (0..n).map(run).collect::<Result<_>>()?;

    let mut w = DMatrix::zeros(n, n);
    let mut diagnostics = Vec::with_capacity(n);
    for (i, (col, diag)) in solved.into_iter().enumerate() {
        w.set_column(i, &col);
        diagnostics.push(diag);
    }
    Ok(CoefficientMatrix { w, diagnostics })
}

fn knn_weights(x: &DMatrix<f64>, neighbors: usize) -> DMatrix<f64> {
    let n = x.ncols();
    let mut dist = DMatrix::zeros(n, n);
    let mut all = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (x.column(i) - x.column(j)).norm();
            dist[(i, j)] = d;
            dist[(j, i)] = d;
            all.push(d);
        }
    }
    all.sort_by(f64::total_cmp);
    let sigma = match all.len() {
        0 => 1.0,
        len if len % 2 == 1 => all[len / 2],
        len => 0.5 * (all[len / 2 - 1] + all[len / 2]),
    };
    let sigma = if sigma > 0.0 { sigma } else { 1.0 };
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]).then(a.cmp(&b)));
        for &j in order.iter().take(neighbors) {
            w[(j, i)] = (-dist[(i, j)] / sigma).exp();
        }
    }
    w
}

/// Builds the coefficient matrix for the configured method.
///
/// Columns of `x` are normalized first. Regression methods solve one
/// problem per point against the other `n − 1` points; `lrr` solves the
/// whole-matrix problem once and zeroes the diagonal; `knn` uses
/// `exp(−‖x_i − x_j‖/σ)` on each point's nearest neighbours with `σ` the
/// median pairwise distance.
pub fn coefficient_matrix(x: &DMatrix<f64>, config: &SegmentationConfig) -> Result<CoefficientMatrix> {
    let n = x.ncols();
    if n < config.k + 1 {
        return Err(Error::invalid(format!("need at least k + 1 = {} points, got {n}", config.k + 1)));
    }
    config.validate(n)?;
    let x = normalize_columns(x)?;
    match config.method {
        Method::Cass | Method::Ssc | Method::Lsr => per_point(&x, config),
        Method::Lrr => {
            let res = baselines::solve_lrr_with(
                &x,
                &LrrConfig {
                    lambda: config.lambda,
                    tol: config.lrr_tol,
                    max_iter: config.lrr_max_iter,
                    ..LrrConfig::default()
                },
            )?;
            let mut w = res.w;
            w.fill_diagonal(0.0);
            let diagnostics = (0..n)
                .map(|index| PointDiagnostics {
                    index,
                    iterations: res.iterations,
                    converged: res.converged,
                    residual: 0.0,
                })
                .collect();
            Ok(CoefficientMatrix { w, diagnostics })
        }
        Method::Knn => Ok(CoefficientMatrix {
            w: knn_weights(&x, config.knn_neighbors),
            diagnostics: (0..n)
                .map(|index| PointDiagnostics {
                    index,
                    iterations: 0,
                    converged: true,
                    residual: 0.0,
                })
                .collect(),
        }),
    }
}

/// Symmetric, nonnegative, zero-diagonal similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix(DMatrix<f64>);

impl AffinityMatrix {
    /// Wraps `a` after checking the invariants.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let m = AffinityMatrix(a);
        m.check()?;
        Ok(m)
    }

    pub fn check(&self) -> Result<()> {
        let a = &self.0;
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!("affinity is {}x{}", a.nrows(), a.ncols())));
        }
        for i in 0..a.nrows() {
            if a[(i, i)] != 0.0 {
                return Err(Error::invalid(format!("affinity diagonal entry {i} is nonzero")));
            }
            for j in 0..i {
                if a[(i, j)] != a[(j, i)] {
                    return Err(Error::invalid(format!("affinity not symmetric at ({i}, {j})")));
                }
                if !a[(i, j)].is_finite() || a[(i, j)] < 0.0 {
                    return Err(Error::invalid(format!("affinity entry ({i}, {j}) is {}", a[(i, j)])));
                }
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }
}

/// `(|W| + |Wᵀ|)/2`, with the diagonal forced to zero.
pub fn affinity(w: &CoefficientMatrix) -> AffinityMatrix {
    affinity_from_matrix(&w.w)
}

pub fn affinity_from_matrix(w: &DMatrix<f64>) -> AffinityMatrix {
    let n = w.nrows();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (w[(i, j)].abs() + w[(j, i)].abs());
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    AffinityMatrix(a)
}

/// Row-normalized spectral embedding: the `k` eigenvectors of
/// `I − D^{-1/2}·A·D^{-1/2}` with the smallest eigenvalues, one row per point.
pub fn spectral_embedding(a: &AffinityMatrix, k: usize) -> Result<DMatrix<f64>> {
    a.check()?;
    let m = a.matrix();
    let n = m.nrows();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k must be in 1..={n}, got {k}")));
    }
    if m.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroAffinity);
    }
    let degree: Vec<f64> = m.row_iter().map(|r| r.sum()).collect();
    let isolated = degree.iter().filter(|&&d| d == 0.0).count();
    if isolated > 0 {
        log::warn!("{isolated} point(s) have zero degree in the affinity graph");
    }
    let scale: Vec<f64> = degree.iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
    let mut lap = DMatrix::from_fn(n, n, |i, j| -scale[i] * m[(i, j)] * scale[j]);
    for i in 0..n {
        lap[(i, i)] += 1.0;
    }
    let (_, vectors) = numerics::sym_eigen_ascending(&lap)?;
    let mut emb = vectors.columns(0, k).into_owned();
    for mut row in emb.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    Ok(emb)
}

/// Normalized spectral clustering of an affinity graph into `k` groups.
///
/// Labels are canonical: clusters are numbered by the first point they contain.
pub fn spectral_cluster(a: &AffinityMatrix, k: usize, restarts: usize, seed: u64) -> Result<Vec<usize>> {
    spectral_cluster_with(a, k, restarts, DEFAULT_KMEANS_ITER, seed)
}

pub const DEFAULT_KMEANS_ITER: usize = 300;

pub fn spectral_cluster_with(
    a: &AffinityMatrix,
    k: usize,
    restarts: usize,
    max_iter: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    let emb = spectral_embedding(a, k)?;
    Ok(kmeans(&emb, k, restarts, max_iter, seed))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Relabels so that clusters are numbered in order of first appearance.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<Option<usize>> = Vec::new();
    let mut next = 0;
    labels
        .iter()
        .map(|&l| {
            if map.len() <= l {
                map.resize(l + 1, None);
            }
            *map[l].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

/// Seeded k-means on the rows of `points` with k-means++ seeding.
///
/// Seeding visits points in an order derived from the data alone (the
/// rotation-invariant key `Σ_j ⟨p_i, p_j⟩²`), not from their positions, so
/// permuting the rows permutes the result. The best restart has the lowest
/// inertia; near-ties go to the lexicographically smallest labeling.
pub fn kmeans(points: &DMatrix<f64>, k: usize, restarts: usize, max_iter: usize, seed: u64) -> Vec<usize> {
    let n = points.nrows();
    let rows: Vec<Vec<f64>> = points.row_iter().map(|r| r.iter().copied().collect()).collect();
    let gram = points * points.transpose();
    let key: Vec<f64> = (0..n)
        .map(|i| {
            let mut terms: Vec<f64> = gram.row(i).iter().map(|v| v * v).collect();
            terms.sort_by(f64::total_cmp);
            terms.iter().sum()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then_with(|| {
        rows[a]
            .iter()
            .map(|v| v.abs())
            .sum::<f64>()
            .total_cmp(&rows[b].iter().map(|v| v.abs()).sum::<f64>())
    }));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts.max(1) {
        let centers = seed_plus_plus(&rows, &order, k, &mut rng);
        let (labels, inertia) = lloyd(&rows, &order, centers, max_iter);
        let labels = canonical_labels(&labels);
        let better = match &best {
            None => true,
            Some((b_inertia, b_labels)) => {
                let tie = (inertia - b_inertia).abs() <= 1e-12 * (1.0 + b_inertia.abs());
                if tie {
                    labels < *b_labels
                } else {
                    inertia < *b_inertia
                }
            }
        };
        if better {
            best = Some((inertia, labels));
        }
    }
    best.map(|(_, l)| l).unwrap_or_default()
}

fn seed_plus_plus(rows: &[Vec<f64>], order: &[usize], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let first = order[rng.random_range(0..n)];
    let mut centers = vec![rows[first].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = order.iter().map(|&i| d2[i]).sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = *order.last().expect("nonempty");
            for &i in order {
                acc += d2[i];
                if acc > target && d2[i] > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            order[rng.random_range(0..n)]
        };
        let c = rows[pick].clone();
        for (i, r) in rows.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, &c));
        }
        centers.push(c);
    }
    centers
}

fn lloyd(rows: &[Vec<f64>], order: &[usize], mut centers: Vec<Vec<f64>>, max_iter: usize) -> (Vec<usize>, f64) {
    let n = rows.len();
    let k = centers.len();
    let dim = rows.first().map_or(0, |r| r.len());
    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, r) in rows.iter().enumerate() {
            let (best, _) = centers
                .iter()
                .enumerate()
                .map(|(c, ctr)| (c, sq_dist(r, ctr)))
                .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for &i in order {
            counts[labels[i]] += 1;
            for (s, v) in sums[labels[i]].iter_mut().zip(&rows[i]) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // re-seed an empty cluster at the worst-fitted point
                let far = order
                    .iter()
                    .copied()
                    .max_by(|&a, &b| {
                        sq_dist(&rows[a], &centers[labels[a]]).total_cmp(&sq_dist(&rows[b], &centers[labels[b]]))
                    })
                    .expect("nonempty");
                centers[c] = rows[far].clone();
                labels[far] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = order.iter().map(|&i| sq_dist(&rows[i], &centers[labels[i]])).sum();
    (labels, inertia)
}

/// Everything produced by one pipeline run.
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub labels: Vec<usize>,
    pub coefficients: CoefficientMatrix,
    pub affinity: AffinityMatrix,
}

/// Coefficient matrix → affinity → spectral clustering.
pub fn segment(x: &DMatrix<f64>, config: &SegmentationConfig) -> Result<Segmentation> {
    let coefficients = coefficient_matrix(x, config)?;
    let affinity = affinity(&coefficients);
    debug_assert!(affinity.check().is_ok());
    let labels = spectral_cluster_with(
        &affinity,
        config.k,
        config.kmeans_restarts,
        config.kmeans_max_iter,
        config.seed,
    )?;
    Ok(Segmentation {
        labels,
        coefficients,
        affinity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synthetic, SyntheticSpec};
    use crate::evaluation::accuracy;
    use crate::oracles;
    use nalgebra::dmatrix;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn method_parsing() {
        assert_eq!("CASS".parse::<Method>().unwrap(), Method::Cass);
        assert_eq!(" lrr ".parse::<Method>().unwrap(), Method::Lrr);
        assert!("pca".parse::<Method>().is_err());
    }

    #[test]
    fn affinity_cases() {
        let zero = affinity_from_matrix(&DMatrix::zeros(3, 3));
        assert!(zero.matrix().iter().all(|&v| v == 0.0));
        let w = dmatrix![0.0, -2.0; 0.0, 0.0];
        let a = affinity_from_matrix(&w);
        assert_eq!(a.matrix(), &dmatrix![0.0, 1.0; 1.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut w = oracles::gaussian(7, 7, &mut rng);
        w.fill_diagonal(0.0);
        assert!(affinity_from_matrix(&w).check().is_ok());
        assert!(AffinityMatrix::new(dmatrix![0.0, 1.0; 2.0, 0.0]).is_err());
        assert!(AffinityMatrix::new(dmatrix![1.0, 0.0; 0.0, 0.0]).is_err());
        assert!(AffinityMatrix::new(dmatrix![0.0, -1.0; -1.0, 0.0]).is_err());
    }

    fn block_affinity(sizes: &[usize], noise: f64, rng: &mut ChaCha8Rng) -> (AffinityMatrix, Vec<usize>) {
        let n: usize = sizes.iter().sum();
        let truth: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let v = if truth[i] == truth[j] {
                    0.5 + rng.random::<f64>()
                } else {
                    noise * rng.random::<f64>()
                };
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        (AffinityMatrix::new(a).unwrap(), truth)
    }

    #[test]
    fn disconnected_blocks_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (a, truth) = block_affinity(&[6, 9], 0.0, &mut rng);
        let labels = spectral_cluster(&a, 2, 10, 0).unwrap();
        assert_eq!(accuracy(&labels, &truth).unwrap(), 1.0);
    }

    #[test]
    fn tiny_off_block_noise_keeps_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (clean, truth) = block_affinity(&[5, 7, 6], 0.0, &mut rng);
        let mut noisy = clean.matrix().clone();
        for i in 0..18 {
            for j in 0..i {
                if truth[i] != truth[j] {
                    let v = 1e-6 * rng.random::<f64>();
                    noisy[(i, j)] = v;
                    noisy[(j, i)] = v;
                }
            }
        }
        let noisy = AffinityMatrix::new(noisy).unwrap();
        let a = spectral_cluster(&clean, 3, 10, 4).unwrap();
        let b = spectral_cluster(&noisy, 3, 10, 4).unwrap();
        assert_eq!(accuracy(&a, &truth).unwrap(), 1.0);
        assert_eq!(accuracy(&b, &a).unwrap(), 1.0);
    }

    #[test]
    fn four_points_two_pairs() {
        let a = AffinityMatrix::new(dmatrix![
            0.0, 1.0, 0.01, 0.0;
            1.0, 0.0, 0.0, 0.01;
            0.01, 0.0, 0.0, 1.0;
            0.0, 0.01, 1.0, 0.0
        ])
        .unwrap();
        assert_eq!(spectral_cluster(&a, 2, 10, 0).unwrap(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn k_equals_n_gives_distinct_labels() {
        let n = 6;
        let a = AffinityMatrix::new(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1e-3 })).unwrap();
        let mut labels = spectral_cluster(&a, n, 5, 0).unwrap();
        labels.sort_unstable();
        assert_eq!(labels, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn zero_affinity_is_an_error() {
        let a = AffinityMatrix::new(DMatrix::zeros(4, 4)).unwrap();
        assert!(matches!(spectral_cluster(&a, 2, 5, 0), Err(Error::ZeroAffinity)));
        let ok = AffinityMatrix::new(dmatrix![0.0, 1.0; 1.0, 0.0]).unwrap();
        assert!(spectral_cluster(&ok, 1, 5, 0).is_err());
    }

    #[test]
    fn isolated_node_is_tolerated() {
        let a = AffinityMatrix::new(dmatrix![
            0.0, 1.0, 0.0, 0.0, 0.0;
            1.0, 0.0, 0.0, 0.0, 0.0;
            0.0, 0.0, 0.0, 1.0, 0.0;
            0.0, 0.0, 1.0, 0.0, 0.0;
            0.0, 0.0, 0.0, 0.0, 0.0
        ])
        .unwrap();
        let labels = spectral_cluster(&a, 3, 10, 0).unwrap();
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[2], labels[3]);
        assert!(labels.iter().all(|&l| l < 3));
    }

    #[test]
    fn orthonormal_points_have_no_representation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = oracles::orthonormal(5, 3, &mut rng);
        let cfg = SegmentationConfig::new(Method::Cass, 2).with_lambda(1e-3);
        let w = coefficient_matrix(&x, &cfg).unwrap();
        for i in 0..3 {
            assert_eq!(w.w[(i, i)], 0.0);
            let dict = x.clone().remove_column(i);
            let (reference, _) = oracles::trace_lasso_oracle(&dict, &x.column(i).into_owned(), 1e-3);
            let got = w.w.column(i).iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect::<Vec<_>>();
            for (g, r) in got.iter().zip(reference.iter()) {
                assert!((g - r).abs() < 1e-6);
            }
        }
        assert!(w.w.amax() < 1e-6);
    }

    #[test]
    fn duplicated_pair_dominates() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut x = oracles::unit_columns(&oracles::gaussian(8, 10, &mut rng));
        let c = x.column(0).into_owned();
        x.set_column(1, &c);
        let cfg = SegmentationConfig::new(Method::Cass, 2).with_lambda(0.05);
        let w = coefficient_matrix(&x, &cfg).unwrap().w;
        let col0 = w.column(0).abs();
        let col1 = w.column(1).abs();
        assert_eq!(col0.imax(), 1);
        assert_eq!(col1.imax(), 0);
    }

    #[test]
    fn lsr_matrix_stacks_vector_solutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = oracles::unit_columns(&oracles::gaussian(6, 9, &mut rng));
        let cfg = SegmentationConfig::new(Method::Lsr, 3).with_lambda(0.2);
        let w = coefficient_matrix(&x, &cfg).unwrap().w;
        for i in 0..9 {
            let dict = x.clone().remove_column(i);
            let v = baselines::solve_lsr(&dict, &x.column(i).into_owned(), 0.2).unwrap();
            let expected = scatter_skipping(&v, i, 9);
            assert!((w.column(i) - expected).amax() < 1e-12);
        }
    }

    #[test]
    fn too_few_points_rejected() {
        let x = DMatrix::<f64>::identity(3, 3);
        let cfg = SegmentationConfig::new(Method::Lsr, 3);
        assert!(coefficient_matrix(&x, &cfg).is_err());
    }

    #[test]
    fn point_failures_name_the_point() {
        let mut x = DMatrix::<f64>::identity(4, 4);
        x[(0, 1)] = 1.0;
        let mut cfg = SegmentationConfig::new(Method::Cass, 2);
        cfg.adm.eps = 1e-6;
        cfg.ssc_tol = -1.0;
        cfg.method = Method::Ssc;
        let err = coefficient_matrix(&x, &cfg).unwrap_err();
        assert!(matches!(err, Error::PointSolve { index: 0, .. }), "{err}");
    }

    #[test]
    fn knn_graph_is_sparse() {
        let data = gen_synthetic(&SyntheticSpec::uniform(2, 2, 10, 8, 0.0, 3)).unwrap();
        let mut cfg = SegmentationConfig::new(Method::Knn, 2);
        cfg.knn_neighbors = 3;
        let w = coefficient_matrix(&data.x, &cfg).unwrap().w;
        for c in w.column_iter() {
            assert_eq!(c.iter().filter(|&&v| v > 0.0).count(), 3);
        }
    }

    #[test]
    fn clean_independent_subspaces_segment_perfectly() {
        let data = gen_synthetic(&SyntheticSpec::uniform(3, 4, 30, 20, 0.0, 7)).unwrap();
        for (method, lambda) in [(Method::Cass, 0.01), (Method::Lsr, 0.01)] {
            let cfg = SegmentationConfig::new(method, 3).with_lambda(lambda);
            let seg = segment(&data.x, &cfg).unwrap();
            assert_eq!(accuracy(&seg.labels, &data.labels).unwrap(), 1.0, "{method}");
            assert!(seg.affinity.check().is_ok());
        }
    }

    #[test]
    fn input_order_equivariance() {
        let data = gen_synthetic(&SyntheticSpec::uniform(3, 3, 20, 12, 0.05, 11)).unwrap();
        let cfg = SegmentationConfig::new(Method::Lsr, 3).with_lambda(0.1);
        let base = segment(&data.x, &cfg).unwrap().labels;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let perm = oracles::random_permutation(36, &mut rng);
        let cols: Vec<_> = perm.iter().map(|&p| data.x.column(p).into_owned()).collect();
        let permuted = segment(&DMatrix::from_columns(&cols), &cfg).unwrap().labels;
        let expected: Vec<usize> = perm.iter().map(|&p| base[p]).collect();
        assert_eq!(accuracy(&permuted, &expected).unwrap(), 1.0);
    }
}
