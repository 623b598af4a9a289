//! Reference solvers: least squares regression (ridge), sparse
//! representation (Lasso) and low-rank representation.
//!
//! Objective scalings are fixed:
//! - LSR: `‖y − Xw‖₂² + λ‖w‖₂²`
//! - SSC: `‖y − Xw‖₂² + λ‖w‖₁`
//! - LRR: `‖W‖_* + λ‖E‖_{2,1}` s.t. `X = XW + E`

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::numerics::{self, check_matrix, col_shrink_l21, max_abs, shrink};
use crate::{Error, Result};

fn check_target(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    check_matrix(x)?;
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "dictionary has {} rows but target has length {}",
            x.nrows(),
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("target contains a non-finite entry"));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("lambda must be positive and finite, got {lambda}")))
    }
}

/// Ridge solution `(XᵀX + λI)⁻¹Xᵀy`.
///
/// When `X` is wide the equivalent `Xᵀ(XXᵀ + λI)⁻¹y` is used instead.
pub fn solve_lsr(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    check_target(x, y)?;
    check_lambda(lambda)?;
    let (d, n) = x.shape();
    if d < n {
        let mut gram = x * x.transpose();
        for i in 0..d {
            gram[(i, i)] += lambda;
        }
        let z = gram.cholesky().ok_or(Error::Singular)?.solve(y);
        Ok(x.tr_mul(&z))
    } else {
        let mut gram = x.tr_mul(x);
        for i in 0..n {
            gram[(i, i)] += lambda;
        }
        Ok(gram.cholesky().ok_or(Error::Singular)?.solve(&x.tr_mul(y)))
    }
}

/// `‖y − Xw‖₂² + λ‖w‖₁`.
pub fn lasso_objective(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, lambda: f64) -> f64 {
    (y - x * w).norm_squared() + lambda * w.lp_norm(1)
}

#[derive(Debug, Clone)]
pub struct SscResult {
    pub w: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    /// Objective after every iteration (nonincreasing).
    pub history: Vec<f64>,
}

/// Lasso by accelerated proximal gradient with function-value restart.
///
/// Step size is `1/(2σ_max(X)²)`. Whenever the accelerated step would
/// increase the objective, momentum is reset and a plain proximal step is
/// taken from the current iterate instead, so the objective never rises.
/// Stops once the per-iteration decrease is `≤ tol`.
pub fn solve_ssc(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SscResult> {
    check_target(x, y)?;
    check_lambda(lambda)?;
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::invalid(format!("tolerance must be >= 0, got {tol}")));
    }
    let n = x.ncols();
    let sigma_max = numerics::svd(x)?.singular_values[0];
    let lipschitz = 2.0 * sigma_max * sigma_max;
    let mut w = DVector::<f64>::zeros(n);
    let mut f = lasso_objective(x, y, &w, lambda);
    let mut history = Vec::new();
    if lipschitz == 0.0 {
        return Ok(SscResult {
            w,
            iterations: 0,
            converged: true,
            objective: f,
            history,
        });
    }
    let step = 1.0 / lipschitz;
    let xty = x.tr_mul(y);
    let prox_step = |from: &DVector<f64>| -> DVector<f64> {
        let grad = 2.0 * (x.tr_mul(&(x * from)) - &xty);
        (from - step * grad).map(|v| shrink(v, lambda * step))
    };

    let mut z = w.clone();
    let mut t = 1.0f64;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut cand = prox_step(&z);
        let mut fc = lasso_objective(x, y, &cand, lambda);
        if fc > f {
            t = 1.0;
            cand = prox_step(&w);
            fc = lasso_objective(x, y, &cand, lambda);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &cand + ((t - 1.0) / t_next) * (&cand - &w);
        let decrease = f - fc;
        w = cand;
        f = fc;
        t = t_next;
        history.push(f);
        if decrease <= tol {
            converged = true;
            break;
        }
    }
    Ok(SscResult {
        w,
        iterations,
        converged,
        objective: f,
        history,
    })
}

/// Parameters of the LRR inexact augmented Lagrangian iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrrConfig {
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub mu0: f64,
    pub rho: f64,
    pub mu_max: f64,
}

impl Default for LrrConfig {
    fn default() -> Self {
        LrrConfig {
            lambda: 0.1,
            tol: 1e-8,
            max_iter: 2000,
            mu0: 0.1,
            rho: 1.1,
            mu_max: 1e10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LrrResult {
    /// `n × n` representation.
    pub w: DMatrix<f64>,
    /// `d × n` column-sparse noise.
    pub e: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `min ‖W‖_* + λ‖E‖_{2,1}` s.t. `X = XW + E`, with default penalty schedule.
pub fn solve_lrr(x: &DMatrix<f64>, lambda: f64, tol: f64, max_iter: usize) -> Result<LrrResult> {
    solve_lrr_with(
        x,
        &LrrConfig {
            lambda,
            tol,
            max_iter,
            ..LrrConfig::default()
        },
    )
}

/// Inexact ALM on the split `J = W`:
///
/// - `J ← svt(W + Y₂/μ, 1/μ)`
/// - `W ← (I + XᵀX)⁻¹(Xᵀ(X − E) + J + (XᵀY₁ − Y₂)/μ)`
/// - `E ← col_shrink(X − XW + Y₁/μ, λ/μ)`
/// - `Y₁ += μ(X − XW − E)`, `Y₂ += μ(W − J)`, `μ ← min(ρμ, μ_max)`
pub fn solve_lrr_with(x: &DMatrix<f64>, config: &LrrConfig) -> Result<LrrResult> {
    check_matrix(x)?;
    check_lambda(config.lambda)?;
    if !(config.mu0 > 0.0 && config.rho > 1.0 && config.mu_max >= config.mu0 && config.tol > 0.0) {
        return Err(Error::invalid(format!("invalid LRR config {config:?}")));
    }
    if max_abs(x) == 0.0 {
        return Err(Error::invalid("LRR requires a nonzero data matrix"));
    }
    let (d, n) = x.shape();
    let xtx = x.tr_mul(x);
    let mut system = xtx.clone();
    for i in 0..n {
        system[(i, i)] += 1.0;
    }
    let chol = system.cholesky().ok_or(Error::Singular)?;

    let mut w = DMatrix::<f64>::zeros(n, n);
    let mut j;
    let mut e = DMatrix::<f64>::zeros(d, n);
    let mut y1 = DMatrix::<f64>::zeros(d, n);
    let mut y2 = DMatrix::<f64>::zeros(n, n);
    let mut mu = config.mu0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iter {
        iterations += 1;
        j = numerics::svt(&(&w + &y2 / mu), 1.0 / mu)?;
        let rhs = &xtx - x.tr_mul(&e) + &j + (x.tr_mul(&y1) - &y2) / mu;
        w = chol.solve(&rhs);
        let xw = x * &w;
        e = col_shrink_l21(&(x - &xw + &y1 / mu), config.lambda / mu);

        let leq1 = x - &xw - &e;
        let leq2 = &w - &j;
        let stop = max_abs(&leq1).max(max_abs(&leq2));
        if stop < config.tol {
            converged = true;
            break;
        }
        y1 += mu * leq1;
        y2 += mu * leq2;
        mu = (config.rho * mu).min(config.mu_max);
    }
    Ok(LrrResult {
        w,
        e,
        iterations,
        converged,
    })
}
