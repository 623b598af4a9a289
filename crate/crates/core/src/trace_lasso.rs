//! Trace Lasso regression.
//!
//! The trace Lasso of `w` over a dictionary `X` is `Ω(w) = ‖X·Diag(w)‖_*`.
//! With unit-norm columns it satisfies `‖w‖₂ ≤ Ω(w) ≤ ‖w‖₁`, reaching the
//! ℓ1 end for orthonormal columns and the ℓ2 end for identical ones.
//!
//! [`solve_noisy`] minimizes `½‖y − Xw‖₂² + λ·Ω(w)` with an alternating
//! direction method on the split `J = X·Diag(w)`:
//!
//! 1. `J ← svt(X·Diag(w) − Y/μ, λ/μ)`
//! 2. `w ← (XᵀX + μ·Diag(diag(XᵀX)))⁻¹ (Xᵀy + diag(Xᵀ(Y + μJ)))`
//! 3. `Y ← Y + μ(J − X·Diag(w))`
//! 4. `μ ← min(ρμ, μ_max)`
//! 5. stop once `‖ΔJ‖_∞`, `‖Δw‖_∞` and `‖J − X·Diag(w)‖_∞` are all `≤ ε`.
//!
//! Solvers normalize the dictionary columns first, so returned coefficients
//! always refer to the unit-column dictionary.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::numerics::{self, max_abs, normalize_columns, nuclear_norm};
use crate::{Error, Result};

/// Parameters of the ADM iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmConfig {
    /// Regularization weight λ.
    pub lambda: f64,
    /// Initial penalty μ⁰. Starting small matters: once μ is large the
    /// iterates stop moving whether or not they are optimal.
    pub mu0: f64,
    /// Penalty growth factor ρ.
    pub rho: f64,
    /// Penalty cap.
    pub mu_max: f64,
    /// Convergence tolerance on the three ∞-norm tests.
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for AdmConfig {
    fn default() -> Self {
        AdmConfig {
            lambda: 0.1,
            mu0: 1e-3,
            rho: 1.1,
            mu_max: 1e10,
            eps: 1e-6,
            max_iter: 2000,
        }
    }
}

impl AdmConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        AdmConfig {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda > 0.0
            && self.mu0 > 0.0
            && self.rho > 1.0
            && self.mu_max >= self.mu0
            && self.eps > 0.0
            && self.max_iter >= 1
            && self.lambda.is_finite()
            && self.mu_max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "ADM config requires lambda > 0, mu0 > 0, rho > 1, mu_max >= mu0, eps > 0, max_iter >= 1; got {self:?}"
            )))
        }
    }
}

/// Outcome of [`solve_noisy`].
#[derive(Debug, Clone)]
pub struct AdmResult {
    pub w: DVector<f64>,
    /// Auxiliary variable at exit (`d × n`).
    pub j: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖J − X·Diag(w)‖_∞` at exit.
    pub final_residual: f64,
    /// `½‖y − Xw‖₂² + λ‖X·Diag(w)‖_*` at the returned `w`.
    pub objective: f64,
}

fn scale_columns(x: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for (mut col, wi) in out.column_iter_mut().zip(w.iter()) {
        col *= *wi;
    }
    out
}

fn check_lengths(x: &DMatrix<f64>, w_len: Option<usize>, y_len: Option<usize>) -> Result<()> {
    if let Some(n) = w_len {
        if n != x.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "dictionary has {} columns but coefficient vector has length {n}",
                x.ncols()
            )));
        }
    }
    if let Some(d) = y_len {
        if d != x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "dictionary has {} rows but target has length {d}",
                x.nrows()
            )));
        }
    }
    Ok(())
}

/// `‖X·Diag(w)‖_*`. The interpolation bounds hold when `X` has unit columns;
/// that is the caller's responsibility here.
pub fn trace_lasso_norm(x: &DMatrix<f64>, w: &DVector<f64>) -> Result<f64> {
    check_lengths(x, Some(w.len()), None)?;
    nuclear_norm(&scale_columns(x, w))
}

/// `½‖y − Xw‖₂² + λ‖X·Diag(w)‖_*` evaluated as given (no normalization).
pub fn objective(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, lambda: f64) -> Result<f64> {
    check_lengths(x, Some(w.len()), Some(y.len()))?;
    let r = y - x * w;
    Ok(0.5 * r.norm_squared() + lambda * trace_lasso_norm(x, w)?)
}

/// Precomputed state for repeated solves against one dictionary.
///
/// `XᵀX + μI` is inverted through the thin SVD `X = U·Σ·Vᵀ`:
/// `(XᵀX + μI)⁻¹b = b/μ + V·Diag(1/(σ²+μ) − 1/μ)·Vᵀb`.
#[derive(Debug, Clone)]
pub struct TraceLassoSolver {
    x: DMatrix<f64>,
    v: DMatrix<f64>,
    sigma_sq: DVector<f64>,
}

impl TraceLassoSolver {
    /// Normalizes the columns of `x` and factors it.
    pub fn new(x: &DMatrix<f64>) -> Result<Self> {
        let x = normalize_columns(x)?;
        let f = numerics::svd(&x)?;
        Ok(TraceLassoSolver {
            sigma_sq: f.singular_values.map(|s| s * s),
            v: f.v,
            x,
        })
    }

    /// The unit-column dictionary the coefficients refer to.
    pub fn dictionary(&self) -> &DMatrix<f64> {
        &self.x
    }

    fn apply_inverse(&self, mu: f64, b: &DVector<f64>) -> DVector<f64> {
        let proj = self.v.tr_mul(b);
        let scaled = DVector::from_iterator(
            proj.len(),
            proj.iter()
                .zip(self.sigma_sq.iter())
                .map(|(p, s2)| p * (1.0 / (s2 + mu) - 1.0 / mu)),
        );
        b / mu + &self.v * scaled
    }

    /// Runs the ADM from `w⁰ = 0, J⁰ = 0, Y⁰ = 0`.
    pub fn solve(&self, y: &DVector<f64>, config: &AdmConfig) -> Result<AdmResult> {
        self.solve_from(y, config, None)
    }

    /// Runs the ADM, optionally warm-started from `w0` (with `J⁰ = X·Diag(w0)`).
    pub fn solve_from(
        &self,
        y: &DVector<f64>,
        config: &AdmConfig,
        w0: Option<&DVector<f64>>,
    ) -> Result<AdmResult> {
        config.validate()?;
        check_lengths(&self.x, w0.map(|w| w.len()), Some(y.len()))?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("target contains a non-finite entry"));
        }
        let (d, n) = self.x.shape();
        let x = &self.x;
        let xty = x.tr_mul(y);

        let mut w = w0.cloned().unwrap_or_else(|| DVector::zeros(n));
        let mut j = match w0 {
            Some(w0) => scale_columns(x, w0),
            None => DMatrix::zeros(d, n),
        };
        let mut mult = DMatrix::<f64>::zeros(d, n);
        let mut mu = config.mu0;
        let mut iterations = 0;
        let mut converged = false;
        let mut residual = max_abs(&(&j - scale_columns(x, &w)));

        while iterations < config.max_iter {
            iterations += 1;

            let xw = scale_columns(x, &w);
            let j_next = numerics::svt(&(&xw - &mult / mu), config.lambda / mu)?;

            let mut rhs = xty.clone();
            for i in 0..n {
                let c = x.column(i);
                rhs[i] += c.dot(&mult.column(i)) + mu * c.dot(&j_next.column(i));
            }
            let w_next = self.apply_inverse(mu, &rhs);
            if w_next.iter().any(|v| !v.is_finite()) {
                return Err(Error::Singular);
            }

            let gap = &j_next - scale_columns(x, &w_next);
            mult += mu * &gap;
            mu = (config.rho * mu).min(config.mu_max);

            let dj = max_abs(&(&j_next - &j));
            let dw = (&w_next - &w).amax();
            residual = max_abs(&gap);
            j = j_next;
            w = w_next;

            if dj <= config.eps && dw <= config.eps && residual <= config.eps {
                converged = true;
                break;
            }
        }

        let objective = objective(x, y, &w, config.lambda)?;
        Ok(AdmResult {
            w,
            j,
            iterations,
            converged,
            final_residual: residual,
            objective,
        })
    }

    /// Approximates `min ‖X·Diag(w)‖_* s.t. y = Xw` by λ-continuation.
    ///
    /// Runs `stages` solves with `λ_k = λ·10^{−k}`, each warm-started from
    /// the previous `w`, and requires `‖y − Xw‖₂ ≤ 1e-4·‖y‖₂` at the end.
    pub fn solve_exact(&self, y: &DVector<f64>, config: &AdmConfig, stages: usize) -> Result<DVector<f64>> {
        config.validate()?;
        check_lengths(&self.x, None, Some(y.len()))?;
        if stages == 0 {
            return Err(Error::invalid("continuation needs at least one stage"));
        }
        let y_norm = y.norm();
        if y_norm == 0.0 {
            return Ok(DVector::zeros(self.x.ncols()));
        }
        let mut w: Option<DVector<f64>> = None;
        let mut stage_config = *config;
        for k in 0..stages {
            stage_config.lambda = config.lambda * 10f64.powi(-(k as i32));
            let res = self.solve_from(y, &stage_config, w.as_ref())?;
            w = Some(res.w);
        }
        let w = w.expect("at least one stage ran");
        let residual = (y - &self.x * &w).norm() / y_norm;
        if residual > EXACT_RESIDUAL_TOL {
            return Err(Error::Infeasible {
                residual,
                tolerance: EXACT_RESIDUAL_TOL,
            });
        }
        Ok(w)
    }
}

/// Relative residual accepted by [`solve_exact`].
pub const EXACT_RESIDUAL_TOL: f64 = 1e-4;

/// Default number of continuation stages for [`solve_exact`].
pub const DEFAULT_CONTINUATION_STAGES: usize = 4;

/// Solves `min_w ½‖y − Xw‖₂² + λ‖X·Diag(w)‖_*` (columns of `X` normalized first).
pub fn solve_noisy(x: &DMatrix<f64>, y: &DVector<f64>, config: &AdmConfig) -> Result<AdmResult> {
    TraceLassoSolver::new(x)?.solve(y, config)
}

/// Approximates the equality-constrained problem; see [`TraceLassoSolver::solve_exact`].
pub fn solve_exact(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    config: &AdmConfig,
    continuation_steps: usize,
) -> Result<DVector<f64>> {
    TraceLassoSolver::new(x)?.solve_exact(y, config, continuation_steps)
}

/// One point of a norm-versus-correlation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub correlation: f64,
    pub omega: f64,
    pub l1: f64,
    pub l2: f64,
}

/// Unit columns `√ρ·q₀ + √(1−ρ)·qᵢ` built from the orthonormal columns
/// `q₀, …, qₙ` of `frame`; orthonormal at `ρ = 0`, identical at `ρ = 1`.
pub fn correlated_dictionary(frame: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
    let n = frame.ncols().saturating_sub(1);
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    DMatrix::from_fn(frame.nrows(), n, |r, c| a * frame[(r, 0)] + b * frame[(r, c + 1)])
}

/// `Ω(w)`, `‖w‖₁` and `‖w‖₂` for one seeded Gaussian `w` over
/// [`correlated_dictionary`] at `steps` evenly spaced correlations in `[0, 1]`.
pub fn norm_curve(dim: usize, columns: usize, steps: usize, seed: u64) -> Result<Vec<NormSample>> {
    if columns == 0 || dim < columns + 1 {
        return Err(Error::invalid(format!(
            "need columns >= 1 and dim >= columns + 1, got dim {dim}, columns {columns}"
        )));
    }
    if steps < 2 {
        return Err(Error::invalid("steps must be at least 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = DMatrix::from_fn(dim, columns + 1, |_, _| StandardNormal.sample(&mut rng))
        .qr()
        .q();
    let w = DVector::from_fn(columns, |_, _| StandardNormal.sample(&mut rng));
    (0..steps)
        .map(|i| {
            let correlation = i as f64 / (steps - 1) as f64;
            Ok(NormSample {
                correlation,
                omega: trace_lasso_norm(&correlated_dictionary(&frame, correlation), &w)?,
                l1: w.lp_norm(1),
                l2: w.norm(),
            })
        })
        .collect()
}
