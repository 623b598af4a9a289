//! Independent reference computations used by unit, integration and
//! acceptance tests. Nothing here calls into the solvers it checks.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn gaussian_vec(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`).
pub fn orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    assert!(rows >= cols);
    gaussian(rows, cols, rng).qr().q()
}

pub fn unit_columns(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for mut c in out.column_iter_mut() {
        let n = c.norm();
        c /= n;
    }
    out
}

pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Nuclear norm of `X·Diag(w)` through the eigenvalues of its Gram matrix.
pub fn trace_lasso_via_gram(x: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
    let mut m = x.clone();
    for (mut c, wi) in m.column_iter_mut().zip(w.iter()) {
        c *= *wi;
    }
    let gram = if m.nrows() <= m.ncols() {
        &m * m.transpose()
    } else {
        m.transpose() * &m
    };
    SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .sum()
}

pub fn trace_lasso_objective(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, lambda: f64) -> f64 {
    0.5 * (y - x * w).norm_squared() + lambda * trace_lasso_via_gram(x, w)
}

/// Value, gradient and Hessian of
/// `½‖y − Xw‖² + λ·tr((X·Diag(w)²·Xᵀ + ε²I)^{1/2})`.
fn smoothed(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    w: &DVector<f64>,
    lambda: f64,
    eps: f64,
) -> (f64, DVector<f64>, DMatrix<f64>) {
    let (d, n) = x.shape();
    let mut s = DMatrix::<f64>::identity(d, d) * (eps * eps);
    for i in 0..n {
        let c = x.column(i);
        s += (w[i] * w[i]) * (c * c.transpose());
    }
    let eig = SymmetricEigen::new(s);
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(eps * eps).sqrt()).collect();
    let z = eig.eigenvectors.transpose() * x; // column i is Qᵀx_i

    let r = x * w - y;
    let value = 0.5 * r.norm_squared() + lambda * roots.iter().sum::<f64>();

    let c: Vec<f64> = (0..n)
        .map(|i| (0..d).map(|a| z[(a, i)] * z[(a, i)] / roots[a]).sum())
        .collect();
    let mut grad = x.tr_mul(&r);
    for i in 0..n {
        grad[i] += lambda * w[i] * c[i];
    }

    // divided differences of t ↦ t^{-1/2} at the eigenvalues
    let g = DMatrix::from_fn(d, d, |a, b| {
        -1.0 / (roots[a] * roots[b] * (roots[a] + roots[b]))
    });
    let mut hess = x.tr_mul(x);
    for i in 0..n {
        hess[(i, i)] += lambda * c[i];
        for k in 0..n {
            let p = DVector::from_fn(d, |a, _| z[(a, i)] * z[(a, k)]);
            hess[(i, k)] += lambda * 2.0 * w[i] * w[k] * p.dot(&(&g * &p));
        }
    }
    (value, grad, hess)
}

/// Minimizes `½‖y − Xw‖² + λ‖X·Diag(w)‖_*` by damped Newton on a smoothed
/// nuclear norm with the smoothing driven towards zero.
/// Returns the minimizer and the exact (unsmoothed) objective there.
pub fn trace_lasso_oracle(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> (DVector<f64>, f64) {
    let n = x.ncols();
    let ridge = x.tr_mul(x) + DMatrix::<f64>::identity(n, n);
    let mut w = ridge.cholesky().unwrap().solve(&x.tr_mul(y));
    let mut eps = 1e-1;
    while eps >= 1e-9 {
        for _ in 0..500 {
            let (f, g, h) = smoothed(x, y, &w, lambda, eps);
            let mut damping = 1e-14 * (1.0 + h.diagonal().amax());
            let step = loop {
                let reg = &h + DMatrix::<f64>::identity(n, n) * damping;
                if let Some(ch) = reg.cholesky() {
                    break -ch.solve(&g);
                }
                damping *= 10.0;
            };
            let slope = g.dot(&step);
            if slope >= 0.0 {
                break;
            }
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-20 {
                let cand = &w + t * &step;
                let (fc, _, _) = smoothed(x, y, &cand, lambda, eps);
                if fc <= f + 1e-4 * t * slope {
                    w = cand;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted || (t * step.amax()) < 1e-15 || -slope < 1e-26 {
                break;
            }
        }
        eps /= 10.0;
    }
    let best = trace_lasso_objective(x, y, &w, lambda);
    (w, best)
}

/// `‖y − Xw‖² + λ‖w‖₁`.
pub fn lasso_objective(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, lambda: f64) -> f64 {
    (y - x * w).norm_squared() + lambda * w.lp_norm(1)
}

/// Cyclic coordinate descent for `‖y − Xw‖² + λ‖w‖₁`.
pub fn lasso_coordinate_descent(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let n = x.ncols();
    let mut w = DVector::<f64>::zeros(n);
    let mut r = y.clone();
    let sq: Vec<f64> = x.column_iter().map(|c| c.norm_squared()).collect();
    for _ in 0..200_000 {
        let mut change = 0.0f64;
        for j in 0..n {
            let c = x.column(j);
            let rho = c.dot(&r) + sq[j] * w[j];
            let t = lambda / 2.0;
            let new = if rho > t {
                (rho - t) / sq[j]
            } else if rho < -t {
                (rho + t) / sq[j]
            } else {
                0.0
            };
            let delta = new - w[j];
            if delta != 0.0 {
                r -= delta * c;
                w[j] = new;
                change = change.max(delta.abs());
            }
        }
        if change < 1e-15 {
            break;
        }
    }
    w
}

/// Largest violation of the Lasso optimality conditions for
/// `‖y − Xw‖² + λ‖w‖₁`.
pub fn lasso_kkt_violation(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, lambda: f64) -> f64 {
    let g = 2.0 * x.tr_mul(&(y - x * w));
    g.iter()
        .zip(w.iter())
        .map(|(gi, wi)| {
            if *wi != 0.0 {
                (gi - lambda * wi.signum()).abs()
            } else {
                (gi.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Best matching accuracy by enumerating every label permutation.
pub fn brute_force_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let k = pred.iter().chain(truth.iter()).max().map_or(0, |m| m + 1);
    let best = permutations(k)
        .iter()
        .map(|perm| pred.iter().zip(truth).filter(|(p, t)| perm[**p] == **t).count())
        .max()
        .unwrap_or(0);
    best as f64 / pred.len() as f64
}

/// Two-pass max / mean / sample standard deviation.
pub fn two_pass_stats(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (max, mean, var.sqrt())
}
