//! Dense kernels shared by every solver.
//!
//! All routines take `DMatrix<f64>` by reference and return fresh values.
//! SVDs are thin (`r = min(d, n)`) and sorted by decreasing singular value.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::{Error, Result};

/// Relative reconstruction tolerance for `‖M − U·Σ·Vᵀ‖_F`.
pub const FACTORIZATION_TOL: f64 = 1e-8;
/// Tolerance on `UᵀU = I` and `VᵀV = I`.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

const SVD_SWEEPS_PER_DIM: usize = 1000;

/// Rejects matrices with a zero dimension or a non-finite entry.
pub fn check_matrix(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::EmptyMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    for (col, column) in m.column_iter().enumerate() {
        if let Some(row) = column.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(())
}

/// Largest absolute entry, `‖M‖_∞` in the entrywise sense.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Thin singular value decomposition `M = U·Diag(σ)·Vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `d × r`, orthonormal columns.
    pub u: DMatrix<f64>,
    /// Length `r`, nonincreasing and nonnegative.
    pub singular_values: DVector<f64>,
    /// `n × r`, orthonormal columns.
    pub v: DMatrix<f64>,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// Rebuilds `U·Diag(σ)·Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.recombine(|s| s)
    }

    /// Rebuilds `U·Diag(f(σ))·Vᵀ` for a spectral map `f`.
    pub fn recombine(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (mut col, s) in us.column_iter_mut().zip(self.singular_values.iter()) {
            col *= f(*s);
        }
        us * self.v.transpose()
    }
}

pub fn svd(m: &DMatrix<f64>) -> Result<SvdFactors> {
    check_matrix(m)?;
    let (rows, cols) = m.shape();
    let max_iter = SVD_SWEEPS_PER_DIM * rows.max(cols);
    let dec = SVD::try_new(m.clone(), true, true, f64::EPSILON, max_iter)
        .ok_or(Error::SvdFailed { rows, cols })?;
    let (Some(u), Some(v_t)) = (dec.u, dec.v_t) else {
        return Err(Error::SvdFailed { rows, cols });
    };
    Ok(SvdFactors {
        u,
        singular_values: dec.singular_values.map(|s| s.max(0.0)),
        v: v_t.transpose(),
    })
}

/// Sum of singular values.
pub fn nuclear_norm(m: &DMatrix<f64>) -> Result<f64> {
    check_matrix(m)?;
    let (rows, cols) = m.shape();
    let max_iter = SVD_SWEEPS_PER_DIM * rows.max(cols);
    let dec = SVD::try_new(m.clone(), false, false, f64::EPSILON, max_iter)
        .ok_or(Error::SvdFailed { rows, cols })?;
    Ok(dec.singular_values.iter().map(|s| s.max(0.0)).sum())
}

/// Singular value thresholding: the minimizer of `τ‖J‖_* + ½‖J − M‖_F²`.
pub fn svt(m: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::invalid(format!("threshold must be >= 0, got {tau}")));
    }
    let f = svd(m)?;
    Ok(f.recombine(|s| (s - tau).max(0.0)))
}

#[inline]
pub fn shrink(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Elementwise `sign(v)·max(|v| − τ, 0)`.
pub fn soft_threshold(v: &DVector<f64>, tau: f64) -> DVector<f64> {
    v.map(|x| shrink(x, tau))
}

/// Proximal operator of `τ‖·‖_{2,1}`: scales each column by `max(0, 1 − τ/‖M_j‖₂)`.
pub fn col_shrink_l21(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm <= tau || norm == 0.0 {
            col.fill(0.0);
        } else {
            col *= 1.0 - tau / norm;
        }
    }
    out
}

/// `Σ_j ‖M_j‖₂`.
pub fn l21_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.norm()).sum()
}

/// Scales every column to unit ℓ2 norm.
pub fn normalize_columns(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_matrix(x)?;
    let mut out = x.clone();
    for (index, mut col) in out.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::ZeroColumn { index });
        }
        col /= norm;
    }
    Ok(out)
}

/// Principal component model fitted on column samples.
#[derive(Debug, Clone)]
pub struct Pca {
    /// Per-feature mean (length `d`).
    pub mean: DVector<f64>,
    /// `d × p` principal directions, ordered by decreasing variance.
    pub components: DMatrix<f64>,
    /// Sample variance (divisor `n − 1`) along each direction.
    pub variances: DVector<f64>,
}

impl Pca {
    /// Fits the top-`p` directions of mean-centred data.
    ///
    /// The sign of each direction is fixed so that its largest-magnitude
    /// entry is positive.
    pub fn fit(x: &DMatrix<f64>, p: usize) -> Result<Self> {
        check_matrix(x)?;
        let (d, n) = x.shape();
        if p == 0 || p > d.min(n) {
            return Err(Error::invalid(format!(
                "PCA dimension must be in 1..={}, got {p}",
                d.min(n)
            )));
        }
        let mean = x.column_mean();
        let centered = center(x, &mean);
        let f = svd(&centered)?;
        let mut components = f.u.columns(0, p).into_owned();
        for mut col in components.column_iter_mut() {
            let lead = col.iter().copied().fold(0.0f64, |best, v| {
                if v.abs() > best.abs() {
                    v
                } else {
                    best
                }
            });
            if lead < 0.0 {
                col.neg_mut();
            }
        }
        let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
        let variances = DVector::from_iterator(
            p,
            f.singular_values.iter().take(p).map(|s| s * s / denom),
        );
        Ok(Pca {
            mean,
            components,
            variances,
        })
    }

    /// `p × n` coordinates of `x` in the principal basis.
    pub fn transform(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.components.transpose() * center(x, &self.mean)
    }

    /// Maps coordinates back into feature space.
    pub fn inverse_transform(&self, coords: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = &self.components * coords;
        for mut col in out.column_iter_mut() {
            col += &self.mean;
        }
        out
    }
}

fn center(x: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        col -= mean;
    }
    out
}

/// Projects `x` (`d × n`) onto its top-`p` principal directions, giving `p × n`.
pub fn pca_project(x: &DMatrix<f64>, p: usize) -> Result<DMatrix<f64>> {
    let pca = Pca::fit(x, p)?;
    Ok(pca.transform(x))
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted ascending.
pub(crate) fn sym_eigen_ascending(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, SVD_SWEEPS_PER_DIM * n.max(1))
        .ok_or(Error::EigenFailed(n))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok((values, vectors))
}
