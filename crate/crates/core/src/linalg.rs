//! Thin wrappers over faer used throughout the decompositions.

use faer::linalg::solvers::Svd;
use faer::{c64, Mat, MatRef, Side};

use crate::error::{DmdError, Result};

pub(crate) fn thin_svd(a: MatRef<'_, f64>) -> Result<Svd<f64>> {
    a.thin_svd().map_err(|_| DmdError::NoConvergence("SVD"))
}

pub(crate) fn full_svd(a: MatRef<'_, f64>) -> Result<Svd<f64>> {
    a.svd().map_err(|_| DmdError::NoConvergence("SVD"))
}

/// Largest singular value, as the square root of the largest eigenvalue of
/// the Gram matrix on the shorter side. The relative accuracy of the top
/// singular value is not affected by squaring.
pub(crate) fn spectral_norm(a: MatRef<'_, f64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let gram = if a.nrows() <= a.ncols() {
        a * a.transpose()
    } else {
        a.transpose() * a
    };
    let eigs = gram
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| DmdError::NoConvergence("symmetric eigendecomposition"))?;
    Ok(eigs.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

pub(crate) fn frobenius_norm(a: MatRef<'_, f64>) -> f64 {
    a.norm_l2()
}

/// Result of an SVD-based pseudoinverse.
pub(crate) struct Pinv {
    pub mat: Mat<f64>,
    #[allow(dead_code)]
    pub rank: usize,
    pub sigma_max: f64,
}

/// Pseudoinverse discarding singular values `≤ rtol · σ_max`.
pub(crate) fn pinv(a: MatRef<'_, f64>, rtol: f64) -> Result<Pinv> {
    let (rows, cols) = a.shape();
    let svd = thin_svd(a)?;
    let s = svd.S().column_vector();
    let sigma_max = if s.nrows() > 0 { s[0] } else { 0.0 };
    let cutoff = rtol * sigma_max;
    let rank = (0..s.nrows())
        .take_while(|&i| s[i] > cutoff && s[i] > 0.0)
        .count();
    let u = svd.U();
    let v = svd.V();
    // V_r Σ_r⁻¹ U_rᵀ
    let scaled_v = Mat::from_fn(cols, rank, |i, j| v[(i, j)] / s[j]);
    let mat = if rank == 0 {
        Mat::zeros(cols, rows)
    } else {
        scaled_v * u.subcols(0, rank).transpose()
    };
    Ok(Pinv {
        mat,
        rank,
        sigma_max,
    })
}

/// Eigen-decomposition of a real square matrix. Complex pairs come out as
/// exact conjugates with conjugate eigenvectors.
pub(crate) fn eig_real(a: MatRef<'_, f64>) -> Result<(Vec<c64>, Mat<c64>)> {
    if a.nrows() == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let evd = a
        .eigen()
        .map_err(|_| DmdError::NoConvergence("eigendecomposition"))?;
    let s = evd.S().column_vector();
    let values = (0..s.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// `a · b` for real `a` and complex `b`.
pub(crate) fn real_times_complex(a: MatRef<'_, f64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let re = Mat::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)].re);
    let im = Mat::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)].im);
    let pr = a * &re;
    let pi = a * &im;
    Mat::from_fn(a.nrows(), b.ncols(), |i, j| c64::new(pr[(i, j)], pi[(i, j)]))
}

/// `aᵀ · v` for real `a` and a complex vector `v`.
pub(crate) fn real_transpose_times_vec(a: MatRef<'_, f64>, v: &[c64]) -> Vec<c64> {
    debug_assert_eq!(a.nrows(), v.len());
    let re = Mat::from_fn(v.len(), 1, |i, _| v[i].re);
    let im = Mat::from_fn(v.len(), 1, |i, _| v[i].im);
    let pr = a.transpose() * &re;
    let pi = a.transpose() * &im;
    (0..a.ncols()).map(|i| c64::new(pr[(i, 0)], pi[(i, 0)])).collect()
}

pub(crate) fn cnorm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `aᴴ b`.
pub(crate) fn cdot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
