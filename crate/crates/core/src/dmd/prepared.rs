use std::sync::OnceLock;

use faer::{c64, Mat, MatRef};

use super::{order_eigenvalues, Algorithm, AlgorithmSpec, DmdResult, ReducedOperator};
use crate::error::{DmdError, Result};
use crate::linalg;
use crate::snapshots::SnapshotMatrix;

/// A snapshot matrix factored as `Ψ = Q C` with orthonormal `Q` (`n × ρ`)
/// and coefficients `C` (`ρ × m`), `ρ = min(n, m)`.
///
/// Because `Q` is orthonormal, SVDs, projections and norms computed on `C`
/// coincide with those of `Ψ`. When `n ≤ m` no factorization is done and
/// `Q = I`.
pub struct PreparedSnapshots {
    basis: Option<Mat<f64>>,
    coeffs: Mat<f64>,
    n: usize,
    dt: f64,
    grid: Option<(usize, usize)>,
    pod: OnceLock<PodSvd>,
}

/// Left singular vectors and singular values of `C` (equivalently of `Ψ`,
/// up to the basis `Q`).
pub(crate) struct PodSvd {
    pub u: Mat<f64>,
    pub sigma: Vec<f64>,
}

/// Decomposition output expressed in the coefficient space of a
/// [`PreparedSnapshots`]. Eigenvalues are filtered and ordered, and modes are
/// unit-norm columns of length `ρ`.
#[derive(Debug, Clone)]
pub struct ReducedDmd {
    pub algorithm: Algorithm,
    pub eigenvalues: Vec<c64>,
    pub coeff_modes: Mat<c64>,
    pub operator: ReducedOperator,
    pub r_used: usize,
    pub k_used: Option<usize>,
    pub e_of_k: Option<Vec<(usize, f64)>>,
}

impl PreparedSnapshots {
    pub fn new(psi: &SnapshotMatrix) -> Result<Self> {
        let data = psi.data();
        let (n, m) = data.shape();
        let (basis, coeffs) = if n > m {
            let qr = data.qr();
            (Some(qr.compute_thin_Q()), qr.thin_R().to_owned())
        } else {
            (None, data.to_owned())
        };
        Ok(PreparedSnapshots {
            basis,
            coeffs,
            n,
            dt: psi.dt(),
            grid: psi.grid(),
            pod: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.coeffs.ncols()
    }

    /// Dimension `ρ` of the coefficient space.
    pub fn rho(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub(crate) fn coeffs(&self) -> MatRef<'_, f64> {
        self.coeffs.as_ref()
    }

    pub(crate) fn coeffs_x(&self) -> MatRef<'_, f64> {
        self.coeffs.subcols(0, self.m() - 1)
    }

    pub(crate) fn coeffs_y(&self) -> MatRef<'_, f64> {
        self.coeffs.subcols(1, self.m() - 1)
    }

    pub(crate) fn pod_svd(&self) -> Result<&PodSvd> {
        if let Some(p) = self.pod.get() {
            return Ok(p);
        }
        let svd = linalg::thin_svd(self.coeffs.as_ref())?;
        let s = svd.S().column_vector();
        let pod = PodSvd {
            u: svd.U().to_owned(),
            sigma: (0..s.nrows()).map(|i| s[i]).collect(),
        };
        Ok(self.pod.get_or_init(|| pod))
    }

    /// First `r` POD vectors in coefficient space (`ρ × r`).
    pub(crate) fn pod_vectors(&self, r: usize) -> Result<MatRef<'_, f64>> {
        let pod = self.pod_svd()?;
        if r == 0 || r > pod.u.ncols() {
            return Err(DmdError::InvalidParameter(format!(
                "reduced dimension r = {r} outside 1..={}",
                pod.u.ncols()
            )));
        }
        Ok(pod.u.subcols(0, r))
    }

    /// Full-space POD vectors `Q U_r` and all singular values.
    pub(crate) fn pod_full(&self, r: usize) -> Result<(Mat<f64>, Vec<f64>)> {
        let ur = self.pod_vectors(r)?;
        let vectors = match &self.basis {
            Some(q) => q * ur,
            None => ur.to_owned(),
        };
        Ok((vectors, self.pod_svd()?.sigma.clone()))
    }

    pub fn run(&self, spec: &AlgorithmSpec) -> Result<ReducedDmd> {
        match *spec {
            AlgorithmSpec::Exact { r } => self.exact(r, super::DEFAULT_ZERO_EIG_TOL),
            AlgorithmSpec::Tls { r } => self.tls(r),
            AlgorithmSpec::Ttls(cfg) => self.ttls(&cfg),
            AlgorithmSpec::Subspace { r } => self.subspace(r, super::DEFAULT_ZERO_EIG_TOL),
        }
    }

    /// Lifts coefficient-space vectors to the full space.
    pub fn lift_modes(&self, coeff_modes: MatRef<'_, c64>) -> Mat<c64> {
        match &self.basis {
            Some(q) => linalg::real_times_complex(q.as_ref(), coeff_modes),
            None => coeff_modes.to_owned(),
        }
    }

    /// Expresses a full-space vector in coefficient space (`Qᵀ v`).
    pub fn restrict(&self, v: &[c64]) -> Result<Vec<c64>> {
        if v.len() != self.n {
            return Err(DmdError::DimensionMismatch(format!(
                "vector has length {} but snapshots have {} rows",
                v.len(),
                self.n
            )));
        }
        Ok(match &self.basis {
            Some(q) => linalg::real_transpose_times_vec(q.as_ref(), v),
            None => v.to_vec(),
        })
    }

    pub fn lift(&self, reduced: &ReducedDmd) -> DmdResult {
        DmdResult {
            algorithm: reduced.algorithm,
            eigenvalues: reduced.eigenvalues.clone(),
            modes: self.lift_modes(reduced.coeff_modes.as_ref()),
            operator: reduced.operator.clone(),
            r_used: reduced.r_used,
            k_used: reduced.k_used,
            e_of_k: reduced.e_of_k.clone(),
            dt: self.dt,
            grid: self.grid,
        }
    }
}

/// Shared tail of every algorithm: eigen-decompose `Ã`, drop zero
/// eigenvalues, order, and map eigenvectors to unit-norm coefficient modes.
///
/// `to_coeff` receives the kept eigenvalues and the matching eigenvector
/// columns and returns the unnormalized modes in coefficient space.
pub(crate) struct EigenTail {
    pub eigenvalues: Vec<c64>,
    pub coeff_modes: Mat<c64>,
}

pub(crate) fn eigen_tail(
    a_tilde: MatRef<'_, f64>,
    zero_eig_tol: f64,
    to_coeff: impl FnOnce(&[c64], MatRef<'_, c64>) -> Mat<c64>,
) -> Result<EigenTail> {
    let (vals, vecs) = linalg::eig_real(a_tilde)?;
    let order = order_eigenvalues(&vals, zero_eig_tol);
    let eigenvalues: Vec<c64> = order.iter().map(|&i| vals[i]).collect();
    let selected = Mat::from_fn(vecs.nrows(), order.len(), |i, j| vecs[(i, order[j])]);
    let mut coeff_modes = to_coeff(&eigenvalues, selected.as_ref());
    for j in 0..coeff_modes.ncols() {
        let norm = coeff_modes.col(j).norm_l2();
        if norm > 0.0 {
            coeff_modes.col_mut(j).iter_mut().for_each(|z| *z /= norm);
        }
    }
    Ok(EigenTail {
        eigenvalues,
        coeff_modes,
    })
}
