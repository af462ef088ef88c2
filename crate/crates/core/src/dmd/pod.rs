use faer::Mat;

use super::PreparedSnapshots;
use crate::error::{DmdError, Result};
use crate::snapshots::{ShiftedPair, SnapshotMatrix};

/// The leading `r` left singular vectors of `Ψ`.
#[derive(Debug, Clone)]
pub struct PodBasis {
    /// `n × r`, orthonormal columns.
    pub vectors: Mat<f64>,
    /// The `r` retained singular values, nonincreasing.
    pub singular_values: Vec<f64>,
    /// Singular values `r+1 ..= min(n, m)`.
    pub discarded: Vec<f64>,
}

impl PodBasis {
    pub fn r(&self) -> usize {
        self.vectors.ncols()
    }
}

/// `(X̃, Ỹ) = (P_rᵀ X, P_rᵀ Y)`.
#[derive(Debug, Clone)]
pub struct ReducedPair {
    pub x: Mat<f64>,
    pub y: Mat<f64>,
}

pub fn pod_basis(psi: &SnapshotMatrix, r: usize) -> Result<PodBasis> {
    let max_r = psi.n().min(psi.m());
    if r == 0 || r > max_r {
        return Err(DmdError::InvalidParameter(format!(
            "POD rank r = {r} outside 1..={max_r}"
        )));
    }
    let prepared = PreparedSnapshots::new(psi)?;
    let (vectors, mut sigma) = prepared.pod_full(r)?;
    let discarded = sigma.split_off(r);
    Ok(PodBasis {
        vectors,
        singular_values: sigma,
        discarded,
    })
}

pub fn project(pair: &ShiftedPair, basis: &PodBasis) -> Result<ReducedPair> {
    if basis.vectors.nrows() != pair.x().nrows() {
        return Err(DmdError::DimensionMismatch(format!(
            "basis has {} rows but snapshots have {}",
            basis.vectors.nrows(),
            pair.x().nrows()
        )));
    }
    let pt = basis.vectors.transpose();
    Ok(ReducedPair {
        x: pt * pair.x(),
        y: pt * pair.y(),
    })
}
