use faer::Mat;

use super::prepared::{eigen_tail, PreparedSnapshots, ReducedDmd};
use super::{Algorithm, ReducedOperator};
use crate::error::{DmdError, Result};
use crate::linalg;

/// Four shifted blocks need at least five snapshots.
const MIN_SNAPSHOTS: usize = 5;

impl PreparedSnapshots {
    /// Subspace DMD on the rank-`r` POD coordinates.
    ///
    /// With reduced snapshots `c₀ … c_{m−1}` and blocks
    /// `Bᵢ = [cᵢ … c_{i+m−4}]`, the past `[B₀; B₁]` and future `[B₂; B₃]` are
    /// stacked, the future is projected onto the row space of the past, and
    /// the leading `r` left singular vectors `U = [U₁; U₂]` of that
    /// projection give `Ã = U₁⁺ U₂`. Modes are `P_r U₁ w`.
    pub fn subspace(&self, r: usize, zero_eig_tol: f64) -> Result<ReducedDmd> {
        let m = self.m();
        if m < MIN_SNAPSHOTS {
            return Err(DmdError::TooFewSnapshots {
                required: MIN_SNAPSHOTS,
                got: m,
            });
        }
        let ur = self.pod_vectors(r)?;
        let c = ur.transpose() * self.coeffs();
        let len = m - 3;
        let stack = |first: usize| {
            Mat::from_fn(2 * r, len, |i, j| {
                if i < r {
                    c[(i, first + j)]
                } else {
                    c[(i - r, first + 1 + j)]
                }
            })
        };
        let past = stack(0);
        let future = stack(2);

        // Row-space projector of the past is V_p V_pᵀ; the left singular
        // vectors of future · V_p V_pᵀ equal those of future · V_p.
        let svd_p = linalg::thin_svd(past.as_ref())?;
        let sp = svd_p.S().column_vector();
        let tol = (2 * r).max(len) as f64 * f64::EPSILON * sp[0];
        let rank_p = (0..sp.nrows()).take_while(|&i| sp[i] > tol).count();
        if rank_p == 0 {
            return Err(DmdError::RankDeficient {
                requested: r,
                achieved: 0,
            });
        }
        let projected = &future * svd_p.V().subcols(0, rank_p);
        let svd_o = linalg::full_svd(projected.as_ref())?;
        let u = svd_o.U();
        let u1 = u.submatrix(0, 0, r, r);
        let u2 = u.submatrix(r, 0, r, r);
        let pinv = linalg::pinv(u1, r as f64 * f64::EPSILON)?;
        let a_tilde = &pinv.mat * u2;

        let lift = ur * u1;
        let tail = eigen_tail(a_tilde.as_ref(), zero_eig_tol, |_, w| {
            linalg::real_times_complex(lift.as_ref(), w)
        })?;

        Ok(ReducedDmd {
            algorithm: Algorithm::Subspace,
            eigenvalues: tail.eigenvalues,
            coeff_modes: tail.coeff_modes,
            operator: ReducedOperator(a_tilde),
            r_used: r,
            k_used: None,
            e_of_k: None,
        })
    }
}
